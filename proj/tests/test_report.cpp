#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "acf/errors.hpp"
#include "acf/report.hpp"

using namespace acf;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(bool(f));
  return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

// fresh scratch directory per test that wants one
struct ScratchDir {
  fs::path path;
  explicit ScratchDir(const char* name) : path(fs::path("report_scratch") / name) {
    fs::remove_all(path);
  }
  ~ScratchDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("config documents parse strictly") {
  const RunConfig defaults = parse_config(R"({"command":"sl"})");
  CHECK(defaults.command == "sl");
  CHECK(defaults.params_json == "{}");
  CHECK(defaults.output_dir == "out");
  CHECK(defaults.seed == 42);
  REQUIRE(defaults.formats.size() == 3);
  CHECK(defaults.formats[0] == "csv");
  CHECK(defaults.formats[1] == "json");
  CHECK(defaults.formats[2] == "svg");

  // params re-serialize canonically: sorted keys, compact separators
  const RunConfig full = parse_config(
      R"({"command":"nu","params":{"n":256,"matrix":[[1,0],[0,4]]},"seed":7,)"
      R"("output_dir":"elsewhere","formats":["json","csv"]})");
  CHECK(full.params_json == R"({"matrix":[[1,0],[0,4]],"n":256})");
  CHECK(full.seed == 7);
  CHECK(full.output_dir == "elsewhere");
  REQUIRE(full.formats.size() == 2);
  CHECK(full.formats[0] == "json");
  CHECK(full.formats[1] == "csv");

  // a seed at the top of the unsigned range survives
  CHECK(parse_config(R"({"command":"sl","seed":18446744073709551615})").seed ==
        18446744073709551615ULL);

  CHECK_THROWS_AS(parse_config("not json"), ConfigError);
  CHECK_THROWS_AS(parse_config("[1,2]"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"params":{}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"command":"fly"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"command":"sl","verbose":true})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"command":"sl","params":{"rho":0.5}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"command":"sl","params":{"rhos":"0.5"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"command":"sl","params":{"rhos":[]}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"command":"sl","params":{"n":2.5}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"command":"nu","params":{"matrix":[[1,0]]}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"command":"sl","seed":-1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"command":"sl","seed":1.5})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"command":"sl","formats":[]})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"command":"sl","formats":["png"]})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"command":"sl","formats":["csv","csv"]})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"command":"sl","output_dir":""})"), ConfigError);

  // parse errors carry a location
  try {
    parse_config("{\n  \"command\": \"sl\",\n}");
    CHECK(false);
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }

  // the witness key set follows the dimension
  CHECK_NOTHROW(parse_config(R"({"command":"witness","params":{"dim":3,"alpha":2.2}})"));
  CHECK_NOTHROW(parse_config(R"({"command":"witness","params":{"phi1":1.3}})"));
  CHECK_THROWS_AS(parse_config(R"({"command":"witness","params":{"alpha":2.2}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"command":"witness","params":{"dim":3,"phi1":1.3}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"command":"witness","params":{"dim":4}})"), ConfigError);
}

TEST_CASE("doubles, tables, and hashes serialize deterministically") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0 / 3.0) == "0.3333333333333333");
  CHECK(format_double(1024.0) == "1024");
  CHECK(format_double(2.5e-10) == "2.5e-10");
  CHECK(format_double(0.0) == "0");
  for (double v : {0.1, -0.0, 1e22, 1e-308, 1.7976931348623157e308, std::numbers::pi,
                   -123456.789012345678, 4e-4}) {
    const std::string s = format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);  // round trips exactly
  }

  NamedTable t{"demo", {"a,b", "c\"d", "e"}, {{1.0, 2.5, -3.0}, {0.1, 0.0, 4e-4}}};
  CHECK(render_csv(t) ==
        "\"a,b\",\"c\"\"d\",e\r\n"
        "1,2.5,-3\r\n"
        "0.1,0,4e-04\r\n");
  NamedTable bad{"demo", {"a"}, {{1.0, 2.0}}};
  CHECK_THROWS_AS(render_csv(bad), std::invalid_argument);
  NamedTable headerless{"demo", {}, {}};
  CHECK_THROWS_AS(render_csv(headerless), std::invalid_argument);

  CHECK(content_hash("") == 14695981039346656037ULL);
  CHECK(content_hash("a") == 12638187200555641996ULL);
  CHECK(content_hash("foobar") == 9625390261332436968ULL);
  CHECK(content_hash("rho,m\r\n") == 6192201786560912192ULL);
}

TEST_CASE("svg rendering stays inside the layout contract") {
  NamedPlot plot{"demo", "Energy & decay", "beta", "overlap", true, true, {}};
  plot.series.push_back({"total", {10, 100, 1000}, {1.0, 0.1, 0.01}});
  plot.series.push_back({"with zero", {10, 100, 1000}, {1.0, 0.0, 0.01}});  // zero dropped on log
  const std::string svg = render_svg(plot);
  CHECK(svg.find("viewBox=\"0 0 1000 600\"") != std::string::npos);
  CHECK(svg.find("xmlns=\"http://www.w3.org/2000/svg\"") != std::string::npos);
  CHECK(svg.find("Energy &amp; decay") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
  CHECK(svg.find(">beta<") != std::string::npos);
  CHECK(svg.find(">overlap<") != std::string::npos);
  CHECK(svg.find(">10<") != std::string::npos);  // decade ticks on the log axis
  CHECK(svg.find(">1000<") != std::string::npos);
  CHECK(svg.find(">total<") != std::string::npos);
  CHECK(svg.rfind("</svg>\n") == svg.size() - 7);
  CHECK(render_svg(plot) == svg);  // renders are pure

  NamedPlot empty{"none", "Empty", "x", "y", false, false, {}};
  CHECK(render_svg(empty).find("</svg>") != std::string::npos);
  NamedPlot single{"one", "One point", "x", "y", false, false, {{"p", {2.0}, {3.0}}}};
  CHECK(render_svg(single).find("circle") != std::string::npos);
  NamedPlot mismatch{"bad", "Bad", "x", "y", false, false, {{"p", {1.0, 2.0}, {3.0}}}};
  CHECK_THROWS_AS(render_svg(mismatch), std::invalid_argument);
}

TEST_CASE("run_command assembles the advertised tables") {
  RunConfig cfg;
  cfg.command = "sl";
  cfg.params_json = R"({"n":256})";
  const ReportBundle sl = run_command(cfg);
  CHECK(sl.command == "sl");
  CHECK(sl.params_json == cfg.params_json);
  REQUIRE(sl.tables.size() == 1);
  CHECK(sl.tables[0].name == "band_spectrum");
  REQUIRE(sl.tables[0].rows.size() == 1);
  const std::vector<double>& row = sl.tables[0].rows[0];
  REQUIRE(row.size() == 6);
  CHECK(row[0] == 0.999);  // default band half width
  CHECK(row[1] == 0.51);
  CHECK(row[2] < 2.0);
  CHECK(row[2] <= row[3]);  // eigenvalue below its Rayleigh bound
  REQUIRE(sl.plots.size() == 1);
  REQUIRE(sl.plots[0].series.size() == 1);
  CHECK(sl.plots[0].series[0].label == "m=0.51");

  cfg.command = "nu";
  cfg.params_json = R"({"n":128})";
  const ReportBundle nu = run_command(cfg);
  REQUIRE(nu.tables.size() == 2);
  const std::vector<double>& part = nu.tables[0].rows.at(0);
  CHECK(part[0] > 1.6);  // partition exponent for the default diag(1, 4) pair
  CHECK(part[0] < 1.8);
  CHECK(part[4] == 4.0);
  CHECK(nu.tables[1].name == "phase_domains");
  REQUIRE(nu.tables[1].rows.size() == 2);
  CHECK(nu.tables[1].rows[0][1] == 0.0);  // both phases live on arcs
  CHECK(nu.tables[1].rows[1][1] == 0.0);
  // complementary arcs cover the circle: half widths sum to pi
  CHECK(std::abs(nu.tables[1].rows[0][3] + nu.tables[1].rows[1][3] - std::numbers::pi) < 1e-9);

  cfg.command = "acf";
  cfg.params_json = R"({"n":129})";
  const ReportBundle acfb = run_command(cfg);
  REQUIRE(acfb.tables.size() == 2);
  CHECK(acfb.tables[0].name == "verdict");
  CHECK(acfb.tables[0].rows.at(0)[0] == 1.0);  // the split pair is monotone
  CHECK(acfb.tables[1].name == "profile");
  CHECK(acfb.tables[1].rows.size() == 9);  // default radius list
  for (const std::vector<double>& r : acfb.tables[1].rows) CHECK(r[3] > 0.0);
  REQUIRE(acfb.plots.size() == 1);

  cfg.command = "witness";
  cfg.params_json = R"({"phi1":1.2566370614359172,"phi2":0.6283185307179586,)"
                    R"("b":0.04,"grid_n":129})";
  const ReportBundle wit = run_command(cfg);
  REQUIRE(wit.tables.size() == 3);
  CHECK(wit.tables[0].name == "parameters");
  CHECK(wit.tables[0].rows.at(0)[5] == doctest::Approx(1.875).epsilon(1e-12));  // degree sum
  CHECK(wit.tables[0].rows.at(0)[7] == 1.0);                                    // disjoint
  CHECK(wit.tables[1].name == "certificate");
  CHECK(wit.tables[1].rows.at(0)[5] == doctest::Approx(3.75).epsilon(1e-12));  // exponent
  CHECK(wit.tables[1].rows.at(0)[6] == 1.0);                                   // monotone
  CHECK(wit.tables[2].name == "profile");

  cfg.command = "simulate";
  cfg.params_json = R"({"n":33,"beta":50})";
  const ReportBundle sim = run_command(cfg);
  REQUIRE(sim.tables.size() == 2);
  REQUIRE(sim.tables[0].header.size() == 8);  // two components
  CHECK(sim.tables[0].rows.at(0)[0] == 50.0);
  CHECK(sim.tables[0].rows.at(0)[4] > 0.0);  // both components survive
  CHECK(sim.tables[0].rows.at(0)[5] > 0.0);
  CHECK(sim.tables[1].name == "fields");
  CHECK(sim.tables[1].rows.size() == 33 * 33);
  REQUIRE(sim.tables[1].header.size() == 4);
  CHECK(sim.tables[1].header[2] == "u_1");

  cfg.command = "sweep";
  cfg.params_json = R"({"n":33,"betas":[10,100],"exponents":[0.5]})";
  const ReportBundle sweep = run_command(cfg);
  REQUIRE(sweep.tables.size() == 1);
  const NamedTable& st = sweep.tables[0];
  REQUIRE(st.rows.size() == 2);
  CHECK(st.header[8] == "holder_0.5");
  const auto col = [&](const char* name) {
    for (std::size_t i = 0; i < st.header.size(); ++i)
      if (st.header[i] == name) return i;
    REQUIRE(false);
    return std::size_t(0);
  };
  CHECK(st.rows[1][col("overlap_total")] < st.rows[0][col("overlap_total")]);
  REQUIRE(sweep.plots.size() == 2);
  CHECK(sweep.plots[0].logx);
  CHECK(sweep.plots[0].logy);
  REQUIRE(sweep.plots[0].series.size() == 2);
  REQUIRE(sweep.plots[1].series.size() == 1);
  CHECK(sweep.plots[1].series[0].label == "alpha=0.5");

  // run_command revalidates params on its own
  cfg.command = "nu";
  cfg.params_json = R"({"bogus":1})";
  CHECK_THROWS_AS(run_command(cfg), ConfigError);
  cfg.params_json = "not json";
  CHECK_THROWS_AS(run_command(cfg), ConfigError);
}

TEST_CASE("bundles emit deterministic files with a trailing manifest") {
  RunConfig cfg;
  cfg.command = "sl";
  cfg.params_json = R"({"n":256,"rhos":[0.5,0.9]})";
  cfg.seed = 9;
  const ReportBundle bundle = run_command(cfg);

  ScratchDir a("emit_a"), b("emit_b");
  const std::vector<std::string> files =
      emit_bundle(bundle, a.path.string(), {"csv", "json", "svg"}, 0.0);
  const std::vector<std::string> files_b =
      emit_bundle(bundle, b.path.string(), {"csv", "json", "svg"}, 0.0);
  REQUIRE(files.size() == 4);
  CHECK(fs::path(files[0]).filename() == "band_spectrum.csv");
  CHECK(fs::path(files[1]).filename() == "report.json");
  CHECK(fs::path(files[2]).filename() == "lambda_vs_rho.svg");
  CHECK(fs::path(files[3]).filename() == "manifest.json");
  // identical config and seed give identical bytes, manifest included
  for (std::size_t i = 0; i < files.size(); ++i) {
    CHECK(fs::exists(files[i]));
    CHECK(slurp(files[i]) == slurp(files_b[i]));
  }

  const nlohmann::json manifest = nlohmann::json::parse(slurp(files[3]));
  CHECK(manifest.at("command") == "sl");
  CHECK(manifest.at("seed") == 9);
  CHECK(manifest.at("version") == "0.1.0");
  CHECK(manifest.at("wall_seconds") == 0.0);
  CHECK(manifest.at("params").at("n") == 256);
  REQUIRE(manifest.at("files").size() == 3);  // everything but the manifest itself
  for (const nlohmann::json& entry : manifest.at("files")) {
    const std::string content = slurp(a.path / entry.at("name").get<std::string>());
    CHECK(entry.at("bytes").get<std::size_t>() == content.size());
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(content_hash(content)));
    CHECK(entry.at("hash").get<std::string>() == hex);
  }

  const nlohmann::json report = nlohmann::json::parse(slurp(files[1]));
  CHECK(report.at("command") == "sl");
  CHECK(report.at("tables").at(0).at("name") == "band_spectrum");
  CHECK(report.at("tables").at(0).at("rows").size() == 2);
  CHECK(report.at("plots").at(0).at("series").at(0).at("x").size() == 2);

  // narrowing the format list narrows the file set; the manifest always lands
  ScratchDir c("emit_csv_only");
  const std::vector<std::string> csv_only = emit_bundle(bundle, c.path.string(), {"csv"}, 0.0);
  REQUIRE(csv_only.size() == 2);
  CHECK(fs::path(csv_only[0]).filename() == "band_spectrum.csv");
  CHECK(fs::path(csv_only[1]).filename() == "manifest.json");
  CHECK(!fs::exists(c.path / "report.json"));
  CHECK(!fs::exists(c.path / "lambda_vs_rho.svg"));

  CHECK_THROWS_AS(emit_bundle(bundle, c.path.string(), {"pdf"}, 0.0), ConfigError);
  CHECK_THROWS_AS(emit_bundle(bundle, c.path.string(), {}, 0.0), ConfigError);
  ReportBundle garbage = bundle;
  garbage.params_json = "not json";
  CHECK_THROWS_AS(emit_bundle(garbage, c.path.string(), {"csv"}, 0.0), ConfigError);

  // failures sweep partial output away: a duplicate table name trips after the
  // first file went down, and the cleanup removes it again
  ReportBundle dup;
  dup.command = "demo";
  dup.tables.push_back({"t", {"x"}, {{1.0}}});
  dup.tables.push_back({"t", {"x"}, {{2.0}}});
  ScratchDir d("emit_dup");
  CHECK_THROWS_AS(emit_bundle(dup, d.path.string(), {"csv"}, 0.0), IoError);
  CHECK(fs::is_empty(d.path));
}
