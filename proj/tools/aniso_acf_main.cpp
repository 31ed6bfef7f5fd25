// Command line front end: resolve the run configuration from flags and an
// optional config document (file path or inline JSON), dispatch, and emit the
// bundle. Exit codes: 0 success, 2 usage, 3 numerical failure, 4 I/O failure.

#include <chrono>
#include <clocale>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "acf/errors.hpp"
#include "acf/report.hpp"

namespace {

std::string read_config_text(const std::string& arg) {
  if (!arg.empty() && arg.front() == '{') return arg;  // inline JSON
  std::ifstream f(arg, std::ios::binary);
  if (!f) throw acf::IoError("cannot read config '" + arg + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  if (f.bad()) throw acf::IoError("cannot read config '" + arg + "'");
  return ss.str();
}

std::vector<std::string> split_formats(const std::string& arg) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : arg) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  if (out.empty()) throw acf::ConfigError("'--formats' must name at least one of csv, json, svg");
  return out;
}

int fail(const char* kind, const std::string& message, int code) {
  const nlohmann::json record{{"error", kind}, {"message", message}};
  std::cerr << record.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  std::setlocale(LC_ALL, "C");
  CLI::App app{"Anisotropic segregation laboratory"};
  std::string command, config_arg, out_dir, formats_arg;
  std::uint64_t seed = 0;
  app.add_option("command", command, "one of: acf, nu, simulate, sl, sweep, witness");
  app.add_option("--config", config_arg, "config file path or inline JSON object");
  app.add_option("--out", out_dir, "output directory (overrides the config)");
  CLI::Option* seed_opt = app.add_option("--seed", seed, "run seed (overrides the config)");
  app.add_option("--formats", formats_arg, "comma list from csv,json,svg (overrides the config)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    acf::RunConfig cfg;
    if (!config_arg.empty()) {
      cfg = acf::parse_config(read_config_text(config_arg));
      if (!command.empty() && command != cfg.command)
        throw acf::ConfigError("command '" + command + "' disagrees with the config's '" +
                               cfg.command + "'");
    } else if (!command.empty()) {
      cfg = acf::parse_config(nlohmann::json{{"command", command}}.dump());
    } else {
      throw acf::ConfigError(
          "pass a command or --config; commands are acf, nu, simulate, sl, sweep, witness");
    }
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (seed_opt->count() > 0) cfg.seed = seed;
    if (!formats_arg.empty()) cfg.formats = split_formats(formats_arg);

    const auto t0 = std::chrono::steady_clock::now();
    const acf::ReportBundle bundle = acf::run_command(cfg);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (const std::string& file : acf::emit_bundle(bundle, cfg.output_dir, cfg.formats, wall))
      std::cout << file << "\n";
    return 0;
  } catch (const acf::ConfigError& e) {
    return fail("config", e.what(), 2);
  } catch (const std::invalid_argument& e) {
    return fail("config", e.what(), 2);
  } catch (const acf::NumericalError& e) {
    return fail("numerical", e.what(), 3);
  } catch (const acf::IoError& e) {
    return fail("io", e.what(), 4);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 3);
  }
}
