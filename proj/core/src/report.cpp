#include "acf/report.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "acf/core.hpp"
#include "acf/errors.hpp"
#include "acf/functional.hpp"
#include "acf/grid.hpp"
#include "acf/sim.hpp"
#include "acf/spectral.hpp"
#include "acf/witness.hpp"

// Config parsing, command dispatch, and report serialization. run_command does
// all the computing; emit_bundle and the render_* helpers only serialize what
// the dispatcher produced.

namespace acf {
namespace {

using nlohmann::json;

constexpr double kPi = 3.14159265358979323846;

#ifndef ACF_VERSION
#define ACF_VERSION "0.1.0"
#endif

[[noreturn]] void bad(const std::string& msg) { throw ConfigError(msg); }

// ---------------------------------------------------------------------------
// config validation

enum class ParamKind { integer, number, text, num_array, matrix };

struct ParamSpec {
  const char* key;
  ParamKind kind;
};

void check_kind(const json& v, ParamKind kind, const std::string& key) {
  switch (kind) {
    case ParamKind::integer:
      if (!v.is_number_integer() && !v.is_number_unsigned())
        bad("'" + key + "' must be an integer, got " + v.type_name());
      return;
    case ParamKind::number:
      if (!v.is_number()) bad("'" + key + "' must be a number, got " + v.type_name());
      return;
    case ParamKind::text:
      if (!v.is_string()) bad("'" + key + "' must be a string, got " + v.type_name());
      return;
    case ParamKind::num_array:
      if (!v.is_array() || v.empty()) bad("'" + key + "' must be a nonempty array of numbers");
      for (const json& e : v)
        if (!e.is_number()) bad("'" + key + "' must hold numbers only, got " + e.type_name());
      return;
    case ParamKind::matrix: {
      if (!v.is_array() || (v.size() != 2 && v.size() != 3))
        bad("'" + key + "' must be a 2x2 or 3x3 array of rows");
      for (const json& row : v) {
        if (!row.is_array() || row.size() != v.size())
          bad("'" + key + "' rows must be arrays matching the matrix dimension");
        for (const json& e : row)
          if (!e.is_number()) bad("'" + key + "' must hold numbers only, got " + e.type_name());
      }
      return;
    }
  }
}

void check_against(const json& params, const std::vector<ParamSpec>& specs,
                   const std::string& command) {
  for (auto it = params.begin(); it != params.end(); ++it) {
    const ParamSpec* found = nullptr;
    for (const ParamSpec& s : specs)
      if (it.key() == s.key) {
        found = &s;
        break;
      }
    if (!found) bad("unknown key '" + it.key() + "' in params for command '" + command + "'");
    check_kind(it.value(), found->kind, it.key());
  }
}

void validate_params(const std::string& command, const json& params) {
  if (!params.is_object()) bad("'params' must be an object");
  if (command == "nu") {
    check_against(params, {{"matrix", ParamKind::matrix}, {"n", ParamKind::integer}}, command);
  } else if (command == "sl") {
    check_against(params,
                  {{"rhos", ParamKind::num_array},
                   {"ms", ParamKind::num_array},
                   {"n", ParamKind::integer}},
                  command);
  } else if (command == "acf") {
    check_against(params,
                  {{"pair", ParamKind::text},
                   {"anisotropy", ParamKind::num_array},
                   {"exponent", ParamKind::number},
                   {"n", ParamKind::integer},
                   {"radii", ParamKind::num_array},
                   {"delta", ParamKind::number}},
                  command);
  } else if (command == "witness") {
    // the accepted keys depend on the dimension
    int dim = 2;
    if (params.contains("dim")) {
      check_kind(params.at("dim"), ParamKind::integer, "dim");
      dim = params.at("dim").get<int>();
      if (dim != 2 && dim != 3) bad("'dim' must be 2 or 3");
    }
    if (dim == 2) {
      check_against(params,
                    {{"dim", ParamKind::integer},
                     {"phi1", ParamKind::number},
                     {"phi2", ParamKind::number},
                     {"b", ParamKind::number},
                     {"grid_n", ParamKind::integer},
                     {"radii", ParamKind::num_array}},
                    command);
    } else {
      check_against(params,
                    {{"dim", ParamKind::integer},
                     {"alpha", ParamKind::number},
                     {"beta", ParamKind::number},
                     {"b", ParamKind::number},
                     {"n", ParamKind::integer},
                     {"grid_n", ParamKind::integer},
                     {"radii", ParamKind::num_array}},
                    command);
    }
  } else if (command == "simulate") {
    check_against(params,
                  {{"system", ParamKind::text}, {"n", ParamKind::integer}, {"beta", ParamKind::number}},
                  command);
  } else if (command == "sweep") {
    check_against(params,
                  {{"system", ParamKind::text},
                   {"n", ParamKind::integer},
                   {"betas", ParamKind::num_array},
                   {"exponents", ParamKind::num_array}},
                  command);
  } else {
    bad("unknown command '" + command + "'; expected one of acf, nu, simulate, sl, sweep, witness");
  }
}

std::pair<int, int> line_col(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

// ---------------------------------------------------------------------------
// typed parameter access with defaults

int int_param(const json& p, const char* key, int def, int min_value) {
  if (!p.contains(key)) return def;
  const long long v = p.at(key).get<long long>();
  if (v < min_value || v > 1000000000)
    bad("'" + std::string(key) + "' must lie in [" + std::to_string(min_value) + ", 1e9]");
  return static_cast<int>(v);
}

double num_param(const json& p, const char* key, double def) {
  if (!p.contains(key)) return def;
  const double v = p.at(key).get<double>();
  if (!std::isfinite(v)) bad("'" + std::string(key) + "' must be finite");
  return v;
}

std::string str_param(const json& p, const char* key, const std::string& def) {
  return p.contains(key) ? p.at(key).get<std::string>() : def;
}

std::vector<double> array_param(const json& p, const char* key, std::vector<double> def) {
  if (!p.contains(key)) return def;
  std::vector<double> out = p.at(key).get<std::vector<double>>();
  for (double v : out)
    if (!std::isfinite(v)) bad("'" + std::string(key) + "' entries must be finite");
  return out;
}

void require_odd(int n, const char* key) {
  if (n % 2 == 0) bad("'" + std::string(key) + "' must be odd so the box carries a center node");
}

std::vector<double> radii_param(const json& p) {
  std::vector<double> r =
      array_param(p, "radii", {0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6});
  if (r.size() < 2) bad("'radii' must list at least two radii");
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(r[i] > 0)) bad("'radii' entries must be positive");
    if (i > 0 && !(r[i] > r[i - 1])) bad("'radii' must increase strictly");
  }
  return r;
}

GridSpec centered_box(int dim, int n) {
  GridSpec g;
  g.dim = dim;
  g.h = 2.0 / (n - 1);
  g.origin = {-1.0, -1.0, dim == 3 ? -1.0 : 0.0};
  g.extents = {n, n, dim == 3 ? n : 1};
  return g;
}

double sup_norm(const SampledField& f) {
  double m = 0;
  for (double v : f.values) m = std::max(m, std::abs(v));
  return m;
}

// ---------------------------------------------------------------------------
// shared table builders

void push_profile(ReportBundle& out, const RadialProfile& prof) {
  NamedTable t{"profile", {"r", "i_aniso", "i_iso", "j"}, {}};
  for (std::size_t i = 0; i < prof.radii.size(); ++i)
    t.rows.push_back({prof.radii[i], prof.i_left[i], prof.i_right[i], prof.j[i]});
  out.tables.push_back(std::move(t));

  NamedPlot plot{"j_vs_r", "Product functional along the radius", "r", "J(r)", false, false, {}};
  plot.series.push_back({"J", prof.radii, prof.j});
  out.plots.push_back(std::move(plot));
}

void push_verdict(ReportBundle& out, const MonotonicityReport& mon, double exponent,
                  double delta) {
  NamedTable t{"verdict",
               {"monotone", "slope_min", "max_j", "violation_budget", "worst_index", "exponent",
                "delta"},
               {}};
  t.rows.push_back({mon.monotone ? 1.0 : 0.0, mon.slope_min, mon.max_j, mon.violation_budget,
                    static_cast<double>(mon.worst_index), exponent, delta});
  out.tables.push_back(std::move(t));
}

// ---------------------------------------------------------------------------
// command handlers

void run_nu(const json& p, ReportBundle& out) {
  SpdMatrix m = spd_diag(2, {1.0, 4.0, 1.0});
  if (p.contains("matrix")) {
    const json& rows = p.at("matrix");
    SmallMat raw;
    raw.dim = static_cast<int>(rows.size());
    for (int i = 0; i < raw.dim; ++i)
      for (int j = 0; j < raw.dim; ++j) raw.at(i, j) = rows[i][j].get<double>();
    try {
      m = SpdMatrix(raw);
    } catch (const std::invalid_argument& e) {
      bad("'matrix' is not symmetric positive definite: " + std::string(e.what()));
    }
  }
  const int dim = m.dim();
  const int n = int_param(p, "n", 512, 64);
  const AnisotropyMatrix a = reduce_pair(m, SpdMatrix(small_identity(dim)));
  const PartitionResult pr = dim == 2 ? nu_2d(a, n) : nu_upper_nd(a);

  NamedTable t{"partition", {"nu", "lambda_aniso", "lambda_iso", "certified", "a_2", "a_3"}, {}};
  t.rows.push_back({pr.nu, pr.lambda_u, pr.lambda_v, pr.certified ? 1.0 : 0.0, a.entry(1),
                    dim == 3 ? a.entry(2) : 0.0});
  out.tables.push_back(std::move(t));

  // kind codes follow the declaration order: arc 0, band 1, cap 2, half sphere 3
  NamedTable d{"phase_domains", {"phase", "kind", "p1", "p2"}, {}};
  d.rows.push_back({1.0, static_cast<double>(static_cast<int>(pr.domain_u.kind)), pr.domain_u.p1,
                    pr.domain_u.p2});
  d.rows.push_back({2.0, static_cast<double>(static_cast<int>(pr.domain_v.kind)), pr.domain_v.p1,
                    pr.domain_v.p2});
  out.tables.push_back(std::move(d));
}

void run_sl(const json& p, ReportBundle& out) {
  const std::vector<double> rhos = array_param(p, "rhos", {0.999});
  const std::vector<double> ms = array_param(p, "ms", {0.51});
  const int n = int_param(p, "n", 4096, 128);
  for (double rho : rhos)
    if (!(rho > 0 && rho < 1)) bad("'rhos' entries must lie in (0, 1)");
  for (double m : ms)
    if (!(m > 0)) bad("'ms' entries must be positive");

  NamedTable t{"band_spectrum", {"rho", "m", "lambda", "rayleigh", "residual", "grid_size"}, {}};
  NamedPlot plot{"lambda_vs_rho", "Separated band eigenvalue", "band half width rho", "lambda",
                 false, false, {}};
  for (double m : ms) {
    PlotSeries s{"m=" + format_double(m), {}, {}};
    for (double rho : rhos) {
      const EigenResult er = sl_band_eigen(rho, m, n);
      t.rows.push_back(
          {rho, m, er.lambda, rayleigh_band(rho, m), er.residual, static_cast<double>(er.grid_size)});
      s.x.push_back(rho);
      s.y.push_back(er.lambda);
    }
    plot.series.push_back(std::move(s));
  }
  out.tables.push_back(std::move(t));
  out.plots.push_back(std::move(plot));
}

void run_acf(const json& p, ReportBundle& out) {
  const std::string pair = str_param(p, "pair", "x1-split");
  if (pair != "x1-split")
    bad("unknown pair fixture '" + pair + "'; the built-in pair is 'x1-split'");
  const std::vector<double> diag = array_param(p, "anisotropy", {1.0, 1.0});
  if (diag.size() != 2 && diag.size() != 3) bad("'anisotropy' must list 2 or 3 diagonal entries");
  for (double d : diag)
    if (!(d > 0)) bad("'anisotropy' entries must be positive");
  const int dim = static_cast<int>(diag.size());
  const double exponent = num_param(p, "exponent", 4.0);
  const int n = int_param(p, "n", dim == 2 ? 257 : 65, 33);
  require_odd(n, "n");

  const GridSpec grid = centered_box(dim, n);
  const std::vector<double> radii = radii_param(p);
  const double delta = num_param(p, "delta", std::max(2 * grid.h, radii.back() / 32.0));
  if (!(delta >= 2 * grid.h))
    bad("'delta' must be at least two grid spacings (" + format_double(2 * grid.h) + ")");
  if (radii.back() + delta > 1.0 - 2 * grid.h)
    bad("largest radius plus the kernel width must stay inside the unit box");

  const AnisotropyMatrix a =
      reduce_pair(spd_diag(dim, {diag[0], diag[1], dim == 3 ? diag[2] : 1.0}),
                  SpdMatrix(small_identity(dim)));
  const SampledField u =
      rasterize(grid, [](const std::array<double, 3>& x) { return std::max(x[0], 0.0); });
  const SampledField v =
      rasterize(grid, [](const std::array<double, 3>& x) { return std::max(-x[0], 0.0); });
  const RadialProfile prof = acf_profile(a, u, v, {0, 0, 0}, exponent, radii, delta);
  const MonotonicityReport mon = monotonicity_report(prof, 0.05);
  push_verdict(out, mon, exponent, delta);
  push_profile(out, prof);
}

void run_witness(const json& p, ReportBundle& out) {
  const int dim = int_param(p, "dim", 2, 2);
  const std::vector<double> radii = radii_param(p);
  if (dim == 2) {
    const double phi1 = num_param(p, "phi1", 0.45 * kPi);
    const double phi2 = num_param(p, "phi2", 0.05 * kPi);
    const double b = num_param(p, "b", 4e-4);
    const int grid_n = int_param(p, "grid_n", 257, 65);
    require_odd(grid_n, "grid_n");
    const Witness2D w = witness_2d(phi1, phi2, b);
    const DisjointnessReport d = cone_disjointness_check(w);
    const WitnessReport rep = witness_report(w, centered_box(2, grid_n), radii);

    NamedTable par{"parameters",
                   {"phi1", "phi2", "b", "alpha1", "alpha2", "degree_sum", "margin", "disjoint"},
                   {}};
    par.rows.push_back({w.phi1, w.phi2, w.b, w.alpha1, w.alpha2, w.alpha1 + w.alpha2, d.margin,
                        d.disjoint ? 1.0 : 0.0});
    out.tables.push_back(std::move(par));

    NamedTable cert{"certificate",
                    {"degree_u", "degree_v", "subharmonic_violation_u", "subharmonic_violation_v",
                     "max_pointwise_product", "exponent", "monotone", "slope_min",
                     "violation_budget"},
                    {}};
    cert.rows.push_back({rep.degree_u, rep.degree_v, rep.subharmonic_violation_u,
                         rep.subharmonic_violation_v, rep.max_pointwise_product,
                         rep.profile.exponent, rep.monotonicity.monotone ? 1.0 : 0.0,
                         rep.monotonicity.slope_min, rep.monotonicity.violation_budget});
    out.tables.push_back(std::move(cert));
    push_profile(out, rep.profile);
  } else {
    const double alpha = num_param(p, "alpha", 0.8 * kPi);
    const double beta = num_param(p, "beta", 0.42 * kPi);
    const double b = num_param(p, "b", 0.005);
    const int n = int_param(p, "n", 4096, 128);
    const int grid_n = int_param(p, "grid_n", 97, 33);
    require_odd(grid_n, "grid_n");
    const Witness3D w = witness_3d(alpha, beta, b, n);
    const DisjointnessReport d = cone_disjointness_check(w);
    const WitnessReport rep = witness_report(w, centered_box(3, grid_n), radii);

    NamedTable par{"parameters", {"alpha", "beta", "b", "mu", "lambda1", "margin", "disjoint"}, {}};
    par.rows.push_back({w.alpha, w.beta, w.b, w.mu, w.lambda1, d.margin, d.disjoint ? 1.0 : 0.0});
    out.tables.push_back(std::move(par));

    NamedTable cert{"certificate",
                    {"degree_u", "degree_v", "subharmonic_violation_u", "subharmonic_violation_v",
                     "max_pointwise_product", "exponent", "monotone", "slope_min",
                     "violation_budget"},
                    {}};
    cert.rows.push_back({rep.degree_u, rep.degree_v, rep.subharmonic_violation_u,
                         rep.subharmonic_violation_v, rep.max_pointwise_product,
                         rep.profile.exponent, rep.monotonicity.monotone ? 1.0 : 0.0,
                         rep.monotonicity.slope_min, rep.monotonicity.violation_budget});
    out.tables.push_back(std::move(cert));
    push_profile(out, rep.profile);
  }
}

SystemSpec system_param(const json& p, bool* lv_out) {
  const std::string system = str_param(p, "system", "lv");
  if (system != "lv" && system != "variational")
    bad("unknown system '" + system + "'; expected 'lv' or 'variational'");
  const bool lv = system == "lv";
  const int n = int_param(p, "n", lv ? 129 : 65, 17);
  *lv_out = lv;
  return lv ? default_lv_spec(n) : default_variational_spec(n);
}

void run_simulate(const json& p, ReportBundle& out) {
  bool lv = true;
  const SystemSpec spec = system_param(p, &lv);
  const double beta = num_param(p, "beta", 100.0);
  if (!(beta > 0)) bad("'beta' must be positive");
  const SimResult res = lv ? solve_lv(spec, beta) : solve_variational(spec, beta);
  const OverlapMetrics ov = overlap_metrics(res.fields, spec.coupling, beta);

  NamedTable sum{"summary", {"beta", "iterations", "residual", "energy"}, {}};
  std::vector<double> row{res.beta, static_cast<double>(res.iterations), res.residual, res.energy};
  for (int i = 0; i < spec.k; ++i) {
    sum.header.push_back("sup_norm_" + std::to_string(i + 1));
    row.push_back(sup_norm(res.fields[i]));
  }
  sum.header.push_back("overlap_total");
  row.push_back(ov.total_overlap);
  sum.header.push_back("overlap_scaled");
  row.push_back(ov.total_scaled);
  sum.rows.push_back(std::move(row));
  out.tables.push_back(std::move(sum));

  const GridSpec& g = spec.grid;
  NamedTable fields{"fields", {"x", "y"}, {}};
  if (g.dim == 3) fields.header.push_back("z");
  for (int i = 0; i < spec.k; ++i) fields.header.push_back("u_" + std::to_string(i + 1));
  for (int kk = 0; kk < g.extents[2]; ++kk)
    for (int j = 0; j < g.extents[1]; ++j)
      for (int i = 0; i < g.extents[0]; ++i) {
        const std::array<double, 3> x = res.fields[0].point(i, j, kk);
        std::vector<double> r{x[0], x[1]};
        if (g.dim == 3) r.push_back(x[2]);
        for (int c = 0; c < spec.k; ++c) r.push_back(res.fields[c].at(i, j, kk));
        fields.rows.push_back(std::move(r));
      }
  out.tables.push_back(std::move(fields));
}

void run_sweep(const json& p, ReportBundle& out, std::uint64_t seed) {
  bool lv = true;
  const SystemSpec spec = system_param(p, &lv);
  const std::vector<double> betas = array_param(p, "betas", {10.0, 100.0, 1000.0, 10000.0});
  for (std::size_t i = 0; i < betas.size(); ++i) {
    if (!(betas[i] > 0)) bad("'betas' entries must be positive");
    if (i > 0 && !(betas[i] > betas[i - 1])) bad("'betas' must increase strictly");
  }
  // default exponents: a quarter of the measured partition minimum for the
  // diag(1, 4) operator against the identity, plus the classical 1/2
  const std::vector<double> exps = array_param(p, "exponents", {0.425870385, 0.5});
  for (double e : exps)
    if (!(e > 0 && e < 1)) bad("'exponents' entries must lie in (0, 1)");

  const BetaSweepReport rep = beta_sweep(spec, betas, exps, seed);

  NamedTable t{"sweep", {"beta", "iterations", "residual", "energy"}, {}};
  for (int i = 0; i < spec.k; ++i) t.header.push_back("sup_norm_" + std::to_string(i + 1));
  for (int i = 0; i < spec.k; ++i) t.header.push_back("dirichlet_" + std::to_string(i + 1));
  for (double e : exps) t.header.push_back("holder_" + format_double(e));
  for (const char* name : {"overlap_total", "overlap_scaled", "fb_median", "fb_mean", "fb_p90",
                           "fb_samples", "quasilinear", "domain_variation", "l2_change"})
    t.header.push_back(name);
  for (const BetaSweepEntry& e : rep.entries) {
    std::vector<double> row{e.beta, static_cast<double>(e.iterations), e.residual, e.energy};
    row.insert(row.end(), e.sup_norms.begin(), e.sup_norms.end());
    row.insert(row.end(), e.dirichlet.begin(), e.dirichlet.end());
    row.insert(row.end(), e.holder.begin(), e.holder.end());
    row.push_back(e.overlap.total_overlap);
    row.push_back(e.overlap.total_scaled);
    row.push_back(e.free_boundary.median);
    row.push_back(e.free_boundary.mean);
    row.push_back(e.free_boundary.p90);
    row.push_back(static_cast<double>(e.free_boundary.samples));
    row.push_back(e.quasilinear);
    row.push_back(e.domain_variation);
    row.push_back(e.l2_change);
    t.rows.push_back(std::move(row));
  }
  out.tables.push_back(std::move(t));

  NamedPlot ov{"overlap_vs_beta", "Overlap decay under segregation", "beta", "overlap", true, true,
               {}};
  PlotSeries total{"total", {}, {}}, scaled{"scaled", {}, {}};
  for (const BetaSweepEntry& e : rep.entries) {
    total.x.push_back(e.beta);
    total.y.push_back(e.overlap.total_overlap);
    scaled.x.push_back(e.beta);
    scaled.y.push_back(e.overlap.total_scaled);
  }
  ov.series.push_back(std::move(total));
  ov.series.push_back(std::move(scaled));
  out.plots.push_back(std::move(ov));

  NamedPlot ho{"holder_vs_beta", "Holder seminorm across the sweep", "beta", "seminorm", true, true,
               {}};
  for (std::size_t j = 0; j < exps.size(); ++j) {
    PlotSeries s{"alpha=" + format_double(exps[j]), {}, {}};
    for (const BetaSweepEntry& e : rep.entries) {
      s.x.push_back(e.beta);
      s.y.push_back(e.holder[j]);
    }
    ho.series.push_back(std::move(s));
  }
  out.plots.push_back(std::move(ho));
}

// ---------------------------------------------------------------------------
// svg helpers

struct Range {
  double lo = 0, hi = 1;
  bool seen = false;
  void grow(double v) {
    if (!seen) {
      lo = hi = v;
      seen = true;
    } else {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
};

double tick_step(double span) {
  const double raw = span / 4.5;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double frac = raw / mag;
  const double f = frac < 1.5 ? 1.0 : frac < 3.5 ? 2.0 : frac < 7.5 ? 5.0 : 10.0;
  return f * mag;
}

std::vector<double> linear_ticks(const Range& r) {
  const double step = tick_step(r.hi - r.lo);
  std::vector<double> t;
  double v = std::ceil(r.lo / step - 1e-9) * step;
  while (v <= r.hi + 1e-9 * step && t.size() < 12) {
    t.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
    v += step;
  }
  return t;
}

// tick positions for a log axis, in log10 space: whole decades when the range
// holds at least two, a 1-2-5 subdivision of the log coordinate otherwise
std::vector<double> log_ticks(const Range& r) {
  std::vector<double> t;
  for (int k = static_cast<int>(std::ceil(r.lo - 1e-9));
       k <= static_cast<int>(std::floor(r.hi + 1e-9)); ++k)
    t.push_back(static_cast<double>(k));
  if (t.size() >= 2) return t;
  return linear_ticks(r);
}

std::string format_fixed(double v, int digits) {
  char buf[48];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, digits);
  return std::string(buf, res.ptr);
}

std::string format_tick(double v) {
  char buf[48];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 4);
  return std::string(buf, res.ptr);
}

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// manifest support

std::string hash_hex(std::uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

std::string render_report_json(const ReportBundle& bundle, const json& params) {
  json j;
  j["command"] = bundle.command;
  j["seed"] = bundle.seed;
  j["params"] = params;
  json tables = json::array();
  for (const NamedTable& t : bundle.tables)
    tables.push_back({{"name", t.name}, {"header", t.header}, {"rows", t.rows}});
  j["tables"] = tables;
  json plots = json::array();
  for (const NamedPlot& p : bundle.plots) {
    json series = json::array();
    for (const PlotSeries& s : p.series)
      series.push_back({{"label", s.label}, {"x", s.x}, {"y", s.y}});
    plots.push_back({{"name", p.name},
                     {"title", p.title},
                     {"xlabel", p.xlabel},
                     {"ylabel", p.ylabel},
                     {"logx", p.logx},
                     {"logy", p.logy},
                     {"series", series}});
  }
  j["plots"] = plots;
  return j.dump(2) + "\n";
}

}  // namespace

// ---------------------------------------------------------------------------

RunConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(json_text, e.byte);
    bad("config is not valid JSON at line " + std::to_string(line) + ", column " +
        std::to_string(col));
  }
  if (!doc.is_object()) bad("config root must be an object");
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string& k = it.key();
    if (k != "command" && k != "params" && k != "output_dir" && k != "seed" && k != "formats")
      bad("unknown key '" + k + "' in config");
  }
  if (!doc.contains("command") || !doc.at("command").is_string())
    bad("config requires a string 'command'");

  RunConfig cfg;
  cfg.command = doc.at("command").get<std::string>();
  const json params = doc.contains("params") ? doc.at("params") : json::object();
  validate_params(cfg.command, params);
  cfg.params_json = params.dump();

  if (doc.contains("output_dir")) {
    if (!doc.at("output_dir").is_string() || doc.at("output_dir").get<std::string>().empty())
      bad("'output_dir' must be a nonempty string");
    cfg.output_dir = doc.at("output_dir").get<std::string>();
  }
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned()) bad("'seed' must be a non-negative integer");
    cfg.seed = doc.at("seed").get<std::uint64_t>();
  }
  if (doc.contains("formats")) {
    const json& f = doc.at("formats");
    if (!f.is_array() || f.empty()) bad("'formats' must be a nonempty array of strings");
    std::vector<std::string> formats;
    for (const json& e : f) {
      if (!e.is_string()) bad("'formats' must hold strings only");
      const std::string name = e.get<std::string>();
      if (name != "csv" && name != "json" && name != "svg")
        bad("unknown format '" + name + "'; expected csv, json, or svg");
      if (std::find(formats.begin(), formats.end(), name) != formats.end())
        bad("duplicate format '" + name + "'");
      formats.push_back(name);
    }
    cfg.formats = std::move(formats);
  }
  return cfg;
}

ReportBundle run_command(const RunConfig& config) {
  ReportBundle out;
  out.command = config.command;
  out.seed = config.seed;
  out.params_json = config.params_json;
  json p;
  try {
    p = json::parse(config.params_json);
  } catch (const json::parse_error&) {
    bad("params_json is not valid JSON");
  }
  validate_params(config.command, p);
  if (config.command == "nu")
    run_nu(p, out);
  else if (config.command == "sl")
    run_sl(p, out);
  else if (config.command == "acf")
    run_acf(p, out);
  else if (config.command == "witness")
    run_witness(p, out);
  else if (config.command == "simulate")
    run_simulate(p, out);
  else
    run_sweep(p, out, config.seed);
  return out;
}

std::vector<std::string> emit_bundle(const ReportBundle& bundle, const std::string& out_dir,
                                     const std::vector<std::string>& formats,
                                     double wall_seconds) {
  bool want_csv = false, want_json = false, want_svg = false;
  for (const std::string& f : formats) {
    if (f == "csv")
      want_csv = true;
    else if (f == "json")
      want_json = true;
    else if (f == "svg")
      want_svg = true;
    else
      bad("unknown format '" + f + "'; expected csv, json, or svg");
  }
  if (!want_csv && !want_json && !want_svg)
    bad("formats must name at least one of csv, json, svg");
  json params;
  try {
    params = json::parse(bundle.params_json);
  } catch (const json::parse_error&) {
    bad("bundle params_json is not valid JSON");
  }

  namespace fs = std::filesystem;
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir + "': " + ec.message());

  std::vector<std::string> written;
  std::vector<fs::path> partial;
  std::set<std::string> names;
  json files = json::array();
  auto emit = [&](const std::string& name, const std::string& content, bool in_manifest) {
    if (!names.insert(name).second) throw IoError("duplicate output file name '" + name + "'");
    const fs::path path = dir / name;
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    f.flush();
    if (!f) throw IoError("cannot write '" + path.string() + "'");
    partial.push_back(path);
    written.push_back(path.string());
    if (in_manifest)
      files.push_back({{"name", name},
                       {"bytes", content.size()},
                       {"hash", hash_hex(content_hash(content))}});
  };

  try {
    if (want_csv)
      for (const NamedTable& t : bundle.tables) emit(t.name + ".csv", render_csv(t), true);
    if (want_json) emit("report.json", render_report_json(bundle, params), true);
    if (want_svg)
      for (const NamedPlot& p : bundle.plots) emit(p.name + ".svg", render_svg(p), true);
    json manifest;
    manifest["command"] = bundle.command;
    manifest["params"] = params;
    manifest["seed"] = bundle.seed;
    manifest["version"] = ACF_VERSION;
    manifest["wall_seconds"] = wall_seconds;
    manifest["files"] = files;
    emit("manifest.json", manifest.dump(2) + "\n", false);
  } catch (...) {
    // leave no partial bundle behind
    for (const fs::path& p : partial) fs::remove(p, ec);
    throw;
  }
  return written;
}

std::uint64_t content_hash(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string render_csv(const NamedTable& table) {
  if (table.header.empty()) throw std::invalid_argument("render_csv: table needs a header");
  auto escape = [](const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') out += "\"\"";
      else out += c;
    }
    out += "\"";
    return out;
  };
  std::string out;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out += ',';
    out += escape(table.header[i]);
  }
  out += "\r\n";
  for (const std::vector<double>& row : table.rows) {
    if (row.size() != table.header.size())
      throw std::invalid_argument("render_csv: row width does not match the header");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_double(row[i]);
    }
    out += "\r\n";
  }
  return out;
}

std::string render_svg(const NamedPlot& plot) {
  constexpr double kL = 80, kR = 968, kT = 60, kB = 540;
  static const char* kPalette[6] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#9467bd", "#ff7f0e", "#17becf"};

  struct Pt {
    double x, y;
  };
  std::vector<std::vector<Pt>> pts(plot.series.size());
  Range rx, ry;
  for (std::size_t i = 0; i < plot.series.size(); ++i) {
    const PlotSeries& s = plot.series[i];
    if (s.x.size() != s.y.size())
      throw std::invalid_argument("render_svg: series '" + s.label + "' has mismatched lengths");
    for (std::size_t j = 0; j < s.x.size(); ++j) {
      double x = s.x[j], y = s.y[j];
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if (plot.logx) {
        if (!(x > 0)) continue;
        x = std::log10(x);
      }
      if (plot.logy) {
        if (!(y > 0)) continue;
        y = std::log10(y);
      }
      rx.grow(x);
      ry.grow(y);
      pts[i].push_back({x, y});
    }
  }
  auto widen = [](Range& r) {
    if (!r.seen) {
      r.lo = 0;
      r.hi = 1;
      return;
    }
    if (r.hi - r.lo < 1e-12 * std::max(1.0, std::abs(r.lo))) {
      const double pad = std::max(0.5, std::abs(r.lo) * 0.05);
      r.lo -= pad;
      r.hi += pad;
    } else {
      const double pad = 0.04 * (r.hi - r.lo);
      r.lo -= pad;
      r.hi += pad;
    }
  };
  widen(rx);
  widen(ry);
  const std::vector<double> tx = plot.logx ? log_ticks(rx) : linear_ticks(rx);
  const std::vector<double> ty = plot.logy ? log_ticks(ry) : linear_ticks(ry);
  auto sx = [&](double v) { return kL + (v - rx.lo) / (rx.hi - rx.lo) * (kR - kL); };
  auto sy = [&](double v) { return kB - (v - ry.lo) / (ry.hi - ry.lo) * (kB - kT); };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"1000\" height=\"600\" "
         "viewBox=\"0 0 1000 600\" font-family=\"Helvetica, Arial, sans-serif\">\n";
  out += "<rect width=\"1000\" height=\"600\" fill=\"#ffffff\"/>\n";
  out += "<text x=\"500\" y=\"34\" font-size=\"20\" text-anchor=\"middle\" fill=\"#222222\">" +
         xml_escape(plot.title) + "</text>\n";
  for (double t : tx) {
    const std::string xp = format_fixed(sx(t), 2);
    out += "<line x1=\"" + xp + "\" y1=\"" + format_fixed(kT, 2) + "\" x2=\"" + xp + "\" y2=\"" +
           format_fixed(kB, 2) + "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out += "<text x=\"" + xp + "\" y=\"" + format_fixed(kB + 24, 2) +
           "\" font-size=\"13\" text-anchor=\"middle\" fill=\"#333333\">" +
           xml_escape(format_tick(plot.logx ? std::pow(10.0, t) : t)) + "</text>\n";
  }
  for (double t : ty) {
    const std::string yp = format_fixed(sy(t), 2);
    out += "<line x1=\"" + format_fixed(kL, 2) + "\" y1=\"" + yp + "\" x2=\"" +
           format_fixed(kR, 2) + "\" y2=\"" + yp +
           "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out += "<text x=\"" + format_fixed(kL - 10, 2) + "\" y=\"" + format_fixed(sy(t) + 4, 2) +
           "\" font-size=\"13\" text-anchor=\"end\" fill=\"#333333\">" +
           xml_escape(format_tick(plot.logy ? std::pow(10.0, t) : t)) + "</text>\n";
  }
  out += "<rect x=\"" + format_fixed(kL, 2) + "\" y=\"" + format_fixed(kT, 2) + "\" width=\"" +
         format_fixed(kR - kL, 2) + "\" height=\"" + format_fixed(kB - kT, 2) +
         "\" fill=\"none\" stroke=\"#444444\"/>\n";
  out += "<text x=\"" + format_fixed((kL + kR) / 2, 2) +
         "\" y=\"578\" font-size=\"15\" text-anchor=\"middle\" fill=\"#222222\">" +
         xml_escape(plot.xlabel) + "</text>\n";
  out += "<text transform=\"translate(24 " + format_fixed((kT + kB) / 2, 2) +
         ") rotate(-90)\" font-size=\"15\" text-anchor=\"middle\" fill=\"#222222\">" +
         xml_escape(plot.ylabel) + "</text>\n";
  for (std::size_t i = 0; i < plot.series.size(); ++i) {
    const char* color = kPalette[i % 6];
    if (pts[i].size() >= 2) {
      out += "<polyline fill=\"none\" stroke=\"";
      out += color;
      out += "\" stroke-width=\"2\" points=\"";
      for (std::size_t j = 0; j < pts[i].size(); ++j) {
        if (j) out += ' ';
        out += format_fixed(sx(pts[i][j].x), 2) + "," + format_fixed(sy(pts[i][j].y), 2);
      }
      out += "\"/>\n";
    }
    for (const Pt& p : pts[i]) {
      out += "<circle cx=\"" + format_fixed(sx(p.x), 2) + "\" cy=\"" + format_fixed(sy(p.y), 2) +
             "\" r=\"3\" fill=\"";
      out += color;
      out += "\"/>\n";
    }
    if (!plot.series[i].label.empty()) {
      const std::string y1 = format_fixed(kT + 22 + 20.0 * static_cast<double>(i), 2);
      out += "<line x1=\"806\" y1=\"" + y1 + "\" x2=\"836\" y2=\"" + y1 + "\" stroke=\"";
      out += color;
      out += "\" stroke-width=\"3\"/>\n";
      out += "<text x=\"842\" y=\"" + format_fixed(kT + 26 + 20.0 * static_cast<double>(i), 2) +
             "\" font-size=\"13\" fill=\"#222222\">" + xml_escape(plot.series[i].label) +
             "</text>\n";
    }
  }
  out += "</svg>\n";
  return out;
}

}  // namespace acf
