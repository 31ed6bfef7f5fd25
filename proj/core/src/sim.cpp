#include "acf/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "acf/errors.hpp"
#include "acf/stencil.hpp"
#include "cell_ops.hpp"

namespace acf {

namespace {

bool on_boundary(const GridSpec& g, int i, int j, int k) {
  if (i == 0 || i == g.extents[0] - 1 || j == 0 || j == g.extents[1] - 1) return true;
  return g.dim == 3 && (k == 0 || k == g.extents[2] - 1);
}

template <class F>
void for_all(const GridSpec& g, F&& fn) {
  const auto& e = g.extents;
  const int kmax = g.dim == 3 ? e[2] : 1;
  size_t p = 0;
  for (int k = 0; k < kmax; ++k)
    for (int j = 0; j < e[1]; ++j)
      for (int i = 0; i < e[0]; ++i, ++p) fn(p, i, j, k);
}

template <class F>
void for_interior(const GridSpec& g, F&& fn) {
  const auto& e = g.extents;
  const int kmin = g.dim == 3 ? 1 : 0, kmax = g.dim == 3 ? e[2] - 1 : 1;
  for (int k = kmin; k < kmax; ++k)
    for (int j = 1; j < e[1] - 1; ++j) {
      size_t p = (static_cast<size_t>(k) * e[1] + j) * e[0] + 1;
      for (int i = 1; i < e[0] - 1; ++i, ++p) fn(p, i, j, k);
    }
}

void validate_spec(const SystemSpec& spec) {
  const GridSpec& g = spec.grid;
  if (spec.k < 2) throw std::invalid_argument("system: need at least two components");
  if (g.dim != 2 && g.dim != 3)
    throw std::invalid_argument("system: grid dimension must be 2 or 3");
  if (!(g.h > 0)) throw std::invalid_argument("system: grid spacing must be positive");
  for (int d = 0; d < g.dim; ++d)
    if (g.extents[d] < 3) throw std::invalid_argument("system: grid too small");
  if (g.dim == 2 && g.extents[2] != 1)
    throw std::invalid_argument("system: planar grid needs a single layer");
  if (static_cast<int>(spec.matrices.size()) != spec.k)
    throw std::invalid_argument("system: one matrix per component required");
  for (const auto& m : spec.matrices)
    if (m.dim() != g.dim) throw std::invalid_argument("system: matrix dimension mismatch");
  if (static_cast<int>(spec.coupling.size()) != spec.k * spec.k)
    throw std::invalid_argument("system: coupling must be k x k");
  for (int i = 0; i < spec.k; ++i) {
    if (spec.coupling_at(i, i) != 0.0)
      throw std::invalid_argument("system: coupling diagonal must vanish");
    for (int j = 0; j < spec.k; ++j)
      if (i != j && !(spec.coupling_at(i, j) > 0))
        throw std::invalid_argument("system: off-diagonal couplings must be positive");
  }
  if (spec.kind == SystemKind::variational) {
    for (int i = 0; i < spec.k; ++i)
      for (int j = 0; j < spec.k; ++j)
        if (std::abs(spec.coupling_at(i, j) - spec.coupling_at(j, i)) > 1e-12)
          throw std::invalid_argument("system: variational coupling must be symmetric");
    if (!spec.traces.empty())
      throw std::invalid_argument("system: variational traces are zero, omit them");
    if (static_cast<int>(spec.reactions.size()) != spec.k)
      throw std::invalid_argument("system: one reaction per component required");
    for (const auto& rs : spec.reactions)
      for (const auto& t : rs.terms)
        if (!(t.upow >= 1)) throw std::invalid_argument("system: reaction powers must be >= 1");
  } else {
    if (static_cast<int>(spec.traces.size()) != spec.k)
      throw std::invalid_argument("system: one boundary trace per component required");
  }
  if (!spec.initial.empty() && static_cast<int>(spec.initial.size()) != spec.k)
    throw std::invalid_argument("system: initial data must cover every component");
}

// Stencil compiled to linear memory offsets for tight solver loops.
struct FastStencil {
  std::vector<std::ptrdiff_t> off;
  std::vector<double> w;
  double center = 0;
};

FastStencil make_fast(const DiscreteOperator& op) {
  FastStencil f;
  const auto& e = op.grid.extents;
  for (size_t t = 0; t < op.offsets.size(); ++t) {
    const auto& o = op.offsets[t];
    const std::ptrdiff_t lin =
        (static_cast<std::ptrdiff_t>(o[2]) * e[1] + o[1]) * e[0] + o[0];
    if (lin == 0) f.center = op.weights[t];
    f.off.push_back(lin);
    f.w.push_back(op.weights[t]);
  }
  return f;
}

double stencil_at(const FastStencil& st, const std::vector<double>& v, size_t p) {
  double acc = 0;
  for (size_t t = 0; t < st.off.size(); ++t) acc += st.w[t] * v[p + st.off[t]];
  return acc;
}

// Conjugate gradients for (a_lap * (-L) + diag(dconst + dvar)) x = b on the
// interior, x and b zero at boundary nodes, Jacobi preconditioned.
int cg_interior(const FastStencil& st, const GridSpec& g, double a_lap,
                const std::vector<double>* dvar, double dconst,
                const std::vector<double>& b, std::vector<double>& x, double rel_tol,
                int cap) {
  const size_t n = b.size();
  std::vector<double> r(n, 0.0), z(n, 0.0), p(n, 0.0), ap(n, 0.0);
  const auto apply_m = [&](const std::vector<double>& v, std::vector<double>& out) {
    for_interior(g, [&](size_t q, int, int, int) {
      out[q] = -a_lap * stencil_at(st, v, q) +
               (dconst + (dvar ? (*dvar)[q] : 0.0)) * v[q];
    });
  };
  const auto precond = [&](const std::vector<double>& rr, std::vector<double>& zz) {
    for_interior(g, [&](size_t q, int, int, int) {
      zz[q] = rr[q] / (-a_lap * st.center + dconst + (dvar ? (*dvar)[q] : 0.0));
    });
  };
  apply_m(x, ap);
  double bnorm = 0, rnorm = 0;
  for_interior(g, [&](size_t q, int, int, int) {
    r[q] = b[q] - ap[q];
    bnorm += b[q] * b[q];
    rnorm += r[q] * r[q];
  });
  const double stop2 = rel_tol * rel_tol * std::max(bnorm, 1e-300);
  if (rnorm <= stop2) return 0;
  precond(r, z);
  p = z;
  double rz = 0;
  for_interior(g, [&](size_t q, int, int, int) { rz += r[q] * z[q]; });
  for (int it = 1; it <= cap; ++it) {
    apply_m(p, ap);
    double pap = 0;
    for_interior(g, [&](size_t q, int, int, int) { pap += p[q] * ap[q]; });
    if (!(pap > 0)) throw NumericalError("cg: operator lost positivity");
    const double alpha = rz / pap;
    rnorm = 0;
    for_interior(g, [&](size_t q, int, int, int) {
      x[q] += alpha * p[q];
      r[q] -= alpha * ap[q];
      rnorm += r[q] * r[q];
    });
    if (rnorm <= stop2) return it;
    precond(r, z);
    double rz_new = 0;
    for_interior(g, [&](size_t q, int, int, int) { rz_new += r[q] * z[q]; });
    const double bk = rz_new / rz;
    rz = rz_new;
    for_interior(g, [&](size_t q, int, int, int) { p[q] = z[q] + bk * p[q]; });
  }
  throw NumericalError("cg: iteration cap exceeded");
}

double reaction_weight(const ReactionSpec& rs, const std::array<double, 3>& x) {
  return rs.wconst + rs.wgrad[0] * x[0] + rs.wgrad[1] * x[1] + rs.wgrad[2] * x[2];
}

double reaction_poly(const ReactionSpec& rs, double v) {
  double s = 0;
  for (const auto& t : rs.terms) s += t.coeff * std::pow(v, t.upow);
  return s;
}

double reaction_poly_anti(const ReactionSpec& rs, double v) {
  double s = 0;
  for (const auto& t : rs.terms) s += t.coeff * std::pow(v, t.upow + 1.0) / (t.upow + 1.0);
  return s;
}

double eval_reaction(const ReactionSpec& rs, const std::array<double, 3>& x, double v) {
  return reaction_weight(rs, x) * reaction_poly(rs, v);
}

double eval_reaction_anti(const ReactionSpec& rs, const std::array<double, 3>& x, double v) {
  return reaction_weight(rs, x) * reaction_poly_anti(rs, v);
}

double unif01(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

std::array<double, 3> node_point(const GridSpec& g, int i, int j, int k) {
  return {g.origin[0] + g.h * i, g.origin[1] + g.h * j, g.origin[2] + g.h * k};
}

// C^2 quintic ramp on [0, 1].
double qstep(double s) { return ((6 * s - 15) * s + 10) * s * s * s; }
double qstep_d(double s) { return ((30 * s - 60) * s + 30) * s * s; }

double plateau(double t, double m) {
  if (t <= m || t >= 1 - m) return 0;
  if (t < 2 * m) return qstep((t - m) / m);
  if (t > 1 - 2 * m) return qstep((1 - m - t) / m);
  return 1;
}

double plateau_d(double t, double m) {
  if (t <= m || t >= 1 - m) return 0;
  if (t < 2 * m) return qstep_d((t - m) / m) / m;
  if (t > 1 - 2 * m) return -qstep_d((1 - m - t) / m) / m;
  return 0;
}

struct Box {
  std::array<double, 3> lo{0, 0, 0};
  std::array<double, 3> len{1, 1, 1};
  int dim = 2;
};

Box grid_box(const GridSpec& g) {
  Box b;
  b.dim = g.dim;
  for (int d = 0; d < g.dim; ++d) {
    b.lo[d] = g.origin[d];
    b.len[d] = g.h * (g.extents[d] - 1);
  }
  return b;
}

void check_margin(const TestFunctionSpec& t, const GridSpec& g) {
  if (!(t.margin > 0 && t.margin < 0.25))
    throw std::invalid_argument("test function margin must lie in (0, 0.25)");
  for (int d = 0; d < g.dim; ++d)
    if (t.margin * (g.extents[d] - 1) < 1.0)
      throw std::invalid_argument("test function support touches the boundary");
}

// Quadratic polynomial times the plateau bump; value and analytic gradient.
double eval_test(const TestFunctionSpec& t, const Box& box, const std::array<double, 3>& x,
                 std::array<double, 3>* grad) {
  const auto& c = t.poly;
  const double X = x[0], Y = x[1], Z = box.dim == 3 ? x[2] : 0.0;
  const double P = c[0] + c[1] * X + c[2] * Y + c[3] * Z + c[4] * X * X + c[5] * Y * Y +
                   c[6] * Z * Z + c[7] * X * Y + c[8] * X * Z + c[9] * Y * Z;
  std::array<double, 3> dP{c[1] + 2 * c[4] * X + c[7] * Y + c[8] * Z,
                           c[2] + 2 * c[5] * Y + c[7] * X + c[9] * Z,
                           c[3] + 2 * c[6] * Z + c[8] * X + c[9] * Y};
  double pl[3] = {1, 1, 1}, pld[3] = {0, 0, 0};
  for (int d = 0; d < box.dim; ++d) {
    const double td = (x[d] - box.lo[d]) / box.len[d];
    pl[d] = plateau(td, t.margin);
    pld[d] = plateau_d(td, t.margin) / box.len[d];
  }
  const double bump = pl[0] * pl[1] * pl[2];
  if (grad) {
    for (int d = 0; d < 3; ++d) (*grad)[d] = 0;
    for (int d = 0; d < box.dim; ++d) {
      double db = pld[d];
      for (int e = 0; e < box.dim; ++e)
        if (e != d) db *= pl[e];
      (*grad)[d] = dP[d] * bump + P * db;
    }
  }
  return P * bump;
}

double max_eigen(const SpdMatrix& m) {
  return jacobi_eigensym(m.m).values[m.dim() - 1];
}

std::vector<SampledField> init_fields(const SystemSpec& spec,
                                      const std::vector<SampledField>* warm,
                                      const std::vector<std::vector<double>>* traces) {
  const GridSpec& g = spec.grid;
  std::vector<SampledField> u;
  if (warm) {
    if (static_cast<int>(warm->size()) != spec.k)
      throw std::invalid_argument("warm start: wrong component count");
    for (const auto& f : *warm)
      if (f.grid.extents != g.extents || f.grid.dim != g.dim)
        throw std::invalid_argument("warm start: grid mismatch");
    u = *warm;
    for (int i = 0; i < spec.k; ++i)
      for_all(g, [&](size_t p, int a, int b, int c) {
        if (on_boundary(g, a, b, c))
          u[i].values[p] = traces ? (*traces)[i][p] : 0.0;
        else if (u[i].values[p] < 0)
          u[i].values[p] = 0;
      });
    return u;
  }
  for (int i = 0; i < spec.k; ++i) {
    SampledField f = make_field(g);
    for_all(g, [&](size_t p, int a, int b, int c) {
      if (on_boundary(g, a, b, c)) {
        f.values[p] = traces ? (*traces)[i][p] : 0.0;
      } else if (!spec.initial.empty()) {
        f.values[p] = std::max(spec.initial[i](f.point(a, b, c)), 0.0);
      }
    });
    u.push_back(std::move(f));
  }
  return u;
}

double scaled_lv_residual(const SystemSpec& spec, double beta,
                          const std::vector<SampledField>& u,
                          const std::vector<FastStencil>& fs) {
  double res = 0;
  for (int i = 0; i < spec.k; ++i) {
    for_interior(spec.grid, [&](size_t q, int, int, int) {
      double c = 0;
      for (int j = 0; j < spec.k; ++j)
        if (j != i) c += spec.coupling_at(i, j) * u[j].values[q];
      c *= beta;
      const double m = -stencil_at(fs[i], u[i].values, q) + c * u[i].values[q];
      res = std::max(res, std::abs(m) / (-fs[i].center + c + 1.0));
    });
  }
  return res;
}

double variational_energy(const SystemSpec& spec, double beta,
                          const std::vector<SampledField>& u,
                          const std::vector<FastStencil>& fs) {
  const double hvol = std::pow(spec.grid.h, spec.grid.dim);
  double e = 0;
  for (int i = 0; i < spec.k; ++i) {
    double grad_form = 0, react = 0;
    for_interior(spec.grid, [&](size_t q, int a, int b, int c) {
      grad_form += u[i].values[q] * (-stencil_at(fs[i], u[i].values, q));
      react += eval_reaction_anti(spec.reactions[i], node_point(spec.grid, a, b, c),
                                  u[i].values[q]);
    });
    e += (0.5 * grad_form - react) * hvol;
  }
  for (int i = 0; i < spec.k; ++i)
    for (int j = i + 1; j < spec.k; ++j) {
      double pair = 0;
      for_interior(spec.grid, [&](size_t q, int, int, int) {
        const double a = u[i].values[q], b = u[j].values[q];
        pair += a * a * b * b;
      });
      e += 0.5 * beta * spec.coupling_at(i, j) * pair * hvol;
    }
  return e;
}

// Projected-stationarity residual: interior equation where a component is
// positive, one-sided multiplier sign where it sits on the constraint.
double variational_residual(const SystemSpec& spec, double beta,
                            const std::vector<SampledField>& u,
                            const std::vector<FastStencil>& fs) {
  double res = 0;
  for (int i = 0; i < spec.k; ++i) {
    for_interior(spec.grid, [&](size_t q, int a, int b, int c) {
      double comp = 0;
      for (int j = 0; j < spec.k; ++j)
        if (j != i) comp += spec.coupling_at(i, j) * u[j].values[q] * u[j].values[q];
      comp *= beta;
      const double ui = u[i].values[q];
      const double f =
          eval_reaction(spec.reactions[i], node_point(spec.grid, a, b, c), ui);
      const double expr = -stencil_at(fs[i], u[i].values, q) - f + ui * comp;
      const double viol = ui > 0 ? std::abs(expr) : std::max(0.0, -expr);
      // amplitude-aware scale: a nearly extinguished component must not pass
      // as stationary just because the stiffness diagonal is large
      res = std::max(res, viol / (1.0 + -fs[i].center * ui + std::abs(f) + ui * comp));
    });
  }
  return res;
}

std::array<double, 3> central_grad(const SampledField& w, int i, int j, int k) {
  const double h = w.grid.h;
  std::array<double, 3> g{(w.at(i + 1, j, k) - w.at(i - 1, j, k)) / (2 * h),
                          (w.at(i, j + 1, k) - w.at(i, j - 1, k)) / (2 * h), 0};
  if (w.grid.dim == 3) g[2] = (w.at(i, j, k + 1) - w.at(i, j, k - 1)) / (2 * h);
  return g;
}

// One-sided gradient magnitude that only differences into nodes of the same
// phase, so the estimate never crosses the interface.
double one_sided_mag(const SampledField& f, const SampledField& w, int i, int j, int k,
                     bool positive_phase) {
  const double h = f.grid.h;
  const auto in_phase = [&](int a, int b, int c) {
    return positive_phase ? w.at(a, b, c) > 0 : w.at(a, b, c) <= 0;
  };
  double g2 = 0;
  for (int d = 0; d < f.grid.dim; ++d) {
    int pi = i + (d == 0), pj = j + (d == 1), pk = k + (d == 2);
    int mi = i - (d == 0), mj = j - (d == 1), mk = k - (d == 2);
    const bool plus = in_phase(pi, pj, pk), minus = in_phase(mi, mj, mk);
    double gd = 0;
    if (plus && minus)
      gd = (f.at(pi, pj, pk) - f.at(mi, mj, mk)) / (2 * h);
    else if (plus)
      gd = (f.at(pi, pj, pk) - f.at(i, j, k)) / h;
    else if (minus)
      gd = (f.at(i, j, k) - f.at(mi, mj, mk)) / h;
    g2 += gd * gd;
  }
  return std::sqrt(g2);
}

}  // namespace

SimResult solve_lv(const SystemSpec& spec, double beta,
                   const std::vector<SampledField>* warm_start, double tol,
                   int max_cycles) {
  validate_spec(spec);
  if (spec.kind != SystemKind::lotka_volterra)
    throw std::invalid_argument("solve_lv: wrong system kind");
  if (!(beta >= 0)) throw std::invalid_argument("solve_lv: beta must be nonnegative");
  const GridSpec& g = spec.grid;
  const int k = spec.k;
  const size_t n = static_cast<size_t>(g.extents[0]) * g.extents[1] *
                   (g.dim == 3 ? g.extents[2] : 1);

  std::vector<std::vector<double>> traces(k, std::vector<double>(n, 0.0));
  double trace_max = 0;
  SampledField probe = make_field(g);
  for (int i = 0; i < k; ++i)
    for_all(g, [&](size_t p, int a, int b, int c) {
      if (!on_boundary(g, a, b, c)) return;
      double v = spec.traces[i](probe.point(a, b, c));
      if (v < -1e-12) throw std::invalid_argument("solve_lv: negative boundary trace");
      v = std::max(v, 0.0);
      traces[i][p] = v;
      trace_max = std::max(trace_max, v);
    });
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j)
      for (size_t p = 0; p < n; ++p)
        if (traces[i][p] * traces[j][p] > 1e-12 * (1.0 + trace_max * trace_max))
          throw std::invalid_argument("solve_lv: boundary traces are not segregated");

  std::vector<SampledField> u = init_fields(spec, warm_start, &traces);
  std::vector<FastStencil> fs;
  for (int i = 0; i < k; ++i)
    fs.push_back(make_fast(assemble_operator(spec.matrices[i], g)));

  std::vector<double> c(n, 0.0), r(n, 0.0), e(n, 0.0);
  const double omega = 0.7;
  const auto relax_component = [&](int i, double om, double cg_tol, int cg_cap,
                                   bool check_sign) {
    for_interior(g, [&](size_t q, int, int, int) {
      double acc = 0;
      for (int j = 0; j < k; ++j)
        if (j != i) acc += spec.coupling_at(i, j) * u[j].values[q];
      c[q] = beta * acc;
      r[q] = stencil_at(fs[i], u[i].values, q) - c[q] * u[i].values[q];
    });
    std::fill(e.begin(), e.end(), 0.0);
    cg_interior(fs[i], g, 1.0, &c, 0.0, r, e, cg_tol, cg_cap);
    double change = 0;
    for_interior(g, [&](size_t q, int, int, int) {
      const double nv = u[i].values[q] + om * e[q];
      change = std::max(change, std::abs(om * e[q]));
      if (check_sign && nv < -1e-10)
        throw NumericalError("solve_lv: negative undershoot in a converged component");
      u[i].values[q] = std::max(nv, 0.0);
    });
    return change;
  };

  for (int cycle = 1; cycle <= max_cycles; ++cycle) {
    double change = 0;
    for (int i = 0; i < k; ++i) change = std::max(change, relax_component(i, omega, 1e-4, 20000, false));
    if (change < tol) {
      for (int i = 0; i < k; ++i) relax_component(i, 1.0, 1e-10, 50000, true);
      SimResult out;
      out.fields = std::move(u);
      out.beta = beta;
      out.iterations = cycle;
      out.residual = scaled_lv_residual(spec, beta, out.fields, fs);
      out.energy = 0;
      return out;
    }
  }
  throw NumericalError("solve_lv: sweep cap exceeded before the iterates settled");
}

SimResult solve_variational(const SystemSpec& spec, double beta,
                            const std::vector<SampledField>* warm_start,
                            double energy_rel_tol, int max_steps) {
  validate_spec(spec);
  if (spec.kind != SystemKind::variational)
    throw std::invalid_argument("solve_variational: wrong system kind");
  if (!(beta >= 0))
    throw std::invalid_argument("solve_variational: beta must be nonnegative");
  const GridSpec& g = spec.grid;
  const int k = spec.k;
  double amax = 0;
  for (const auto& m : spec.matrices) amax = std::max(amax, max_eigen(m));
  const double tau = g.h * g.h / (4.0 * amax);

  std::vector<SampledField> u = init_fields(spec, warm_start, nullptr);
  std::vector<FastStencil> fs;
  for (int i = 0; i < k; ++i)
    fs.push_back(make_fast(assemble_operator(spec.matrices[i], g)));

  const size_t n = u[0].values.size();
  std::vector<std::vector<double>> rhs(k, std::vector<double>(n, 0.0));
  double energy = variational_energy(spec, beta, u, fs);
  int ascent_streak = 0;
  int next_check = 0;
  for (int step = 1; step <= max_steps; ++step) {
    // simultaneous explicit coupling: every component reads the same old
    // state, so symmetric data evolves equivariantly
    for (int i = 0; i < k; ++i) {
      for_interior(g, [&](size_t q, int a, int b, int c) {
        double comp = 0;
        for (int j = 0; j < k; ++j)
          if (j != i) comp += spec.coupling_at(i, j) * u[j].values[q] * u[j].values[q];
        const double ui = u[i].values[q];
        rhs[i][q] =
            ui + tau * (eval_reaction(spec.reactions[i], node_point(g, a, b, c), ui) -
                        beta * ui * comp);
      });
    }
    for (int i = 0; i < k; ++i) {
      cg_interior(fs[i], g, tau, nullptr, 1.0, rhs[i], u[i].values, 1e-12, 500);
      for_interior(g, [&](size_t q, int, int, int) {
        if (u[i].values[q] < 0) u[i].values[q] = 0;
      });
    }
    const double fresh = variational_energy(spec, beta, u, fs);
    if (fresh > energy + 1e-13 * (1.0 + std::abs(energy))) {
      if (++ascent_streak >= 10)
        throw NumericalError("solve_variational: energy kept ascending");
    } else {
      ascent_streak = 0;
    }
    const double rel = std::abs(fresh - energy) / (1e-30 + std::abs(fresh));
    energy = fresh;
    if (step > 10 && rel < energy_rel_tol && step >= next_check) {
      const double res = variational_residual(spec, beta, u, fs);
      if (res < 1e-7) {
        SimResult out;
        out.fields = std::move(u);
        out.beta = beta;
        out.iterations = step;
        out.residual = res;
        out.energy = energy;
        return out;
      }
      next_check = step + 25;
    }
  }
  throw NumericalError("solve_variational: step cap exceeded before stationarity");
}

double holder_seminorm(const SampledField& u, double alpha, int sample_pairs,
                       std::uint64_t seed) {
  if (!(alpha > 0 && alpha < 1))
    throw std::invalid_argument("holder_seminorm: exponent must lie in (0, 1)");
  const GridSpec& g = u.grid;
  const auto& e = g.extents;
  const double h = g.h;
  double best = 0;
  const double hpow = std::pow(h, alpha);
  for_all(g, [&](size_t p, int i, int j, int k) {
    if (i + 1 < e[0]) best = std::max(best, std::abs(u.values[p + 1] - u.values[p]) / hpow);
    if (j + 1 < e[1])
      best = std::max(best, std::abs(u.values[p + e[0]] - u.values[p]) / hpow);
    if (g.dim == 3 && k + 1 < e[2])
      best = std::max(
          best, std::abs(u.values[p + static_cast<size_t>(e[0]) * e[1]] - u.values[p]) / hpow);
  });
  const size_t n = u.values.size();
  std::mt19937_64 rng(seed);
  const size_t exy = static_cast<size_t>(e[0]) * e[1];
  for (int s = 0; s < sample_pairs; ++s) {
    const size_t a = rng() % n, b = rng() % n;
    if (a == b) continue;
    const int ai = static_cast<int>(a % e[0]), aj = static_cast<int>((a / e[0]) % e[1]),
              ak = static_cast<int>(a / exy);
    const int bi = static_cast<int>(b % e[0]), bj = static_cast<int>((b / e[0]) % e[1]),
              bk = static_cast<int>(b / exy);
    const double dx = h * (ai - bi), dy = h * (aj - bj), dz = h * (ak - bk);
    const double dist = std::sqrt(dx * dx + dy * dy + dz * dz);
    best = std::max(best, std::abs(u.values[a] - u.values[b]) / std::pow(dist, alpha));
  }
  return best;
}

OverlapMetrics overlap_metrics(const std::vector<SampledField>& fields,
                               const std::vector<double>& coupling, double beta) {
  const int k = static_cast<int>(fields.size());
  if (k < 2) throw std::invalid_argument("overlap_metrics: need at least two fields");
  if (static_cast<int>(coupling.size()) != k * k)
    throw std::invalid_argument("overlap_metrics: coupling must be k x k");
  const GridSpec& g = fields[0].grid;
  for (const auto& f : fields)
    if (f.grid.extents != g.extents)
      throw std::invalid_argument("overlap_metrics: fields on different grids");
  const double hvol = std::pow(g.h, g.dim);
  const auto& e = g.extents;
  OverlapMetrics out;
  const int kc = g.dim == 3 ? e[2] - 1 : 1;
  std::vector<std::vector<double>> pair(k, std::vector<double>(k, 0.0));
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      double acc = 0;
      for (int c = 0; c < kc; ++c)
        for (int b = 0; b + 1 < e[1]; ++b)
          for (int a = 0; a + 1 < e[0]; ++a)
            acc += cell::average(fields[i], a, b, c) * cell::average(fields[j], a, b, c);
      pair[i][j] = pair[j][i] = acc * hvol;
      out.pair_overlap.push_back(pair[i][j]);
      out.total_overlap += pair[i][j];
    }
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (j != i) out.total_scaled += beta * coupling[i * k + j] * pair[i][j];
  return out;
}

FreeBoundaryStats free_boundary_residual(const SampledField& u, const SampledField& v,
                                         const SpdMatrix& a, SystemKind kind) {
  const GridSpec& g = u.grid;
  if (v.grid.extents != g.extents)
    throw std::invalid_argument("free_boundary_residual: fields on different grids");
  if (a.dim() != g.dim)
    throw std::invalid_argument("free_boundary_residual: matrix dimension mismatch");
  SampledField w = make_field(g);
  for (size_t p = 0; p < w.values.size(); ++p) w.values[p] = u.values[p] - v.values[p];

  std::vector<double> samples;
  const auto& e = g.extents;
  const int kmin = g.dim == 3 ? 1 : 0, kmax = g.dim == 3 ? e[2] - 1 : 1;
  const auto consider = [&](int ui, int uj, int uk, int vi, int vj, int vk) {
    std::array<double, 3> gu = central_grad(w, ui, uj, uk);
    std::array<double, 3> gv = central_grad(w, vi, vj, vk);
    std::array<double, 3> nu{0.5 * (gu[0] + gv[0]), 0.5 * (gu[1] + gv[1]),
                             0.5 * (gu[2] + gv[2])};
    double len = std::sqrt(nu[0] * nu[0] + nu[1] * nu[1] + nu[2] * nu[2]);
    if (!(len > 1e-14)) return;
    for (double& x : nu) x /= len;
    double ann = 0;
    for (int d = 0; d < g.dim; ++d)
      for (int f = 0; f < g.dim; ++f) ann += a.m.at(d, f) * nu[d] * nu[f];
    const double mu = one_sided_mag(u, w, ui, uj, uk, true);
    const double mv = one_sided_mag(v, w, vi, vj, vk, false);
    const double lhs = kind == SystemKind::lotka_volterra ? mu * ann : mu * mu * ann;
    const double rhs = kind == SystemKind::lotka_volterra ? mv : mv * mv;
    if (lhs + rhs < 1e-14) return;
    samples.push_back(std::abs(lhs - rhs) / (lhs + rhs));
  };
  for (int k = kmin; k < kmax; ++k)
    for (int j = 1; j < e[1] - 1; ++j)
      for (int i = 1; i < e[0] - 1; ++i) {
        const double w0 = w.at(i, j, k);
        for (int d = 0; d < g.dim; ++d) {
          const int ni = i + (d == 0), nj = j + (d == 1), nk = k + (d == 2);
          if (ni > e[0] - 2 || nj > e[1] - 2 || (g.dim == 3 && nk > e[2] - 2)) continue;
          const double w1 = w.at(ni, nj, nk);
          if (w0 > 0 && w1 <= 0 && !(w0 == 0 && w1 == 0))
            consider(i, j, k, ni, nj, nk);
          else if (w1 > 0 && w0 <= 0)
            consider(ni, nj, nk, i, j, k);
        }
      }
  if (samples.empty())
    throw std::invalid_argument("free_boundary_residual: no interface found");
  std::sort(samples.begin(), samples.end());
  FreeBoundaryStats st;
  st.samples = static_cast<int>(samples.size());
  st.median = samples[samples.size() / 2];
  st.p90 = samples[(samples.size() - 1) * 9 / 10];
  double mean = 0;
  for (double s : samples) mean += s;
  st.mean = mean / samples.size();
  return st;
}

double quasilinear_residual(const SampledField& w, const SpdMatrix& a,
                            const std::vector<TestFunctionSpec>& tests) {
  const GridSpec& g = w.grid;
  if (a.dim() != g.dim)
    throw std::invalid_argument("quasilinear_residual: matrix dimension mismatch");
  if (tests.empty()) throw std::invalid_argument("quasilinear_residual: no test functions");
  const Box box = grid_box(g);
  const double hvol = std::pow(g.h, g.dim);
  const auto& e = g.extents;
  const int kc = g.dim == 3 ? e[2] - 1 : 1;
  double worst = 0;
  for (const auto& t : tests) {
    check_margin(t, g);
    double num = 0, den = 0;
    for (int c = 0; c < kc; ++c)
      for (int b = 0; b + 1 < e[1]; ++b)
        for (int aq = 0; aq + 1 < e[0]; ++aq) {
          const std::array<double, 3> x = cell::center(g, aq, b, c);
          std::array<double, 3> gphi;
          eval_test(t, box, x, &gphi);
          const std::array<double, 3> gw = cell::gradient(w, aq, b, c);
          const bool positive = cell::average(w, aq, b, c) > 0;
          double pairing = 0;
          for (int d = 0; d < g.dim; ++d) {
            double bg = gw[d];
            if (positive) {
              bg = 0;
              for (int f = 0; f < g.dim; ++f) bg += a.m.at(d, f) * gw[f];
            }
            pairing += bg * gphi[d];
            den += gphi[d] * gphi[d];
          }
          num += pairing;
        }
    if (den > 0) worst = std::max(worst, std::abs(num) * hvol / std::sqrt(den * hvol));
  }
  return worst;
}

double domain_variation_residual(const SystemSpec& spec, const SimResult& state, double beta,
                                 const VectorFieldSpec& y) {
  validate_spec(spec);
  if (spec.kind != SystemKind::variational)
    throw std::invalid_argument("domain_variation_residual: variational kind required");
  if (static_cast<int>(state.fields.size()) != spec.k)
    throw std::invalid_argument("domain_variation_residual: wrong component count");
  const GridSpec& g = spec.grid;
  for (const auto& f : state.fields)
    if (f.grid.extents != g.extents)
      throw std::invalid_argument("domain_variation_residual: grid mismatch");
  for (int d = 0; d < g.dim; ++d) check_margin(y.comp[d], g);
  const Box box = grid_box(g);
  const double hvol = std::pow(g.h, g.dim);
  const auto& e = g.extents;
  const int kc = g.dim == 3 ? e[2] - 1 : 1;
  double acc = 0, ynorm = 0;
  for (int c = 0; c < kc; ++c)
    for (int b = 0; b + 1 < e[1]; ++b)
      for (int aq = 0; aq + 1 < e[0]; ++aq) {
        const std::array<double, 3> x = cell::center(g, aq, b, c);
        double yval[3] = {0, 0, 0};
        double dy[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
        for (int d = 0; d < g.dim; ++d) {
          std::array<double, 3> grad;
          yval[d] = eval_test(y.comp[d], box, x, &grad);
          for (int f = 0; f < g.dim; ++f) dy[d][f] = grad[f];
        }
        double divy = 0, frob = 0, ylen = 0;
        for (int d = 0; d < g.dim; ++d) {
          divy += dy[d][d];
          ylen += yval[d] * yval[d];
          for (int f = 0; f < g.dim; ++f) frob += dy[d][f] * dy[d][f];
        }
        ynorm = std::max(ynorm, std::sqrt(ylen) + std::sqrt(frob));

        double density = 0;
        for (int i = 0; i < spec.k; ++i) {
          const std::array<double, 3> gu = cell::gradient(state.fields[i], aq, b, c);
          double agu[3] = {0, 0, 0};
          for (int d = 0; d < g.dim; ++d)
            for (int f = 0; f < g.dim; ++f) agu[d] += spec.matrices[i].m.at(d, f) * gu[f];
          // transported gradient: delta of (1/2)<A g, g> is
          // (1/2)<A g, g> divY - <dY A g, g>, the dY acting on A g
          double quad = 0, twisted = 0;
          for (int d = 0; d < g.dim; ++d) {
            quad += agu[d] * gu[d];
            for (int f = 0; f < g.dim; ++f) twisted += gu[d] * dy[d][f] * agu[f];
          }
          const double ui = cell::average(state.fields[i], aq, b, c);
          const double fanti = reaction_poly_anti(spec.reactions[i], ui);
          double wdot = 0;
          for (int d = 0; d < g.dim; ++d) wdot += spec.reactions[i].wgrad[d] * yval[d];
          density += 0.5 * quad * divy - twisted -
                     reaction_weight(spec.reactions[i], x) * fanti * divy - fanti * wdot;
        }
        for (int i = 0; i < spec.k; ++i)
          for (int j = i + 1; j < spec.k; ++j) {
            const double ui = cell::average(state.fields[i], aq, b, c);
            const double uj = cell::average(state.fields[j], aq, b, c);
            density += 0.5 * beta * spec.coupling_at(i, j) * ui * ui * uj * uj * divy;
          }
        acc += density * hvol;
      }
  if (ynorm == 0) return 0;
  return acc / ynorm;
}

BetaSweepReport beta_sweep(const SystemSpec& spec, const std::vector<double>& betas,
                           const std::vector<double>& holder_exponents, std::uint64_t seed) {
  validate_spec(spec);
  if (betas.empty()) throw std::invalid_argument("beta_sweep: empty beta list");
  for (size_t s = 0; s + 1 < betas.size(); ++s)
    if (!(betas[s] < betas[s + 1]))
      throw std::invalid_argument("beta_sweep: betas must be strictly increasing");
  for (double a : holder_exponents)
    if (!(a > 0 && a < 1))
      throw std::invalid_argument("beta_sweep: exponents must lie in (0, 1)");

  BetaSweepReport report;
  std::vector<SampledField> prev;
  const double hvol = std::pow(spec.grid.h, spec.grid.dim);
  const auto tests = default_test_fields(5, seed);
  const auto variations = default_variation_fields(5, seed);
  for (double beta : betas) {
    SimResult res;
    try {
      const std::vector<SampledField>* warm = prev.empty() ? nullptr : &prev;
      res = spec.kind == SystemKind::lotka_volterra ? solve_lv(spec, beta, warm)
                                                    : solve_variational(spec, beta, warm);
    } catch (const NumericalError&) {
      if (!report.entries.empty()) break;
      throw;
    }
    BetaSweepEntry entry;
    entry.beta = beta;
    entry.iterations = res.iterations;
    entry.residual = res.residual;
    entry.energy = res.energy;
    for (const auto& f : res.fields) {
      double s = 0;
      for (double v : f.values) s = std::max(s, std::abs(v));
      entry.sup_norms.push_back(s);
    }
    for (int i = 0; i < spec.k; ++i) {
      const auto& e = spec.grid.extents;
      const int kc = spec.grid.dim == 3 ? e[2] - 1 : 1;
      double acc = 0;
      for (int c = 0; c < kc; ++c)
        for (int b = 0; b + 1 < e[1]; ++b)
          for (int aq = 0; aq + 1 < e[0]; ++aq) {
            const std::array<double, 3> gu = cell::gradient(res.fields[i], aq, b, c);
            for (int d = 0; d < spec.grid.dim; ++d)
              for (int f = 0; f < spec.grid.dim; ++f)
                acc += spec.matrices[i].m.at(d, f) * gu[d] * gu[f];
          }
      entry.dirichlet.push_back(acc * hvol);
    }
    for (double alpha : holder_exponents) {
      double s = 0;
      for (const auto& f : res.fields)
        s = std::max(s, holder_seminorm(f, alpha, 100000, seed));
      entry.holder.push_back(s);
    }
    entry.overlap = overlap_metrics(res.fields, spec.coupling, beta);
    if (spec.k == 2) {
      try {
        entry.free_boundary = free_boundary_residual(res.fields[0], res.fields[1],
                                                     spec.matrices[0], spec.kind);
      } catch (const std::invalid_argument&) {
        // weakly coupled states need not change sign anywhere; report no samples
        entry.free_boundary = FreeBoundaryStats{};
      }
      if (spec.kind == SystemKind::lotka_volterra) {
        SampledField w = make_field(spec.grid);
        for (size_t p = 0; p < w.values.size(); ++p)
          w.values[p] = res.fields[0].values[p] - res.fields[1].values[p];
        entry.quasilinear = quasilinear_residual(w, spec.matrices[0], tests);
      }
    }
    if (spec.kind == SystemKind::variational) {
      double worst = 0;
      for (const auto& yv : variations)
        worst = std::max(worst,
                         std::abs(domain_variation_residual(spec, res, beta, yv)));
      entry.domain_variation = worst;
    }
    if (!prev.empty()) {
      double acc = 0;
      for (int i = 0; i < spec.k; ++i)
        for (size_t p = 0; p < prev[i].values.size(); ++p) {
          const double d = res.fields[i].values[p] - prev[i].values[p];
          acc += d * d;
        }
      entry.l2_change = std::sqrt(acc * hvol);
    }
    prev = res.fields;
    report.entries.push_back(std::move(entry));
    report.last = std::move(res);
  }
  return report;
}

SystemSpec default_lv_spec(int nodes) {
  if (nodes < 9) throw std::invalid_argument("default_lv_spec: grid too small");
  SystemSpec spec;
  spec.kind = SystemKind::lotka_volterra;
  spec.k = 2;
  spec.matrices = {spd_diag(2, {1.0, 4.0, 4.0}), SpdMatrix(small_identity(2))};
  // strong enough competition that the pinned beta grid reaches the
  // segregated plateau of the scaled overlap on the default resolution
  spec.coupling = {0.0, 10.0, 10.0, 0.0};
  spec.grid.dim = 2;
  spec.grid.origin = {0, 0, 0};
  spec.grid.h = 1.0 / (nodes - 1);
  spec.grid.extents = {nodes, nodes, 1};
  const auto ramp = [](double s) {
    constexpr double tw = 0.125;
    if (s <= 0) return 0.0;
    if (s <= tw) return 0.2 * s * s * s / (tw * tw) + 0.2 * s * s / tw;
    return s - 0.6 * tw;
  };
  spec.traces = {[ramp](const std::array<double, 3>& x) { return ramp(x[0] - 0.5); },
                 [ramp](const std::array<double, 3>& x) { return ramp(0.5 - x[0]); }};
  spec.initial = {[ramp](const std::array<double, 3>& x) { return ramp(x[0] - 0.5); },
                  [ramp](const std::array<double, 3>& x) { return ramp(0.5 - x[0]); }};
  return spec;
}

SystemSpec default_variational_spec(int nodes) {
  if (nodes < 9) throw std::invalid_argument("default_variational_spec: grid too small");
  SystemSpec spec;
  spec.kind = SystemKind::variational;
  spec.k = 2;
  // mirrored anisotropic phases with opposing affine niches: each component
  // grows fastest on its own half of the square, which keeps the two-phase
  // state the energy minimizer at every beta instead of letting one phase
  // absorb the whole domain between sweep stages
  spec.matrices = {spd_diag(2, {1.0, 4.0, 4.0}), spd_diag(2, {1.0, 4.0, 4.0})};
  spec.coupling = {0.0, 1.0, 1.0, 0.0};
  spec.reactions.resize(2);
  for (auto& rs : spec.reactions) rs.terms = {{120.0, 1.0}, {-120.0, 2.0}};
  spec.reactions[0].wconst = 1.75;
  spec.reactions[0].wgrad = {-1.5, 0, 0};
  spec.reactions[1].wconst = 0.25;
  spec.reactions[1].wgrad = {1.5, 0, 0};
  spec.grid.dim = 2;
  spec.grid.origin = {0, 0, 0};
  spec.grid.h = 1.0 / (nodes - 1);
  spec.grid.extents = {nodes, nodes, 1};
  spec.initial = {
      [](const std::array<double, 3>& x) {
        return 0.8 * std::sin(M_PI * x[1]) * std::max(std::sin(2 * M_PI * x[0]), 0.0);
      },
      [](const std::array<double, 3>& x) {
        return 0.8 * std::sin(M_PI * x[1]) * std::max(-std::sin(2 * M_PI * x[0]), 0.0);
      }};
  return spec;
}

std::vector<TestFunctionSpec> default_test_fields(int count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("default_test_fields: count must be positive");
  std::mt19937_64 rng(seed);
  std::vector<TestFunctionSpec> out;
  for (int s = 0; s < count; ++s) {
    TestFunctionSpec t;
    for (double& c : t.poly) c = 2.0 * unif01(rng) - 1.0;
    t.margin = 0.15;
    out.push_back(t);
  }
  return out;
}

std::vector<VectorFieldSpec> default_variation_fields(int count, std::uint64_t seed) {
  if (count < 1)
    throw std::invalid_argument("default_variation_fields: count must be positive");
  std::mt19937_64 rng(seed);
  std::vector<VectorFieldSpec> out;
  for (int s = 0; s < count; ++s) {
    VectorFieldSpec y;
    for (auto& comp : y.comp) {
      for (double& c : comp.poly) c = 2.0 * unif01(rng) - 1.0;
      comp.margin = 0.15;
    }
    out.push_back(y);
  }
  return out;
}

}  // namespace acf
