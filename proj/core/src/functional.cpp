#include "acf/functional.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "acf/errors.hpp"
#include "acf/stencil.hpp"
#include "cell_ops.hpp"

namespace acf {

namespace {

void check_interaction(const InteractionSpec& spec) {
  if (!(spec.q >= 1)) throw std::invalid_argument("interaction: q must be >= 1");
  for (const auto& t : spec.terms) {
    if (!(t.coeff > 0)) throw std::invalid_argument("interaction: coefficients must be positive");
    if (!(t.tpow >= 1)) throw std::invalid_argument("interaction: powers must be >= 1");
  }
}

void check_ball(const GridSpec& g, const std::array<double, 3>& x0, double r) {
  if (!(r > 0)) throw std::invalid_argument("ball radius must be positive");
  for (int d = 0; d < g.dim; ++d) {
    const double lo = g.origin[d], hi = g.origin[d] + g.h * (g.extents[d] - 1);
    if (x0[d] - r < lo - 1e-9 * g.h || x0[d] + r > hi + 1e-9 * g.h)
      throw std::invalid_argument("ball exceeds the grid box");
  }
}

double ball_energy(const AnisotropyMatrix& a, const SampledField& u, const SampledField* v,
                   const std::array<double, 3>& x0, double r, double delta,
                   const InteractionSpec* spec, bool use_kernel) {
  const GridSpec& g = u.grid;
  if (a.dim != g.dim) throw std::invalid_argument("ball energy: dimension mismatch");
  check_ball(g, x0, r);
  if (use_kernel && !(delta >= 2 * g.h))
    throw std::invalid_argument("ball energy: delta must be at least 2h");
  if (spec) check_interaction(*spec);
  if (v && v->grid.extents != g.extents)
    throw std::invalid_argument("ball energy: partner field on a different grid");

  RegularizedKernelParams kp{a, use_kernel ? delta : 1.0};
  int lo[3] = {0, 0, 0}, hi[3] = {0, 0, 0};
  for (int d = 0; d < g.dim; ++d) {
    lo[d] = std::max(0, static_cast<int>(std::floor((x0[d] - r - g.origin[d]) / g.h)) - 1);
    hi[d] = std::min(g.extents[d] - 2,
                     static_cast<int>(std::ceil((x0[d] + r - g.origin[d]) / g.h)));
  }
  const int klo = (g.dim == 3) ? lo[2] : 0, khi = (g.dim == 3) ? hi[2] : 0;
  const double hvol = std::pow(g.h, g.dim);
  double acc = 0;
  for (int k = klo; k <= khi; ++k)
    for (int j = lo[1]; j <= hi[1]; ++j)
      for (int i = lo[0]; i <= hi[0]; ++i) {
        std::array<double, 3> c{g.origin[0] + g.h * (i + 0.5), g.origin[1] + g.h * (j + 0.5),
                                g.dim == 3 ? g.origin[2] + g.h * (k + 0.5) : 0.0};
        double d2 = 0;
        for (int d = 0; d < g.dim; ++d) d2 += (c[d] - x0[d]) * (c[d] - x0[d]);
        if (d2 >= r * r) continue;
        const std::array<double, 3> grad = cell::gradient(u, i, j, k);
        double density = 0;
        for (int d = 0; d < g.dim; ++d) density += a.a[d] * grad[d] * grad[d];
        if (spec && v) {
          const double uc = cell::average(u, i, j, k);
          const double vc = cell::average(*v, i, j, k);
          double gval = 0;
          for (const auto& t : spec->terms) gval += t.coeff * std::pow(std::abs(vc), t.tpow);
          density += std::pow(std::abs(uc), spec->q + 1.0) * gval;
        }
        double kern = 1.0;
        if (use_kernel && g.dim == 3) {
          const std::array<double, 3> rel{c[0] - x0[0], c[1] - x0[1], c[2] - x0[2]};
          kern = regularized_kernel(kp, rel);
        }
        acc += density * kern * hvol;
      }
  return acc;
}

constexpr int kCircleSamples = 720;
constexpr int kPolarSamples = 180;
constexpr int kAzimuthSamples = 360;

// r^{1-N} int_{S_r} f(x, xi) dsigma via midpoint angular sums; the radius
// prefactor cancels against the surface element.
template <class F>
double sphere_mean(const GridSpec& g, F&& f) {
  if (g.dim == 2) {
    const double dth = 2.0 * M_PI / kCircleSamples;
    double acc = 0;
    for (int i = 0; i < kCircleSamples; ++i) {
      const double th = (i + 0.5) * dth;
      const std::array<double, 3> xi{std::cos(th), std::sin(th), 0};
      acc += f(xi);
    }
    return acc * dth;
  }
  const double dph = M_PI / kPolarSamples, daz = 2.0 * M_PI / kAzimuthSamples;
  double acc = 0;
  for (int i = 0; i < kPolarSamples; ++i) {
    const double ph = (i + 0.5) * dph;
    const double sp = std::sin(ph), cp = std::cos(ph);
    double ring = 0;
    for (int j = 0; j < kAzimuthSamples; ++j) {
      const double az = (j + 0.5) * daz;
      const std::array<double, 3> xi{sp * std::cos(az), sp * std::sin(az), cp};
      ring += f(xi);
    }
    acc += ring * sp;
  }
  return acc * dph * daz;
}

SpdMatrix to_spd(const AnisotropyMatrix& a) { return spd_diag(a.dim, a.a); }

}  // namespace

double weighted_dirichlet(const AnisotropyMatrix& a, const SampledField& u,
                          const std::array<double, 3>& x0, double r, double delta) {
  return ball_energy(a, u, nullptr, x0, r, delta, nullptr, true);
}

double perturbed_weighted_dirichlet(const AnisotropyMatrix& a, const SampledField& u,
                                    const SampledField& v, const std::array<double, 3>& x0,
                                    double r, double delta, const InteractionSpec& spec) {
  return ball_energy(a, u, &v, x0, r, delta, &spec, true);
}

RadialProfile acf_profile(const AnisotropyMatrix& a, const SampledField& u,
                          const SampledField& v, const std::array<double, 3>& x0,
                          double exponent, const std::vector<double>& radii, double delta,
                          const std::optional<InteractionSpec>& spec_u,
                          const std::optional<InteractionSpec>& spec_v) {
  if (radii.empty()) throw std::invalid_argument("acf_profile: empty radius list");
  for (size_t k = 0; k + 1 < radii.size(); ++k)
    if (!(radii[k] < radii[k + 1]))
      throw std::invalid_argument("acf_profile: radii must be strictly increasing");
  const AnisotropyMatrix iso = isotropic(a.dim);
  RadialProfile p;
  p.center = x0;
  p.exponent = exponent;
  p.radii = radii;
  for (double r : radii) {
    const double il = spec_u ? perturbed_weighted_dirichlet(a, u, v, x0, r, delta, *spec_u)
                             : weighted_dirichlet(a, u, x0, r, delta);
    const double ir = spec_v ? perturbed_weighted_dirichlet(iso, v, u, x0, r, delta, *spec_v)
                             : weighted_dirichlet(iso, v, x0, r, delta);
    p.i_left.push_back(il);
    p.i_right.push_back(ir);
    p.j.push_back(std::pow(r, -exponent) * il * ir);
  }
  p.slope_min = 0;
  if (p.j.size() >= 2) {
    double smin = (p.j[1] - p.j[0]) / (radii[1] - radii[0]);
    for (size_t k = 1; k + 1 < p.j.size(); ++k)
      smin = std::min(smin, (p.j[k + 1] - p.j[k]) / (radii[k + 1] - radii[k]));
    p.slope_min = smin;
  }
  return p;
}

MonotonicityReport monotonicity_report(const RadialProfile& profile, double tol) {
  if (!(tol >= 0)) throw std::invalid_argument("monotonicity_report: negative tolerance");
  MonotonicityReport r;
  r.max_j = 0;
  for (double v : profile.j) r.max_j = std::max(r.max_j, std::abs(v));
  r.monotone = true;
  r.slope_min = profile.slope_min;
  double worst_drop = 0;
  for (size_t k = 0; k + 1 < profile.j.size(); ++k) {
    const double drop = profile.j[k] - profile.j[k + 1];
    if (drop > 0) {
      r.violation_budget += drop;
      if (drop > worst_drop) {
        worst_drop = drop;
        r.worst_index = static_cast<int>(k);
      }
      if (drop > tol * r.max_j) r.monotone = false;
    }
  }
  return r;
}

MeanValueReport mean_value_check(const AnisotropyMatrix& a, const SampledField& u,
                                 const std::array<double, 3>& x0,
                                 const std::vector<double>& radii) {
  if (radii.empty()) throw std::invalid_argument("mean_value_check: empty radius list");
  const double u0 = sample(u, x0);
  if (!(u0 * u0 > 0)) throw std::invalid_argument("mean_value_check: u vanishes at the center");
  const int n = a.dim;
  MeanValueReport rep;
  rep.radii = radii;
  const double sigma = (n == 2) ? 2.0 * M_PI : 4.0 * M_PI;
  rep.required = 0.25 * sigma * std::pow(a.a[n - 1], 0.5 * (1 - n));
  rep.passed = true;
  for (double r : radii) {
    check_ball(u.grid, x0, r);
    const double val = sphere_mean(u.grid, [&](const std::array<double, 3>& xi) {
      const std::array<double, 3> x{x0[0] + r * xi[0], x0[1] + r * xi[1],
                                    n == 3 ? x0[2] + r * xi[2] : 0.0};
      const double uv = sample(u, x);
      return uv * uv * mu_weight(a, xi);
    });
    rep.ratios.push_back(val / (u0 * u0));
    if (!(val / (u0 * u0) >= rep.required)) rep.passed = false;
  }
  return rep;
}

DecayReport subsolution_decay_check(const AnisotropyMatrix& a, double m_const, double delta,
                                    const SampledField& w, double r) {
  if (!(m_const > 0)) throw std::invalid_argument("subsolution_decay_check: M must be positive");
  if (!(delta >= 0)) throw std::invalid_argument("subsolution_decay_check: delta must be >= 0");
  const GridSpec& g = w.grid;
  if (a.dim != g.dim) throw std::invalid_argument("subsolution_decay_check: dimension mismatch");
  if (!(r > 4 * g.h)) throw std::invalid_argument("subsolution_decay_check: radius too small");

  DecayReport rep;
  double wmax = 0, wmin = 0;
  for (double v : w.values) {
    wmax = std::max(wmax, v);
    wmin = std::min(wmin, v);
  }
  const double tol_h = 1e-8 * (1.0 + m_const * wmax + delta);

  const DiscreteOperator op = assemble_operator(to_spd(a), g);
  size_t checked = 0, violations = 0;
  double worst = wmin < -1e-12 ? -wmin : 0.0;
  const auto& e = g.extents;
  const int kmin = (g.dim == 3) ? 1 : 0, kmax = (g.dim == 3) ? e[2] - 1 : 1;
  for (int k = kmin; k < kmax; ++k)
    for (int j = 1; j < e[1] - 1; ++j)
      for (int i = 1; i < e[0] - 1; ++i) {
        const double lw = apply_at(op, w, i, j, k);
        const double viol = (m_const * w.at(i, j, k) - delta) - lw;
        ++checked;
        if (viol > tol_h) ++violations;
        worst = std::max(worst, viol);
      }
  rep.hypothesis_worst = worst;
  rep.hypothesis_ok = (wmin >= -1e-12) && (violations <= checked / 1000);

  const double c_decay = 1.0 / (a.amax() * std::sqrt(static_cast<double>(g.dim)));
  const double factor = 2.0 * std::exp(-c_decay * std::sqrt(m_const) * r);
  const int stride = std::max(1, e[0] / 16);
  bool any = false;
  double margin_min = 0;
  for (int k = kmin; k < kmax; k += (g.dim == 3 ? stride : 1))
    for (int j = 1; j < e[1] - 1; j += stride)
      for (int i = 1; i < e[0] - 1; i += stride) {
        const std::array<double, 3> p = w.point(i, j, k);
        bool fits = true;
        for (int d = 0; d < g.dim; ++d) {
          const double lo = g.origin[d], hi = g.origin[d] + g.h * (e[d] - 1);
          if (p[d] - r < lo - 1e-9 * g.h || p[d] + r > hi + 1e-9 * g.h) fits = false;
        }
        if (!fits) continue;
        double supb = 0;
        int blo[3] = {0, 0, 0}, bhi[3] = {0, 0, 0};
        for (int d = 0; d < g.dim; ++d) {
          blo[d] = std::max(0, static_cast<int>(std::floor((p[d] - r - g.origin[d]) / g.h)));
          bhi[d] = std::min(e[d] - 1,
                            static_cast<int>(std::ceil((p[d] + r - g.origin[d]) / g.h)));
        }
        const int bklo = (g.dim == 3) ? blo[2] : 0, bkhi = (g.dim == 3) ? bhi[2] : 0;
        for (int kk = bklo; kk <= bkhi; ++kk)
          for (int jj = blo[1]; jj <= bhi[1]; ++jj)
            for (int ii = blo[0]; ii <= bhi[0]; ++ii) {
              const std::array<double, 3> q = w.point(ii, jj, kk);
              double d2 = 0;
              for (int d = 0; d < g.dim; ++d) d2 += (q[d] - p[d]) * (q[d] - p[d]);
              if (d2 <= r * r) supb = std::max(supb, w.at(ii, jj, kk));
            }
        const double bound = factor * supb + delta / m_const;
        const double margin = bound - w.at(i, j, k);
        if (!any || margin < margin_min) margin_min = margin;
        any = true;
      }
  if (!any) throw std::invalid_argument("subsolution_decay_check: no admissible centers");
  rep.decay_margin = margin_min;
  rep.decay_ok = margin_min >= -1e-12 * (1.0 + wmax);
  return rep;
}

std::vector<double> almgren_frequency(const SampledField& v, const std::array<double, 3>& x0,
                                      const std::vector<double>& radii) {
  if (radii.empty()) throw std::invalid_argument("almgren_frequency: empty radius list");
  const AnisotropyMatrix iso = isotropic(v.grid.dim);
  std::vector<double> out;
  for (double r : radii) {
    const double num = ball_energy(iso, v, nullptr, x0, r, 1.0, nullptr, false);
    const double den_mean = sphere_mean(v.grid, [&](const std::array<double, 3>& xi) {
      const std::array<double, 3> x{x0[0] + r * xi[0], x0[1] + r * xi[1],
                                    v.grid.dim == 3 ? x0[2] + r * xi[2] : 0.0};
      const double uv = sample(v, x);
      return uv * uv;
    });
    const double den = den_mean * std::pow(r, v.grid.dim - 1);
    if (!(den > 0)) throw NumericalError("almgren_frequency: vanishing sphere mass");
    out.push_back(r * num / den);
  }
  return out;
}

}  // namespace acf
