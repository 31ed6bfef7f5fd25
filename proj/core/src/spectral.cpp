#include "acf/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "acf/errors.hpp"
#include "acf/quadrature.hpp"
#include "acf/sl.hpp"

namespace acf {

namespace {

double mu_angle(const AnisotropyMatrix& a, double t) {
  const double c = std::cos(t), s = std::sin(t);
  return a.a[0] * c * c + a.a[1] * s * s;
}

EigenResult finish_eigen(const TridiagSystem& sys, int n) {
  const SmallestEigen se = smallest_eigenpair(sys);
  EigenResult r;
  r.lambda = se.lambda;
  r.coords = sys.coords;
  r.values = se.vec;
  r.grid_size = n;
  r.residual = se.residual;
  if (!(r.residual < 1e-8)) throw NumericalError("eigenpair residual above 1e-8");
  for (double v : r.values)
    if (!(v > 0)) throw NumericalError("ground state lost interior positivity");
  return r;
}

// Iterated adaptive quadrature over the half sphere around +e1,
// x1 = cos(polar), polar in (0, cap_radius), azimuth in (0, 2 pi).
double sphere_cap_integral(double cap_radius,
                           const std::function<double(const std::array<double, 3>&)>& f) {
  const auto outer = [&](double polar) {
    const double c = std::cos(polar), s = std::sin(polar);
    const auto inner = [&](double az) {
      const std::array<double, 3> x{c, s * std::cos(az), s * std::sin(az)};
      return f(x);
    };
    return adaptive_gauss(inner, 0.0, 2.0 * M_PI, 5e-11) * s;
  };
  return adaptive_gauss(outer, 0.0, cap_radius, 1e-9);
}

struct GoldenResult {
  double x = 0, f = 0;
};

GoldenResult golden_min(const std::function<double(double)>& f, double a, double b,
                        double tol) {
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  GoldenResult r;
  r.x = 0.5 * (a + b);
  r.f = f(r.x);
  return r;
}

double cap_lambda_iso(double radius, int n) {
  const double left = std::cos(radius);
  const TridiagSystem sys = build_cell_dirichlet_natural(
      left, 1.0, n, [](double s) { return 1.0 - s * s; }, [](double) { return 0.0; },
      [](double) { return 1.0; });
  return smallest_eigenpair(sys).lambda;
}

// Rayleigh upper bound for the anisotropic cap eigenvalue from the linear
// competitor x1 - cos(radius) on the cap around +e1.
double cap_rayleigh_aniso(const AnisotropyMatrix& a, double radius) {
  const double s0 = std::cos(radius);
  const auto density = [&](const std::array<double, 3>& x) {
    const std::array<double, 3> grad{1.0 - x[0] * x[0], -x[0] * x[1], -x[0] * x[2]};
    return tangential_form_density(a, grad, x);
  };
  const auto weight = [&](const std::array<double, 3>& x) {
    const double f = x[0] - s0;
    double mu = 0;
    for (int i = 0; i < 3; ++i) mu += a.a[i] * x[i] * x[i];
    return f * f * mu;
  };
  const double num = sphere_cap_integral(radius, density);
  const double den = sphere_cap_integral(radius, weight);
  if (!(den > 0)) throw NumericalError("cap competitor degenerated");
  return num / den;
}

}  // namespace

EigenResult lambda_arc(const AnisotropyMatrix& a, const SphericalDomain& arc, int n) {
  if (a.dim != 2) throw std::invalid_argument("lambda_arc: dimension must be 2");
  if (arc.kind != DomainKind::arc) throw std::invalid_argument("lambda_arc: domain must be an arc");
  if (!(arc.p2 > 0) || !(arc.p2 < M_PI))
    throw std::invalid_argument("lambda_arc: half width must lie in (0, pi)");
  if (n < 64) throw std::invalid_argument("lambda_arc: resolution below 64");
  const double lo = arc.p1 - arc.p2, hi = arc.p1 + arc.p2;
  const double coef = a.a[0] * a.a[1];
  const TridiagSystem sys = build_node_dirichlet(
      lo, hi, n, [&](double t) { return coef / mu_angle(a, t); }, [](double) { return 0.0; },
      [&](double t) { return mu_angle(a, t); });
  return finish_eigen(sys, n);
}

EigenResult sl_band_eigen(double rho, double m, int n) {
  if (!(rho > 0) || !(rho <= 1)) throw std::invalid_argument("sl_band_eigen: rho must be in (0, 1]");
  if (!(m > 0)) throw std::invalid_argument("sl_band_eigen: m must be positive");
  if (n < 128) throw std::invalid_argument("sl_band_eigen: resolution below 128");
  const TridiagSystem sys = build_node_dirichlet(
      -rho, rho, n, [](double s) { return 1.0 - s * s; },
      [m](double s) { return m * m / (1.0 - s * s); }, [](double) { return 1.0; });
  return finish_eigen(sys, n);
}

double rayleigh_band(double rho, double m) {
  if (!(rho > 0) || !(rho <= 1)) throw std::invalid_argument("rayleigh_band: rho must be in (0, 1]");
  if (!(m > 0)) throw std::invalid_argument("rayleigh_band: m must be positive");
  const double i1 = adaptive_gauss(
      [rho](double t) {
        const double s = std::sin(0.5 * M_PI * t);
        return (1.0 - rho * rho * t * t) * s * s;
      },
      -1.0, 1.0, 1e-9);
  const double i2 = adaptive_gauss(
      [rho](double t) {
        if (std::abs(t) >= 1.0) return 0.0;
        const double c = std::cos(0.5 * M_PI * t);
        return c * c / (1.0 - rho * rho * t * t);
      },
      -1.0, 1.0, 1e-9);
  return 0.25 * M_PI * M_PI / (rho * rho) * i1 + m * m * i2;
}

EigenResult lambda_band(const SphericalDomain& band, int n) {
  if (band.kind != DomainKind::band)
    throw std::invalid_argument("lambda_band: domain must be a band");
  if (!(band.p1 > 0) || !(band.p1 < M_PI))
    throw std::invalid_argument("lambda_band: azimuthal half width must lie in (0, pi)");
  if (!(band.p2 > 0) || !(band.p2 <= 0.5 * M_PI))
    throw std::invalid_argument("lambda_band: polar half width must lie in (0, pi/2]");
  return sl_band_eigen(std::sin(band.p2), 0.5 * M_PI / band.p1, n);
}

double lambda_halfsphere_bound(const AnisotropyMatrix& a) {
  if (a.dim == 2) {
    const double a2 = a.a[1];
    const double num = adaptive_gauss(
        [a2](double t) {
          const double c = std::cos(t), s = std::sin(t);
          return a2 * s * s / (c * c + a2 * s * s);
        },
        -0.5 * M_PI, 0.5 * M_PI, 1e-10);
    const double den = adaptive_gauss(
        [a2](double t) {
          const double c = std::cos(t), s = std::sin(t);
          return c * c * (c * c + a2 * s * s);
        },
        -0.5 * M_PI, 0.5 * M_PI, 1e-10);
    return num / den;
  }
  const double num = sphere_cap_integral(0.5 * M_PI, [&](const std::array<double, 3>& x) {
    const double side = a.a[1] * x[1] * x[1] + a.a[2] * x[2] * x[2];
    return side / (x[0] * x[0] + side);
  });
  const double den = sphere_cap_integral(0.5 * M_PI, [&](const std::array<double, 3>& x) {
    const double side = a.a[1] * x[1] * x[1] + a.a[2] * x[2] * x[2];
    return x[0] * x[0] * (x[0] * x[0] + side);
  });
  return num / den;
}

PartitionResult nu_2d(const AnisotropyMatrix& a, int n) {
  if (a.dim != 2) throw std::invalid_argument("nu_2d: dimension must be 2");
  if (n < 64) throw std::invalid_argument("nu_2d: resolution below 64");

  const double wmin = 0.02;
  const auto objective = [&](double center, double width, int res) {
    const EigenResult e = lambda_arc(a, arc_domain(center, width), res);
    return std::sqrt(e.lambda) + 0.5 * M_PI / (M_PI - width);
  };

  const int coarse_n = std::max(64, n / 4);
  const int nc = 60, nw = 90;
  double best_c = 0, best_w = 0.5 * M_PI, best_f = kLambdaEmpty;
  for (int i = 0; i < nc; ++i) {
    const double c = M_PI * i / nc;
    for (int j = 0; j < nw; ++j) {
      const double w = wmin + (M_PI - 2 * wmin) * (j + 0.5) / nw;
      const double f = objective(c, w, coarse_n);
      if (f < best_f) {
        best_f = f;
        best_c = c;
        best_w = w;
      }
    }
  }

  const double dw = (M_PI - 2 * wmin) / nw;
  const double dc = M_PI / nc;
  for (int round = 0; round < 2; ++round) {
    const GoldenResult gw = golden_min(
        [&](double w) { return objective(best_c, w, n); },
        std::max(wmin, best_w - dw), std::min(M_PI - wmin, best_w + dw), 1e-6);
    best_w = gw.x;
    const GoldenResult gc = golden_min(
        [&](double c) { return objective(c, best_w, n); }, best_c - dc, best_c + dc, 1e-6);
    best_c = gc.x;
    best_f = gc.f;
  }

  PartitionResult out;
  const EigenResult eu = lambda_arc(a, arc_domain(best_c, best_w), n);
  out.lambda_u = eu.lambda;
  out.lambda_v = std::pow(0.5 * M_PI / (M_PI - best_w), 2);
  out.nu = std::sqrt(out.lambda_u) + std::sqrt(out.lambda_v);
  out.domain_u = arc_domain(best_c, best_w);
  out.domain_v = arc_domain(best_c + M_PI, M_PI - best_w);
  out.certified = false;
  return out;
}

PartitionResult nu_upper_nd(const AnisotropyMatrix& a) {
  if (a.dim != 3) throw std::invalid_argument("nu_upper_nd: dimension must be 3");
  const double pref = std::pow(a.a[2], -1.5);

  PartitionResult out;
  out.lambda_u = lambda_halfsphere_bound(a);
  out.lambda_v = 2.0;
  out.nu = pref * gamma_exponent(out.lambda_u, 3) + gamma_exponent(out.lambda_v, 3);
  out.domain_u = half_sphere_domain();
  out.domain_v = half_sphere_domain();
  out.certified = true;

  const int nt = 25;
  for (int k = 0; k < nt; ++k) {
    const double t = 0.3 + (M_PI - 0.6) * k / (nt - 1.0);
    const double ru = cap_rayleigh_aniso(a, t);
    const double lv = cap_lambda_iso(M_PI - t, 2048);
    const double cand = pref * gamma_exponent(ru, 3) + gamma_exponent(lv, 3);
    if (cand < out.nu) {
      out.nu = cand;
      out.lambda_u = ru;
      out.lambda_v = lv;
      out.domain_u = cap_domain(t);
      out.domain_v = cap_domain(M_PI - t);
    }
  }
  return out;
}

double nu_bar(const std::vector<SpdMatrix>& mats, int n) {
  if (mats.size() < 2) throw std::invalid_argument("nu_bar: need at least two operators");
  for (const auto& m : mats)
    if (m.dim() != mats[0].dim()) throw std::invalid_argument("nu_bar: mixed dimensions");
  double best = kLambdaEmpty;
  for (size_t i = 0; i < mats.size(); ++i)
    for (size_t j = i + 1; j < mats.size(); ++j) {
      const AnisotropyMatrix red = reduce_pair(mats[i], mats[j]);
      const double nu = (red.dim == 2) ? nu_2d(red, n).nu : nu_upper_nd(red).nu;
      best = std::min(best, nu);
    }
  return best;
}

}  // namespace acf
