#include "acf/witness.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "acf/errors.hpp"
#include "acf/linalg.hpp"
#include "acf/stencil.hpp"

namespace acf {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTenthDegree = kPi / 1800.0;

double wrap_pi(double t) {
  t = std::fmod(t, 2 * kPi);
  if (t > kPi) t -= 2 * kPi;
  if (t <= -kPi) t += 2 * kPi;
  return t;
}

// Catmull-Rom through the band profile samples on their uniform grid.
// The Dirichlet ends sit one spacing beyond the first and last sample and
// carry the value 0; past them the profile continues by odd reflection.
double profile_value(const EigenResult& prof, double rho, double s) {
  const int m = static_cast<int>(prof.values.size());
  const double hs = 2.0 * rho / (m + 1);
  auto node = [&](int i) -> double {
    if (i >= 0 && i < m) return prof.values[i];
    if (i == -1 || i == m) return 0.0;
    if (i < -1) return -prof.values[-i - 2];
    return -prof.values[2 * m - i];
  };
  const double t = (s + rho) / hs - 1.0;  // sample index coordinate
  const int i = static_cast<int>(std::floor(t));
  const double f = t - i;
  const double p0 = node(i - 1), p1 = node(i), p2 = node(i + 1), p3 = node(i + 2);
  return 0.5 * (2.0 * p1 + f * (p2 - p0) +
                f * f * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) +
                f * f * f * (3.0 * (p1 - p2) + p3 - p0));
}

// Separated band state r^mu cos(m dtheta) wbar(s) in the band's own frame:
// s is the component along the pole axis, the azimuth turns in the plane of
// the other two axes, and dtheta measures the wrapped offset from the
// azimuthal center of the band.
struct BandFrame {
  int pole = 0;
  int az_x = 0, az_y = 0;  // azimuth = atan2(y[az_y], y[az_x])
  double center = 0;
};

double band_value(const std::array<double, 3>& y, const BandFrame& frame, double mu,
                  double m, double alpha, double rho, const EigenResult& prof) {
  const double r2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
  if (r2 == 0) return 0.0;
  const double r = std::sqrt(r2);
  const double s = y[frame.pole] / r;
  if (std::abs(s) >= rho) return 0.0;
  const double dth = wrap_pi(std::atan2(y[frame.az_y], y[frame.az_x]) - frame.center);
  if (std::abs(dth) >= alpha) return 0.0;
  return std::pow(r, mu) * std::cos(m * dth) * profile_value(prof, rho, s);
}

// Exterior angular distance of a direction to the closed band: positive when
// the direction clears the band in the polar or azimuthal coordinate,
// negative (deepest coordinate) when it sits inside.
double band_gap(const std::array<double, 3>& xi, const BandFrame& frame, double alpha,
                double beta) {
  const double r = std::sqrt(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
  const double s = std::clamp(xi[frame.pole] / r, -1.0, 1.0);
  const double polar = std::asin(std::abs(s)) - beta;
  const double az =
      std::abs(wrap_pi(std::atan2(xi[frame.az_y], xi[frame.az_x]) - frame.center)) - alpha;
  return std::max(polar, az);
}

constexpr BandFrame kSqueezedFrame{0, 2, 1, kPi / 2};   // half circle x1 = 0, x2 > 0
constexpr BandFrame kPartnerFrame{2, 0, 1, -kPi / 2};   // half circle x3 = 0, x2 < 0

// Squeezed support of the spatial pair sampled on an angular grid of the
// given step, measured against the partner band.
DisjointnessReport disjointness_3d(const Witness3D& w, double step) {
  const double rho = std::sin(w.beta);
  const double sb = std::sqrt(w.b);
  const int np = std::max(2, static_cast<int>(std::ceil(2 * w.beta / step)));
  const int na = std::max(2, static_cast<int>(std::ceil(2 * w.alpha / step)));
  DisjointnessReport rep;
  rep.margin = kPi;
  for (int ip = 0; ip <= np; ++ip) {
    const double s = -rho + 2 * rho * ip / np;
    const double q = std::sqrt(std::max(0.0, 1.0 - s * s));
    for (int ia = 0; ia <= na; ++ia) {
      const double psi = kSqueezedFrame.center - w.alpha + 2 * w.alpha * ia / na;
      // band direction, then the image under the inverse squeeze
      const std::array<double, 3> xi = {s, q * std::sin(psi) / sb,
                                        q * std::cos(psi) / w.b};
      rep.margin = std::min(rep.margin, band_gap(xi, kPartnerFrame, w.alpha, w.beta));
    }
  }
  rep.disjoint = rep.margin > 0;
  return rep;
}

double norm3(const std::array<double, 3>& x) {
  return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
}

// Worst stencil residual over nodes whose full neighborhood stays strictly
// inside the support, skipping the vertex region where the quartic error of
// the stencil outruns the h^2 budget for degrees below 2. For band fields
// the same degeneration happens along the azimuth axis, so nodes within
// r_min of the coordinate axis `axis` are skipped as well.
double worst_negative_residual(const SpdMatrix& a, const SampledField& f, double r_min,
                               int axis) {
  const DiscreteOperator op = assemble_operator(a, f.grid);
  const auto& e = f.grid.extents;
  const int kmax = f.grid.dim == 3 ? e[2] - 1 : 1;
  double worst = 0;
  for (int k = f.grid.dim == 3 ? 1 : 0; k < kmax; ++k)
    for (int j = 1; j < e[1] - 1; ++j)
      for (int i = 1; i < e[0] - 1; ++i) {
        const auto x = f.point(i, j, k);
        if (norm3(x) < r_min) continue;
        if (axis >= 0) {
          double rc2 = 0;
          for (int d = 0; d < 3; ++d)
            if (d != axis) rc2 += x[d] * x[d];
          if (rc2 < r_min * r_min) continue;
        }
        if (!(f.at(i, j, k) > 0)) continue;
        bool interior = true;
        for (const auto& o : op.offsets)
          if (!(f.at(i + o[0], j + o[1], k + o[2]) > 0)) {
            interior = false;
            break;
          }
        if (!interior) continue;
        worst = std::min(worst, apply_at(op, f, i, j, k));
      }
  return worst;
}

// Least-squares slope of log max_{S_r} f against log r.
double growth_degree(const SampledField& f, const std::vector<double>& radii) {
  std::vector<std::array<double, 3>> dirs;
  if (f.grid.dim == 2) {
    const int n = 3600;
    dirs.reserve(n);
    for (int i = 0; i < n; ++i)
      dirs.push_back({std::cos(2 * kPi * i / n), std::sin(2 * kPi * i / n), 0.0});
  } else {
    const int np = 180, na = 360;
    dirs.reserve(static_cast<size_t>(np - 1) * na + 2);
    dirs.push_back({0, 0, 1});
    dirs.push_back({0, 0, -1});
    for (int ip = 1; ip < np; ++ip) {
      const double ph = kPi * ip / np, sp = std::sin(ph), cp = std::cos(ph);
      for (int ia = 0; ia < na; ++ia) {
        const double th = 2 * kPi * ia / na;
        dirs.push_back({sp * std::cos(th), sp * std::sin(th), cp});
      }
    }
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (double r : radii) {
    double mx = 0;
    for (const auto& d : dirs)
      mx = std::max(mx, sample(f, {r * d[0], r * d[1], r * d[2]}));
    if (!(mx > 0))
      throw NumericalError("growth_degree: empty sphere maximum at r = " + std::to_string(r));
    const double lx = std::log(r), ly = std::log(mx);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(radii.size());
  const double den = n * sxx - sx * sx;
  if (!(den > 0)) throw std::invalid_argument("growth_degree: need at least two radii");
  return (n * sxy - sx * sy) / den;
}

WitnessReport build_report(const std::function<double(const std::array<double, 3>&)>& u,
                           const std::function<double(const std::array<double, 3>&)>& v,
                           const AnisotropyMatrix& a, const SpdMatrix& op_u,
                           const GridSpec& grid, const std::vector<double>& radii,
                           double exponent, int axis_u, int axis_v) {
  if (radii.size() < 2)
    throw std::invalid_argument("witness_report: need at least two radii");
  const SampledField fu = rasterize(grid, u);
  const SampledField fv = rasterize(grid, v);
  WitnessReport rep;
  double prod = 0;
  for (size_t i = 0; i < fu.values.size(); ++i)
    prod = std::max(prod, fu.values[i] * fv.values[i]);
  rep.max_pointwise_product = prod;
  const double r_min = std::max(4.0 * grid.h, 0.5 * radii.front());
  rep.subharmonic_violation_u = worst_negative_residual(op_u, fu, r_min, axis_u);
  rep.subharmonic_violation_v =
      worst_negative_residual(spd_diag(grid.dim, {1, 1, 1}), fv, r_min, axis_v);
  rep.degree_u = growth_degree(fu, radii);
  rep.degree_v = growth_degree(fv, radii);
  const double delta = std::max(2.0 * grid.h, radii.back() / 32.0);
  rep.profile = acf_profile(a, fu, fv, {0, 0, 0}, exponent, radii, delta);
  rep.monotonicity = monotonicity_report(rep.profile, 0.05);
  return rep;
}

}  // namespace

Witness2D witness_2d(double phi1, double phi2, double b) {
  if (!(phi1 > 0) || !(phi1 < kPi / 2))
    throw std::invalid_argument("witness_2d: phi1 must lie in (0, pi/2)");
  if (!(phi2 > 0) || !(phi2 < kPi / 2))
    throw std::invalid_argument("witness_2d: phi2 must lie in (0, pi/2)");
  if (!(b > 0) || !(b < 1)) throw std::invalid_argument("witness_2d: b must lie in (0, 1)");
  Witness2D w;
  w.phi1 = phi1;
  w.phi2 = phi2;
  w.b = b;
  w.alpha1 = kPi / (2 * phi1);
  w.alpha2 = kPi / (2 * (kPi - phi2));
  if (!(w.alpha1 + w.alpha2 < 2))
    throw std::invalid_argument("witness_2d: degree sum " +
                                std::to_string(w.alpha1 + w.alpha2) + " is not below 2");
  double margin = 0;
  if (sector_images_overlap(phi1, phi2, b, &margin)) {
    const double hi = std::atan(std::sqrt(b) * std::tan(phi1));
    throw std::invalid_argument(
        "witness_2d: squeezed support meets the partner sector over [" +
        std::to_string(phi2) + ", " + std::to_string(hi) + "] radians");
  }
  w.a = make_anisotropy(2, {1.0, 1.0 / b, 1.0});
  const double sb = std::sqrt(b);
  const double a1 = w.alpha1;
  w.u = [phi1, a1, sb](const std::array<double, 3>& x) {
    const double y0 = x[0], y1 = sb * x[1];
    const double r2 = y0 * y0 + y1 * y1;
    if (r2 == 0) return 0.0;
    const double psi = std::atan2(y0, y1);  // angle from the sector axis +x2
    if (std::abs(psi) >= phi1) return 0.0;
    return std::pow(r2, 0.5 * a1) * std::cos(a1 * psi);
  };
  const double a2 = w.alpha2;
  w.v = [phi2, a2](const std::array<double, 3>& x) {
    const double r2 = x[0] * x[0] + x[1] * x[1];
    if (r2 == 0) return 0.0;
    const double eta = kPi - std::abs(std::atan2(x[0], x[1]));  // distance from -x2
    if (eta >= kPi - phi2) return 0.0;
    return std::pow(r2, 0.5 * a2) * std::cos(a2 * eta);
  };
  return w;
}

Witness3D witness_3d(double alpha, double beta, double b, int n) {
  if (!(alpha > kPi / 2) || !(alpha < kPi))
    throw std::invalid_argument("witness_3d: alpha must lie in (pi/2, pi)");
  if (!(beta > 0) || !(beta < kPi / 2))
    throw std::invalid_argument("witness_3d: beta must lie in (0, pi/2)");
  if (!(b > 0) || !(b < 1)) throw std::invalid_argument("witness_3d: b must lie in (0, 1)");
  Witness3D w;
  w.alpha = alpha;
  w.beta = beta;
  w.b = b;
  const double m = kPi / (2 * alpha);
  const double rho = std::sin(beta);
  w.profile = sl_band_eigen(rho, m, n);
  w.lambda1 = w.profile.lambda;
  if (!(w.lambda1 < 2))
    throw std::invalid_argument("witness_3d: band eigenvalue " +
                                std::to_string(w.lambda1) + " is not below 2");
  w.mu = gamma_exponent(w.lambda1, 3);
  w.a = make_anisotropy(3, {1.0, 1.0 / b, 1.0 / (b * b)});
  const double sb = std::sqrt(b);
  const double mu = w.mu;
  const EigenResult prof = w.profile;
  w.u = [mu, m, alpha, rho, sb, b, prof](const std::array<double, 3>& x) {
    const std::array<double, 3> y = {x[0], sb * x[1], b * x[2]};
    return band_value(y, kSqueezedFrame, mu, m, alpha, rho, prof);
  };
  w.v = [mu, m, alpha, rho, prof](const std::array<double, 3>& x) {
    return band_value(x, kPartnerFrame, mu, m, alpha, rho, prof);
  };
  const DisjointnessReport rep = disjointness_3d(w, kPi / 180.0);
  if (!rep.disjoint)
    throw std::invalid_argument(
        "witness_3d: squeezed band meets the partner band, angular margin " +
        std::to_string(rep.margin) + " radians");
  return w;
}

DisjointnessReport cone_disjointness_check(const Witness2D& w) {
  DisjointnessReport rep;
  const double sb = std::sqrt(w.b);
  const int n = std::max(2, static_cast<int>(std::ceil(w.phi1 / kTenthDegree)));
  rep.margin = kPi;
  double hi = 0;
  for (int i = -n; i <= n; ++i) {
    const double image = std::atan(sb * std::tan(w.phi1 * i / n));
    rep.margin = std::min(rep.margin, w.phi2 - std::abs(image));
    hi = std::max(hi, std::abs(image));
  }
  rep.disjoint = rep.margin > 0;
  if (!rep.disjoint) {
    rep.overlap_lo = w.phi2;
    rep.overlap_hi = hi;
  }
  return rep;
}

DisjointnessReport cone_disjointness_check(const Witness3D& w) {
  return disjointness_3d(w, kTenthDegree);
}

bool sector_images_overlap(double phi1, double phi2, double b, double* margin) {
  if (!(phi1 > 0) || !(phi1 < kPi / 2) || !(phi2 > 0) || !(phi2 < kPi / 2))
    throw std::invalid_argument("sector_images_overlap: angles must lie in (0, pi/2)");
  if (!(b > 0) || !(b < 1))
    throw std::invalid_argument("sector_images_overlap: b must lie in (0, 1)");
  const double sb = std::sqrt(b);
  const int n = std::max(2, static_cast<int>(std::ceil(phi1 / kTenthDegree)));
  double worst = kPi;
  for (int i = 0; i <= n; ++i)
    worst = std::min(worst, phi2 - std::atan(sb * std::tan(phi1 * i / n)));
  if (margin != nullptr) *margin = worst;
  return !(worst > 0);
}

WitnessReport witness_report(const Witness2D& w, const GridSpec& grid,
                             const std::vector<double>& radii) {
  if (grid.dim != 2) throw std::invalid_argument("witness_report: planar grid expected");
  return build_report(w.u, w.v, w.a, spd_diag(2, {w.b, 1, 1}), grid, radii,
                      2.0 * (w.alpha1 + w.alpha2), -1, -1);
}

WitnessReport witness_report(const Witness3D& w, const GridSpec& grid,
                             const std::vector<double>& radii) {
  if (grid.dim != 3) throw std::invalid_argument("witness_report: spatial grid expected");
  return build_report(w.u, w.v, w.a, spd_diag(3, {w.b * w.b, w.b, 1}), grid, radii,
                      4.0 * w.mu, 0, 2);
}

Witness2D default_witness_2d() { return witness_2d(0.45 * kPi, 0.05 * kPi, 4e-4); }

Witness3D default_witness_3d() { return witness_3d(0.8 * kPi, 0.42 * kPi, 0.005); }

}  // namespace acf
