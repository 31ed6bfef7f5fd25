#pragma once

#include <limits>
#include <vector>

#include "acf/core.hpp"

namespace acf {

// Convention for the eigenvalue of an empty phase.
inline constexpr double kLambdaEmpty = std::numeric_limits<double>::infinity();

enum class DomainKind { arc, band, cap, half_sphere };

// Region of the unit sphere carrying one phase of a partition.
//   arc:         p1 = center angle, p2 = half width            (circle)
//   band:        p1 = azimuthal half width, p2 = polar half width around a
//                half great circle                              (2-sphere)
//   cap:         p1 = polar radius                              (2-sphere)
//   half_sphere: no parameters                                  (2-sphere)
struct SphericalDomain {
  DomainKind kind = DomainKind::arc;
  double p1 = 0;
  double p2 = 0;
};

inline SphericalDomain arc_domain(double center, double half_width) {
  return {DomainKind::arc, center, half_width};
}
inline SphericalDomain band_domain(double alpha, double beta) {
  return {DomainKind::band, alpha, beta};
}
inline SphericalDomain cap_domain(double radius) { return {DomainKind::cap, radius, 0}; }
inline SphericalDomain half_sphere_domain() { return {DomainKind::half_sphere, 0, 0}; }

struct EigenResult {
  double lambda = 0;
  std::vector<double> coords;  // sample locations of the profile
  std::vector<double> values;  // ground state, sign-normalized to max 1
  int grid_size = 0;
  double residual = 0;
};

struct PartitionResult {
  double nu = 0;
  SphericalDomain domain_u;  // phase carrying the anisotropic operator
  SphericalDomain domain_v;  // isotropic phase
  double lambda_u = 0;
  double lambda_v = 0;
  bool certified = false;
};

// First eigenvalue of the weighted circle problem on an arc: the anisotropic
// tangential energy reduces to -(p phi')' = lambda mu phi with
// p = a1 a2 / mu and mu(t) = a1 cos^2 t + a2 sin^2 t. Dirichlet ends.
EigenResult lambda_arc(const AnisotropyMatrix& a, const SphericalDomain& arc, int n);

// Profile problem for a band around a half great circle, already separated:
// -((1-s^2) w')' + m^2/(1-s^2) w = lambda w on (-rho, rho), Dirichlet.
EigenResult sl_band_eigen(double rho, double m, int n);

// Closed-form Rayleigh quotient of the cosine test profile for the band
// problem; upper bound for sl_band_eigen at the same parameters.
double rayleigh_band(double rho, double m);

// Sphere eigenvalue of a band domain: maps (alpha, beta) to the separated
// profile problem with m = pi / (2 alpha), rho = sin(beta).
EigenResult lambda_band(const SphericalDomain& band, int n);

// Upper bound for the anisotropic half-sphere eigenvalue from the linear
// competitor x1 restricted to the sphere. Equals N-1 in the isotropic case
// and drops strictly below it as soon as the matrix is anisotropic.
double lambda_halfsphere_bound(const AnisotropyMatrix& a);

// Two-phase partition exponent on the circle: minimizes
// sqrt(lambda_A(arc)) + sqrt(lambda_Id(complement)) over arcs. The search
// scans a coarse center/width grid and polishes by golden section; n is the
// eigensolver resolution of the polish stage.
PartitionResult nu_2d(const AnisotropyMatrix& a, int n);

// Certified upper bound for the partition exponent in dimension 3: the
// half-sphere competitor bound combined with a swept cap/co-cap family.
PartitionResult nu_upper_nd(const AnisotropyMatrix& a);

// Minimum pairwise partition exponent of a family of operators; every pair is
// first normalized to the model pair (A, Id).
double nu_bar(const std::vector<SpdMatrix>& mats, int n = 1024);

}  // namespace acf
