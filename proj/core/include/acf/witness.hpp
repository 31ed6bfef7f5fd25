#pragma once

#include <array>
#include <functional>
#include <vector>

#include "acf/core.hpp"
#include "acf/functional.hpp"
#include "acf/grid.hpp"
#include "acf/spectral.hpp"

namespace acf {

// Planar pair of segregated cone solutions whose homogeneity degrees sum
// below 2. The sector of half angle phi1 opens along the positive second
// axis and carries a harmonic solution of degree alpha1; u is its image
// under the squeeze diag(1, sqrt(b)), so u solves div(A grad u) = 0 with
// A = diag(1, 1/b). v is harmonic of degree alpha2 on the complement of the
// closed sector of half angle phi2 around the same axis.
struct Witness2D {
  double phi1 = 0;   // sector half angle of the pre-squeeze phase
  double phi2 = 0;   // half angle of the sector removed from the other phase
  double b = 0;      // squeeze parameter in (0, 1)
  double alpha1 = 0; // pi / (2 phi1)
  double alpha2 = 0; // pi / (2 (pi - phi2))
  AnisotropyMatrix a;
  std::function<double(const std::array<double, 3>&)> u;
  std::function<double(const std::array<double, 3>&)> v;
};

// Spatial analogue built from bands around two orthogonal half great
// circles: the half circle {x1 = 0, x2 > 0} for u and {x3 = 0, x2 < 0} for
// v. Both carry the separated band ground state of degree mu < 1; u is the
// image under the squeeze diag(1, sqrt(b), b) and solves div(A grad u) = 0
// with A = diag(1, 1/b, 1/b^2).
struct Witness3D {
  double alpha = 0;  // azimuthal half width
  double beta = 0;   // polar half width
  double b = 0;      // squeeze parameter in (0, 1)
  double mu = 0;     // homogeneity degree of both phases
  double lambda1 = 0;
  AnisotropyMatrix a;
  EigenResult profile;  // band profile samples used by the evaluators
  std::function<double(const std::array<double, 3>&)> u;
  std::function<double(const std::array<double, 3>&)> v;
};

struct DisjointnessReport {
  bool disjoint = false;
  double margin = 0;  // minimal angular gap in radians; negative reports overlap
  double overlap_lo = 0, overlap_hi = 0;  // offending angular interval (plane)
};

struct WitnessReport {
  double degree_u = 0;  // fitted growth degree along spheres
  double degree_v = 0;
  double subharmonic_violation_u = 0;  // worst negative stencil residual
  double subharmonic_violation_v = 0;
  double max_pointwise_product = 0;
  RadialProfile profile;               // product profile at the natural exponent
  MonotonicityReport monotonicity;
};

// Planar witness pair; throws when the squeezed support would meet the
// complementary sector.
Witness2D witness_2d(double phi1, double phi2, double b);

// Spatial witness pair; n is the band profile resolution. Throws when the
// squeezed band would leave the complement of the partner band.
Witness3D witness_3d(double alpha, double beta, double b, int n = 4096);

// Angular image of the squeezed support sampled at 0.1 degree resolution
// against the partner support.
DisjointnessReport cone_disjointness_check(const Witness2D& w);
DisjointnessReport cone_disjointness_check(const Witness3D& w);

// Overlap test on raw planar parameters, before any witness is constructed.
bool sector_images_overlap(double phi1, double phi2, double b, double* margin = nullptr);

// Rasterizes the pair, fits growth degrees, checks one-sided subharmonicity
// away from support edges, the vertex, and the band axes (within half the
// smallest radius, floor 4h, the quartic stencil error outruns h^2 for
// degrees below 2), and runs the product profile at the degree-sum exponent
// 2 (alpha1 + alpha2) in the plane and 4 mu in space.
WitnessReport witness_report(const Witness2D& w, const GridSpec& grid,
                             const std::vector<double>& radii);
WitnessReport witness_report(const Witness3D& w, const GridSpec& grid,
                             const std::vector<double>& radii);

// Default parameter sets with comfortably positive angular margins.
Witness2D default_witness_2d();
Witness3D default_witness_3d();

}  // namespace acf
