#pragma once

#include <array>
#include <optional>
#include <vector>

#include "acf/core.hpp"
#include "acf/grid.hpp"

namespace acf {

struct CouplingTerm {
  double coeff = 1.0;  // > 0
  double tpow = 1.0;   // >= 1
};

// Zero-order interaction added to the perturbed energy: u^{q+1} * g(v) with
// g(t) = sum_j coeff_j t^{tpow_j}.
struct InteractionSpec {
  double q = 1.0;  // >= 1
  std::vector<CouplingTerm> terms;
};

// Two-phase radial diagnostics around a center: i_left carries the
// anisotropic phase, i_right the isotropic one, and
// j = r^{-exponent} * i_left * i_right.
struct RadialProfile {
  std::array<double, 3> center{0, 0, 0};
  double exponent = 0;
  std::vector<double> radii;
  std::vector<double> i_left;
  std::vector<double> i_right;
  std::vector<double> j;
  double slope_min = 0;  // most negative discrete slope of j
};

struct MonotonicityReport {
  bool monotone = false;
  double slope_min = 0;
  double max_j = 0;
  double violation_budget = 0;  // summed decreases of j across the radius list
  int worst_index = -1;         // left index of the worst decreasing step
};

struct MeanValueReport {
  std::vector<double> radii;
  std::vector<double> ratios;  // r^{1-N} int_{S_r} u^2 mu / u(center)^2
  double required = 0;
  bool passed = false;
};

struct DecayReport {
  bool hypothesis_ok = false;   // w >= 0 and div(A grad w) >= M w - delta on the grid
  double hypothesis_worst = 0;  // largest pointwise violation of the hypothesis
  bool decay_ok = false;
  double decay_margin = 0;  // min over centers of bound - w(center)
};

// Dirichlet energy of u against the anisotropic form and the regularized
// anisotropic kernel, summed over grid cells whose center lies in B_r(x0).
// In the plane the kernel weight is identically 1. Requires delta >= 2h and
// the closed ball inside the grid box.
double weighted_dirichlet(const AnisotropyMatrix& a, const SampledField& u,
                          const std::array<double, 3>& x0, double r, double delta);

// Same energy plus the zero-order interaction u^{q+1} g(v) under the kernel.
double perturbed_weighted_dirichlet(const AnisotropyMatrix& a, const SampledField& u,
                                    const SampledField& v, const std::array<double, 3>& x0,
                                    double r, double delta, const InteractionSpec& spec);

// Product profile of the two phase energies across a radius list; optional
// interaction terms switch each side to the perturbed energy.
RadialProfile acf_profile(const AnisotropyMatrix& a, const SampledField& u,
                          const SampledField& v, const std::array<double, 3>& x0,
                          double exponent, const std::vector<double>& radii, double delta,
                          const std::optional<InteractionSpec>& spec_u = std::nullopt,
                          const std::optional<InteractionSpec>& spec_v = std::nullopt);

// Monotonicity verdict for a profile: steps may dip below the running level
// by at most tol * max_j.
MonotonicityReport monotonicity_report(const RadialProfile& profile, double tol);

// Sphere means of u^2 against the direction weight mu: the ratio to u(x0)^2
// must stay above a constant depending only on (N, aN); required == that
// constant, calibrated as sigma_{N-1} aN^{(1-N)/2} / 4.
MeanValueReport mean_value_check(const AnisotropyMatrix& a, const SampledField& u,
                                 const std::array<double, 3>& x0,
                                 const std::vector<double>& radii);

// Exponential interior decay of nonnegative subsolutions of
// div(A grad w) >= M w - delta: checks the hypothesis on the grid, then
// w(x0) <= 2 ||w||_{B_r(x0)} exp(-c sqrt(M) r) + delta / M with
// c = 1 / (aN sqrt(N)) over a subsample of admissible centers.
DecayReport subsolution_decay_check(const AnisotropyMatrix& a, double m_const, double delta,
                                    const SampledField& w, double r);

// Frequency r * int_{B_r} |grad v|^2 / int_{S_r} v^2 for each radius.
std::vector<double> almgren_frequency(const SampledField& v, const std::array<double, 3>& x0,
                                      const std::vector<double>& radii);

}  // namespace acf
