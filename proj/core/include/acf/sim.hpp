#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "acf/grid.hpp"
#include "acf/linalg.hpp"

namespace acf {

enum class SystemKind { lotka_volterra, variational };

// Reaction f(x, u) = w(x) * sum coeff * u^upow with an affine spatial weight
// w(x) = wconst + <wgrad, x>; F is its antiderivative in u.
struct ReactionTerm {
  double coeff = 0;
  double upow = 1;  // >= 1
};
struct ReactionSpec {
  std::vector<ReactionTerm> terms;
  double wconst = 1.0;
  std::array<double, 3> wgrad{0, 0, 0};
};

// Boundary trace and initial profile descriptors as closed forms.
using ScalarFn = std::function<double(const std::array<double, 3>&)>;

struct SystemSpec {
  SystemKind kind = SystemKind::lotka_volterra;
  int k = 2;  // number of components, >= 2
  std::vector<SpdMatrix> matrices;
  std::vector<double> coupling;  // row-major k x k, zero diagonal, symmetric
  std::vector<ReactionSpec> reactions;  // variational kind only
  std::vector<ScalarFn> traces;         // Dirichlet data (zero for variational)
  std::vector<ScalarFn> initial;        // starting guesses
  GridSpec grid;

  double coupling_at(int i, int j) const { return coupling[i * k + j]; }
};

struct SimResult {
  std::vector<SampledField> fields;
  double beta = 0;
  int iterations = 0;
  double residual = 0;  // sup norm of the discrete system residual
  double energy = 0;    // variational kind; 0 for the competition kind
};

struct OverlapMetrics {
  std::vector<double> pair_overlap;    // int u_i u_j per unordered pair (i<j)
  double total_overlap = 0;            // sum of pair overlaps
  double total_scaled = 0;             // beta * sum_i int u_i sum_{j != i} b_ij u_j
};

struct FreeBoundaryStats {
  double median = 0;
  double mean = 0;
  double p90 = 0;
  int samples = 0;
};

// Compactly supported scalar test function: a quadratic polynomial in the
// monomials [1, x, y, z, x^2, y^2, z^2, xy, xz, yz] times a C^2 plateau bump
// that vanishes within margin of the grid box boundary.
struct TestFunctionSpec {
  std::array<double, 10> poly{};
  double margin = 0.1;
};

// Compactly supported vector field descriptor Y(x), one test function per
// component, with analytic Jacobian.
struct VectorFieldSpec {
  std::array<TestFunctionSpec, 3> comp;
};

struct BetaSweepEntry {
  double beta = 0;
  int iterations = 0;
  double residual = 0;
  double energy = 0;
  std::vector<double> sup_norms;
  std::vector<double> dirichlet;  // int <A_i grad u_i, grad u_i> per component
  std::vector<double> holder;     // per requested exponent, max over components
  OverlapMetrics overlap;
  FreeBoundaryStats free_boundary;
  double quasilinear = 0;
  double domain_variation = 0;  // variational kind
  double l2_change = 0;         // distance to the previous sweep entry
};

struct BetaSweepReport {
  std::vector<BetaSweepEntry> entries;
  SimResult last;  // converged state at the final coupling strength
};

// Competition system with segregated Dirichlet traces: componentwise cyclic
// solves of the frozen-coefficient linear problems, damped, until the sup
// change per sweep drops below tol.
SimResult solve_lv(const SystemSpec& spec, double beta,
                   const std::vector<SampledField>* warm_start = nullptr,
                   double tol = 1e-8, int max_cycles = 100000);

// Gradient flow for the variational system with zero traces: semi-implicit
// diffusion steps, explicit reaction and coupling, monotone discrete energy.
SimResult solve_variational(const SystemSpec& spec, double beta,
                            const std::vector<SampledField>* warm_start = nullptr,
                            double energy_rel_tol = 1e-10, int max_steps = 2000000);

// Largest |u(x) - u(y)| / |x - y|^alpha over all neighbor pairs plus
// sample_pairs seeded random node pairs.
double holder_seminorm(const SampledField& u, double alpha, int sample_pairs,
                       std::uint64_t seed);

OverlapMetrics overlap_metrics(const std::vector<SampledField>& fields,
                               const std::vector<double>& coupling, double beta);

// Flux balance across the interface of a two-component state: the competition
// kind matches |grad u| <A nu, nu> against |grad v|, the variational kind the
// squared fluxes. One-sided gradients away from the interface on each side.
FreeBoundaryStats free_boundary_residual(const SampledField& u, const SampledField& v,
                                         const SpdMatrix& a, SystemKind kind);

// Weak residual of div(B(w) grad w) = 0 for w = u - v, with B jumping between
// A on {w > 0} and Id elsewhere, tested against smooth compactly supported
// bumps. Returns the worst normalized pairing.
double quasilinear_residual(const SampledField& w, const SpdMatrix& a,
                            const std::vector<TestFunctionSpec>& tests);

// Stationarity of the variational energy under inner domain variations along
// Y: the first-variation identity normalized by ||Y||_{C^1}.
double domain_variation_residual(const SystemSpec& spec, const SimResult& state, double beta,
                                 const VectorFieldSpec& y);

// Full diagnostic sweep across coupling strengths, warm-starting each solve
// from the previous one.
BetaSweepReport beta_sweep(const SystemSpec& spec, const std::vector<double>& betas,
                           const std::vector<double>& holder_exponents,
                           std::uint64_t seed = 42);

// Built-in model systems on the unit square.
SystemSpec default_lv_spec(int nodes = 129);
SystemSpec default_variational_spec(int nodes = 65);

// Deterministic smooth test bumps for the quasilinear residual.
std::vector<TestFunctionSpec> default_test_fields(int count, std::uint64_t seed);

// Seeded compactly supported vector fields for stationarity checks.
std::vector<VectorFieldSpec> default_variation_fields(int count, std::uint64_t seed);

}  // namespace acf
