#pragma once

#include <array>
#include <optional>

#include "acf/linalg.hpp"

namespace acf {

// Congruence that carries a pair of operators back to (A, Id): the stored S
// satisfies S * A * S^T = A1 and S * S^T = scale * A2.
struct ReductionMap {
  SmallMat s;
  double scale = 1.0;
};

// Diagonal positive matrix with ordered entries a1 = 1 <= a2 <= ... <= aN.
// Carries the dimension and, when produced by reduce_pair, the congruence.
struct AnisotropyMatrix {
  int dim = 2;
  std::array<double, 3> a{1.0, 1.0, 1.0};
  std::optional<ReductionMap> reduction;

  double entry(int i) const { return a[i]; }
  double amax() const { return a[dim - 1]; }
};

// Validated anisotropy matrix from raw diagonal entries (sorted ascending,
// first entry must be 1 within 1e-12, all entries > 0).
AnisotropyMatrix make_anisotropy(int dim, std::array<double, 3> diag);

// Normalize a pair of SPD operators to the model pair (A, Id): simultaneous
// congruence diagonalization, then scaling so the smallest entry of A is 1.
// Entries within 1e-12 of 1 snap to 1 so the isotropic case is exact.
AnisotropyMatrix reduce_pair(const SpdMatrix& a1, const SpdMatrix& a2);

// Positive root of g^2 + (N-2) g = t; reduces to sqrt(t) when N = 2.
// Homogeneity degree of the model cone solution with sphere eigenvalue t.
double gamma_exponent(double t, int dim);

// Gamma_A(x) = (sum x_i^2 / a_i)^((2-N)/2) for N >= 3, identically 1 for N = 2.
// Returns +inf at the origin for N >= 3.
double fundamental_solution(const AnisotropyMatrix& a, const std::array<double, 3>& x);

// mu(x) = <A x/|x|, x/|x|>; lies in [1, aN]. Errors on x = 0.
double mu_weight(const AnisotropyMatrix& a, const std::array<double, 3>& x);

struct RegularizedKernelParams {
  AnisotropyMatrix a;
  double delta = 0.0;  // smoothing radius, > 0
};

// Phi_{A,delta}(x) = phi_delta(|A^{-1/2} x|) where phi_delta matches r^(2-N)
// outside r = delta and continues inside with the C^1 paraboloid
// (N/2) delta^(2-N) + ((2-N)/2) delta^(-N) r^2. Identically 1 when N = 2.
double regularized_kernel(const RegularizedKernelParams& p, const std::array<double, 3>& x);

// Squared tangential part of the gradient in the anisotropic metric:
// the difference <A g, g> - <A g, nu>^2 / mu with nu = x/|x|, evaluated via
// the cross-term formula (1 / sum a_i x_i^2) * sum_{i<j} a_i a_j (g_i x_j - g_j x_i)^2.
// Errors on x = 0.
double tangential_form_density(const AnisotropyMatrix& a, const std::array<double, 3>& grad,
                               const std::array<double, 3>& x);

inline AnisotropyMatrix isotropic(int dim) {
  AnisotropyMatrix m;
  m.dim = dim;
  return m;
}

}  // namespace acf
