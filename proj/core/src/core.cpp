#include "acf/core.hpp"

#include <cmath>
#include <stdexcept>

#include "acf/errors.hpp"

namespace acf {

namespace {

void check_dim(int dim) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("dimension must be 2 or 3");
}

double snap_one(double v) { return std::abs(v - 1.0) < 1e-12 ? 1.0 : v; }

}  // namespace

AnisotropyMatrix make_anisotropy(int dim, std::array<double, 3> diag) {
  check_dim(dim);
  AnisotropyMatrix m;
  m.dim = dim;
  for (int i = 0; i < dim; ++i) {
    if (!(diag[i] > 0)) throw std::invalid_argument("anisotropy entries must be positive");
    m.a[i] = snap_one(diag[i]);
  }
  for (int i = 0; i + 1 < dim; ++i)
    if (m.a[i] > m.a[i + 1]) throw std::invalid_argument("anisotropy entries must be ascending");
  if (m.a[0] != 1.0) throw std::invalid_argument("anisotropy must be normalized with a1 = 1");
  if (dim == 2) m.a[2] = m.a[1];
  return m;
}

AnisotropyMatrix reduce_pair(const SpdMatrix& a1, const SpdMatrix& a2) {
  if (a1.dim() != a2.dim()) throw std::invalid_argument("reduce_pair: dimension mismatch");
  const int n = a1.dim();

  const EigenSym e2 = jacobi_eigensym(a2.m);
  SmallMat d_isqrt = small_identity(n);
  SmallMat d_sqrt = small_identity(n);
  for (int i = 0; i < n; ++i) {
    d_isqrt.at(i, i) = 1.0 / std::sqrt(e2.values[i]);
    d_sqrt.at(i, i) = std::sqrt(e2.values[i]);
  }

  // abar = D^{-1/2} O^T A1 O D^{-1/2}, then diagonalize abar = M Ahat M^T.
  const SmallMat ot = small_transpose(e2.vectors);
  const SmallMat abar =
      small_mul(small_mul(d_isqrt, small_mul(ot, small_mul(a1.m, e2.vectors))), d_isqrt);
  const EigenSym eb = jacobi_eigensym(abar);

  const double scale = eb.values[0];
  if (!(scale > 0)) throw NumericalError("reduce_pair: nonpositive generalized eigenvalue");

  AnisotropyMatrix out;
  out.dim = n;
  for (int i = 0; i < n; ++i) out.a[i] = snap_one(eb.values[i] / scale);
  out.a[0] = 1.0;
  if (n == 2) out.a[2] = out.a[1];

  ReductionMap map;
  map.scale = scale;
  SmallMat s = small_mul(e2.vectors, small_mul(d_sqrt, eb.vectors));
  const double root = std::sqrt(scale);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s.at(i, j) *= root;
  map.s = s;
  out.reduction = map;
  return out;
}

double gamma_exponent(double t, int dim) {
  check_dim(dim);
  if (t < 0) throw std::invalid_argument("gamma_exponent: t must be nonnegative");
  const double half = 0.5 * (dim - 2);
  return std::sqrt(half * half + t) - half;
}

double fundamental_solution(const AnisotropyMatrix& a, const std::array<double, 3>& x) {
  if (a.dim == 2) return 1.0;
  double q = 0;
  for (int i = 0; i < a.dim; ++i) q += x[i] * x[i] / a.a[i];
  return std::pow(q, 0.5 * (2 - a.dim));
}

double mu_weight(const AnisotropyMatrix& a, const std::array<double, 3>& x) {
  double r2 = 0, q = 0;
  for (int i = 0; i < a.dim; ++i) {
    r2 += x[i] * x[i];
    q += a.a[i] * x[i] * x[i];
  }
  if (!(r2 > 0)) throw std::invalid_argument("mu_weight: x must be nonzero");
  return q / r2;
}

double regularized_kernel(const RegularizedKernelParams& p, const std::array<double, 3>& x) {
  if (!(p.delta > 0)) throw std::invalid_argument("regularized_kernel: delta must be positive");
  const int n = p.a.dim;
  if (n == 2) return 1.0;
  double q = 0;
  for (int i = 0; i < n; ++i) q += x[i] * x[i] / p.a.a[i];
  const double r = std::sqrt(q);
  if (r >= p.delta) return std::pow(r, 2 - n);
  const double d2n = std::pow(p.delta, 2 - n);
  return 0.5 * n * d2n + 0.5 * (2 - n) * d2n / (p.delta * p.delta) * r * r;
}

double tangential_form_density(const AnisotropyMatrix& a, const std::array<double, 3>& grad,
                               const std::array<double, 3>& x) {
  double w = 0;
  for (int i = 0; i < a.dim; ++i) w += a.a[i] * x[i] * x[i];
  if (!(w > 0)) throw std::invalid_argument("tangential_form_density: x must be nonzero");
  double s = 0;
  for (int i = 0; i < a.dim; ++i)
    for (int j = i + 1; j < a.dim; ++j) {
      const double cross = grad[i] * x[j] - grad[j] * x[i];
      s += a.a[i] * a.a[j] * cross * cross;
    }
  return s / w;
}

}  // namespace acf
