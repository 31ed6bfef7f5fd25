#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace acf {

// Dense symmetric matrix of dimension 2 or 3, row-major in a fixed 3x3 slab.
struct SmallMat {
  int dim = 2;
  std::array<double, 9> a{};  // a[i*3+j], only the leading dim x dim block used

  double& at(int i, int j) { return a[i * 3 + j]; }
  double at(int i, int j) const { return a[i * 3 + j]; }
};

inline SmallMat small_identity(int dim) {
  SmallMat m;
  m.dim = dim;
  for (int i = 0; i < dim; ++i) m.at(i, i) = 1.0;
  return m;
}

inline SmallMat small_diag(int dim, const std::array<double, 3>& d) {
  SmallMat m;
  m.dim = dim;
  for (int i = 0; i < dim; ++i) m.at(i, i) = d[i];
  return m;
}

inline SmallMat small_mul(const SmallMat& x, const SmallMat& y) {
  SmallMat r;
  r.dim = x.dim;
  for (int i = 0; i < x.dim; ++i)
    for (int j = 0; j < x.dim; ++j) {
      double s = 0;
      for (int k = 0; k < x.dim; ++k) s += x.at(i, k) * y.at(k, j);
      r.at(i, j) = s;
    }
  return r;
}

inline SmallMat small_transpose(const SmallMat& x) {
  SmallMat r;
  r.dim = x.dim;
  for (int i = 0; i < x.dim; ++i)
    for (int j = 0; j < x.dim; ++j) r.at(i, j) = x.at(j, i);
  return r;
}

inline std::array<double, 3> small_apply(const SmallMat& m, const std::array<double, 3>& v) {
  std::array<double, 3> r{};
  for (int i = 0; i < m.dim; ++i) {
    double s = 0;
    for (int j = 0; j < m.dim; ++j) s += m.at(i, j) * v[j];
    r[i] = s;
  }
  return r;
}

inline double small_frob(const SmallMat& m) {
  double s = 0;
  for (int i = 0; i < m.dim; ++i)
    for (int j = 0; j < m.dim; ++j) s += m.at(i, j) * m.at(i, j);
  return std::sqrt(s);
}

struct EigenSym {
  std::array<double, 3> values{};  // ascending
  SmallMat vectors;                // orthonormal columns, A = V diag(values) V^T
};

// Cyclic Jacobi rotations; plenty for 2x2 and 3x3 symmetric input.
inline EigenSym jacobi_eigensym(SmallMat m) {
  const int n = m.dim;
  SmallMat v = small_identity(n);
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += m.at(p, q) * m.at(p, q);
    if (std::sqrt(off) <= 1e-15 * (1.0 + small_frob(m))) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = m.at(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (m.at(q, q) - m.at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double mkp = m.at(k, p), mkq = m.at(k, q);
          m.at(k, p) = c * mkp - s * mkq;
          m.at(k, q) = s * mkp + c * mkq;
        }
        for (int k = 0; k < n; ++k) {
          const double mpk = m.at(p, k), mqk = m.at(q, k);
          m.at(p, k) = c * mpk - s * mqk;
          m.at(q, k) = s * mpk + c * mqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v.at(k, p), vkq = v.at(k, q);
          v.at(k, p) = c * vkp - s * vkq;
          v.at(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  EigenSym out;
  out.vectors = small_identity(n);
  std::array<int, 3> order{0, 1, 2};
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (m.at(order[j], order[j]) < m.at(order[i], order[i])) std::swap(order[i], order[j]);
  for (int i = 0; i < n; ++i) {
    out.values[i] = m.at(order[i], order[i]);
    for (int k = 0; k < n; ++k) out.vectors.at(k, i) = v.at(k, order[i]);
  }
  return out;
}

// Symmetric positive definite matrix with construction-time validation.
struct SpdMatrix {
  SmallMat m;

  SpdMatrix() : m(small_identity(2)) {}

  explicit SpdMatrix(const SmallMat& in) : m(in) {
    if (in.dim != 2 && in.dim != 3)
      throw std::invalid_argument("SpdMatrix: dimension must be 2 or 3");
    const double scale = 1.0 + small_frob(in);
    for (int i = 0; i < in.dim; ++i)
      for (int j = i + 1; j < in.dim; ++j)
        if (std::abs(in.at(i, j) - in.at(j, i)) > 1e-12 * scale)
          throw std::invalid_argument("SpdMatrix: matrix not symmetric");
    const EigenSym es = jacobi_eigensym(in);
    for (int i = 0; i < in.dim; ++i)
      if (!(es.values[i] > 0))
        throw std::invalid_argument("SpdMatrix: matrix not positive definite");
  }

  int dim() const { return m.dim; }
};

inline SpdMatrix spd_diag(int dim, const std::array<double, 3>& d) {
  return SpdMatrix(small_diag(dim, d));
}

// f applied through the spectral decomposition, e.g. sqrt or inverse sqrt.
template <class F>
inline SmallMat spectral_apply(const SmallMat& m, F f) {
  const EigenSym es = jacobi_eigensym(m);
  SmallMat r;
  r.dim = m.dim;
  for (int i = 0; i < m.dim; ++i)
    for (int j = 0; j < m.dim; ++j) {
      double s = 0;
      for (int k = 0; k < m.dim; ++k)
        s += es.vectors.at(i, k) * f(es.values[k]) * es.vectors.at(j, k);
      r.at(i, j) = s;
    }
  return r;
}

}  // namespace acf
