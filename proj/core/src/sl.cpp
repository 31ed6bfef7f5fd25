#include "acf/sl.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "acf/errors.hpp"

namespace acf {

namespace {

// LU factorization with partial pivoting for a tridiagonal matrix; the second
// superdiagonal absorbs pivoting fill-in. Stays stable when the shift sits on
// top of an eigenvalue, which is exactly the inverse iteration use case.
struct TriLU {
  std::vector<double> dl, dd, du, du2;
  std::vector<int> swapped;

  void factor(std::vector<double> sub, std::vector<double> diag, std::vector<double> sup) {
    const int n = static_cast<int>(diag.size());
    dl = std::move(sub);
    dd = std::move(diag);
    du = std::move(sup);
    du2.assign(std::max(0, n - 2), 0.0);
    swapped.assign(std::max(0, n - 1), 0);
    for (int i = 0; i < n - 1; ++i) {
      if (std::abs(dd[i]) >= std::abs(dl[i])) {
        if (dd[i] == 0.0) dd[i] = 1e-300;
        const double fact = dl[i] / dd[i];
        dl[i] = fact;
        dd[i + 1] -= fact * du[i];
      } else {
        const double fact = dd[i] / dl[i];
        dd[i] = dl[i];
        dl[i] = fact;
        const double temp = du[i];
        du[i] = dd[i + 1];
        dd[i + 1] = temp - fact * dd[i + 1];
        if (i < n - 2) {
          du2[i] = du[i + 1];
          du[i + 1] = -fact * du2[i];
        }
        swapped[i] = 1;
      }
    }
    if (n > 0 && dd[n - 1] == 0.0) dd[n - 1] = 1e-300;
  }

  void solve(std::vector<double>& x) const {
    const int n = static_cast<int>(dd.size());
    for (int i = 0; i < n - 1; ++i) {
      if (swapped[i]) {
        const double temp = x[i];
        x[i] = x[i + 1];
        x[i + 1] = temp - dl[i] * x[i];
      } else {
        x[i + 1] -= dl[i] * x[i];
      }
    }
    for (int i = n - 1; i >= 0; --i) {
      double s = x[i];
      if (i + 1 < n) s -= du[i] * x[i + 1];
      if (i + 2 < n) s -= du2[i] * x[i + 2];
      x[i] = s / dd[i];
    }
  }
};

}  // namespace

SmallestEigen smallest_eigenpair(const TridiagSystem& sys, int max_iter_factor) {
  const int n = static_cast<int>(sys.diag.size());
  if (n < 1) throw std::invalid_argument("smallest_eigenpair: empty system");
  if (static_cast<int>(sys.off.size()) != n - 1 || static_cast<int>(sys.mass.size()) != n)
    throw std::invalid_argument("smallest_eigenpair: inconsistent sizes");
  for (double m : sys.mass)
    if (!(m > 0)) throw std::invalid_argument("smallest_eigenpair: mass must be positive");

  // Similarity transform to a standard symmetric tridiagonal problem.
  std::vector<double> d(n), e(std::max(0, n - 1));
  for (int i = 0; i < n; ++i) d[i] = sys.diag[i] / sys.mass[i];
  for (int i = 0; i < n - 1; ++i) e[i] = sys.off[i] / std::sqrt(sys.mass[i] * sys.mass[i + 1]);

  double lo = d[0], hi = d[0];
  for (int i = 0; i < n; ++i) {
    double r = 0;
    if (i > 0) r += std::abs(e[i - 1]);
    if (i < n - 1) r += std::abs(e[i]);
    lo = std::min(lo, d[i] - r);
    hi = std::max(hi, d[i] + r);
  }
  const double scale = std::max(std::abs(lo), std::abs(hi)) + 1e-300;

  const auto count_below = [&](double x) {
    int c = 0;
    double q = 1.0;
    for (int i = 0; i < n; ++i) {
      const double prev = (i > 0) ? e[i - 1] * e[i - 1] / q : 0.0;
      q = d[i] - x - prev;
      if (q == 0.0) q = -1e-300;
      if (q < 0) ++c;
    }
    return c;
  };

  int iters = 0;
  const int max_iters = max_iter_factor * n + 200;
  double a = lo - 1e-12 * scale, b = hi + 1e-12 * scale;
  while (b - a > 1e-14 * scale + 1e-15 * (std::abs(a) + std::abs(b))) {
    if (++iters > max_iters) throw NumericalError("smallest_eigenpair: bisection stalled");
    const double mid = 0.5 * (a + b);
    if (count_below(mid) >= 1)
      b = mid;
    else
      a = mid;
  }
  double lambda = 0.5 * (a + b);

  SmallestEigen out;
  if (n == 1) {
    out.lambda = d[0];
    out.vec = {1.0};
    out.residual = 0.0;
    out.iterations = iters;
    return out;
  }

  TriLU lu;
  lu.factor(e, [&] {
    std::vector<double> diag(n);
    for (int i = 0; i < n; ++i) diag[i] = d[i] - lambda;
    return diag;
  }(), e);

  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) y[i] = std::sin(M_PI * (i + 1) / (n + 1.0));
  for (int pass = 0; pass < 4; ++pass) {
    ++iters;
    lu.solve(y);
    double mx = 0;
    for (double v : y) mx = std::max(mx, std::abs(v));
    if (!(mx > 0)) throw NumericalError("smallest_eigenpair: inverse iteration collapsed");
    for (double& v : y) v /= mx;
  }

  // Back to the generalized problem and a final Rayleigh polish.
  std::vector<double> phi(n);
  for (int i = 0; i < n; ++i) phi[i] = y[i] / std::sqrt(sys.mass[i]);
  double mx = 0;
  int arg = 0;
  for (int i = 0; i < n; ++i)
    if (std::abs(phi[i]) > mx) {
      mx = std::abs(phi[i]);
      arg = i;
    }
  const double sign = phi[arg] > 0 ? 1.0 : -1.0;
  for (double& v : phi) v *= sign / mx;

  double num = 0, den = 0;
  for (int i = 0; i < n; ++i) {
    double kv = sys.diag[i] * phi[i];
    if (i > 0) kv += sys.off[i - 1] * phi[i - 1];
    if (i < n - 1) kv += sys.off[i] * phi[i + 1];
    num += phi[i] * kv;
    den += phi[i] * sys.mass[i] * phi[i];
  }
  lambda = num / den;

  double rnorm = 0, mnorm = 0;
  for (int i = 0; i < n; ++i) {
    double kv = sys.diag[i] * phi[i];
    if (i > 0) kv += sys.off[i - 1] * phi[i - 1];
    if (i < n - 1) kv += sys.off[i] * phi[i + 1];
    const double r = kv - lambda * sys.mass[i] * phi[i];
    rnorm += r * r;
    mnorm += sys.mass[i] * phi[i] * sys.mass[i] * phi[i];
  }
  out.lambda = lambda;
  out.vec = std::move(phi);
  out.residual = std::sqrt(rnorm) / (std::max(1.0, std::abs(lambda)) * std::sqrt(mnorm));
  out.iterations = iters;
  if (out.iterations > max_iters) throw NumericalError("smallest_eigenpair: iteration cap hit");
  return out;
}

TridiagSystem build_node_dirichlet(double a, double b, int n,
                                   const std::function<double(double)>& p,
                                   const std::function<double(double)>& q,
                                   const std::function<double(double)>& w) {
  if (!(b > a)) throw std::invalid_argument("build_node_dirichlet: empty interval");
  if (n < 2) throw std::invalid_argument("build_node_dirichlet: need at least 2 intervals");
  const double h = (b - a) / n;
  const int m = n - 1;
  TridiagSystem sys;
  sys.diag.resize(m);
  sys.off.resize(m - 1);
  sys.mass.resize(m);
  sys.coords.resize(m);
  for (int i = 1; i <= m; ++i) {
    const double x = a + i * h;
    const double pl = p(x - 0.5 * h), pr = p(x + 0.5 * h);
    sys.diag[i - 1] = (pl + pr) / (h * h) + q(x);
    if (i < m) sys.off[i - 1] = -pr / (h * h);
    sys.mass[i - 1] = w(x);
    sys.coords[i - 1] = x;
  }
  return sys;
}

TridiagSystem build_cell_dirichlet_natural(double a, double b, int n,
                                           const std::function<double(double)>& p,
                                           const std::function<double(double)>& q,
                                           const std::function<double(double)>& w) {
  if (!(b > a)) throw std::invalid_argument("build_cell_dirichlet_natural: empty interval");
  if (n < 2) throw std::invalid_argument("build_cell_dirichlet_natural: need at least 2 cells");
  const double h = (b - a) / n;
  TridiagSystem sys;
  sys.diag.resize(n);
  sys.off.resize(n - 1);
  sys.mass.resize(n);
  sys.coords.resize(n);
  for (int j = 0; j < n; ++j) {
    const double c = a + (j + 0.5) * h;
    const double pl = p(a + j * h);
    const double pr = p(a + (j + 1) * h);
    const double left = (j == 0) ? 2.0 * pl : pl;
    sys.diag[j] = (left + pr) / (h * h) + q(c);
    if (j < n - 1) sys.off[j] = -pr / (h * h);
    sys.mass[j] = w(c);
    sys.coords[j] = c;
  }
  return sys;
}

}  // namespace acf
