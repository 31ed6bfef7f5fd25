#include <doctest.h>

#include <cmath>

#include "acf/functional.hpp"

using namespace acf;

namespace {

GridSpec square_grid(int n, double half = 1.0) {
  GridSpec g;
  g.dim = 2;
  g.origin = {-half, -half, 0};
  g.h = 2.0 * half / n;
  g.extents = {n + 1, n + 1, 1};
  return g;
}

GridSpec cube_grid(int n, double half = 1.0) {
  GridSpec g;
  g.dim = 3;
  g.origin = {-half, -half, -half};
  g.h = 2.0 * half / n;
  g.extents = {n + 1, n + 1, n + 1};
  return g;
}

double xplus(const std::array<double, 3>& x) { return std::max(x[0], 0.0); }
double xminus(const std::array<double, 3>& x) { return std::max(-x[0], 0.0); }

}  // namespace

TEST_CASE("planar energy of a half-plane linear field is half the disk area") {
  // u = x1^+ has unit gradient on {x1 > 0} and the kink sits on grid lines,
  // so the only error is the cell-center approximation of the disk
  const GridSpec g = square_grid(256);
  const SampledField u = rasterize(g, xplus);
  for (double r : {0.4, 0.6, 0.85}) {
    const double e = weighted_dirichlet(isotropic(2), u, {0, 0, 0}, r, 4.0 * g.h);
    CHECK(e == doctest::Approx(0.5 * M_PI * r * r).epsilon(0.01));
  }
}

TEST_CASE("planar energy refines toward the exact value") {
  const double r = 0.7;
  const double exact = 0.5 * M_PI * r * r;
  double coarse = 0, fine = 0;
  {
    const GridSpec g = square_grid(64);
    coarse = std::abs(weighted_dirichlet(isotropic(2), rasterize(g, xplus), {0, 0, 0}, r,
                                         4.0 * g.h) -
                      exact);
  }
  {
    const GridSpec g = square_grid(256);
    fine = std::abs(weighted_dirichlet(isotropic(2), rasterize(g, xplus), {0, 0, 0}, r,
                                       4.0 * g.h) -
                    exact);
  }
  CHECK(fine < coarse);
}

TEST_CASE("spatial energy of the half-space field matches the kernel integral") {
  // with the sharp kernel the value is pi r^2; the paraboloid core replaces
  // pi delta^2 by (4/5) pi delta^2
  const GridSpec g = cube_grid(64);
  const SampledField u = rasterize(g, xplus);
  const double delta = 4.0 * g.h;
  const double r = 0.7;
  const double e = weighted_dirichlet(isotropic(3), u, {0, 0, 0}, r, delta);
  const double exact = M_PI * r * r - 0.2 * M_PI * delta * delta;
  CHECK(e == doctest::Approx(exact).epsilon(0.02));
}

TEST_CASE("anisotropy scales the half-plane energy by its diagonal entry") {
  // A = diag(1, a2) leaves grad x1^+ energy untouched; for x2^+ it scales by a2
  const GridSpec g = square_grid(128);
  const SampledField u1 = rasterize(g, xplus);
  const SampledField u2 = rasterize(g, [](const std::array<double, 3>& x) {
    return std::max(x[1], 0.0);
  });
  const AnisotropyMatrix a = make_anisotropy(2, {1.0, 3.0, 3.0});
  const double r = 0.6;
  const double e1 = weighted_dirichlet(a, u1, {0, 0, 0}, r, 4.0 * g.h);
  const double e2 = weighted_dirichlet(a, u2, {0, 0, 0}, r, 4.0 * g.h);
  CHECK(e1 == doctest::Approx(0.5 * M_PI * r * r).epsilon(0.01));
  CHECK(e2 == doctest::Approx(3.0 * 0.5 * M_PI * r * r).epsilon(0.01));
}

TEST_CASE("classical pair has a flat product profile at exponent four") {
  const std::vector<double> radii{0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  SUBCASE("plane") {
    const GridSpec g = square_grid(256);
    const SampledField u = rasterize(g, xplus);
    const SampledField v = rasterize(g, xminus);
    const RadialProfile p =
        acf_profile(isotropic(2), u, v, {0, 0, 0}, 4.0, radii, 4.0 * g.h);
    const double c = 0.25 * M_PI * M_PI;
    for (size_t i = 0; i < p.j.size(); ++i) {
      CHECK(p.j[i] == doctest::Approx(c).epsilon(0.03));
      CHECK(p.i_left[i] == doctest::Approx(0.5 * M_PI * radii[i] * radii[i]).epsilon(0.02));
      if (i > 0) CHECK(p.i_left[i] > p.i_left[i - 1]);
    }
    const MonotonicityReport rep = monotonicity_report(p, 0.03);
    CHECK(rep.monotone);
    CHECK(rep.max_j == doctest::Approx(c).epsilon(0.03));
  }
  SUBCASE("space") {
    const GridSpec g = cube_grid(64);
    const SampledField u = rasterize(g, xplus);
    const SampledField v = rasterize(g, xminus);
    const double delta = 4.0 * g.h;
    const RadialProfile p = acf_profile(isotropic(3), u, v, {0, 0, 0}, 4.0, radii, delta);
    for (size_t i = 0; i < p.j.size(); ++i) {
      // each side carries the paraboloid-core deficit pi delta^2 / 5
      const double side = 1.0 - 0.2 * delta * delta / (radii[i] * radii[i]);
      CHECK(p.j[i] == doctest::Approx(M_PI * M_PI * side * side).epsilon(0.04));
    }
    CHECK(monotonicity_report(p, 0.05).monotone);
  }
}

TEST_CASE("monotonicity report flags a genuinely decreasing profile") {
  RadialProfile p;
  p.radii = {0.2, 0.4, 0.6, 0.8};
  p.j = {1.0, 0.9, 1.1, 0.7};
  p.i_left = p.j;
  p.i_right = {1, 1, 1, 1};
  p.slope_min = -2.0;
  const MonotonicityReport rep = monotonicity_report(p, 0.03);
  CHECK_FALSE(rep.monotone);
  CHECK(rep.violation_budget == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(rep.worst_index == 2);
  CHECK(rep.max_j == doctest::Approx(1.1));
  // generous tolerance turns the verdict around
  CHECK(monotonicity_report(p, 0.5).monotone);
}

TEST_CASE("interaction term adds the kernel-weighted coupling integral") {
  const GridSpec g = square_grid(128);
  const SampledField one = rasterize(g, [](const std::array<double, 3>&) { return 1.0; });
  InteractionSpec spec;
  spec.q = 1.0;
  spec.terms = {{1.0, 1.0}};
  const double r = 0.65;
  const double base = weighted_dirichlet(isotropic(2), one, {0, 0, 0}, r, 4.0 * g.h);
  const double pert =
      perturbed_weighted_dirichlet(isotropic(2), one, one, {0, 0, 0}, r, 4.0 * g.h, spec);
  // u^2 g(v) = 1 on the disk, planar kernel weight 1
  CHECK(base == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(pert - base == doctest::Approx(M_PI * r * r).epsilon(0.01));
}

TEST_CASE("sphere means of positive fields dominate the pinned constant") {
  const GridSpec g = cube_grid(64);
  const std::vector<double> radii{0.3, 0.5, 0.7};
  SUBCASE("constant field") {
    const SampledField u = rasterize(g, [](const std::array<double, 3>&) { return 1.0; });
    const MeanValueReport rep = mean_value_check(isotropic(3), u, {0, 0, 0}, radii);
    CHECK(rep.required == doctest::Approx(M_PI).epsilon(1e-12));
    CHECK(rep.passed);
    for (double rv : rep.ratios) CHECK(rv == doctest::Approx(4.0 * M_PI).epsilon(0.02));
  }
  SUBCASE("positive harmonic field") {
    const SampledField u = rasterize(g, [](const std::array<double, 3>& x) {
      return 1.0 + 0.2 * x[0];
    });
    const MeanValueReport rep = mean_value_check(isotropic(3), u, {0, 0, 0}, radii);
    CHECK(rep.passed);
    for (size_t i = 0; i < radii.size(); ++i) {
      const double exact = 4.0 * M_PI * (1.0 + 0.04 * radii[i] * radii[i] / 3.0);
      CHECK(rep.ratios[i] == doctest::Approx(exact).epsilon(0.02));
    }
  }
  SUBCASE("anisotropic weight keeps the constant honest") {
    const AnisotropyMatrix a = make_anisotropy(3, {1.0, 2.0, 4.0});
    const SampledField u = rasterize(g, [](const std::array<double, 3>&) { return 1.0; });
    const MeanValueReport rep = mean_value_check(a, u, {0, 0, 0}, radii);
    // ratio = int mu = (sigma2 / 3) tr(A) = (4 pi / 3) * 7 / ... over r^2
    for (double rv : rep.ratios)
      CHECK(rv == doctest::Approx(4.0 * M_PI * 7.0 / 3.0).epsilon(0.02));
    CHECK(rep.required == doctest::Approx(0.25 * 4.0 * M_PI / 4.0).epsilon(1e-12));
    CHECK(rep.passed);
  }
}

TEST_CASE("separable exponential profile passes the decay certificate") {
  // w = cosh(a x1) cosh(a x2) with 2 a^2 = M solves div(grad w) = M w, and the
  // discrete Laplacian overshoots cosh curvature, so the hypothesis holds
  const double m_const = 25.0;
  const double a = std::sqrt(0.5 * m_const);
  const GridSpec g = square_grid(128);
  const SampledField w = rasterize(g, [a](const std::array<double, 3>& x) {
    return std::cosh(a * x[0]) * std::cosh(a * x[1]);
  });
  const DecayReport rep = subsolution_decay_check(isotropic(2), m_const, 1e-9, w, 0.6);
  CHECK(rep.hypothesis_ok);
  CHECK(rep.hypothesis_worst <= 0.0);
  CHECK(rep.decay_ok);
  CHECK(rep.decay_margin > 0.0);
}

TEST_CASE("decay certificate rejects a flat positive profile") {
  // w = 1 violates div(grad w) >= M w - delta outright
  const GridSpec g = square_grid(64);
  const SampledField w = rasterize(g, [](const std::array<double, 3>&) { return 1.0; });
  const DecayReport rep = subsolution_decay_check(isotropic(2), 4.0, 1e-9, w, 0.5);
  CHECK_FALSE(rep.hypothesis_ok);
  CHECK(rep.hypothesis_worst > 1.0);
}

TEST_CASE("frequency function recovers homogeneity degrees") {
  const GridSpec g = square_grid(256);
  const std::vector<double> radii{0.3, 0.5, 0.7};
  const SampledField lin = rasterize(g, [](const std::array<double, 3>& x) { return x[0]; });
  for (double n : almgren_frequency(lin, {0, 0, 0}, radii))
    CHECK(n == doctest::Approx(1.0).epsilon(0.02));
  const SampledField quad = rasterize(g, [](const std::array<double, 3>& x) {
    return x[0] * x[0] - x[1] * x[1];
  });
  for (double n : almgren_frequency(quad, {0, 0, 0}, radii))
    CHECK(n == doctest::Approx(2.0).epsilon(0.04));
}

TEST_CASE("functional layer rejects malformed requests") {
  const GridSpec g = square_grid(32);
  const SampledField u = rasterize(g, xplus);
  // ball sticking out of the box
  CHECK_THROWS_AS(weighted_dirichlet(isotropic(2), u, {0.8, 0, 0}, 0.5, 4.0 * g.h),
                  std::invalid_argument);
  // smoothing radius under the grid resolution
  CHECK_THROWS_AS(weighted_dirichlet(isotropic(2), u, {0, 0, 0}, 0.5, 0.5 * g.h),
                  std::invalid_argument);
  // dimension mismatch between operator and field
  CHECK_THROWS_AS(weighted_dirichlet(isotropic(3), u, {0, 0, 0}, 0.5, 4.0 * g.h),
                  std::invalid_argument);
  // radii must increase
  CHECK_THROWS_AS(acf_profile(isotropic(2), u, u, {0, 0, 0}, 4.0, {0.5, 0.3}, 4.0 * g.h),
                  std::invalid_argument);
  InteractionSpec bad;
  bad.q = 0.5;
  bad.terms = {{1.0, 1.0}};
  CHECK_THROWS_AS(
      perturbed_weighted_dirichlet(isotropic(2), u, u, {0, 0, 0}, 0.5, 4.0 * g.h, bad),
      std::invalid_argument);
}
