#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "acf/spectral.hpp"
#include "acf/witness.hpp"

using namespace acf;

namespace {

constexpr double kPi = std::numbers::pi;

GridSpec centered_box(int dim, int n) {
  GridSpec g;
  g.dim = dim;
  g.h = 2.0 / (n - 1);
  g.origin = {-1, -1, dim == 3 ? -1.0 : 0.0};
  g.extents = {n, n, dim == 3 ? n : 1};
  return g;
}

std::vector<double> probe_radii() {
  std::vector<double> r;
  for (double x = 0.20; x <= 0.601; x += 0.05) r.push_back(x);
  return r;
}

double rng_unit(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

}  // namespace

TEST_CASE("planar witness carries the advertised degrees and margin") {
  const Witness2D w = default_witness_2d();
  CHECK(w.alpha1 == doctest::Approx(10.0 / 9.0).epsilon(1e-12));
  CHECK(w.alpha2 == doctest::Approx(10.0 / 19.0).epsilon(1e-12));
  CHECK(w.alpha1 + w.alpha2 <= 1.64);
  CHECK(w.a.dim == 2);
  CHECK(w.a.a[0] == doctest::Approx(1.0));
  CHECK(w.a.a[1] == doctest::Approx(2500.0).epsilon(1e-12));

  const DisjointnessReport rep = cone_disjointness_check(w);
  CHECK(rep.disjoint);
  CHECK(rep.margin == doctest::Approx(0.031469421).epsilon(1e-5));
  CHECK(rep.overlap_lo == 0.0);
  CHECK(rep.overlap_hi == 0.0);

  double margin = 0;
  CHECK_FALSE(sector_images_overlap(0.45 * kPi, 0.05 * kPi, 4e-4, &margin));
  CHECK(margin == doctest::Approx(rep.margin).epsilon(1e-9));
  CHECK(sector_images_overlap(0.45 * kPi, 0.05 * kPi, 0.01, &margin));
  CHECK(margin == doctest::Approx(-0.406090932).epsilon(1e-5));

  // closed-form values on the sector axes; the squeeze scales the radius too
  CHECK(w.u({0, 0.5, 0}) ==
        doctest::Approx(std::pow(std::sqrt(4e-4) * 0.5, 10.0 / 9.0)).epsilon(1e-12));
  CHECK(w.v({0, -0.5, 0}) == doctest::Approx(std::pow(0.5, 10.0 / 19.0)).epsilon(1e-12));
  CHECK(w.u({0.3, -0.5, 0}) == 0.0);
  CHECK(w.v({0, 0.5, 0}) == 0.0);
  CHECK(w.u({0, 0, 0}) == 0.0);
  CHECK(w.v({0, 0, 0}) == 0.0);

  // supports never meet
  std::mt19937_64 rng(7);
  for (int s = 0; s < 2000; ++s) {
    const std::array<double, 3> x = {2 * rng_unit(rng) - 1, 2 * rng_unit(rng) - 1, 0};
    CHECK(w.u(x) * w.v(x) == 0.0);
  }
}

TEST_CASE("planar witness rejections name the offending geometry") {
  CHECK_THROWS_AS(witness_2d(0.25 * kPi, 0.25 * kPi, 0.01), std::invalid_argument);
  CHECK_THROWS_AS(witness_2d(0.0, 0.05 * kPi, 4e-4), std::invalid_argument);
  CHECK_THROWS_AS(witness_2d(0.5 * kPi, 0.05 * kPi, 4e-4), std::invalid_argument);
  CHECK_THROWS_AS(witness_2d(0.45 * kPi, 0.0, 4e-4), std::invalid_argument);
  CHECK_THROWS_AS(witness_2d(0.45 * kPi, 0.05 * kPi, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(witness_2d(0.45 * kPi, 0.05 * kPi, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(sector_images_overlap(-0.1, 0.1, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(sector_images_overlap(0.1, 0.1, 2.0), std::invalid_argument);
  try {
    witness_2d(0.45 * kPi, 0.05 * kPi, 0.01);
    CHECK(false);
  } catch (const std::invalid_argument& e) {
    const std::string what = e.what();
    CHECK(what.find("meets the partner sector") != std::string::npos);
    CHECK(what.find("0.157") != std::string::npos);
    CHECK(what.find("0.563") != std::string::npos);
  }
}

TEST_CASE("planar witness report matches cone degrees and stays subharmonic") {
  const Witness2D w = witness_2d(0.4 * kPi, 0.2 * kPi, 0.04);
  CHECK(w.alpha1 == doctest::Approx(1.25).epsilon(1e-12));
  CHECK(w.alpha2 == doctest::Approx(0.625).epsilon(1e-12));
  CHECK(cone_disjointness_check(w).margin == doctest::Approx(0.076553240).epsilon(1e-5));

  const auto radii = probe_radii();
  const WitnessReport coarse = witness_report(w, centered_box(2, 257), radii);
  CHECK(coarse.degree_u == doctest::Approx(1.25).epsilon(2e-4));
  CHECK(coarse.degree_v == doctest::Approx(0.625).epsilon(2e-4));
  CHECK(coarse.max_pointwise_product == 0.0);
  CHECK(coarse.subharmonic_violation_u <= 0.0);
  CHECK(coarse.subharmonic_violation_u >= -1.5e-3);
  CHECK(coarse.subharmonic_violation_v >= -3e-2);
  CHECK(coarse.monotonicity.monotone);
  CHECK(coarse.monotonicity.violation_budget <= 1e-2);
  double lo = 1e300, hi = 0;
  for (double j : coarse.profile.j) {
    lo = std::min(lo, j);
    hi = std::max(hi, j);
  }
  CHECK(hi / lo - 1.0 <= 0.05);  // flat product profile at the degree-sum exponent

  const WitnessReport fine = witness_report(w, centered_box(2, 513), radii);
  CHECK(fine.degree_u == doctest::Approx(1.25).epsilon(5e-5));
  CHECK(fine.subharmonic_violation_u >= 0.5 * coarse.subharmonic_violation_u);
  CHECK(fine.subharmonic_violation_v >= 0.5 * coarse.subharmonic_violation_v);
  CHECK(fine.monotonicity.violation_budget <= 0.5 * coarse.monotonicity.violation_budget);
  double flo = 1e300, fhi = 0;
  for (double j : fine.profile.j) {
    flo = std::min(flo, j);
    fhi = std::max(fhi, j);
  }
  CHECK(fhi / flo - 1.0 <= 0.6 * (hi / lo - 1.0));
}

TEST_CASE("thin default pair sharpens its profile under refinement") {
  const Witness2D w = default_witness_2d();
  const auto radii = probe_radii();
  const WitnessReport coarse = witness_report(w, centered_box(2, 257), radii);
  const WitnessReport fine = witness_report(w, centered_box(2, 513), radii);
  for (const WitnessReport* rep : {&coarse, &fine}) {
    CHECK(rep->degree_u == doctest::Approx(10.0 / 9.0).epsilon(2e-4));
    CHECK(rep->degree_v == doctest::Approx(10.0 / 19.0).epsilon(2e-4));
    CHECK(rep->max_pointwise_product == 0.0);
    CHECK(rep->subharmonic_violation_u >= -2e-3);
    CHECK(rep->monotonicity.monotone);
  }
  auto drift = [](const WitnessReport& rep) {
    double lo = 1e300, hi = 0;
    for (double j : rep.profile.j) {
      lo = std::min(lo, j);
      hi = std::max(hi, j);
    }
    return hi / lo - 1.0;
  };
  CHECK(drift(coarse) <= 0.15);
  CHECK(drift(fine) <= 0.55 * drift(coarse));
}

TEST_CASE("spatial witness certifies the band spectrum and segregation") {
  const Witness3D w = default_witness_3d();
  CHECK(w.lambda1 == doctest::Approx(1.360977624).epsilon(1e-6));
  CHECK(w.lambda1 < 2.0);
  CHECK(w.mu == doctest::Approx(0.769242933).epsilon(1e-6));
  CHECK(2.0 * w.mu < 2.0);
  CHECK(w.mu * (w.mu + 1.0) == doctest::Approx(w.lambda1).epsilon(1e-12));
  CHECK(w.mu == doctest::Approx(gamma_exponent(w.lambda1, 3)).epsilon(1e-12));
  CHECK(w.a.a[1] == doctest::Approx(200.0).epsilon(1e-12));
  CHECK(w.a.a[2] == doctest::Approx(40000.0).epsilon(1e-12));
  CHECK(w.profile.grid_size == 4096);
  CHECK(rayleigh_band(std::sin(0.42 * kPi), 0.625) >= w.lambda1);

  const DisjointnessReport rep = cone_disjointness_check(w);
  CHECK(rep.disjoint);
  CHECK(rep.margin == doctest::Approx(0.148877937).epsilon(1e-4));

  // exact homogeneity along rays
  const std::array<double, 3> ru = {0.02, 0.9, 0.1};
  const std::array<double, 3> rv = {0.1, -0.9, 0.05};
  for (double t : {0.5, 2.0}) {
    CHECK(w.u({t * ru[0], t * ru[1], t * ru[2]}) ==
          doctest::Approx(std::pow(t, w.mu) * w.u(ru)).epsilon(1e-12));
    CHECK(w.v({t * rv[0], t * rv[1], t * rv[2]}) ==
          doctest::Approx(std::pow(t, w.mu) * w.v(rv)).epsilon(1e-12));
  }

  // the evaluator reproduces the stored profile exactly at its own nodes
  for (int k : {400, 2047, 3600}) {
    const double s = w.profile.coords[k];
    const double q = std::sqrt(1.0 - s * s);
    CHECK(w.v({0.0, -q, s}) == doctest::Approx(w.profile.values[k]).epsilon(1e-12));
  }

  std::mt19937_64 rng(13);
  for (int s = 0; s < 2000; ++s) {
    const std::array<double, 3> x = {2 * rng_unit(rng) - 1, 2 * rng_unit(rng) - 1,
                                     2 * rng_unit(rng) - 1};
    CHECK(w.u(x) * w.v(x) == 0.0);
  }
}

TEST_CASE("spatial witness rejections cover spectrum and geometry") {
  CHECK_THROWS_AS(witness_3d(0.4 * kPi, 0.42 * kPi, 0.005), std::invalid_argument);
  CHECK_THROWS_AS(witness_3d(kPi, 0.42 * kPi, 0.005), std::invalid_argument);
  CHECK_THROWS_AS(witness_3d(0.8 * kPi, 0.0, 0.005), std::invalid_argument);
  CHECK_THROWS_AS(witness_3d(0.8 * kPi, 0.5 * kPi, 0.005), std::invalid_argument);
  CHECK_THROWS_AS(witness_3d(0.8 * kPi, 0.42 * kPi, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(witness_3d(0.8 * kPi, 0.42 * kPi, 0.005, 64), std::invalid_argument);
  // wide band with a mild squeeze: the image leaves the partner complement
  try {
    witness_3d(0.999 * kPi, 0.499 * kPi, 0.05);
    CHECK(false);
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("meets the partner band") != std::string::npos);
  }
}

TEST_CASE("spatial witness report keeps degrees under refinement") {
  const Witness3D w = default_witness_3d();
  const auto radii = probe_radii();
  const WitnessReport coarse = witness_report(w, centered_box(3, 65), radii);
  const WitnessReport fine = witness_report(w, centered_box(3, 129), radii);
  for (const WitnessReport* rep : {&coarse, &fine}) {
    CHECK(rep->degree_u == doctest::Approx(w.mu).epsilon(1e-3));
    CHECK(rep->degree_v == doctest::Approx(w.mu).epsilon(1e-3));
    // sphere eigenvalue recovered from the fitted degree
    const double lam = rep->degree_u * (rep->degree_u + 1.0);
    CHECK(lam == doctest::Approx(w.lambda1).epsilon(0.02));
    CHECK(rep->max_pointwise_product == 0.0);
    CHECK(rep->subharmonic_violation_u >= -5e-4);
    CHECK(rep->monotonicity.monotone);
    CHECK(rep->monotonicity.violation_budget == 0.0);
  }
  CHECK(coarse.subharmonic_violation_v >= -1.5);
  // quartic truncation shrinks like h^2 once the vertex and axis are excluded
  CHECK(fine.subharmonic_violation_v >= 0.7 * coarse.subharmonic_violation_v);
  CHECK(fine.subharmonic_violation_v <= 0.3 * coarse.subharmonic_violation_v);
  auto drift = [](const WitnessReport& rep) {
    double lo = 1e300, hi = 0;
    for (double j : rep.profile.j) {
      lo = std::min(lo, j);
      hi = std::max(hi, j);
    }
    return hi / lo - 1.0;
  };
  // the kernel smoothing floor delta >= 2h keeps the spatial profile coarse;
  // the drift must at least fall with the grid
  CHECK(drift(coarse) <= 2.6);
  CHECK(drift(fine) <= 0.65 * drift(coarse));
}

TEST_CASE("witness report rejects mismatched grids and short radius lists") {
  const Witness2D w2 = witness_2d(0.4 * kPi, 0.2 * kPi, 0.04);
  CHECK_THROWS_AS(witness_report(w2, centered_box(3, 17), probe_radii()),
                  std::invalid_argument);
  CHECK_THROWS_AS(witness_report(w2, centered_box(2, 65), {0.3}), std::invalid_argument);
}
