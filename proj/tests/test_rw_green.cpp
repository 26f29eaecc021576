#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sawlab/rw_green.hpp"

using namespace sawlab;

namespace {

// d = 1: C(x) = s^{|x|} / sqrt(1 - 4 mu^2), s = (1 - sqrt(1 - 4 mu^2)) / (2 mu)
double c1d(double mu, int x) {
  const double w = std::sqrt(1 - 4 * mu * mu);
  return std::pow((1 - w) / (2 * mu), std::abs(x)) / w;
}

}  // namespace

TEST_CASE("m0 formula") {
  for (int d : {1, 2, 3, 5}) {
    const RwParams c{d, 1.0 / (2 * d)};
    CHECK(m0_of_mu(c) == 0.0);
    const RwParams p{d, 0.3 / (2 * d)};
    const double m0 = m0_of_mu(p);
    CHECK(std::cosh(m0) == doctest::Approx(1 + (1 - p.mu_omega()) / (2 * p.mu)).epsilon(1e-13));
  }
  // m0^2 / (|Omega| (1 - mu|Omega|)) -> 1 near criticality
  const RwParams p{3, (1 - 1e-3) / 6};
  const double m0 = m0_of_mu(p);
  CHECK(m0 * m0 / (6 * (1 - p.mu_omega())) == doctest::Approx(1.0).epsilon(0.01));
  CHECK_THROWS_AS(m0_of_mu(RwParams{3, 0.2}), PreconditionError);
}

TEST_CASE("d = 1 series against the closed form") {
  for (double mu : {0.1, 0.3, 0.45}) {
    const RwParams p{1, mu};
    const int N = series_order(p, 1e-15);
    const GreenSeries s = green_series(p, Box::centered(1, 6), N);
    for (int x = -6; x <= 6; ++x) CHECK(s.C.at(Point{x}) == doctest::Approx(c1d(mu, x)).epsilon(1e-12));
  }
}

TEST_CASE("series and quadrature agree in d = 2 and d = 3") {
  for (int d : {2, 3}) {
    const RwParams p{d, 0.3 / d};
    const GreenSeriesTable t = green_series_table(p, 3, series_order(p, 1e-15));
    for (const Point& x : orbit_reps(d, 3)) {
      const QuadratureResult q = green_quadrature(p, x, 16);
      CHECK(std::abs(q.value - t.C.at(x)) < 1e-10);
    }
  }
}

TEST_CASE("stencil identity within the certificate") {
  const RwParams p{3, 0.12};
  const int N = series_order(p, 1e-14);
  const GreenSeries s = green_series(p, Box::centered(3, 4), N);
  const LatticeField lhs = convolve(rw_kernel(p), s.C, Box::centered(3, 3));
  for (const auto& [x, v] : lhs.entries()) CHECK(std::abs(v - (x.is_origin() ? 1.0 : 0.0)) <= 2 * s.certificate() + 1e-15);
}

TEST_CASE("geometric sum of the Green function") {
  const RwParams p{3, 0.1};
  const int N = series_order(p, 1e-15);
  const GreenSeriesTable t = green_series_table(p, N, N);
  CHECK(t.leakage == 0.0);
  CHECK(t.C.sum() == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("whole-box table from the cosine transform") {
  const RwParams p{3, 0.14};
  const GreenTable g = green_table(p, 4, 1e-12);
  const GreenSeriesTable t = green_series_table(p, 4, series_order(p, 1e-15));
  for (const Point& x : orbit_reps(3, 4)) CHECK(std::abs(g.at(x) - t.C.at(x)) <= g.alias_bound + t.certificate() + 1e-13);
  CHECK(g.at(Point{-1, 2, 0}) == doctest::Approx(t.C.at(Point{2, 1, 0})));
}

TEST_CASE("critical Watson value in d = 3") {
  // C_{mu_c}(0) = 1.516386059...
  const QuadratureResult q = green_quadrature(RwParams{3, 1.0 / 6}, Point(3), 32, 1e-5, 512);
  CHECK(q.value == doctest::Approx(1.516386059).epsilon(1e-5));
}

TEST_CASE("exponential bound with the martingale constant") {
  const RwParams p{2, 0.2};
  const double m0 = m0_of_mu(p);
  const double c0 = 1 / (1 - p.mu_omega());
  const GreenSeriesTable t = green_series_table(p, 6, series_order(p, 1e-15));
  for (const Point& x : orbit_reps(2, 6)) CHECK(t.C.at(x) <= c0 * std::exp(-m0 * x.norm_inf()) + 1e-14);
}

TEST_CASE("rw decay bound scan shows no growth") {
  const RwBoundReport r = verify_rw_bound(3, {0.5, 0.9, 0.99}, 9, 0.5);
  CHECK_FALSE(r.growth);
  CHECK(r.a0_empirical > 0);
  CHECK(std::isfinite(r.a0_empirical));
}

TEST_CASE("kernel and preconditions") {
  const LatticeField k = rw_kernel(RwParams{2, 0.2});
  CHECK(k.sum() == doctest::Approx(1 - 0.8));
  CHECK_THROWS_AS(green_series(RwParams{2, -0.1}, Box::centered(2, 1), 3), PreconditionError);
  CHECK_THROWS_AS(green_quadrature(RwParams{3, 1.0 / 6}, Point(3), 8, 1e-14, 16), BudgetError);
}
