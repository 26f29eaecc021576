#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sawlab/lace.hpp"

using namespace sawlab;

namespace {

constexpr double kPi = std::numbers::pi;

LatticeField rw_field(const RwParams& p, int radius) {
  const GreenSeriesTable t = green_series_table(p, radius, series_order(p, 1e-17), 1e-17);
  return t.C.to_field();
}

}  // namespace

TEST_CASE("z = 0 recovers delta") {
  const KernelTable k = invert_to_F(LatticeField::delta(2), 0.0, 8);
  CHECK((k.F - LatticeField::delta(2)).sup_norm() < 1e-15);
  CHECK(recover_pi(k).sup_norm() < 1e-15);
}

TEST_CASE("d = 1 closed-form kernel") {
  for (double z : {0.05, 0.1, 0.2}) {
    const TruncatedSeries G = two_point(count_saws(1, 40), z);
    const KernelTable k = invert_to_F(G, 64);
    const double den = 1 - z * z;
    CHECK(k.F.at(Point{0}) == doctest::Approx((1 + z * z) / den).epsilon(1e-12));
    CHECK(k.F.at(Point{1}) == doctest::Approx(-z / den).epsilon(1e-12));
    CHECK(k.F.at(Point{-1}) == doctest::Approx(-z / den).epsilon(1e-12));
    CHECK(std::abs(k.F.at(Point{3})) < 1e-12);
    const LatticeField pi = recover_pi(k);
    CHECK(pi.at(Point{0}) == doctest::Approx(-2 * z * z / den).epsilon(1e-12));
    CHECK(k.residual < 1e-13);
  }
}

TEST_CASE("d = 1 exact series kernel") {
  // F(0) = (1+z^2)/(1-z^2) = 1 + 2 sum_k z^{2k}, F(1) = -z/(1-z^2) = -sum_k z^{2k+1}
  const SeriesKernel sk = series_kernel(count_saws(1, 12));
  REQUIRE(sk.reps.size() >= 2);
  for (std::size_t r = 0; r < sk.reps.size(); ++r) {
    const int x = sk.reps[r][0];
    for (int n = 0; n <= 12; ++n) {
      mpz_class expect = 0;
      if (x == 0) expect = n == 0 ? 1 : (n % 2 == 0 ? 2 : 0);
      if (x == 1) expect = n % 2 == 1 ? -1 : 0;
      CHECK(sk.phi[static_cast<std::size_t>(n)][r] == expect);
    }
  }
  const mpq_class z(1, 10);
  const mpq_class diff = sk.at(Point{0}, z) - (1 + z * z) / (1 - z * z);
  CHECK(std::abs(diff.get_d()) < 1e-12);
}

TEST_CASE("random walk input gives the stencil and no Pi") {
  for (double mu : {0.05, 0.1, 0.15}) {
    const RwParams p{3, mu};
    // table radius large enough that the cut-off tail is below 1e-11
    const LatticeField C = rw_field(p, 31);
    const KernelTable k = invert_to_F(C, mu, 32);
    CHECK((k.F - rw_kernel(p)).sup_norm() < 1e-10);
    CHECK(recover_pi(k).sup_norm() < 1e-10);
  }
}

TEST_CASE("near-zero transform aborts with the offending k") {
  LatticeField G(1);
  G.set(Point{0}, 0.5);
  G.set(Point{1}, 0.25);
  G.set(Point{-1}, 0.25);  // G^(pi) = 0
  try {
    invert_to_F(G, 0.5, 8, {}, 1e-16, 3, 0.1);
    FAIL("expected a precondition error");
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()).find("k=") != std::string::npos);
  }
}

TEST_CASE("infrared constant of the critical walk in d = 2") {
  const RwParams p{2, 0.25};
  const KernelTable k = rw_kernel_table(p);
  const AssumptionReport r = check_assumption({k}, {0.0}, {.m_fractions = {0}});
  // sharp constant 4 mu / pi^2; the usable K2 = 2 mu_c / pi^2 leaves half as slack
  const double sharp = 4 * p.mu / (kPi * kPi);
  CHECK(r.K2 >= 2 * p.mu_c() / (kPi * kPi));
  CHECK(r.K2 == doctest::Approx(sharp).epsilon(1e-12));
  // equality witness at k = (pi, 0): both sides equal 1 at mu_c
  const double at = even_fourier_regular(k.F, Point{8, 0}, 16) - k.F.sum();
  CHECK(at == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(at / (kPi * kPi) == doctest::Approx(sharp));
}

TEST_CASE("degenerate z = 0 kernel is flagged") {
  KernelTable k;
  k.F = LatticeField::delta(3);
  const AssumptionReport r = check_assumption({k}, {1.0});
  CHECK_FALSE(r.items[2].pass);
  CHECK(r.items[2].note.find("degenerate") != std::string::npos);
  CHECK(r.items.size() == 5);
}

TEST_CASE("massive infrared bound of the critical walk") {
  const RwParams p{3, 1.0 / 6};
  const InfraredResult r = massive_infrared_check(rw_kernel_table(p), 0.0, 8);
  // 1 - D^(k) >= 2 |k|^2 / (pi^2 d) on [-pi, pi]^d
  CHECK(r.c_lower >= 4 * p.mu / (kPi * kPi));
  CHECK(r.points == 8 * 36);
}

TEST_CASE("Pi moment sums") {
  const TruncatedSeries G = two_point(count_saws(5, 7), 0.04);
  const KernelTable k = invert_to_F(G, 16, 1e-13);
  const LatticeField pi = recover_pi(k);
  CHECK(pi_moment_sum(LatticeField(5), 3, 0) == 0.0);
  const double a1 = pi_moment_sum(pi, 1, 0), a3 = pi_moment_sum(pi, 3, 0), a3m = pi_moment_sum(pi, 3, 0.5);
  CHECK(a1 > 0);
  CHECK(a3m >= a3);
  // the support avoids the unit ball, so larger a weighs more
  double inside = 0;
  for (const auto& [x, v] : pi.entries())
    if (!x.is_origin() && x.norm() < 1) inside += std::abs(v);
  CHECK(inside == 0.0);
  CHECK(a3 >= a1);
  CHECK_THROWS_AS(pi_moment_sum(pi, 4, 0), PreconditionError);
  // RW input: Pi at residual level
  const RwParams p{5, 0.05};
  CHECK(pi_moment_sum(recover_pi(invert_to_F(rw_field(p, 10), 0.05, 16, {}, 1e-13)), 3, 0) < 1e-9);
}

TEST_CASE("four-loop diagram bounds") {
  CHECK(pi4_diagram(LatticeField::delta(2), 0.0, Point{1, 0}) == 0.0);
  const TruncatedSeries G1 = two_point(count_saws(1, 20), 0.1);
  for (int x = 0; x <= 3; ++x) {
    const Pi4Bound b = pi4_diagram_bound(G1.G, 0.0, Point{x});
    CHECK(b.direct <= b.norm_product);
    CHECK(b.direct >= 0);
  }
  const TruncatedSeries G5 = two_point(count_saws(5, 5), 0.1);
  const Pi4Bound b = pi4_diagram_bound(G5.G, 0.0, Point(5));
  CHECK(b.direct <= b.shape);
  const Pi4Bound mb = pi4_moment_bound(G5.G, 0.0, 3.0);
  CHECK(mb.direct <= mb.norm_product);
  CHECK(mb.norm_product <= mb.shape);
}

TEST_CASE("closed series bound below the golden ratio") {
  const double golden = (std::sqrt(5.0) - 1) / 2;
  CHECK(std::isfinite(lace_series_bound(1.0, 3, 0.2)));
  CHECK(std::isfinite(lace_series_bound(1.0, 3, golden * 0.99)));
  CHECK(std::isinf(lace_series_bound(1.0, 3, golden * 1.01)));
  // a = 0, s = 1/2: sum_{N>=2} N s^{N-1} = 1/(1-s)^2 - 1
  const double kappa = (-1 + std::sqrt(2.0)) / 2;  // kappa (1 + kappa) = 1/4
  CHECK(lace_series_bound(1.0, 0.0, kappa) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("series kernel agrees with Fourier recovery in d = 5") {
  const SawCounts c = count_saws(5, 7);
  const SeriesKernel sk = series_kernel(c);
  const double z = 0.02;
  const KernelTable k = invert_to_F(two_point(c, z), 16, 1e-14);
  const LatticeField fs = sk.to_field(z);
  CHECK((fs - k.F).sup_norm() < 1e-7);
  CHECK(k.residual < 1e-12);
}
