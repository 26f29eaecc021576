#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "sawlab/decomposition.hpp"

using namespace sawlab;

namespace {

LatticeField rw_field(const RwParams& p, int radius) {
  const GreenSeriesTable t = green_series_table(p, radius, series_order(p, 1e-17), 1e-17);
  return t.C.to_field();
}

}  // namespace

TEST_CASE("F = delta gives lambda 1 and mu 0") {
  KernelTable k;
  k.F = LatticeField::delta(3);
  const LambdaMu lm = match_lambda_mu(k);
  CHECK(lm.lambda == 1.0);
  CHECK(lm.mu == 0.0);
  CHECK(lm.kappa == 0.0);
  CHECK(build_E(k, lm.lambda, lm.mu).sup_norm() == 0.0);
}

TEST_CASE("random walk kernel is a fixed point") {
  for (double mu : {0.02, 0.1, 0.16}) {
    const RwParams p{3, mu};
    const LambdaMu lm = match_lambda_mu(rw_kernel_table(p));
    CHECK(lm.lambda == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(lm.mu == doctest::Approx(mu).epsilon(1e-14));
    // a few units of roundoff on entries of size one
    CHECK(build_E(rw_kernel_table(p), lm.lambda, lm.mu).sup_norm() < 1e-15);
  }
}

TEST_CASE("nonpositive denominator aborts") {
  KernelTable k;
  k.F = LatticeField(1);
  // F^(0) = -0.1 and sum |x|^2 F = 0.4
  k.F.set(Point{0}, -0.5);
  k.F.set(Point{1}, 0.2);
  k.F.set(Point{-1}, 0.2);
  CHECK_THROWS_AS(match_lambda_mu(k), PreconditionError);
}

TEST_CASE("moments of E vanish on the floating path") {
  const SawCounts c = count_saws(3, 8);
  for (double z : {0.05, 0.1, 0.15}) {
    const KernelTable k = invert_to_F(two_point(c, z), 16, 1e-15);
    const LambdaMu lm = match_lambda_mu(k);
    const LatticeField E = build_E(k, lm.lambda, lm.mu);
    double s0 = 0, s2 = 0;
    for (const auto& [x, v] : E.entries()) {
      s0 += v;
      s2 += static_cast<double>(x.norm_sq()) * v;
    }
    // relative to the size of the terms that cancel
    double a = 1 + 6 * lm.mu;
    for (const auto& [x, v] : k.F.entries()) a += lm.lambda * std::abs(v) * (1 + static_cast<double>(x.norm_sq()));
    CHECK(std::abs(s0) < 1e-12 * a);
    CHECK(std::abs(s2) < 1e-12 * a);
    CHECK(lm.lambda > 0.5);
    CHECK(lm.lambda < 2);
    CHECK(lm.mu_in_range);
    CHECK(lm.lambda_lo <= lm.lambda);
    CHECK(lm.lambda <= lm.lambda_hi);
  }
}

TEST_CASE("exact path: moments vanish as rationals") {
  for (auto [d, n] : {std::pair{1, 12}, {2, 8}, {3, 6}}) {
    const SeriesKernel sk = series_kernel(count_saws(d, n));
    for (const mpq_class& z : {mpq_class(1, 20), mpq_class(1, 10)}) {
      const ExactMatch m = match_exact(sk, z);
      CHECK(m.sum_E == 0);
      CHECK(m.sum_x2_E == 0);
      CHECK(m.lambda > 0);
    }
  }
}

TEST_CASE("remainder vanishes for random walk input") {
  const RwParams p{3, 0.1};
  const LatticeField C = rw_field(p, 31);
  const KernelTable k = invert_to_F(C, 0.1, 32);
  const LambdaMu lm = match_lambda_mu(k);
  const RemainderResult r = remainder_f(C, k, lm, 6);
  CHECK(r.within);
  double worst = 0;
  for (double v : r.f_subtract.values()) worst = std::max(worst, std::abs(v));
  CHECK(worst <= r.certificate);
  for (double v : r.f_fourier.values()) CHECK(std::abs(v) <= r.certificate);
}

TEST_CASE("z = 0 remainder") {
  const LatticeField G = LatticeField::delta(2);
  const KernelTable k = invert_to_F(G, 0.0, 8);
  const LambdaMu lm = match_lambda_mu(k);
  CHECK(lm.mu == 0.0);
  const RemainderResult r = remainder_f(G, k, lm, 3);
  for (double v : r.f_subtract.values()) CHECK(std::abs(v) < 1e-15);
  CHECK(r.within);
}

TEST_CASE("two remainder routes agree in d = 5") {
  const SawCounts c = count_saws(5, 7);
  const TruncatedSeries G = two_point(c, 0.05);
  const KernelTable k = invert_to_F(G, 16, 1e-13);
  const LambdaMu lm = match_lambda_mu(k);
  const RemainderResult r = remainder_f(G.G, k, lm, 4);
  CHECK(r.within);
  CHECK(r.discrepancy < 1e-8);
}

TEST_CASE("decay sup of synthetic fields") {
  CHECK(check_f_decay(LatticeField(3), 0.0, {2, 4}).rows.back().sup == 0.0);
  // f = <x>^{-(d-2)} exactly: the weighted sup is flat
  LatticeField f(3);
  for (const Point& x : orbit_reps(3, 8))
    for (const Point& y : orbit(x)) f.set(y, 1.0 / xvee(y));
  const DecayReport r = check_f_decay(f, 0.0, {4, 8});
  CHECK(r.rows[0].sup == doctest::Approx(1.0));
  CHECK(std::abs(r.drift) < 1e-12);
  CHECK_FALSE(r.growth);
  // slower decay shows up as growth
  LatticeField g(3);
  for (const Point& x : orbit_reps(3, 8))
    for (const Point& y : orbit(x)) g.set(y, std::pow(xvee(y), -0.5));
  CHECK(check_f_decay(g, 0.0, {4, 8}).growth);
  // the symmetric-table overload sees the same numbers
  SymmetricTable t(3, 8);
  for (std::size_t i = 0; i < t.size(); ++i) t.values()[i] = std::pow(xvee(t.reps()[i]), -0.5);
  const DecayReport rt = weighted_sup(t, 1.0, 0.0, DecayWeight::Tilt, {4, 8});
  CHECK(rt.rows.back().sup == doctest::Approx(check_f_decay(g, 0.0, {4, 8}).rows.back().sup));
}

TEST_CASE("E bound") {
  const EBound zero = check_E_bound(LatticeField(3), 0.0, 8, 1.0);
  CHECK(zero.c == 0.0);
  const SawCounts c = count_saws(5, 6);
  const KernelTable k = invert_to_F(two_point(c, 0.05), 16, 1e-13);
  const LambdaMu lm = match_lambda_mu(k);
  const LatticeField E = build_E(k, lm.lambda, lm.mu);
  const EBound b0 = check_E_bound(E, 0.0, 8, 1.0);
  CHECK(std::abs(b0.E0) < 1e-12);
  CHECK(std::isfinite(b0.c));
  const EBound b16 = check_E_bound(E, 0.0, 16, 1.0);
  CHECK(b16.c <= 2 * b0.c + 1e-12);
}

TEST_CASE("tilted convolution identity") {
  const RwParams p{2, 0.15};
  const LatticeField C = rw_field(p, 6);
  LatticeField E(2);
  E.set(Point{0, 0}, 0.2);
  for (int i = 0; i < 2; ++i)
    for (int s : {1, -1}) E.set(Point::unit(2, i, s), -0.05);
  const LatticeField G = two_point(count_saws(2, 5), 0.1).G;
  CHECK(tilted_consistency(C, E, G, 0.3) < 1e-13);
}

TEST_CASE("mass ratio constant") {
  const double m0 = m0_of_mu(RwParams{5, 0.08});
  CHECK(mass_ratio_constant(5, {m0}, {0.08}) == doctest::Approx(1.0));
}

TEST_CASE("E bound matches a direct Fourier sum with tilt") {
  LatticeField E(3);
  E.set(Point{0, 0, 0}, 0.3);
  for (const Point& x : orbit(Point{1, 0, 0})) E.set(x, -0.04);
  for (const Point& x : orbit(Point{2, 1, 0})) E.set(x, 0.002);
  const double m = 0.2;
  const int M = 6;
  double best = 0;
  for (int a = 0; a < M; ++a)
    for (int b = 0; b < M; ++b)
      for (int c = 0; c < M; ++c) {
        const double k[3] = {orthant_momentum(a, M), orthant_momentum(b, M), orthant_momentum(c, M)};
        std::complex<double> s = 0;
        for (const auto& [x, v] : E.entries())
          s += v * std::exp(m * x[0]) * std::polar(1.0, k[0] * x[0]) * std::cos(k[1] * x[1]) * std::cos(k[2] * x[2]);
        const double kn = std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
        best = std::max(best, std::abs(s) / std::pow(kn + m, 2.5));
      }
  CHECK(check_E_bound(E, m, M, 0.5).c == doctest::Approx(best).epsilon(1e-12));
}
