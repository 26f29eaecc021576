#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "sawlab/torus_plateau.hpp"

using namespace sawlab;

namespace {

// every nearest-neighbour walk of exactly n steps on Z^d
void for_each_walk(int d, int n, const std::function<void(const WalkRecord&)>& f) {
  WalkRecord w;
  w.sites.push_back(Point(d));
  std::function<void()> rec = [&]() {
    if (w.length() == n) {
      f(w);
      return;
    }
    for (int i = 0; i < d; ++i)
      for (int s : {1, -1}) {
        w.sites.push_back(w.sites.back() + Point::unit(d, i, s));
        rec();
        w.sites.pop_back();
      }
  };
  rec();
}

}  // namespace

TEST_CASE("unfolding") {
  CHECK(unfold(WalkRecord{{Point(2)}}, 3).sites.size() == 1);
  // 0 -> 1 -> 2 -> 0 -> 1 on the r = 3 torus, written in the domain {-1, 0, 1}
  const WalkRecord t{{Point{0}, Point{1}, Point{-1}, Point{0}, Point{1}}};
  const WalkRecord u = unfold(t, 3);
  REQUIRE(u.sites.size() == 5);
  for (int i = 0; i < 5; ++i) CHECK(u.sites[static_cast<std::size_t>(i)] == Point{i});
  CHECK(project_walk(u, 3).sites == t.sites);
  const WalkRecord bad{{Point{0, 0}, Point{1, 1}}};
  CHECK_THROWS_AS(unfold(bad, 3), PreconditionError);
}

TEST_CASE("unfold inverts projection on all short walks") {
  for (int n = 0; n <= 6; ++n)
    for_each_walk(2, n, [](const WalkRecord& w) { REQUIRE(unfold(project_walk(w, 3), 3).sites == w.sites); });
}

TEST_CASE("interaction weights") {
  const WalkRecord w{{Point{0}, Point{1}, Point{2}, Point{3}, Point{4}}};
  const Interaction k = interaction_weights(w, 3);
  CHECK(k.K == 1);
  CHECK(k.Kplus == 0);
  CHECK(k.KT == 0);
  // a SAW of diameter < r never meets itself mod r
  const WalkRecord small{{Point{0, 0}, Point{1, 0}, Point{1, 1}, Point{0, 1}}};
  CHECK(interaction_weights(small, 3).Kplus == 1);
  for (int n = 0; n <= 7; ++n)
    for_each_walk(2, n, [](const WalkRecord& w) {
      const Interaction i = interaction_weights(w, 3);
      REQUIRE(i.KT == i.K * i.Kplus);
    });
}

TEST_CASE("d = 1, r = 3 discrepancy is z^4 + z^5") {
  const Discrepancy d = interaction_discrepancy(1, 3, 0.5, 5, Point{1});
  CHECK(d.by_length == std::vector<std::uint64_t>{0, 0, 0, 0, 1, 1});
  CHECK(d.value == 0.5 * 0.5 * 0.5 * 0.5 * 1.5);
  const double z = 0.3;
  const PsiSums ps = psi_sums(two_point(count_saws(1, 5), z), two_point(count_saws(1, 5, 3), z), 3, Point{1});
  CHECK(ps.psi - ps.psiT == doctest::Approx(std::pow(z, 4) + std::pow(z, 5)).epsilon(1e-13));
}

TEST_CASE("no discrepancy below the torus side") {
  for (int r : {3, 4})
    for (int n = 0; n < r; ++n) {
      const Discrepancy d = interaction_discrepancy(2, r, 0.2, n, Point{1, 0});
      CHECK(d.value == 0.0);
      const PsiSums ps = psi_sums(two_point(count_saws(2, n), 0.2), two_point(count_saws(2, n, r), 0.2), r, Point{1, 0});
      CHECK(ps.psiT == doctest::Approx(ps.psi).epsilon(1e-14));
    }
}

TEST_CASE("psi sums need matched truncation") {
  CHECK_THROWS_AS(psi_sums(two_point(count_saws(2, 4), 0.1), two_point(count_saws(2, 5, 3), 0.1), 3, Point{0, 0}),
                  PreconditionError);
  const PsiSums zero = psi_sums(two_point(count_saws(2, 5), 0.0), two_point(count_saws(2, 5, 3), 0.0), 3, Point{1, 0});
  CHECK(zero.psi == 0.0);
  CHECK(zero.psiT == 0.0);
}

TEST_CASE("discrepancy equals the psi difference in d = 2") {
  const double z = 0.1;
  const SawCounts cz = count_saws(2, 6);
  const SawCounts ct = count_saws(2, 6, 3);
  const TruncatedSeries G = two_point(cz, z), GT = two_point(ct, z);
  for (const Point& x : {Point{0, 0}, Point{1, 0}, Point{1, 1}, Point{-1, 1}}) {
    const PsiSums ps = psi_sums(G, GT, 3, x);
    const Discrepancy d = interaction_discrepancy(2, 3, z, 6, x);
    CHECK(std::abs((ps.psi - ps.psiT) - d.value) < 1e-14);
    CHECK(ps.psi >= ps.psiT);
    CHECK(ps.psiT >= 0);
  }
}

TEST_CASE("lattice tail sums") {
  CHECK(lattice_tail_sum(5, 0.0, 2, 0.5, 4, Point(5)).value == 0.0);
  const TailSum big = lattice_tail_sum(5, 1.0, 2, 50.0 / 4, 4, Point(5));
  CHECK(big.value < 1e-15);
  CHECK(big.remainder < 1e-15);
  // nu r = 2: ratio to nu^{-2} r^{-d} e^{-nu r / 4} stable in r
  std::vector<double> ratios;
  for (int r : {4, 6, 8}) {
    const double nu = 2.0 / r;
    const TailSum s = lattice_tail_sum(5, 1.0, 2, nu, r, Point(5));
    CHECK(s.remainder < 1e-3 * s.value);
    ratios.push_back(s.value / (std::pow(nu, -2) * std::pow(r, -5.0) * std::exp(-nu * r / 4)));
  }
  for (double q : ratios) CHECK(q == doctest::Approx(ratios.front()).epsilon(0.05));
}

TEST_CASE("enumerated plateau report") {
  PlateauOptions opt;
  opt.zc = 0.379;
  const PlateauReport rep = plateau_report_enum(2, 3, {0.05, 0.1, 0.2}, 8, opt);
  CHECK(rep.psi_order);
  CHECK(rep.upper_pass);
  for (const auto& row : rep.rows) {
    // G^T <= sum_u G(x + r u) at matched truncation
    CHECK(row.GT <= row.G + row.psi + 1e-15);
  }
  CHECK(rep.rows.size() == 3 * default_x_set(2, 3).size());
  // n_max < r: no walk feels the wrap-around, so psi^T = psi
  const PlateauReport small = plateau_report_enum(2, 5, {0.1}, 4, opt);
  CHECK(small.upper_pass);
  for (const auto& row : small.rows) CHECK(row.psiT == doctest::Approx(row.psi).epsilon(1e-14));
}

TEST_CASE("box-confined walks are a lower bound for the torus function") {
  // walks with all coordinates in [-1, 1] on r = 4 project injectively
  const int r = 4;
  const double z = 0.2;
  const TruncatedSeries GT = two_point(count_saws(2, 7, r), z);
  std::map<Point, double> confined;
  for (int n = 0; n <= 7; ++n)
    for_each_walk(2, n, [&](const WalkRecord& w) {
      if (interaction_weights(w, 1000).K == 0) return;
      for (const Point& p : w.sites)
        if (p.norm_inf() > 1) return;
      confined[w.sites.back()] += std::pow(z, n);
    });
  for (const auto& [x, v] : confined) CHECK(GT.G.at(project_torus(x, r).coords) >= v - 1e-15);
}
