#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <set>
#include <sstream>

#include "sawlab/saw_enum.hpp"

using namespace sawlab;

namespace {

// Every nearest-neighbour walk, kept when all sites differ.
std::vector<std::map<Point, std::uint64_t>> brute_counts(int d, int n_max, int r = 0) {
  std::vector<std::map<Point, std::uint64_t>> out(static_cast<std::size_t>(n_max) + 1);
  std::vector<Point> w{Point(d)};
  std::function<void()> rec = [&]() {
    std::set<Point> s(w.begin(), w.end());
    if (s.size() != w.size()) return;
    ++out[w.size() - 1][w.back()];
    if (static_cast<int>(w.size()) - 1 == n_max) return;
    for (int i = 0; i < d; ++i)
      for (int sg : {1, -1}) {
        Point y = w.back() + Point::unit(d, i, sg);
        if (r > 0) y = project_torus(y, r).coords;
        w.push_back(y);
        rec();
        w.pop_back();
      }
  };
  rec();
  return out;
}

}  // namespace

TEST_CASE("known totals") {
  CHECK(count_saws(2, 6).totals() == std::vector<std::uint64_t>{1, 4, 12, 36, 100, 284, 780});
  CHECK(count_saws(3, 4).totals() == std::vector<std::uint64_t>{1, 6, 30, 150, 726});
  CHECK(count_totals(2, 10) == count_saws(2, 10).totals());
  CHECK(count_totals(3, 3) == std::vector<std::uint64_t>{1, 6, 30, 150});
  CHECK(count_totals(5, 7) == count_saws(5, 7).totals());
}

TEST_CASE("both enumerators agree with exhaustive listing") {
  for (auto [d, n] : {std::pair{1, 8}, {2, 6}, {3, 4}}) {
    const auto brute = brute_counts(d, n);
    const SawCounts a = count_saws(d, n, 0, Enumerator::Dense);
    const SawCounts b = count_saws(d, n, 0, Enumerator::Sorted);
    CHECK(a == b);
    for (int k = 0; k <= n; ++k) CHECK(a.by_length[static_cast<std::size_t>(k)] == brute[static_cast<std::size_t>(k)]);
  }
}

TEST_CASE("torus counts") {
  const auto brute = brute_counts(2, 6, 3);
  const SawCounts a = count_saws(2, 6, 3, Enumerator::Dense);
  const SawCounts b = count_saws(2, 6, 3, Enumerator::Sorted);
  CHECK(a == b);
  for (int k = 0; k <= 6; ++k) CHECK(a.by_length[static_cast<std::size_t>(k)] == brute[static_cast<std::size_t>(k)]);
  // n < r: projection is a bijection on walks
  const SawCounts z = count_saws(2, 3, 0);
  const SawCounts t = count_saws(2, 3, 5);
  for (int k = 0; k <= 3; ++k) {
    std::map<Point, std::uint64_t> proj;
    for (const auto& [x, c] : z.by_length[static_cast<std::size_t>(k)]) proj[project_torus(x, 5).coords] += c;
    CHECK(proj == t.by_length[static_cast<std::size_t>(k)]);
  }
}

TEST_CASE("budget errors name the feasible depth") {
  try {
    count_saws(3, 20, 0, Enumerator::Dense, 1e6);
    FAIL("expected a budget error");
  } catch (const BudgetError& e) {
    CHECK(std::string(e.what()).find("n_max") != std::string::npos);
  }
}

TEST_CASE("d = 1 two-point function") {
  const double z = 0.3;
  const TruncatedSeries s = two_point(count_saws(1, 40), z);
  for (int x = -5; x <= 5; ++x) CHECK(s.G.at(Point{x}) == doctest::Approx(std::pow(z, std::abs(x))).epsilon(1e-14));
  const ValueWithTail chi = susceptibility(s);
  CHECK(std::abs(chi.value - (1 + z) / (1 - z)) <= chi.tail);
  // bubble: sum_{x != 0} z^{2|x|} = 2 z^2 / (1 - z^2)
  CHECK(bubble(s, 0) == doctest::Approx(2 * z * z / (1 - z * z)).epsilon(1e-12));
}

TEST_CASE("tail bound") {
  CHECK(tail_bound(2, 3, 0.1) == doctest::Approx(4 * 27 * 1e-4 / 0.7));
  CHECK_FALSE(two_point(count_saws(2, 3), 0.4).tail.has_value());
  CHECK_THROWS_AS(susceptibility(two_point(count_saws(2, 3), 0.4)), PreconditionError);
}

TEST_CASE("mass fit along the axis") {
  const TruncatedSeries s = two_point(count_saws(1, 30), 0.2);
  const MassFit f = mass_estimate(s, 1, 10);
  REQUIRE(f.ok);
  CHECK(f.m == doctest::Approx(-std::log(0.2)).epsilon(1e-10));
  const MassFit flat = mass_estimate(s, 1, 2, 5.0);
  CHECK_FALSE(flat.ok);
}

TEST_CASE("critical point estimate in d = 2") {
  const ZcEstimate e = estimate_zc(count_totals(2, 18));
  // square lattice: 0.379052277...
  CHECK(std::abs(e.zc - 0.3790523) < std::max(3 * e.uncertainty, 2e-3));
  CHECK(e.uncertainty < 0.01);
}

TEST_CASE("counts cache round trip and checksum") {
  const SawCounts c = count_saws(3, 4, 0);
  std::stringstream ss;
  write_counts(ss, c);
  const std::string text = ss.str();
  std::stringstream in(text);
  CHECK(read_counts(in) == c);
  std::string bad = text;
  bad[bad.find("\n1 1 0 0 ") + 9] = '7';
  std::stringstream in2(bad);
  CHECK_THROWS_AS(read_counts(in2), PreconditionError);
}

TEST_CASE("walks longer than the torus volume count zero") {
  const SawCounts c = count_saws(1, 6, 3);
  CHECK(c.total(1) == 2);
  CHECK(c.total(2) == 2);
  for (int n = 3; n <= 6; ++n) CHECK(c.total(n) == 0);
  CHECK(c == count_saws(1, 6, 3, Enumerator::Sorted));
}
