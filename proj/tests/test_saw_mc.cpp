#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "sawlab/saw_enum.hpp"
#include "sawlab/saw_mc.hpp"

using namespace sawlab;

TEST_CASE("site set against std::set") {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> c(-40, 40);
  SiteSet s(3);
  std::set<Point> ref;
  std::vector<Point> stack;
  for (int step = 0; step < 20000; ++step) {
    if (stack.empty() || rng() % 3 != 0) {
      Point x{c(rng), c(rng), c(rng)};
      if (ref.count(x)) continue;
      s.insert(x);
      ref.insert(x);
      stack.push_back(x);
    } else {
      s.erase(stack.back());
      ref.erase(stack.back());
      stack.pop_back();
    }
    if (step % 97 == 0) {
      const Point probe{c(rng), c(rng), c(rng)};
      CHECK(s.contains(probe) == (ref.count(probe) > 0));
    }
  }
  CHECK(s.size() == ref.size());
  for (const Point& x : ref) CHECK(s.contains(x));
}

TEST_CASE("walks stay self-avoiding") {
  for (int torus : {0, 3}) {
    BsChain ch(2, torus, 0.35, 42);
    for (int t = 0; t < 20000; ++t) {
      ch.step();
      const auto& w = ch.walk();
      std::set<Point> s(w.begin(), w.end());
      REQUIRE(s.size() == w.size());
      REQUIRE(w.front().is_origin());
    }
  }
}

TEST_CASE("z = 0 stays at the empty walk") {
  BsChain ch(3, 0, 0.0, 1);
  for (int t = 0; t < 1000; ++t) ch.step();
  CHECK(ch.length() == 0);
  CHECK(ch.appends_proposed == 0);
}

TEST_CASE("d = 1 stationary endpoint law") {
  McConfig c;
  c.dim = 1;
  c.z = 0.5;
  c.steps = 4000000;
  c.burnin = 10000;
  c.thin = 4;
  c.chains = 2;
  c.seed = 9;
  const McRun run = run_mc(c);
  const Estimate chi = estimate_chi(run);
  CHECK(std::abs(chi.value - 3.0) < 4 * chi.error + 1e-3);
  const TwoPointEstimate G = estimate_two_point(run);
  CHECK(G.G.at(Point(1)) == 1.0);
  for (int x : {1, -2, 3}) CHECK(std::abs(G.G.at(Point{x}) - std::pow(0.5, std::abs(x))) < 4 * G.error.at(Point{x}));
}

TEST_CASE("toy torus chain: stationary law and balanced flows") {
  // d = 1, r = 3: walks {}, {+1}, {-1}, {+1,+1}, {-1,-1}, weights z^{|w|}
  const double z = 0.4;
  BsChain ch(1, 3, z, 77);
  auto key = [](const std::vector<Point>& w) {
    std::vector<int> v;
    for (const Point& p : w) v.push_back(p[0]);
    return v;
  };
  std::map<std::vector<int>, double> visits;
  std::map<std::pair<std::vector<int>, std::vector<int>>, double> flow;
  const int T = 2000000;
  auto prev = key(ch.walk());
  for (int t = 0; t < T; ++t) {
    ch.step();
    auto cur = key(ch.walk());
    visits[cur] += 1;
    if (cur != prev) flow[{prev, cur}] += 1;
    prev = cur;
  }
  CHECK(visits.size() == 5);
  const double Z = 1 + 2 * z + 2 * z * z;
  for (const auto& [w, n] : visits) {
    const double expect = std::pow(z, static_cast<double>(w.size()) - 1) / Z;
    CHECK(n / T == doctest::Approx(expect).epsilon(0.02));
  }
  for (const auto& [edge, n] : flow) {
    const double back = flow[{edge.second, edge.first}];
    CHECK(std::abs(n - back) < 5 * std::sqrt(n + back) + 1);
  }
}

TEST_CASE("d = 2 estimates against enumeration") {
  const double z = 0.1;
  McConfig c;
  c.dim = 2;
  c.z = z;
  c.steps = 4000000;
  c.burnin = 100000;
  c.chains = 2;
  c.seed = 5;
  const TruncatedSeries ex = two_point(count_saws(2, 14), z);
  {
    const McRun run = run_mc(c);
    const TwoPointEstimate G = estimate_two_point(run, true);
    const Point e1{1, 0};
    CHECK(std::abs(G.G.at(e1) - ex.G.at(e1)) < 3 * G.error.at(e1));
  }
  {
    c.torus = 5;
    const McRun run = run_mc(c);
    const TruncatedSeries ext = two_point(count_saws(2, 14, 5), z);
    const TwoPointEstimate G = estimate_two_point(run, true);
    const Point x{1, 1};
    CHECK(std::abs(G.G.at(x) - ext.G.at(x)) < 3 * G.error.at(x) + *ext.tail);
  }
  {
    c.torus = 0;
    c.z = 0.2;
    const McRun run = run_mc(c);
    const Estimate chi = estimate_chi(run);
    const ValueWithTail e = susceptibility(two_point(count_saws(2, 16), 0.2));
    CHECK(chi.value > e.value - 3 * chi.error);
    CHECK(chi.value < e.value + e.tail + 3 * chi.error);
  }
}

TEST_CASE("independent seeds agree and equal seeds repeat") {
  McConfig c;
  c.dim = 3;
  c.z = 0.15;
  c.steps = 1000000;
  c.burnin = 50000;
  c.chains = 2;
  c.seed = 100;
  const McRun a = run_mc(c);
  const McRun a2 = run_mc(c);
  CHECK(a.merged() == a2.merged());
  c.seed = 200;
  const McRun b = run_mc(c);
  const Estimate ca = estimate_chi(a), cb = estimate_chi(b);
  CHECK(std::abs(ca.value - cb.value) < 3 * std::hypot(ca.error, cb.error));
  CHECK(chain_seed(1, 0) != chain_seed(1, 1));
}

TEST_CASE("no origin visits means no estimate") {
  McRun run;
  run.config.dim = 1;
  McChainResult ch;
  ch.blocks.push_back({{Point{1}, 5}});
  run.chains.push_back(ch);
  CHECK_THROWS_AS(estimate_chi(run), PreconditionError);
}

TEST_CASE("shell averages") {
  McConfig c;
  c.dim = 2;
  c.torus = 4;
  c.z = 0.2;
  c.steps = 200000;
  c.burnin = 1000;
  const McRun run = run_mc(c);
  const Estimate s0 = estimate_shell(run, 0);
  CHECK(s0.value == 1.0);
  CHECK_THROWS_AS(estimate_shell(run, 3), PreconditionError);
}
