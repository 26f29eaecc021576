#include "sawlab/saw_mc.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <set>

namespace sawlab {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t chain_seed(std::uint64_t seed, int chain) {
  return splitmix64(seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(chain + 1));
}

SiteSet::SiteSet(int dim) : dim_(dim), bits_(std::min(63 / dim, 32)), table_(1024, 0) {}

std::uint64_t SiteSet::key(const Point& x) const {
  const std::int64_t half = std::int64_t{1} << (bits_ - 1);
  std::uint64_t k = 0;
  for (int i = 0; i < dim_; ++i) {
    const std::int64_t c = x[i] + half;
    if (c <= 0 || c >= 2 * half) throw BudgetError("walk left the packable coordinate range");
    k = (k << bits_) | static_cast<std::uint64_t>(c);
  }
  return k;  // never 0 since every packed coordinate is positive
}

std::size_t SiteSet::slot(std::uint64_t k) const {
  return static_cast<std::size_t>(splitmix64(k)) & (table_.size() - 1);
}

bool SiteSet::contains(const Point& x) const {
  const std::uint64_t k = key(x);
  const std::size_t mask = table_.size() - 1;
  for (std::size_t i = slot(k);; i = (i + 1) & mask) {
    if (table_[i] == k) return true;
    if (table_[i] == 0) return false;
  }
}

void SiteSet::grow() {
  std::vector<std::uint64_t> old(table_.size() * 2, 0);
  old.swap(table_);
  const std::size_t mask = table_.size() - 1;
  for (std::uint64_t k : old) {
    if (k == 0) continue;
    std::size_t i = slot(k);
    while (table_[i] != 0) i = (i + 1) & mask;
    table_[i] = k;
  }
}

void SiteSet::insert(const Point& x) {
  if (2 * (count_ + 1) > table_.size()) grow();
  const std::uint64_t k = key(x);
  const std::size_t mask = table_.size() - 1;
  std::size_t i = slot(k);
  while (table_[i] != 0) {
    if (table_[i] == k) return;
    i = (i + 1) & mask;
  }
  table_[i] = k;
  ++count_;
}

void SiteSet::erase(const Point& x) {
  const std::uint64_t k = key(x);
  const std::size_t mask = table_.size() - 1;
  std::size_t i = slot(k);
  while (table_[i] != k) {
    if (table_[i] == 0) return;
    i = (i + 1) & mask;
  }
  // backward shift
  std::size_t j = i;
  for (;;) {
    table_[i] = 0;
    for (;;) {
      j = (j + 1) & mask;
      if (table_[j] == 0) {
        --count_;
        return;
      }
      const std::size_t home = slot(table_[j]);
      const bool stays = i <= j ? (i < home && home <= j) : (i < home || home <= j);
      if (!stays) break;
    }
    table_[i] = table_[j];
    i = j;
  }
}

BsChain::BsChain(int dim, int torus, double z, std::uint64_t seed)
    : dim_(dim), torus_(torus), p_add_(2.0 * dim * z / (1 + 2.0 * dim * z)), rng_(seed), set_(dim) {
  require(dim >= 1 && dim <= kMaxDim, "dimension out of range");
  require(z >= 0, "z must be nonnegative");
  require(torus == 0 || torus >= 3, "torus side must be at least 3");
  if (torus_ > 0) {
    double sites = std::pow(static_cast<double>(torus_), dim_);
    if (sites > 1e8) throw BudgetError("torus too large for a dense occupancy table");
    dense_.assign(static_cast<std::size_t>(sites), 0);
  }
  walk_.push_back(Point(dim));
  occupy(walk_.back(), true);
}

bool BsChain::occupied(const Point& x) const {
  if (torus_ > 0) return dense_[torus_index(x, torus_)] != 0;
  return set_.contains(x);
}

void BsChain::occupy(const Point& x, bool on) {
  if (torus_ > 0) {
    dense_[torus_index(x, torus_)] = on ? 1 : 0;
  } else if (on) {
    set_.insert(x);
  } else {
    set_.erase(x);
  }
}

void BsChain::step() {
  const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  if (u < p_add_) {
    ++appends_proposed;
    const int dir = std::min(static_cast<int>(u / p_add_ * 2 * dim_), 2 * dim_ - 1);
    Point y = walk_.back();
    y[dir / 2] += (dir % 2 == 0) ? 1 : -1;
    if (torus_ > 0) y[dir / 2] = torus_reduce(y[dir / 2], torus_);
    if (occupied(y)) return;
    occupy(y, true);
    walk_.push_back(y);
    ++appends_accepted;
  } else {
    ++deletes_proposed;
    if (walk_.size() == 1) return;
    occupy(walk_.back(), false);
    walk_.pop_back();
    ++deletes_accepted;
  }
#ifndef NDEBUG
  assert((torus_ > 0 ? 0 : set_.size()) == (torus_ > 0 ? 0 : walk_.size()));
#endif
}

std::map<Point, std::uint64_t> McRun::merged() const {
  std::map<Point, std::uint64_t> out;
  for (const auto& c : chains)
    for (const auto& b : c.blocks)
      for (const auto& [x, n] : b) out[x] += n;
  return out;
}

std::uint64_t McRun::samples() const {
  std::uint64_t s = 0;
  for (const auto& c : chains)
    for (const auto& b : c.blocks)
      for (const auto& kv : b) s += kv.second;
  return s;
}

double McRun::append_acceptance() const {
  double p = 0, a = 0;
  for (const auto& c : chains) {
    p += static_cast<double>(c.appends_proposed);
    a += static_cast<double>(c.appends_accepted);
  }
  return p > 0 ? a / p : 0.0;
}

namespace {

McChainResult run_chain(const McConfig& cfg, int index) {
  McChainResult r;
  r.seed = chain_seed(cfg.seed, index);
  BsChain chain(cfg.dim, cfg.torus, cfg.z, r.seed);
  double len = 0;
  for (std::uint64_t t = 0; t < cfg.burnin; ++t) {
    chain.step();
    len += chain.length();
  }
  r.burnin_mean_length = cfg.burnin > 0 ? len / static_cast<double>(cfg.burnin) : 0.0;
  r.thin = cfg.thin > 0 ? cfg.thin
                        : std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(2.0 * cfg.dim * r.burnin_mean_length)));
  const std::uint64_t samples = cfg.steps / r.thin;
  const auto nb = static_cast<std::uint64_t>(cfg.blocks);
  std::vector<std::unordered_map<Point, std::uint64_t, PointHash>> hist(nb);
  std::uint64_t taken = 0;
  len = 0;
  for (std::uint64_t t = 1; t <= cfg.steps; ++t) {
    chain.step();
    len += chain.length();
    if (t % r.thin == 0 && taken < samples) {
      ++hist[taken * nb / samples][chain.endpoint()];
      ++taken;
    }
  }
  r.mean_length = cfg.steps > 0 ? len / static_cast<double>(cfg.steps) : 0.0;
  r.appends_proposed = chain.appends_proposed;
  r.appends_accepted = chain.appends_accepted;
  r.deletes_proposed = chain.deletes_proposed;
  r.deletes_accepted = chain.deletes_accepted;
  for (auto& h : hist) r.blocks.emplace_back(h.begin(), h.end());
  return r;
}

struct BlockCounts {
  std::vector<double> num, den;
};

Estimate jackknife(const BlockCounts& b) {
  const std::size_t B = b.num.size();
  double N = 0, D = 0;
  for (std::size_t i = 0; i < B; ++i) {
    N += b.num[i];
    D += b.den[i];
  }
  if (D <= 0) throw PreconditionError("origin never visited: no estimate");
  Estimate e{N / D, 0};
  if (B < 2) return e;
  std::vector<double> loo(B);
  double mean = 0;
  for (std::size_t i = 0; i < B; ++i) {
    const double d = D - b.den[i];
    if (d <= 0) return {e.value, std::numeric_limits<double>::infinity()};
    loo[i] = (N - b.num[i]) / d;
    mean += loo[i];
  }
  mean /= static_cast<double>(B);
  double var = 0;
  for (double v : loo) var += (v - mean) * (v - mean);
  e.error = std::sqrt(var * static_cast<double>(B - 1) / static_cast<double>(B));
  return e;
}

BlockCounts collect(const McRun& run, const std::function<double(const Point&)>& weight, bool den_total = false) {
  BlockCounts bc;
  const Point origin(run.config.dim);
  for (const auto& c : run.chains)
    for (const auto& blk : c.blocks) {
      double num = 0, den = 0;
      for (const auto& [x, n] : blk) {
        num += weight(x) * static_cast<double>(n);
        if (den_total || x == origin) den += static_cast<double>(n);
      }
      bc.num.push_back(num);
      bc.den.push_back(den);
    }
  return bc;
}

}  // namespace

McRun run_mc(const McConfig& cfg) {
  require(cfg.dim >= 1 && cfg.dim <= kMaxDim, "dimension out of range");
  require(cfg.z >= 0, "z must be nonnegative");
  require(cfg.chains >= 1 && cfg.blocks >= 1, "need at least one chain and one block");
  McRun run;
  run.config = cfg;
  run.chains.resize(static_cast<std::size_t>(cfg.chains));
  // exceptions cannot cross the OpenMP region; carry the first one out
  std::vector<std::exception_ptr> errors(run.chains.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < cfg.chains; ++i) {
    try {
      run.chains[static_cast<std::size_t>(i)] = run_chain(cfg, i);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return run;
}

Estimate estimate_ratio(const McRun& run, const std::function<bool(const Point&)>& in_set) {
  return jackknife(collect(run, [&](const Point& x) { return in_set(x) ? 1.0 : 0.0; }));
}

namespace {

// Distinct sites (torus-reduced when needed) in the symmetry orbit of x.
std::vector<Point> site_orbit(const Point& x, int torus) {
  std::set<Point> s;
  for (const Point& y : orbit(x)) s.insert(torus > 0 ? project_torus(y, torus).coords : y);
  return {s.begin(), s.end()};
}

}  // namespace

TwoPointEstimate estimate_two_point(const McRun& run, bool symmetrize) {
  const int d = run.config.dim;
  const int r = run.config.torus;
  TwoPointEstimate out{LatticeField(d), LatticeField(d)};
  const auto all = run.merged();
  std::set<Point> done;
  for (const auto& kv : all) {
    const Point& x = kv.first;
    if (!symmetrize) {
      const Estimate e = estimate_ratio(run, [&](const Point& y) { return y == x; });
      out.G.set(x, e.value);
      out.error.set(x, e.error);
      continue;
    }
    const Point rep = canonical_rep(x);
    if (!done.insert(rep).second) continue;
    const std::vector<Point> sites = site_orbit(rep, r);
    const std::set<Point> members(sites.begin(), sites.end());
    Estimate e = estimate_ratio(run, [&](const Point& y) { return members.count(y) > 0; });
    const double n = static_cast<double>(sites.size());
    for (const Point& y : sites) {
      out.G.set(y, e.value / n);
      out.error.set(y, e.error / n);
    }
  }
  return out;
}

Estimate estimate_chi(const McRun& run) {
  // samples / count(0): numerator counts everything, denominator the origin
  BlockCounts bc = collect(run, [](const Point&) { return 1.0; });
  return jackknife(bc);
}

Estimate estimate_shell(const McRun& run, int shell) {
  require(shell >= 0, "shell must be nonnegative");
  const int d = run.config.dim;
  const int r = run.config.torus;
  double sites = 0;
  if (r > 0) {
    require(2 * shell <= r, "shell outside the torus fundamental domain");
    const auto vol = static_cast<std::size_t>(std::llround(std::pow(r, d)));
    for (std::size_t i = 0; i < vol; ++i)
      if (torus_point_from_index(i, d, r).norm_inf() == shell) sites += 1;
  } else {
    sites = shell == 0 ? 1.0 : std::pow(2.0 * shell + 1, d) - std::pow(2.0 * shell - 1, d);
  }
  Estimate e = estimate_ratio(run, [&](const Point& x) { return x.norm_inf() == shell; });
  e.value /= sites;
  e.error /= sites;
  return e;
}

}  // namespace sawlab
