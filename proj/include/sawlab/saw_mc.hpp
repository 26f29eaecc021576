#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "sawlab/lattice.hpp"

namespace sawlab {

inline constexpr const char* kRngId = "mt19937_64+splitmix64";

std::uint64_t splitmix64(std::uint64_t x);
// Seed of chain i derived from the run seed.
std::uint64_t chain_seed(std::uint64_t seed, int chain);

// Occupied-site set for walks on Z^d. Sites are packed into 64-bit keys,
// linear probing, and removal by backward shift (removals are LIFO anyway).
class SiteSet {
 public:
  explicit SiteSet(int dim);
  bool contains(const Point& x) const;
  void insert(const Point& x);
  void erase(const Point& x);
  std::size_t size() const { return count_; }

 private:
  std::uint64_t key(const Point& x) const;
  std::size_t slot(std::uint64_t k) const;
  void grow();

  int dim_, bits_;
  std::size_t count_ = 0;
  std::vector<std::uint64_t> table_;  // 0 marks an empty slot
};

// Berretti-Sokal append/delete chain with stationary weight z^{|w|} on
// self-avoiding walks from the origin.
class BsChain {
 public:
  BsChain(int dim, int torus, double z, std::uint64_t seed);

  void step();
  const std::vector<Point>& walk() const { return walk_; }
  // On the torus the endpoint is reported in the fundamental domain.
  const Point& endpoint() const { return walk_.back(); }
  int length() const { return static_cast<int>(walk_.size()) - 1; }

  std::uint64_t appends_proposed = 0, appends_accepted = 0;
  std::uint64_t deletes_proposed = 0, deletes_accepted = 0;

 private:
  bool occupied(const Point& x) const;
  void occupy(const Point& x, bool on);

  int dim_, torus_;
  double p_add_;
  std::mt19937_64 rng_;
  std::vector<Point> walk_;
  SiteSet set_;
  std::vector<std::uint8_t> dense_;
};

struct McConfig {
  int dim = 2;
  int torus = 0;
  double z = 0.1;
  std::uint64_t steps = 1000000;
  std::uint64_t burnin = 1000000;
  std::uint64_t thin = 0;  // 0: 2d times the mean length seen during burn-in
  std::uint64_t seed = 1;
  int chains = 1;
  int blocks = 20;  // per chain, for the jackknife
};

struct McChainResult {
  std::uint64_t seed = 0;
  std::uint64_t thin = 0;
  double burnin_mean_length = 0;
  double mean_length = 0;
  std::uint64_t appends_proposed = 0, appends_accepted = 0;
  std::uint64_t deletes_proposed = 0, deletes_accepted = 0;
  std::vector<std::map<Point, std::uint64_t>> blocks;
};

struct McRun {
  McConfig config;
  std::vector<McChainResult> chains;

  std::map<Point, std::uint64_t> merged() const;
  std::uint64_t samples() const;
  double append_acceptance() const;
};

McRun run_mc(const McConfig& cfg);

struct Estimate {
  double value = 0;
  double error = 0;
};

// Jackknife over all blocks of sum_{x in S} count(x) / count(0).
Estimate estimate_ratio(const McRun& run, const std::function<bool(const Point&)>& in_set);
// G(x) = count(x)/count(0) at every visited x, error bars alongside.
struct TwoPointEstimate {
  LatticeField G, error;
};
TwoPointEstimate estimate_two_point(const McRun& run, bool symmetrize = false);
// chi = samples / count(0)
Estimate estimate_chi(const McRun& run);
// Mean of G over the sites with |x|_inf == shell (torus sites in the fundamental domain).
Estimate estimate_shell(const McRun& run, int shell);

}  // namespace sawlab
