#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sawlab/lattice.hpp"

namespace sawlab {

// Exact counts c_n(x) of n-step self-avoiding walks from the origin, on Z^d
// (torus == 0) or on the torus of side torus.
struct SawCounts {
  int dim = 0;
  int torus = 0;
  int n_max = 0;
  std::vector<std::map<Point, std::uint64_t>> by_length;

  std::uint64_t at(int n, const Point& x) const;
  std::uint64_t total(int n) const;
  std::vector<std::uint64_t> totals() const;
  bool operator==(const SawCounts&) const = default;
};

enum class Enumerator {
  Dense,   // occupancy table indexed by site, first step fixed by symmetry
  Sorted,  // coordinate-sorted visited list, no symmetry reduction
};

// Upper bound on the DFS node count, sum_{n<=N} 2d(2d-1)^{n-1}.
double enumeration_work_bound(int dim, int n_max);

// Throws BudgetError (naming the deepest feasible n_max) when the work bound
// exceeds budget.
SawCounts count_saws(int dim, int n_max, int torus = 0, Enumerator how = Enumerator::Dense,
                     double budget = 2e9);

// Totals c_n for n <= n_max on Z^d only. Uses the symmetry of the first two
// steps and counts the last step without visiting it.
std::vector<std::uint64_t> count_totals(int dim, int n_max, double budget = 2e10);

struct TruncatedSeries {
  LatticeField G;
  double z = 0;
  int n_max = 0;
  int dim = 0;
  int torus = 0;
  std::optional<double> tail;  // absent when (2d-1) z >= 1
};

// 2d (2d-1)^{n_max} z^{n_max+1} / (1 - (2d-1) z)
double tail_bound(int dim, int n_max, double z);

TruncatedSeries two_point(const SawCounts& counts, double z);

struct ValueWithTail {
  double value = 0;
  double tail = 0;
};

ValueWithTail susceptibility(const TruncatedSeries& s);

// Truncated sum_{x != 0} (G(x) e^{m x_1})^2; a lower bound on the full bubble.
double bubble(const TruncatedSeries& s, double m);

struct MassFit {
  double m = 0;
  double intercept = 0;
  int points = 0;
  bool ok = false;
  std::string reason;
};

// Least squares of log G(t e_1) + ((d-1)/2) log t = c - m t over t in [lo, hi].
MassFit mass_estimate(const LatticeField& G, int lo, int hi, double min_decades = 1.0);
MassFit mass_estimate(const TruncatedSeries& s, int lo, int hi, double min_decades = 1.0);

struct ZcEstimate {
  double zc = 0;
  double uncertainty = 0;
  double mu = 0;  // connective constant estimate
  std::vector<double> intercepts;
};

// Alternate-term ratios r_n = sqrt(c_n / c_{n-2}), linear intercepts
// n r_n - (n-1) r_{n-1}, then Aitken on the last three of matching parity.
ZcEstimate estimate_zc(const std::vector<std::uint64_t>& totals);

// Portable text cache: "dim=", "torus=", "nmax=" header, "n x... count"
// lines, and a "checksum=<fnv1a64>" trailer over everything before it.
void write_counts(std::ostream& os, const SawCounts& c);
SawCounts read_counts(std::istream& is);

}  // namespace sawlab
