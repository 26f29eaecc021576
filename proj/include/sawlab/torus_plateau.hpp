#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sawlab/lattice.hpp"
#include "sawlab/saw_enum.hpp"
#include "sawlab/saw_mc.hpp"

namespace sawlab {

// Walk as a site sequence starting at the origin.
struct WalkRecord {
  std::vector<Point> sites;
  int length() const { return static_cast<int>(sites.size()) - 1; }
};

// Torus walk (fundamental-domain sites, r >= 3) to the Z^d walk with the same increments.
WalkRecord unfold(const WalkRecord& torus_walk, int r);
WalkRecord project_walk(const WalkRecord& w, int r);

struct Interaction {
  int K = 0;      // self-avoiding on Z^d
  int KT = 0;     // self-avoiding after projection
  int Kplus = 0;  // no pair equal mod r but distinct on Z^d
};
Interaction interaction_weights(const WalkRecord& w, int r);

struct PsiSums {
  double psi = 0;
  double psiT = 0;
  double psi_tail = 0;  // psi is exact up to a nonnegative error at most this
};
// psi(x) = sum_{u != 0} G(x + r u), psiT = G^T(x) - G(x). Both series must
// share dim and n_max; G must be on Z^d and GT on the torus of side r.
PsiSums psi_sums(const TruncatedSeries& G, const TruncatedSeries& GT, int r, const Point& x);

struct Discrepancy {
  double value = 0;
  std::vector<std::uint64_t> by_length;  // coefficient of z^n
  std::uint64_t walks = 0;
};
// sum over all nearest-neighbour walks of length <= n_max ending at x mod r of
// z^n K (1 - K+), by exhaustive listing.
Discrepancy interaction_discrepancy(int dim, int r, double z, int n_max, const Point& x, double budget = 1e8);

struct TailSum {
  double value = 0;
  double remainder = 0;  // certified bound on the shells beyond U
  int U = 0;
};
// sum_{u != 0} A <x + r u>^{-(d-a)} e^{-nu |x + r u|}
TailSum lattice_tail_sum(int dim, double amplitude, double a, double nu, int r, const Point& x, int U = 8);

struct PlateauOptions {
  double zc = 0;
  double zc_err = 0;
  double c3 = 1.0;   // window [zc - c3 r^-2, zc - c4 r^{-d/2}]
  double c4 = 0.1;
  double c5 = 0.5;   // decay constant in the upper bound, c2 is fitted
  std::vector<Point> xs;  // empty: diagonal and first axis out to r/2
  std::vector<int> shells;  // MC only: shell averages at these |x|_inf
};

struct PlateauRow {
  Point x;
  double z = 0;
  double G = 0, GT = 0, psi = 0, psiT = 0;
  double G_err = 0, GT_err = 0, psi_err = 0;
};

struct ShellRow {
  int shell = 0;
  double z = 0;
  double G = 0, GT = 0, G_err = 0, GT_err = 0;
};

struct PlateauZ {
  double z = 0;
  double chi = 0, chi_err = 0;
  double mass = 0;  // NaN when no fit was possible
  bool in_window = false;
};

struct PlateauReport {
  int dim = 0, r = 0, n_max = 0;
  std::string source;
  double zc = 0, zc_err = 0;
  // window endpoints evaluated at zc - zc_err and zc + zc_err
  double window_lo[2] = {0, 0}, window_hi[2] = {0, 0};
  std::vector<PlateauZ> zs;
  std::vector<PlateauRow> rows;
  std::vector<ShellRow> shells;
  double c1 = 0, c2 = 0, c5 = 0;
  double M = -1;  // smallest |x| threshold with c1 > 0 on the window rows, -1 if none
  double cor_lo = 0, cor_hi = 0;  // range of G^T / (<x>^{-(d-2)} + chi/r^d)
  bool psi_order = true;  // psi >= psiT >= 0
  bool upper_pass = true;
  bool lower_pass = false;
};

std::vector<Point> default_x_set(int dim, int r);

PlateauReport plateau_report_enum(int dim, int r, const std::vector<double>& z_grid, int n_max,
                                  const PlateauOptions& opt);
// base supplies steps, burn-in, thinning, seed and chains; dim, torus and z are set here.
PlateauReport plateau_report_mc(int dim, int r, const std::vector<double>& z_grid, const McConfig& base,
                                const PlateauOptions& opt);

}  // namespace sawlab
