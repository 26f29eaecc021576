#pragma once

#include <string>
#include <vector>

#include "sawlab/lattice.hpp"
#include "sawlab/spectral.hpp"

namespace sawlab {

struct RwParams {
  int dim = 3;
  double mu = 0.0;

  double omega() const { return 2.0 * dim; }
  double mu_c() const { return 1.0 / (2.0 * dim); }
  double mu_omega() const { return mu * omega(); }
  void validate() const;
};

// cosh m0 = 1 + (1 - mu|Omega|)/(2 mu); m0(mu_c) = 0 exactly.
double m0_of_mu(const RwParams& p);

// Smallest N with (mu|Omega|)^{N+1} / (1 - mu|Omega|) <= tol.
int series_order(const RwParams& p, double tol);

struct GreenSeriesTable {
  SymmetricTable C;
  int n_max = 0;
  int work_radius = 0;
  double tail = 0;     // uniform bound on the omitted n > n_max terms
  double leakage = 0;  // walks cut off by the finite work region
  double certificate() const { return tail + leakage; }
};

// Partial sum of (mu|Omega| D)^{*n}, n <= n_max, on every site with
// sup-norm <= radius. The iteration runs on symmetry classes inside a work
// region wide enough that the leakage term is <= leak_tol (or zero).
GreenSeriesTable green_series_table(const RwParams& p, int radius, int n_max, double leak_tol = 1e-14);

struct GreenSeries {
  LatticeField C;
  double tail = 0;
  double leakage = 0;
  int n_max = 0;
  double certificate() const { return tail + leakage; }
};

GreenSeries green_series(const RwParams& p, const Box& box, int n_max);

struct QuadratureResult {
  double value = 0;
  double error = 0;  // |difference| of the last two refinements
  int grid = 0;      // points per axis of the finest grid used
};

// Midpoint rule on the shifted 2M-point grid, M doubled from grid/2 until
// successive refinements agree to tol. At mu = mu_c the 1/N error term is
// removed by Richardson extrapolation. Throws BudgetError past max_grid.
QuadratureResult green_quadrature(const RwParams& p, const Point& x, int grid, double tol = 1e-12,
                                  int max_grid = 512);

// Whole-box table from one inverse cosine transform on the shifted grid.
struct GreenTable {
  RwParams params;
  OrthantArray coeffs{1, 1};
  double alias_bound = 0;  // valid for sites with sup-norm <= radius
  int radius = 0;
  double at(const Point& x) const;
};

// M is chosen so the aliasing bound at sup-norm radius is <= tol, capped by
// memory; the achieved bound is reported.
GreenTable green_table(const RwParams& p, int radius, double tol = 1e-10);

// sum over u != 0 of C0 exp(-m0 (2M|u|_inf - R))
double alias_bound(int dim, double m0, double c0, int M, int R);

struct RwBoundRow {
  double mu = 0;
  double m0 = 0;
  double sup = 0;
  double sup_inner = 0;
  Point argmax;
  bool growth = false;
  double table_error = 0;
};

struct RwBoundReport {
  int dim = 0;
  int radius = 0;
  int inner_radius = 0;
  double a1 = 0;
  double a0_empirical = 0;
  bool growth = false;
  std::vector<RwBoundRow> rows;
};

// sup over |x|_inf <= radius and the mu-grid of C(x) <x>^{d-2} e^{a1 m0 |x|_inf},
// with the same sup over the inner radius floor(2 radius / 3) for the growth flag.
RwBoundReport verify_rw_bound(int dim, const std::vector<double>& mu_fractions, int radius, double a1,
                              double growth_tol = 0.05);

// delta - mu|Omega| D
LatticeField rw_kernel(const RwParams& p);

}  // namespace sawlab
