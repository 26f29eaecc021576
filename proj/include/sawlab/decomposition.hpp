#pragma once

#include <gmpxx.h>

#include <vector>

#include "sawlab/lace.hpp"
#include "sawlab/lattice.hpp"
#include "sawlab/rw_green.hpp"

namespace sawlab {

struct LambdaMu {
  double lambda = 0;
  double mu = 0;          // mu, not mu|Omega|
  double lambda_lo = 0;   // interval from the truncation uncertainty of the denominator
  double lambda_hi = 0;
  double F0 = 0;          // F^(0)
  double kappa = 0;       // -sum |x|^2 F
  double denominator = 0; // F^(0) + kappa
  bool mu_in_range = true;
};

// lambda = 1 / (F^(0) - sum |x|^2 F), mu|Omega| = 1 - lambda F^(0).
LambdaMu match_lambda_mu(const KernelTable& k, double denom_uncertainty = -1);

// E = (delta - mu|Omega| D) - lambda F; both moments checked to 1e-12 relative.
LatticeField build_E(const KernelTable& k, double lambda, double mu);

struct ExactMatch {
  int dim = 0;
  mpq_class z, lambda, mu_omega, F0, kappa;
  std::vector<Point> reps;
  std::vector<mpq_class> E;  // per rep
  mpq_class sum_E, sum_x2_E;
  LatticeField E_field() const;
};

// The same construction in exact rationals from a series kernel at rational z.
ExactMatch match_exact(const SeriesKernel& sk, const mpq_class& z);

struct RemainderResult {
  SymmetricTable f_subtract;   // G - lambda C, C from the stencil series
  SymmetricTable f_fourier;    // C * E * G on the shifted grid
  double discrepancy = 0;      // sup |difference| over the box
  Point worst;
  double certificate = 0;
  bool within = false;
};

// f on every site with sup-norm <= radius, both ways. k must be the Fourier
// kernel of G (invert_to_F) so that F * G = delta on the grid.
RemainderResult remainder_f(const LatticeField& G, const KernelTable& k, const LambdaMu& lm, int radius);

struct DecayRow {
  int radius = 0;
  double sup = 0;
  Point argmax;
};

struct DecayReport {
  std::vector<DecayRow> rows;
  double drift = 0;  // sup at the largest radius over sup at the smallest, minus 1
  bool growth = false;
};

// sup over |x|_inf <= R of <x>^{power} |f(x)| e^{rate w(x)} for each R in radii,
// with w(x) = |x| (euclidean) or the largest |x_i| (tilt along the first axis
// applied to the worst symmetric image).
enum class DecayWeight { Euclidean, Tilt };
DecayReport weighted_sup(const LatticeField& f, double power, double rate, DecayWeight w,
                         const std::vector<int>& radii, double drift_tol = 0.05);
DecayReport weighted_sup(const SymmetricTable& f, double power, double rate, DecayWeight w,
                         const std::vector<int>& radii, double drift_tol = 0.05);

// sup <x>^{d-2} |f^(m)(x)| over nested boxes.
DecayReport check_f_decay(const LatticeField& f, double m, const std::vector<int>& radii, double drift_tol = 0.05);

struct EBound {
  double c = 0;
  MomentumPoint witness;
  double E0 = 0;  // E^(0) at m = 0 (vanishes by construction)
};

// max over the shifted grid of |E^(m)^(k)| / (|k| + m)^{2 + min(eps, 1)}.
EBound check_E_bound(const LatticeField& E, double m, int M, double eps);

// max_z m(z) / m0(mu_z)
double mass_ratio_constant(int dim, const std::vector<double>& mass, const std::vector<double>& mu);

// tilt(C * E * G, m) against C^(m) * E^(m) * G^(m), full convolutions.
double tilted_consistency(const LatticeField& C, const LatticeField& E, const LatticeField& G, double m);

}  // namespace sawlab
