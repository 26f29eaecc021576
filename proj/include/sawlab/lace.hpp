#pragma once

#include <gmpxx.h>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sawlab/lattice.hpp"
#include "sawlab/rw_green.hpp"
#include "sawlab/saw_enum.hpp"

namespace sawlab {

enum class Provenance { RecoveredFromG, SeriesExact, AnalyticRw, File };
std::string to_string(Provenance p);

// F with F * G = delta. For AnalyticRw kernels z holds mu.
struct KernelTable {
  LatticeField F;
  double z = 0;
  Provenance provenance = Provenance::File;
  int n_max = 0;
  int grid = 0;               // orthant size M of the inversion grid
  double residual = 0;        // sup |F*G - delta| over the residual window
  int residual_window = 0;
  double pruned_mass = 0;     // l1 mass of dropped coefficients
  double alias_level = 0;     // sup |F| on the outer shell of the grid box
  double tail_effect = 0;     // sup_x |F - F_untruncated| from the G tail, if certified
  double min_abs_ghat = 0;
  MomentumPoint min_k;
  bool sane = true;           // F(0) within the configured band around 1
};

// Inverts a reflection-symmetric G on the shifted grid with M points per
// orthant axis. Aborts (PreconditionError naming k) if |G^(k)| < floor.
KernelTable invert_to_F(const LatticeField& G, double z, int M, std::optional<double> g_tail = {},
                        double drop = 1e-16, int window = 3, double floor = 1e-10);
KernelTable invert_to_F(const TruncatedSeries& G, int M, double drop = 1e-16, int window = 3);

KernelTable rw_kernel_table(const RwParams& p);

// sup over canonical x with |x|_inf <= window of |(F*G)(x) - delta(x)|,
// using that both fields are symmetric.
double convolution_residual(const LatticeField& F, const LatticeField& G, int window);

// Power series F = sum_n phi_n z^n with integer phi_n, from phi_0 = delta and
// phi_n = -sum_{j<n} phi_j * c_{n-j}. Stored on canonical representatives.
struct SeriesKernel {
  int dim = 0;
  int n_max = 0;
  std::vector<Point> reps;
  std::vector<std::vector<mpz_class>> phi;  // phi[n][rep]

  mpq_class at(const Point& x, const mpq_class& z) const;
  std::vector<mpq_class> evaluate(const mpq_class& z) const;  // per rep
  LatticeField to_field(double z) const;
  KernelTable table(double z) const;
};

SeriesKernel series_kernel(const SawCounts& counts);

// Pi = delta - z|Omega| D - F
LatticeField recover_pi(const KernelTable& k);

// sum_x |x|^a |Pi^(m)(x)| with a in (0, d-2]
double pi_moment_sum(const LatticeField& pi, double a, double m);

// sum_{u,v} H(u) H^(m)(u) G(v) H(u-v) G^(m)(x-u) H(x-v)^2, H = G - delta
double pi4_diagram(const LatticeField& G, double m, const Point& x);

struct Pi4Bound {
  double direct = 0;        // diagram value (pointwise) or split moment (moment)
  double norm_product = 0;  // one sup-norm times six l2 norms
  double kappa = 0;         // max(B^(0), B^(m))
  double K = 0;             // sup-norm factor
  double shape = 0;         // 2^{a+1} K kappa^2 (1 + kappa)
};

// Pointwise: the diagram at x against sup|G| times six l2 norms.
Pi4Bound pi4_diagram_bound(const LatticeField& G, double m, const Point& x);

// Moment: 2^a (T_v + T_{x-v}) from the |x|^a <= 2^a(|v|^a + |x-v|^a) split,
// each T evaluated exactly, against its norm-product bound.
Pi4Bound pi4_moment_bound(const LatticeField& G, double m, double a);

// sum_{N>=2} K N^{a+1} sqrt(kappa(1+kappa))^{N-1}; +inf when kappa(1+kappa) >= 1.
double lace_series_bound(double K, double a, double kappa);

struct AssumptionItem {
  std::string name;
  bool applicable = true;
  bool pass = false;
  double value = 0;
  std::vector<double> per_z;
  std::string witness;
  std::string note;
};

struct AssumptionReport {
  int dim = 0;
  double K1 = 0;
  double K2 = 0;
  double eps = 0;
  double p = 1;
  std::vector<double> z;
  std::vector<double> mass;
  std::vector<AssumptionItem> items;  // (i) ... (v), in order
  bool all_pass() const;
};

struct AssumptionOptions {
  std::optional<double> eps;                        // default min(d-4, 2) for d > 4, else 1
  std::vector<double> m_fractions{0, 0.25, 0.5, 0.75};
  int k_grid = 16;                                  // regular grid points per axis (even)
  double stable_ratio = 2;                          // consecutive per-z constants within [1/r, r]
};

// kernels sorted by increasing z; mass[i] is m(z_i).
AssumptionReport check_assumption(const std::vector<KernelTable>& kernels, const std::vector<double>& mass,
                                  const AssumptionOptions& opt = {});

struct InfraredResult {
  double c_lower = 0;
  MomentumPoint witness;
  int points = 0;
};

// min over the shifted grid (M per orthant axis) of |F^(m)^(k)| / (|k| + m)^2.
InfraredResult massive_infrared_check(const KernelTable& kernel, double m, int M = 8);

// Fourier transform of a field even in every coordinate, on the regular grid
// k_i = 2 pi j_i / N; evaluated at canonical j (j_1 >= ... >= j_d >= 0).
double even_fourier_regular(const LatticeField& f, const Point& j, int N);

}  // namespace sawlab
