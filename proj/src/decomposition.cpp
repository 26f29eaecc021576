#include "sawlab/decomposition.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <complex>
#include <limits>

#include "sawlab/spectral.hpp"

namespace sawlab {

LambdaMu match_lambda_mu(const KernelTable& k, double denom_uncertainty) {
  const LatticeField& F = k.F;
  const int d = F.dim();
  LambdaMu r;
  double s2 = 0;
  for (const auto& [x, v] : F.entries()) {
    r.F0 += v;
    s2 += static_cast<double>(x.norm_sq()) * v;
  }
  r.kappa = -s2;
  r.denominator = r.F0 + r.kappa;
  if (!(r.denominator > 0))
    throw PreconditionError("match_lambda_mu: nonpositive denominator F^(0) + kappa = " + format_double(r.denominator) +
                            " (F^(0) = " + format_double(r.F0) + ", kappa = " + format_double(r.kappa) + ")");
  r.lambda = 1 / r.denominator;
  const double mu_omega = 1 - r.lambda * r.F0;
  r.mu = mu_omega / (2.0 * d);
  r.mu_in_range = mu_omega >= -1e-12 && mu_omega <= 1 + 1e-12;
  double u = denom_uncertainty;
  if (u < 0) {
    const double reach = k.grid > 0 ? static_cast<double>(d) * (k.grid - 1) * (k.grid - 1) : 0.0;
    u = k.pruned_mass * (1 + reach);
  }
  r.lambda_lo = 1 / (r.denominator + u);
  r.lambda_hi = u < r.denominator ? 1 / (r.denominator - u) : std::numeric_limits<double>::infinity();
  return r;
}

LatticeField build_E(const KernelTable& k, double lambda, double mu) {
  const int d = k.F.dim();
  LatticeField E = rw_kernel(RwParams{d, mu});
  E -= lambda * k.F;
  double s0 = 0, s2 = 0, a0 = 1, a2 = 2.0 * d * std::abs(mu);
  for (const auto& [x, v] : k.F.entries()) {
    a0 += std::abs(lambda * v);
    a2 += static_cast<double>(x.norm_sq()) * std::abs(lambda * v);
  }
  for (const auto& [x, v] : E.entries()) {
    s0 += v;
    s2 += static_cast<double>(x.norm_sq()) * v;
  }
  if (std::abs(s0) > 1e-12 * a0 || std::abs(s2) > 1e-12 * a2)
    throw PreconditionError("build_E: moment cancellation failed (sum E = " + format_double(s0) +
                            ", sum |x|^2 E = " + format_double(s2) + ")");
  return E;
}

LatticeField ExactMatch::E_field() const {
  LatticeField f(dim);
  for (std::size_t i = 0; i < reps.size(); ++i) {
    if (E[i] == 0) continue;
    const double v = E[i].get_d();
    for (const Point& y : orbit(reps[i])) f.set(y, v);
  }
  return f;
}

ExactMatch match_exact(const SeriesKernel& sk, const mpq_class& z) {
  ExactMatch m;
  m.dim = sk.dim;
  m.z = z;
  m.reps = sk.reps;
  const std::vector<mpq_class> F = sk.evaluate(z);
  mpq_class s2 = 0;
  m.F0 = 0;
  for (std::size_t i = 0; i < F.size(); ++i) {
    const mpq_class w(static_cast<unsigned long>(orbit_size(m.reps[i])));
    m.F0 += w * F[i];
    s2 += w * mpq_class(static_cast<long>(m.reps[i].norm_sq())) * F[i];
  }
  m.kappa = -s2;
  const mpq_class den = m.F0 + m.kappa;
  if (den <= 0) throw PreconditionError("match_exact: nonpositive denominator " + den.get_str());
  m.lambda = 1 / den;
  m.mu_omega = 1 - m.lambda * m.F0;
  const mpq_class step = m.mu_omega / (2 * sk.dim);
  m.E.resize(F.size());
  m.sum_E = 0;
  m.sum_x2_E = 0;
  for (std::size_t i = 0; i < F.size(); ++i) {
    const Point& x = m.reps[i];
    mpq_class e = -m.lambda * F[i];
    if (x.is_origin()) e += 1;
    if (x.norm_1() == 1) e -= step;
    m.E[i] = e;
    const mpq_class w(static_cast<unsigned long>(orbit_size(x)));
    m.sum_E += w * e;
    m.sum_x2_E += w * mpq_class(static_cast<long>(x.norm_sq())) * e;
  }
  return m;
}

RemainderResult remainder_f(const LatticeField& G, const KernelTable& k, const LambdaMu& lm, int radius) {
  const int d = G.dim();
  const int M = k.grid;
  require(M > 0, "remainder_f needs a kernel recovered on a grid");
  require(radius >= 0 && radius < M, "radius must be below the grid size");
  require(G.support_box().lo().norm_inf() < M && G.support_box().hi().norm_inf() < M,
          "G support must fit inside the grid");
  const RwParams p{d, lm.mu};
  p.validate();
  const double q = p.mu_omega();
  require(q < 1, "remainder_f needs mu_z |Omega| < 1");

  RemainderResult r;
  const int order = series_order(p, 1e-17);
  const GreenSeriesTable C = green_series_table(p, radius, order, 1e-17);
  r.f_subtract = SymmetricTable(d, radius);
  for (std::size_t i = 0; i < r.f_subtract.size(); ++i)
    r.f_subtract.values()[i] = G.at(r.f_subtract.reps()[i]) - lm.lambda * C.C.values()[i];

  const LatticeField E = build_E(k, lm.lambda, lm.mu);
  OrthantArray e = fold_even(E, M);
  OrthantArray g = fold_even(G, M);
  dct_forward(e);
  dct_forward(g);
  const OrthantArray sym = one_minus_step_symbol(d, M);
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = e[i] * g[i] / (1 - q + q * sym[i]);
  dct_inverse(e);
  r.f_fourier = SymmetricTable(d, radius);
  for (std::size_t i = 0; i < r.f_fourier.size(); ++i) r.f_fourier.values()[i] = e[e.index(r.f_fourier.reps()[i])];

  r.worst = Point(d);
  for (std::size_t i = 0; i < r.f_subtract.size(); ++i) {
    const double diff = std::abs(r.f_subtract.values()[i] - r.f_fourier.values()[i]);
    if (diff > r.discrepancy) {
      r.discrepancy = diff;
      r.worst = r.f_subtract.reps()[i];
    }
  }
  const double c0 = 1 / (1 - q);
  const double chi = G.l1_norm();
  const double m0 = q == 0 ? std::numeric_limits<double>::infinity() : m0_of_mu(p);
  const double alias = q == 0 ? 0.0 : alias_bound(d, m0, c0, M, radius);
  const double roundoff = 1e-13 * (chi + lm.lambda * c0);
  r.certificate = lm.lambda * (C.certificate() + alias) + lm.lambda * c0 * chi * k.pruned_mass + roundoff;
  r.within = r.discrepancy <= r.certificate;
  return r;
}

namespace {

DecayReport finish(std::vector<DecayRow> rows, double drift_tol) {
  DecayReport rep;
  rep.rows = std::move(rows);
  if (!rep.rows.empty() && rep.rows.front().sup > 0) rep.drift = rep.rows.back().sup / rep.rows.front().sup - 1;
  rep.growth = rep.drift > drift_tol;
  return rep;
}

}  // namespace

DecayReport weighted_sup(const LatticeField& f, double power, double rate, DecayWeight w,
                         const std::vector<int>& radii, double drift_tol) {
  require(!radii.empty() && std::is_sorted(radii.begin(), radii.end()), "radii must be nonempty and increasing");
  std::vector<DecayRow> rows;
  for (int R : radii) rows.push_back({R, 0, Point(f.dim())});
  for (const auto& [x, v] : f.entries()) {
    const int n = x.norm_inf();
    if (n > radii.back()) continue;
    const double arg = w == DecayWeight::Euclidean ? x.norm() : static_cast<double>(x[0]);
    const double val = std::pow(xvee(x), power) * std::abs(v) * std::exp(rate * arg);
    for (auto& row : rows)
      if (n <= row.radius && val > row.sup) {
        row.sup = val;
        row.argmax = x;
      }
  }
  return finish(std::move(rows), drift_tol);
}

DecayReport weighted_sup(const SymmetricTable& f, double power, double rate, DecayWeight w,
                         const std::vector<int>& radii, double drift_tol) {
  require(!radii.empty() && std::is_sorted(radii.begin(), radii.end()), "radii must be nonempty and increasing");
  std::vector<DecayRow> rows;
  for (int R : radii) rows.push_back({R, 0, Point(f.dim())});
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Point& x = f.reps()[i];
    const int n = x.norm_inf();
    if (n > radii.back()) continue;
    // reps are sorted descending, so x[0] is the largest coordinate
    const double arg = w == DecayWeight::Euclidean ? x.norm() : static_cast<double>(x[0]);
    const double val = std::pow(xvee(x), power) * std::abs(f.values()[i]) * std::exp(rate * arg);
    for (auto& row : rows)
      if (n <= row.radius && val > row.sup) {
        row.sup = val;
        row.argmax = x;
      }
  }
  return finish(std::move(rows), drift_tol);
}

DecayReport check_f_decay(const LatticeField& f, double m, const std::vector<int>& radii, double drift_tol) {
  require(m >= 0, "tilt must be nonnegative");
  return weighted_sup(f, f.dim() - 2, m, DecayWeight::Tilt, radii, drift_tol);
}

EBound check_E_bound(const LatticeField& E, double m, int M, double eps) {
  require(eps > 0, "eps must be positive");
  require(m >= 0 && M >= 1, "bad tilt or grid");
  const int d = E.dim();
  const double power = 2 + std::min(eps, 1.0);
  EBound b;
  b.E0 = E.sum();
  int R = 0;
  for (const auto& [x, v] : E.entries()) R = std::max(R, x.norm_inf());
  // Separable transform: axis 0 carries the tilt and a complex phase, the
  // other axes are folded onto |x_i| and take cosines.
  const int w0 = 2 * R + 1, w = R + 1;
  std::size_t tail = 1;
  for (int i = 1; i < d; ++i) tail *= static_cast<std::size_t>(w);
  std::vector<double> a(static_cast<std::size_t>(w0) * tail, 0.0);
  for (const auto& [x, v] : E.entries()) {
    std::size_t idx = static_cast<std::size_t>(x[0] + R);
    for (int i = 1; i < d; ++i) idx = idx * static_cast<std::size_t>(w) + static_cast<std::size_t>(std::abs(x[i]));
    a[idx] += v * std::exp(m * x[0]);
  }
  std::vector<double> ks(static_cast<std::size_t>(M));
  for (int j = 0; j < M; ++j) ks[static_cast<std::size_t>(j)] = orthant_momentum(j, M);

  // axis 0: (w0, tail) real -> (M, tail) complex
  std::vector<std::complex<double>> cur(static_cast<std::size_t>(M) * tail);
#pragma omp parallel for
  for (int j = 0; j < M; ++j)
    for (int x = -R; x <= R; ++x) {
      const std::complex<double> ph = std::polar(1.0, ks[static_cast<std::size_t>(j)] * x);
      const double* src = &a[static_cast<std::size_t>(x + R) * tail];
      std::complex<double>* dst = &cur[static_cast<std::size_t>(j) * tail];
      for (std::size_t t = 0; t < tail; ++t) dst[t] += ph * src[t];
    }
  // axes 1 .. d-1: replace an extent-w axis by an extent-M axis
  std::size_t before = static_cast<std::size_t>(M), after = tail;
  for (int i = 1; i < d; ++i) {
    after /= static_cast<std::size_t>(w);
    std::vector<std::complex<double>> next(before * static_cast<std::size_t>(M) * after);
    std::vector<double> cs(static_cast<std::size_t>(M * w));
    for (int j = 0; j < M; ++j)
      for (int x = 0; x <= R; ++x) cs[static_cast<std::size_t>(j * w + x)] = std::cos(ks[static_cast<std::size_t>(j)] * x);
#pragma omp parallel for
    for (long p = 0; p < static_cast<long>(before); ++p)
      for (int j = 0; j < M; ++j) {
        std::complex<double>* dst = &next[(static_cast<std::size_t>(p) * M + static_cast<std::size_t>(j)) * after];
        for (int x = 0; x <= R; ++x) {
          const double c = cs[static_cast<std::size_t>(j * w + x)];
          const std::complex<double>* src = &cur[(static_cast<std::size_t>(p) * w + static_cast<std::size_t>(x)) * after];
          for (std::size_t t = 0; t < after; ++t) dst[t] += c * src[t];
        }
      }
    cur.swap(next);
    before *= static_cast<std::size_t>(M);
  }
  std::array<int, kMaxDim> j{};
  for (std::size_t t = 0; t < cur.size(); ++t) {
    std::size_t rem = t;
    double kn = 0;
    for (int i = d - 1; i >= 0; --i) {
      j[static_cast<std::size_t>(i)] = static_cast<int>(rem % static_cast<std::size_t>(M));
      rem /= static_cast<std::size_t>(M);
      kn += ks[static_cast<std::size_t>(j[static_cast<std::size_t>(i)])] * ks[static_cast<std::size_t>(j[static_cast<std::size_t>(i)])];
    }
    const double ratio = std::abs(cur[t]) / std::pow(std::sqrt(kn) + m, power);
    if (ratio > b.c) {
      b.c = ratio;
      std::array<double, kMaxDim> k{};
      for (int i = 0; i < d; ++i) k[static_cast<std::size_t>(i)] = ks[static_cast<std::size_t>(j[static_cast<std::size_t>(i)])];
      b.witness = MomentumPoint(std::span<const double>(k.data(), static_cast<std::size_t>(d)));
    }
  }
  return b;
}

double mass_ratio_constant(int dim, const std::vector<double>& mass, const std::vector<double>& mu) {
  require(mass.size() == mu.size() && !mass.empty(), "mass and mu grids must match");
  double c = 0;
  for (std::size_t i = 0; i < mass.size(); ++i) c = std::max(c, mass[i] / m0_of_mu(RwParams{dim, mu[i]}));
  return c;
}

double tilted_consistency(const LatticeField& C, const LatticeField& E, const LatticeField& G, double m) {
  const LatticeField lhs = tilt(convolve(convolve(C, E), G), m);
  const LatticeField rhs = convolve(convolve(tilt(C, m), tilt(E, m)), tilt(G, m));
  const LatticeField diff = lhs - rhs;
  const double scale = std::max(lhs.sup_norm(), 1e-300);
  return diff.sup_norm() / scale;
}

}  // namespace sawlab
