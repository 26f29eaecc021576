#include "sawlab/rw_green.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sawlab {

namespace {

std::size_t rep_count(int dim, int radius) {
  // C(radius + dim, dim)
  double c = 1;
  for (int i = 1; i <= dim; ++i) c = c * (radius + i) / i;
  return static_cast<std::size_t>(std::llround(c));
}

double shell_size(int dim, int w) { return std::pow(2.0 * w + 1, dim) - std::pow(2.0 * w - 1, dim); }

}  // namespace

void RwParams::validate() const {
  require(dim >= 1 && dim <= kMaxDim, "dimension out of range");
  require(mu >= 0 && mu <= mu_c() * (1 + 1e-15), "mu must lie in [0, 1/(2d)]");
}

double m0_of_mu(const RwParams& p) {
  p.validate();
  require(p.mu > 0, "m0 needs mu > 0");
  if (p.mu >= p.mu_c()) return 0.0;
  return std::acosh(1.0 + (1.0 - p.mu_omega()) / (2.0 * p.mu));
}

int series_order(const RwParams& p, double tol) {
  p.validate();
  const double q = p.mu_omega();
  require(q < 1, "no geometric tail at mu = mu_c");
  require(tol > 0, "tolerance must be positive");
  if (q == 0) return 0;
  // q^{N+1}/(1-q) <= tol
  const double n = std::log(tol * (1 - q)) / std::log(q) - 1;
  return std::max(0, static_cast<int>(std::ceil(n)));
}

GreenSeriesTable green_series_table(const RwParams& p, int radius, int n_max, double leak_tol) {
  p.validate();
  require(radius >= 0 && n_max >= 0, "radius and n_max must be nonnegative");
  const double q = p.mu_omega();
  require(q < 1, "green_series has no tail certificate at mu = mu_c");

  GreenSeriesTable out;
  out.n_max = n_max;
  out.tail = q == 0 ? 0.0 : std::pow(q, n_max + 1) / (1 - q);

  int w = radius;
  double leak = 0;
  if (n_max > radius && q > 0) {
    const double m0 = m0_of_mu(p);
    const double c0 = 1 / (1 - q);
    auto leakage = [&](int W) {
      return shell_size(p.dim, W + 1) * c0 * c0 * std::exp(-m0 * (2.0 * W + 2 - radius));
    };
    while (w < n_max && leakage(w) > leak_tol) ++w;
    leak = w >= n_max ? 0.0 : leakage(w);
  }
  out.work_radius = w;
  out.leakage = leak;
  if (rep_count(p.dim, w) > 20'000'000)
    throw BudgetError("green_series work region too large (radius " + std::to_string(w) + ")");

  SymmetricTable work(p.dim, w);
  const std::size_t nr = work.size();
  const int deg = 2 * p.dim;
  std::vector<std::size_t> nb(nr * static_cast<std::size_t>(deg), nr);
  for (std::size_t r = 0; r < nr; ++r) {
    const Point& x = work.reps()[r];
    for (int i = 0; i < p.dim; ++i) {
      for (int s = 0; s < 2; ++s) {
        const Point y = x + Point::unit(p.dim, i, s ? -1 : 1);
        nb[r * deg + 2 * i + s] = work.rep_index(y);
      }
    }
  }

  std::vector<double> cur(nr, 0.0), next(nr, 0.0), sum(nr, 0.0);
  cur[0] = sum[0] = 1.0;  // reps are sorted, the origin comes first
  for (int n = 1; n <= n_max && q > 0; ++n) {
    for (std::size_t r = 0; r < nr; ++r) {
      double s = 0;
      for (int e = 0; e < deg; ++e) {
        const auto j = nb[r * deg + e];
        if (j < nr) s += cur[j];
      }
      next[r] = p.mu * s;
      sum[r] += next[r];
    }
    cur.swap(next);
  }

  out.C = SymmetricTable(p.dim, radius);
  for (std::size_t r = 0; r < out.C.size(); ++r) out.C.values()[r] = sum[work.rep_index(out.C.reps()[r])];
  return out;
}

GreenSeries green_series(const RwParams& p, const Box& box, int n_max) {
  int radius = 0;
  for (int i = 0; i < box.dim(); ++i) radius = std::max({radius, std::abs(box.lo()[i]), std::abs(box.hi()[i])});
  require(box.dim() == p.dim, "box dimension mismatch");
  auto t = green_series_table(p, radius, n_max);
  return {t.C.to_field(box), t.tail, t.leakage, n_max};
}

QuadratureResult green_quadrature(const RwParams& p, const Point& x, int grid, double tol, int max_grid) {
  p.validate();
  require(grid >= 8, "quadrature grid must be >= 8");
  require(x.dim() == p.dim, "site dimension mismatch");
  const bool critical = p.mu >= p.mu_c();
  require(!critical || p.dim > 2, "critical quadrature needs d > 2");
  const double q = p.mu_omega();
  const int d = p.dim;

  auto rule = [&](int M) {
    std::vector<double> ck(static_cast<std::size_t>(M));
    std::vector<double> cx(static_cast<std::size_t>(M * d));
    for (int j = 0; j < M; ++j) {
      const double k = orthant_momentum(j, M);
      ck[j] = std::cos(k);
      for (int i = 0; i < d; ++i) cx[static_cast<std::size_t>(i * M + j)] = std::cos(k * x[i]);
    }
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(M);
    double acc = 0;
    std::array<int, kMaxDim> j{};
    for (std::size_t idx = 0; idx < total; ++idx) {
      double dsum = 0, w = 1;
      for (int i = 0; i < d; ++i) {
        dsum += ck[j[i]];
        w *= cx[static_cast<std::size_t>(i * M + j[i])];
      }
      acc += w / (1 - q * dsum / d);
      for (int i = d - 1; i >= 0; --i) {
        if (++j[i] < M) break;
        j[i] = 0;
      }
    }
    return acc / static_cast<double>(total);
  };

  int M = std::max(4, grid / 2);
  double prev = rule(M);
  double prev_extrap = std::numeric_limits<double>::quiet_NaN();
  while (2 * M * 2 <= max_grid) {
    const double cur = rule(2 * M);
    M *= 2;
    if (!critical) {
      if (std::abs(cur - prev) <= tol) return {cur, std::abs(cur - prev), 2 * M};
    } else {
      const double extrap = 2 * cur - prev;
      if (!std::isnan(prev_extrap) && std::abs(extrap - prev_extrap) <= tol)
        return {extrap, std::abs(extrap - prev_extrap), 2 * M};
      prev_extrap = extrap;
    }
    prev = cur;
  }
  throw BudgetError("green_quadrature did not reach tolerance within grid " + std::to_string(max_grid));
}

double alias_bound(int dim, double m0, double c0, int M, int R) {
  if (m0 <= 0) return std::numeric_limits<double>::infinity();
  double s = 0;
  for (int k = 1; k < 100000; ++k) {
    const double term = shell_size(dim, k) * c0 * std::exp(-m0 * (2.0 * M * k - R));
    s += term;
    if (term < 1e-300 || term < s * 1e-17) break;
  }
  return s;
}

double GreenTable::at(const Point& x) const {
  Point y = canonical_rep(x);
  if (y[0] >= coeffs.M()) return 0.0;
  return coeffs[coeffs.index(y)];
}

GreenTable green_table(const RwParams& p, int radius, double tol) {
  p.validate();
  require(radius >= 0, "radius must be nonnegative");
  const double q = p.mu_omega();
  require(q < 1, "green_table needs mu < mu_c");
  const double m0 = q == 0 ? std::numeric_limits<double>::infinity() : m0_of_mu(p);
  const double c0 = 1 / (1 - q);
  const double cap = std::pow(2.0, 24);
  int M = radius + 1;
  int m_cap = static_cast<int>(std::floor(std::pow(cap, 1.0 / p.dim) + 1e-9));
  require(M <= m_cap, "green_table radius exceeds the memory cap");
  auto bound = [&](int m) { return q == 0 ? 0.0 : alias_bound(p.dim, m0, c0, m, radius); };
  while (M < m_cap && bound(M) > tol) M = std::min(m_cap, std::max(M + 1, M * 5 / 4));

  GreenTable t;
  t.params = p;
  t.radius = radius;
  t.alias_bound = bound(M);
  t.coeffs = one_minus_step_symbol(p.dim, M);
  for (std::size_t i = 0; i < t.coeffs.size(); ++i) t.coeffs[i] = 1 / (1 - q + q * t.coeffs[i]);
  dct_inverse(t.coeffs);
  return t;
}

RwBoundReport verify_rw_bound(int dim, const std::vector<double>& mu_fractions, int radius, double a1,
                              double growth_tol) {
  require(dim > 2, "verify_rw_bound needs d > 2");
  require(a1 >= 0 && a1 < 1, "a1 must lie in [0, 1)");
  require(!mu_fractions.empty(), "mu grid is empty");
  RwBoundReport rep;
  rep.dim = dim;
  rep.radius = radius;
  rep.inner_radius = 2 * radius / 3;
  rep.a1 = a1;
  const auto reps = orbit_reps(dim, radius);
  for (double frac : mu_fractions) {
    require(frac > 0 && frac < 1, "mu fractions must lie in (0, 1)");
    RwParams p{dim, frac / (2.0 * dim)};
    const double m0 = m0_of_mu(p);
    const GreenTable t = green_table(p, radius, 1e-9);
    RwBoundRow row;
    row.mu = p.mu;
    row.m0 = m0;
    row.table_error = t.alias_bound;
    row.argmax = Point(dim);
    for (const auto& x : reps) {
      const double v = t.at(x) * std::pow(xvee(x), dim - 2) * std::exp(a1 * m0 * x.norm_inf());
      if (v > row.sup) {
        row.sup = v;
        row.argmax = x;
      }
      if (x.norm_inf() <= rep.inner_radius) row.sup_inner = std::max(row.sup_inner, v);
    }
    row.growth = row.sup > row.sup_inner * (1 + growth_tol);
    rep.growth = rep.growth || row.growth;
    rep.a0_empirical = std::max(rep.a0_empirical, row.sup);
    rep.rows.push_back(row);
  }
  return rep;
}

LatticeField rw_kernel(const RwParams& p) {
  p.validate();
  LatticeField f = LatticeField::delta(p.dim);
  for (int i = 0; i < p.dim; ++i) {
    f.set(Point::unit(p.dim, i, 1), -p.mu);
    f.set(Point::unit(p.dim, i, -1), -p.mu);
  }
  return f;
}

}  // namespace sawlab
