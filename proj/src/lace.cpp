#include "sawlab/lace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include "sawlab/spectral.hpp"

namespace sawlab {

namespace {

using Lookup = std::unordered_map<Point, double, PointHash>;

Lookup make_lookup(const LatticeField& f) {
  Lookup l;
  l.reserve(f.size() * 2);
  for (const auto& [x, v] : f.entries()) l.emplace(x, v);
  return l;
}

double get(const Lookup& l, const Point& x) {
  auto it = l.find(x);
  return it == l.end() ? 0.0 : it->second;
}

std::string describe(const MomentumPoint& k) {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < k.dim; ++i) os << (i ? "," : "") << k.k[i];
  os << ')';
  return os.str();
}

mpz_class from_i128(__int128 v) {
  const bool neg = v < 0;
  unsigned __int128 u = neg ? static_cast<unsigned __int128>(-v) : static_cast<unsigned __int128>(v);
  mpz_class r(static_cast<unsigned long>(u >> 64));
  r <<= 64;
  r += static_cast<unsigned long>(u & 0xffffffffffffffffULL);
  return neg ? mpz_class(-r) : r;
}

}  // namespace

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::RecoveredFromG: return "recovered-from-G";
    case Provenance::SeriesExact: return "series-exact";
    case Provenance::AnalyticRw: return "analytic-RW";
    case Provenance::File: return "file";
  }
  return "unknown";
}

double convolution_residual(const LatticeField& F, const LatticeField& G, int window) {
  const Lookup g = make_lookup(G);
  double worst = 0;
  for (const Point& x : orbit_reps(F.dim(), window)) {
    double s = x.is_origin() ? -1.0 : 0.0;
    for (const auto& [y, fv] : F.entries()) s += fv * get(g, x - y);
    worst = std::max(worst, std::abs(s));
  }
  return worst;
}

KernelTable invert_to_F(const LatticeField& G, double z, int M, std::optional<double> g_tail, double drop,
                        int window, double floor) {
  require(G.dim() >= 1, "empty two-point table");
  require(G.is_symmetric(1e-12), "invert_to_F needs a lattice-symmetric G");
  const int d = G.dim();
  OrthantArray a = fold_even(G, M);
  dct_forward(a);

  KernelTable kt;
  kt.z = z;
  kt.grid = M;
  kt.provenance = Provenance::RecoveredFromG;
  double gmin = std::numeric_limits<double>::infinity(), gmax = 0;
  std::size_t imin = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double v = std::abs(a[i]);
    gmax = std::max(gmax, v);
    if (v < gmin) {
      gmin = v;
      imin = i;
    }
  }
  kt.min_abs_ghat = gmin;
  kt.min_k = a.momentum(imin);
  if (gmin < floor * gmax)
    throw PreconditionError("G^(k) too close to zero at k=" + describe(kt.min_k) + " (|G^|=" + format_double(gmin) + ")");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = 1.0 / a[i];
  dct_inverse(a);

  const double cut = drop * std::abs(a[0]);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Point x = a.point(i);
    int nz = 0, top = 0;
    for (int k = 0; k < d; ++k) {
      nz += x[k] != 0;
      top = std::max(top, x[k]);
    }
    if (top == M - 1) kt.alias_level = std::max(kt.alias_level, std::abs(a[i]));
    if (std::abs(a[i]) <= cut) kt.pruned_mass += std::abs(a[i]) * std::ldexp(1.0, nz);
  }
  kt.F = unfold_even(a, cut);
  if (g_tail && *g_tail < gmin) kt.tail_effect = *g_tail / (gmin * (gmin - *g_tail));
  kt.residual_window = window;
  kt.residual = convolution_residual(kt.F, G, window);
  kt.sane = std::abs(kt.F.at(Point(d)) - 1.0) <= 1.0;
  return kt;
}

KernelTable invert_to_F(const TruncatedSeries& G, int M, double drop, int window) {
  require(G.torus == 0, "kernel recovery needs a Z^d series");
  require(M > G.n_max, "grid must exceed the series support");
  KernelTable kt = invert_to_F(G.G, G.z, M, G.tail, drop, window);
  kt.n_max = G.n_max;
  return kt;
}

KernelTable rw_kernel_table(const RwParams& p) {
  KernelTable kt;
  kt.F = rw_kernel(p);
  kt.z = p.mu;
  kt.provenance = Provenance::AnalyticRw;
  return kt;
}

// ---------------------------------------------------------------- exact series

SeriesKernel series_kernel(const SawCounts& counts) {
  require(counts.torus == 0, "series kernel needs Z^d counts");
  const int d = counts.dim, N = counts.n_max;
  SeriesKernel sk;
  sk.dim = d;
  sk.n_max = N;
  for (const Point& r : orbit_reps(d, N))
    if (r.norm_1() <= N) sk.reps.push_back(r);
  std::unordered_map<Point, std::size_t, PointHash> rep_index;
  for (std::size_t i = 0; i < sk.reps.size(); ++i) rep_index.emplace(sk.reps[i], i);

  // Dense lookup for c_m(x), |x|_1 <= N.
  const Box box = Box::centered(d, N);
  std::vector<std::int32_t> slot(box.volume(), -1);
  std::size_t nslots = 0;
  for (std::size_t i = 0; i < box.volume(); ++i)
    if (box.point(i).norm_1() <= N) slot[i] = static_cast<std::int32_t>(nslots++);
  std::vector<std::vector<std::int64_t>> c(static_cast<std::size_t>(N) + 1, std::vector<std::int64_t>(nslots, 0));
  for (int n = 0; n <= N; ++n)
    for (const auto& [x, v] : counts.by_length[static_cast<std::size_t>(n)])
      c[n][static_cast<std::size_t>(slot[box.index(x)])] = static_cast<std::int64_t>(v);

  std::vector<std::vector<__int128>> phi(static_cast<std::size_t>(N) + 1, std::vector<__int128>(sk.reps.size(), 0));
  phi[0][0] = 1;
  struct Entry {
    Point y;
    __int128 v;
  };
  std::vector<std::vector<Entry>> full(static_cast<std::size_t>(N) + 1);
  full[0].push_back({Point(d), 1});
  const __int128 limit = static_cast<__int128>(1) << 120;
  for (int n = 1; n <= N; ++n) {
    for (std::size_t r = 0; r < sk.reps.size(); ++r) {
      const Point& x = sk.reps[r];
      if (x.norm_1() > n) continue;
      __int128 s = 0;
      for (int j = 0; j < n; ++j) {
        const int m = n - j;
        for (const auto& [y, v] : full[static_cast<std::size_t>(j)]) {
          const Point w = x - y;
          if (w.norm_1() > m) continue;
          const auto cv = c[m][static_cast<std::size_t>(slot[box.index(w)])];
          if (cv) s += v * cv;
        }
      }
      require(s < limit && -s < limit, "series kernel coefficient overflow");
      phi[n][r] = -s;
    }
    for (std::size_t r = 0; r < sk.reps.size(); ++r) {
      if (!phi[n][r]) continue;
      for (const Point& y : orbit(sk.reps[r])) full[n].push_back({y, phi[n][r]});
    }
  }
  sk.phi.assign(static_cast<std::size_t>(N) + 1, std::vector<mpz_class>(sk.reps.size()));
  for (int n = 0; n <= N; ++n)
    for (std::size_t r = 0; r < sk.reps.size(); ++r) sk.phi[n][r] = from_i128(phi[n][r]);
  return sk;
}

mpq_class SeriesKernel::at(const Point& x, const mpq_class& z) const {
  const Point r = canonical_rep(x);
  auto it = std::lower_bound(reps.begin(), reps.end(), r);
  if (it == reps.end() || *it != r) return 0;
  const auto i = static_cast<std::size_t>(it - reps.begin());
  mpq_class h = 0;
  for (int n = n_max; n >= 0; --n) h = h * z + mpq_class(phi[n][i]);
  return h;
}

std::vector<mpq_class> SeriesKernel::evaluate(const mpq_class& z) const {
  std::vector<mpq_class> out(reps.size());
  for (std::size_t i = 0; i < reps.size(); ++i) {
    mpq_class h = 0;
    for (int n = n_max; n >= 0; --n) h = h * z + mpq_class(phi[n][i]);
    out[i] = h;
  }
  return out;
}

LatticeField SeriesKernel::to_field(double z) const {
  LatticeField f(dim);
  for (std::size_t i = 0; i < reps.size(); ++i) {
    double h = 0;
    for (int n = n_max; n >= 0; --n) h = h * z + phi[n][i].get_d();
    if (h == 0) continue;
    for (const Point& y : orbit(reps[i])) f.set(y, h);
  }
  return f;
}

KernelTable SeriesKernel::table(double z) const {
  KernelTable kt;
  kt.F = to_field(z);
  kt.z = z;
  kt.provenance = Provenance::SeriesExact;
  kt.n_max = n_max;
  kt.sane = std::abs(kt.F.at(Point(dim)) - 1.0) <= 1.0;
  return kt;
}

// ---------------------------------------------------------------- Pi

LatticeField recover_pi(const KernelTable& k) {
  const int d = k.F.dim();
  LatticeField pi = LatticeField::delta(d);
  for (int i = 0; i < d; ++i) {
    pi.add(Point::unit(d, i, 1), -k.z);
    pi.add(Point::unit(d, i, -1), -k.z);
  }
  pi -= k.F;
  return pi;
}

double pi_moment_sum(const LatticeField& pi, double a, double m) {
  require(a > 0 && a <= pi.dim() - 2, "moment order must lie in (0, d-2]");
  return moment_sum(pi, a, m);
}

double pi4_diagram(const LatticeField& G, double m, const Point& x) {
  const Lookup g = make_lookup(G);
  LatticeField Hf = G;
  Hf.add(Point(G.dim()), -1.0);
  Hf.prune(0.0);
  const Lookup h = make_lookup(Hf);
  double s = 0;
  for (const auto& [u, hu] : Hf.entries()) {
    const double gxu = get(g, x - u);
    if (gxu == 0) continue;
    const double left = hu * hu * std::exp(m * u[0]) * gxu * std::exp(m * (x[0] - u[0]));
    for (const auto& [v, gv] : G.entries()) {
      const double huv = get(h, u - v);
      if (huv == 0) continue;
      const double hxv = get(h, x - v);
      s += left * gv * huv * hxv * hxv;
    }
  }
  return s;
}

namespace {

struct DiagramNorms {
  double kappa0, kappam, gsup;
};

DiagramNorms diagram_norms(const LatticeField& G, double m) {
  DiagramNorms n{0, 0, 0};
  for (const auto& [x, v] : G.entries()) {
    n.gsup = std::max(n.gsup, std::abs(v));
    if (x.is_origin()) continue;
    n.kappa0 += v * v;
    const double t = v * std::exp(m * x[0]);
    n.kappam += t * t;
  }
  return n;
}

}  // namespace

Pi4Bound pi4_diagram_bound(const LatticeField& G, double m, const Point& x) {
  const auto n = diagram_norms(G, m);
  Pi4Bound b;
  b.direct = pi4_diagram(G, m, x);
  b.kappa = std::max(n.kappa0, n.kappam);
  b.K = n.gsup;
  b.norm_product = n.gsup * n.kappa0 * n.kappa0 * std::sqrt(n.kappam * (1 + n.kappam));
  b.shape = 2 * b.K * b.kappa * b.kappa * (1 + b.kappa);
  return b;
}

Pi4Bound pi4_moment_bound(const LatticeField& G, double m, double a) {
  require(a >= 0, "moment order must be nonnegative");
  const int d = G.dim();
  LatticeField Hf = G;
  Hf.add(Point(d), -1.0);
  Hf.prune(0.0);
  const Lookup h = make_lookup(Hf);

  auto pw = [a](const Point& y) { return a == 0 ? 1.0 : std::pow(y.norm(), a); };
  // W(w) = sum_y G^(m)(y) H(y+w)^2 and its |y+w|^a-weighted twin, on supp H.
  Lookup W, Wa;
  for (const auto& [w, hw] : Hf.entries()) {
    double s = 0, sa = 0;
    for (const auto& [y, gy] : G.entries()) {
      const double t = get(h, y + w);
      if (t == 0) continue;
      const double base = gy * std::exp(m * y[0]) * t * t;
      s += base;
      sa += base * pw(y + w);
    }
    W.emplace(w, hw * s);
    Wa.emplace(w, hw * sa);
  }
  double Tv = 0, Txv = 0;
  for (const auto& [u, hu] : Hf.entries()) {
    const double P = hu * hu * std::exp(m * u[0]);
    double sv = 0, sxv = 0;
    for (const auto& [v, gv] : G.entries()) {
      const Point w = u - v;
      auto it = W.find(w);
      if (it == W.end()) continue;
      sv += pw(v) * gv * it->second;
      sxv += gv * Wa.at(w);
    }
    Tv += P * sv;
    Txv += P * sxv;
  }
  const auto n = diagram_norms(G, m);
  double KG = 0, KH = 0;
  for (const auto& [x, v] : G.entries()) {
    KG = std::max(KG, pw(x) * std::abs(v));
    if (!x.is_origin()) KH = std::max(KH, pw(x) * std::abs(v));
  }
  const double s = std::sqrt(n.kappam * (1 + n.kappam));
  Pi4Bound b;
  b.direct = std::pow(2.0, a) * (Tv + Txv);
  b.norm_product = std::pow(2.0, a) * (KG * n.kappa0 * n.kappa0 * s +
                                       KH * std::pow(n.kappa0, 1.5) * std::sqrt(1 + n.kappa0) * s);
  b.kappa = std::max(n.kappa0, n.kappam);
  b.K = std::max(KG, KH);
  b.shape = std::pow(2.0, a + 1) * b.K * b.kappa * b.kappa * (1 + b.kappa);
  return b;
}

double lace_series_bound(double K, double a, double kappa) {
  const double s = std::sqrt(kappa * (1 + kappa));
  if (!(s < 1)) return std::numeric_limits<double>::infinity();
  if (s == 0 || K == 0) return 0;
  const double peak = (a + 1) / -std::log(s);
  double sum = 0;
  for (long N = 2; N < 100'000'000; ++N) {
    const double term = K * std::pow(static_cast<double>(N), a + 1) * std::pow(s, static_cast<double>(N - 1));
    sum += term;
    if (N > peak && term < 1e-17 * sum) break;
  }
  return sum;
}

// ---------------------------------------------------------------- checks

double even_fourier_regular(const LatticeField& f, const Point& j, int N) {
  double s = 0;
  for (const auto& [x, v] : f.entries()) {
    double w = v;
    for (int i = 0; i < f.dim(); ++i) w *= std::cos(2 * std::numbers::pi * j[i] * x[i] / N);
    s += w;
  }
  return s;
}

bool AssumptionReport::all_pass() const {
  return std::all_of(items.begin(), items.end(), [](const AssumptionItem& i) { return i.pass; });
}

namespace {

bool z_stable(const std::vector<double>& v, double r) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > 0 && v[i - 1] > 0)) return false;
    const double q = v[i] / v[i - 1];
    if (q > r || q < 1 / r) return false;
  }
  return true;
}

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

struct RegularGridTransform {
  int N;
  std::vector<double> ctab;
  std::vector<std::pair<Point, double>> entries;

  RegularGridTransform(const LatticeField& f, int n) : N(n), ctab(static_cast<std::size_t>(n)) {
    for (int t = 0; t < N; ++t) ctab[static_cast<std::size_t>(t)] = std::cos(2 * std::numbers::pi * t / N);
    for (const auto& [x, v] : f.entries()) entries.emplace_back(x, v);
  }
  double operator()(const Point& j) const {
    double s = 0;
    for (const auto& [x, v] : entries) {
      double w = v;
      for (int i = 0; i < x.dim(); ++i) {
        int t = (j[i] * x[i]) % N;
        if (t < 0) t += N;
        w *= ctab[static_cast<std::size_t>(t)];
      }
      s += w;
    }
    return s;
  }
};

}  // namespace

AssumptionReport check_assumption(const std::vector<KernelTable>& kernels, const std::vector<double>& mass,
                                  const AssumptionOptions& opt) {
  require(!kernels.empty(), "z-grid is empty");
  require(mass.size() == kernels.size(), "one mass per kernel is required");
  require(!opt.m_fractions.empty(), "m-grid is empty");
  require(opt.k_grid >= 2 && opt.k_grid % 2 == 0, "k grid must be even");
  for (double f : opt.m_fractions) require(f >= 0 && f < 1, "m fractions must lie in [0, 1)");
  const int d = kernels.front().F.dim();
  AssumptionReport rep;
  rep.dim = d;
  rep.eps = opt.eps ? *opt.eps : (d > 4 ? std::min(d - 4.0, 2.0) : 1.0);
  require(rep.eps > 0, "eps must be positive");
  rep.p = 1;
  for (std::size_t i = 0; i < kernels.size(); ++i) {
    rep.z.push_back(kernels[i].z);
    rep.mass.push_back(mass[i]);
    if (i) require(kernels[i].z > kernels[i - 1].z, "kernels must be sorted by increasing z");
  }

  AssumptionItem it1{"(i) moment bound", true, false, 0, {}, "", ""};
  AssumptionItem it2{"(ii) F^(m)(0) >= 0 and F^(0) decreasing", true, false, 0, {}, "", ""};
  AssumptionItem it3{"(iii) untilted infrared bound", true, false, 0, {}, "", ""};
  AssumptionItem it4{"(iv) m(z) decreasing", true, false, 0, {}, "", ""};
  AssumptionItem it5{"(v) weighted l^(p^2) norm", d > 4, false, 0, {}, "", ""};

  bool nonneg = true;
  std::vector<double> f0;
  bool degenerate = false;
  std::vector<double> ir;
  std::vector<Point> kreps;
  for (const Point& j : orbit_reps(d, opt.k_grid / 2))
    if (!j.is_origin()) kreps.push_back(j);

  for (std::size_t zi = 0; zi < kernels.size(); ++zi) {
    const LatticeField& F = kernels[zi].F;
    double k1 = 0, k5 = 0;
    for (double frac : opt.m_fractions) {
      const double m = frac * mass[zi];
      k1 = std::max(k1, moment_sum(F, 2 + rep.eps, m));
      if (d > 4) k5 = std::max(k5, moment_sum(F, d - 2, m));
      double fm0 = 0;
      for (const auto& [x, v] : F.entries()) fm0 += v * std::exp(m * x[0]);
      if (fm0 < 0) {
        nonneg = false;
        if (it2.witness.empty()) it2.witness = "z=" + format_double(kernels[zi].z) + " m=" + format_double(m);
      }
    }
    it1.per_z.push_back(k1);
    it5.per_z.push_back(k5);
    f0.push_back(F.sum());

    const RegularGridTransform ft(F, opt.k_grid);
    const double base = ft(Point(d));
    double best = std::numeric_limits<double>::infinity(), spread = 0;
    Point arg(d);
    for (const Point& j : kreps) {
      const double diff = ft(j) - base;
      spread = std::max(spread, std::abs(diff));
      double k2 = 0;
      for (int i = 0; i < d; ++i) {
        const double ki = 2 * std::numbers::pi * j[i] / opt.k_grid;
        k2 += ki * ki;
      }
      if (diff / k2 < best) {
        best = diff / k2;
        arg = j;
      }
    }
    if (spread < 1e-13) degenerate = true;
    ir.push_back(best);
    if (it3.witness.empty() || best <= *std::min_element(ir.begin(), ir.end())) {
      std::ostringstream os;
      os << "z=" << format_double(kernels[zi].z) << " k=2pi/" << opt.k_grid << "*" << arg;
      it3.witness = os.str();
    }
  }

  rep.K1 = *std::max_element(it1.per_z.begin(), it1.per_z.end());
  it1.value = rep.K1;
  it1.pass = all_finite(it1.per_z) && z_stable(it1.per_z, opt.stable_ratio);
  if (!it1.pass) it1.note = "moment constants not z-stable";

  bool decreasing = true;
  for (std::size_t i = 1; i < f0.size(); ++i) decreasing = decreasing && f0[i] < f0[i - 1];
  it2.per_z = f0;
  it2.value = f0.back();
  it2.pass = nonneg && decreasing;
  if (!decreasing) it2.note = "F^(0) not strictly decreasing across the z-grid";
  if (!nonneg) it2.note = "negative F^(m)(0)";

  rep.K2 = *std::min_element(ir.begin(), ir.end());
  it3.per_z = ir;
  it3.value = rep.K2;
  it3.pass = !degenerate && rep.K2 > 0 && z_stable(ir, opt.stable_ratio);
  if (degenerate) it3.note = "degenerate kernel: F^(k) - F^(0) vanishes on the grid";
  else if (!(rep.K2 > 0)) it3.note = "non-positive infrared constant";
  else if (!it3.pass) it3.note = "infrared constants not z-stable";

  bool mdec = mass.front() > 0;
  for (std::size_t i = 1; i < mass.size(); ++i) mdec = mdec && mass[i] > 0 && mass[i] < mass[i - 1];
  it4.per_z = mass;
  it4.value = mass.back();
  it4.pass = mdec;
  if (!mdec) it4.note = "m(z) not strictly decreasing";

  if (d > 4) {
    it5.value = *std::max_element(it5.per_z.begin(), it5.per_z.end());
    it5.pass = all_finite(it5.per_z) && z_stable(it5.per_z, opt.stable_ratio);
    if (!it5.pass) it5.note = "weighted norms not z-stable";
  } else {
    it5.pass = true;
    it5.note = "only required for d > 4";
  }
  rep.items = {it1, it2, it3, it4, it5};
  return rep;
}

InfraredResult massive_infrared_check(const KernelTable& kernel, double m, int M) {
  require(m >= 0, "tilt must be nonnegative");
  require(M >= 1, "grid must be positive");
  const LatticeField& F = kernel.F;
  const int d = F.dim();
  InfraredResult res;
  res.c_lower = std::numeric_limits<double>::infinity();
  std::vector<std::pair<Point, double>> entries;
  for (const auto& [x, v] : F.entries()) entries.emplace_back(x, v * std::exp(m * x[0]));
  std::vector<Point> rest = d > 1 ? orbit_reps(d - 1, M - 1) : std::vector<Point>{};
  if (d == 1) rest.emplace_back();
  for (int j1 = 0; j1 < M; ++j1) {
    for (const Point& r : rest) {
      std::array<double, kMaxDim> k{};
      k[0] = orthant_momentum(j1, M);
      for (int i = 1; i < d; ++i) k[i] = orthant_momentum(r[i - 1], M);
      double re = 0, im = 0;
      for (const auto& [x, v] : entries) {
        double c = v;
        for (int i = 1; i < d; ++i) c *= std::cos(k[i] * x[i]);
        re += c * std::cos(k[0] * x[0]);
        im += c * std::sin(k[0] * x[0]);
      }
      double kn = 0;
      for (int i = 0; i < d; ++i) kn += k[i] * k[i];
      const double ratio = std::hypot(re, im) / std::pow(std::sqrt(kn) + m, 2);
      ++res.points;
      if (ratio < res.c_lower) {
        res.c_lower = ratio;
        res.witness = MomentumPoint(std::span<const double>(k.data(), static_cast<std::size_t>(d)));
      }
    }
  }
  return res;
}

}  // namespace sawlab
