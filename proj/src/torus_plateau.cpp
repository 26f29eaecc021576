#include "sawlab/torus_plateau.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace sawlab {

WalkRecord unfold(const WalkRecord& tw, int r) {
  require(r >= 3, "unfolding needs r >= 3");
  WalkRecord w;
  if (tw.sites.empty()) return w;
  const int d = tw.sites.front().dim();
  require(tw.sites.front().is_origin(), "walk must start at the origin");
  w.sites.push_back(Point(d));
  for (std::size_t t = 1; t < tw.sites.size(); ++t) {
    Point step(d);
    int moved = 0;
    for (int i = 0; i < d; ++i) {
      int delta = ((tw.sites[t][i] - tw.sites[t - 1][i]) % r + r) % r;
      if (delta > r / 2) delta -= r;
      step[i] = delta;
      moved += std::abs(delta);
    }
    if (moved != 1) throw PreconditionError("torus walk has a non nearest-neighbour step at index " + std::to_string(t));
    w.sites.push_back(w.sites.back() + step);
  }
  return w;
}

WalkRecord project_walk(const WalkRecord& w, int r) {
  WalkRecord out;
  out.sites.reserve(w.sites.size());
  for (const Point& x : w.sites) out.sites.push_back(project_torus(x, r).coords);
  return out;
}

Interaction interaction_weights(const WalkRecord& w, int r) {
  Interaction k{1, 1, 1};
  const WalkRecord p = project_walk(w, r);
  for (std::size_t s = 0; s < w.sites.size(); ++s)
    for (std::size_t t = s + 1; t < w.sites.size(); ++t) {
      const bool same = w.sites[s] == w.sites[t];
      const bool same_mod = p.sites[s] == p.sites[t];
      if (same) k.K = 0;
      if (same_mod) k.KT = 0;
      if (same_mod && !same) k.Kplus = 0;
    }
  if (k.KT != k.K * k.Kplus) throw std::logic_error("interaction weights violate K^T = K K+");
  return k;
}

PsiSums psi_sums(const TruncatedSeries& G, const TruncatedSeries& GT, int r, const Point& x) {
  require(G.torus == 0, "G must be the Z^d series");
  require(GT.torus == r, "GT must be the torus series of side r");
  require(G.dim == GT.dim && G.dim == x.dim(), "dimension mismatch");
  require(G.n_max == GT.n_max, "psi_sums needs matched truncation");
  require(G.z == GT.z, "psi_sums needs a common z");
  const Point xr = project_torus(x, r).coords;
  PsiSums out;
  for (const auto& [y, v] : G.G.entries())
    if (y != x && project_torus(y, r).coords == xr) out.psi += v;
  out.psiT = GT.G.at(xr) - G.G.at(x);
  out.psi_tail = G.tail ? *G.tail : std::numeric_limits<double>::infinity();
  return out;
}

Discrepancy interaction_discrepancy(int dim, int r, double z, int n_max, const Point& x, double budget) {
  require(dim >= 1 && dim <= kMaxDim && r >= 3 && n_max >= 0, "bad discrepancy arguments");
  double work = 0;
  for (int n = 0; n <= n_max; ++n) work += std::pow(2.0 * dim, n);
  if (work > budget) throw BudgetError("exhaustive walk listing needs " + format_double(work) + " walks");
  Discrepancy out;
  out.by_length.assign(static_cast<std::size_t>(n_max) + 1, 0);
  const Point target = project_torus(x, r).coords;
  WalkRecord w;
  w.sites.push_back(Point(dim));
  // plain recursion over every nearest-neighbour walk; no pruning on purpose
  auto visit = [&](auto&& self) -> void {
    ++out.walks;
    const int n = w.length();
    if (project_torus(w.sites.back(), r).coords == target) {
      const Interaction k = interaction_weights(w, r);
      if (k.K == 1 && k.Kplus == 0) ++out.by_length[static_cast<std::size_t>(n)];
    }
    if (n == n_max) return;
    for (int i = 0; i < dim; ++i)
      for (int s : {1, -1}) {
        w.sites.push_back(w.sites.back() + Point::unit(dim, i, s));
        self(self);
        w.sites.pop_back();
      }
  };
  visit(visit);
  for (int n = n_max; n >= 0; --n) out.value = out.value * z + static_cast<double>(out.by_length[static_cast<std::size_t>(n)]);
  return out;
}

TailSum lattice_tail_sum(int dim, double amplitude, double a, double nu, int r, const Point& x, int U) {
  require(nu > 0 && r >= 3, "lattice_tail_sum needs nu > 0 and r >= 3");
  require(a <= dim, "power a must not exceed d");
  require(U >= 1, "U must be positive");
  TailSum out;
  out.U = U;
  if (amplitude == 0) return out;
  const double p = dim - a;
  Box box = Box::centered(dim, U);
  for (std::size_t i = 0; i < box.volume(); ++i) {
    const Point u = box.point(i);
    if (u.is_origin()) continue;
    const Point y = x + u * r;
    out.value += amplitude * std::pow(xvee(y), -p) * std::exp(-nu * y.norm());
  }
  // shell k beyond U: at most 2d(2k+1)^{d-1} sites, each with |x+ru| >= rk - |x|_inf
  const double xi = x.norm_inf();
  double rem = 0;
  for (int k = U + 1;; ++k) {
    const double dist = std::max(1.0, r * static_cast<double>(k) - xi);
    const double t = std::abs(amplitude) * 2 * dim * std::pow(2.0 * k + 1, dim - 1) * std::pow(dist, -p) *
                     std::exp(-nu * std::max(0.0, r * static_cast<double>(k) - xi));
    const double q = std::pow((2.0 * k + 3) / (2.0 * k + 1), dim - 1) * std::exp(-nu * r);
    rem += t;
    if (q < 1) {
      const double rest = t * q / (1 - q);
      if (rest <= 1e-3 * rem || rest < 1e-300 || k > U + 100000) {
        rem += rest;
        break;
      }
    }
  }
  out.remainder = rem;
  return out;
}

std::vector<Point> default_x_set(int dim, int r) {
  std::set<Point> s;
  for (int t = 0; t <= r / 2; ++t) {
    Point diag(dim), axis(dim);
    for (int i = 0; i < dim; ++i) diag[i] = t;
    axis[0] = t;
    s.insert(diag);
    s.insert(axis);
  }
  return {s.begin(), s.end()};
}

namespace {

void set_window(PlateauReport& rep, const PlateauOptions& opt) {
  rep.zc = opt.zc;
  rep.zc_err = opt.zc_err;
  rep.c5 = opt.c5;
  const double w3 = opt.c3 / std::pow(rep.r, 2.0);
  const double w4 = opt.c4 / std::pow(rep.r, rep.dim / 2.0);
  const double zs[2] = {opt.zc - opt.zc_err, opt.zc + opt.zc_err};
  for (int i = 0; i < 2; ++i) {
    rep.window_lo[i] = zs[i] - w3;
    rep.window_hi[i] = zs[i] - w4;
  }
}

bool in_window(const PlateauReport& rep, double z) {
  return z >= std::max(rep.window_lo[0], rep.window_lo[1]) && z <= std::min(rep.window_hi[0], rep.window_hi[1]);
}

void fit_constants(PlateauReport& rep) {
  const double vol = std::pow(rep.r, rep.dim);
  auto zinfo = [&](double z) -> const PlateauZ& {
    for (const auto& q : rep.zs)
      if (q.z == z) return q;
    throw std::logic_error("row without z entry");
  };
  rep.c2 = 0;
  rep.cor_lo = std::numeric_limits<double>::infinity();
  rep.cor_hi = 0;
  rep.psi_order = true;
  std::vector<std::pair<double, double>> lower;  // (|x|, psiT / level) on window rows
  for (const auto& row : rep.rows) {
    const PlateauZ& q = zinfo(row.z);
    const double level = q.chi / vol;
    const double decay = std::isfinite(q.mass) ? std::exp(-rep.c5 * q.mass * rep.r) : 1.0;
    if (level > 0) rep.c2 = std::max(rep.c2, row.psiT / (level * decay));
    const double tol = 1e-13 * std::max(1.0, row.psi);
    const double noise = 3 * (row.G_err + row.GT_err);
    if (row.psi + tol + noise + 3 * row.psi_err < row.psiT || row.psiT < -tol - noise) rep.psi_order = false;
    const double cor = row.GT / (std::pow(xvee(row.x), -(rep.dim - 2.0)) + level);
    rep.cor_lo = std::min(rep.cor_lo, cor);
    rep.cor_hi = std::max(rep.cor_hi, cor);
    if (q.in_window && level > 0) lower.emplace_back(row.x.norm(), row.psiT / level);
  }
  rep.upper_pass = std::isfinite(rep.c2);
  rep.M = -1;
  rep.c1 = 0;
  rep.lower_pass = false;
  std::set<double> thresholds;
  for (const auto& l : lower) thresholds.insert(l.first);
  for (double M : thresholds) {
    double c1 = std::numeric_limits<double>::infinity();
    for (const auto& l : lower)
      if (l.first >= M) c1 = std::min(c1, l.second);
    if (c1 > 0) {
      rep.M = M;
      rep.c1 = c1;
      rep.lower_pass = true;
      break;
    }
  }
}

}  // namespace

PlateauReport plateau_report_enum(int dim, int r, const std::vector<double>& z_grid, int n_max,
                                  const PlateauOptions& opt) {
  require(!z_grid.empty(), "z grid must be nonempty");
  PlateauReport rep;
  rep.dim = dim;
  rep.r = r;
  rep.n_max = n_max;
  rep.source = "enum";
  set_window(rep, opt);
  const std::vector<Point> xs = opt.xs.empty() ? default_x_set(dim, r) : opt.xs;
  const SawCounts cz = count_saws(dim, n_max);
  const SawCounts ct = count_saws(dim, n_max, r);
  for (double z : z_grid) {
    const TruncatedSeries G = two_point(cz, z);
    const TruncatedSeries GT = two_point(ct, z);
    PlateauZ q;
    q.z = z;
    const ValueWithTail chi = susceptibility(G);
    q.chi = chi.value;
    q.chi_err = chi.tail;
    const MassFit mf = mass_estimate(G, 1, std::max(2, n_max / 2));
    q.mass = mf.ok ? mf.m : std::numeric_limits<double>::quiet_NaN();
    q.in_window = in_window(rep, z);
    rep.zs.push_back(q);
    for (const Point& x : xs) {
      const PsiSums ps = psi_sums(G, GT, r, x);
      PlateauRow row;
      row.x = x;
      row.z = z;
      row.G = G.G.at(x);
      row.GT = GT.G.at(project_torus(x, r).coords);
      row.psi = ps.psi;
      row.psiT = ps.psiT;
      row.psi_err = ps.psi_tail;
      rep.rows.push_back(row);
    }
  }
  fit_constants(rep);
  return rep;
}

namespace {

Estimate orbit_mean(const McRun& run, const Point& x, int torus) {
  std::set<Point> sites;
  for (const Point& y : orbit(x)) sites.insert(torus > 0 ? project_torus(y, torus).coords : y);
  Estimate e = estimate_ratio(run, [&](const Point& y) { return sites.count(y) > 0; });
  e.value /= static_cast<double>(sites.size());
  e.error /= static_cast<double>(sites.size());
  return e;
}

}  // namespace

PlateauReport plateau_report_mc(int dim, int r, const std::vector<double>& z_grid, const McConfig& base,
                                const PlateauOptions& opt) {
  require(!z_grid.empty(), "z grid must be nonempty");
  PlateauReport rep;
  rep.dim = dim;
  rep.r = r;
  rep.source = "mc";
  set_window(rep, opt);
  const std::vector<Point> xs = opt.xs.empty() ? default_x_set(dim, r) : opt.xs;
  for (double z : z_grid) {
    McConfig cfg = base;
    cfg.dim = dim;
    cfg.z = z;
    cfg.torus = 0;
    const McRun zd = run_mc(cfg);
    cfg.torus = r;
    cfg.seed = base.seed + 1;
    const McRun tr = run_mc(cfg);
    PlateauZ q;
    q.z = z;
    const Estimate chi = estimate_chi(zd);
    q.chi = chi.value;
    q.chi_err = chi.error;
    q.mass = std::numeric_limits<double>::quiet_NaN();
    q.in_window = in_window(rep, z);
    rep.zs.push_back(q);
    for (const Point& x : xs) {
      PlateauRow row;
      row.x = x;
      row.z = z;
      const Estimate g = orbit_mean(zd, x, 0);
      const Estimate gt = orbit_mean(tr, project_torus(x, r).coords, r);
      const Point xr = project_torus(x, r).coords;
      const Estimate psi = estimate_ratio(zd, [&](const Point& y) { return y != x && project_torus(y, r).coords == xr; });
      row.G = g.value;
      row.G_err = g.error;
      row.GT = gt.value;
      row.GT_err = gt.error;
      row.psi = psi.value;
      row.psi_err = psi.error;
      row.psiT = gt.value - g.value;
      rep.rows.push_back(row);
    }
    for (int s : opt.shells) {
      ShellRow sr;
      sr.shell = s;
      sr.z = z;
      const Estimate g = estimate_shell(zd, s);
      const Estimate gt = estimate_shell(tr, s);
      sr.G = g.value;
      sr.G_err = g.error;
      sr.GT = gt.value;
      sr.GT_err = gt.error;
      rep.shells.push_back(sr);
    }
  }
  fit_constants(rep);
  return rep;
}

}  // namespace sawlab
