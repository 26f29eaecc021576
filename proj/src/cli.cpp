#include "sawlab/cli.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "sawlab/decomposition.hpp"
#include "sawlab/lace.hpp"
#include "sawlab/rw_green.hpp"
#include "sawlab/saw_enum.hpp"
#include "sawlab/saw_mc.hpp"
#include "sawlab/util.hpp"

namespace sawlab {

namespace {

using json = nlohmann::ordered_json;

std::string version() { return SAWLAB_VERSION; }

struct Meta {
  std::string command;
  json config;
  std::string hash() const { return hex64(fnv1a64(command + "\n" + config.dump())); }
  json to_json() const {
    json j;
    j["tool"] = "sawlab";
    j["version"] = version();
    j["command"] = command;
    j["config_hash"] = hash();
    j["config"] = config;
    return j;
  }
  std::string stamp() const { return "# sawlab " + version() + " " + command + " config=" + hash(); }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw PreconditionError("cannot write " + path);
  os << text;
}

void emit_json(const json& j, const std::string& path) {
  const std::string s = j.dump(2) + "\n";
  if (path.empty())
    std::cout << s;
  else
    write_text(path, s);
}

int parse_torus(const std::string& s) {
  if (s == "none" || s.empty()) return 0;
  try {
    std::size_t pos = 0;
    const int r = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    require(r >= 3, "torus side must be >= 3");
    return r;
  } catch (const std::logic_error&) {
    throw PreconditionError("--torus expects an integer or 'none', got '" + s + "'");
  }
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (end == item.c_str() || *end != '\0') throw PreconditionError("not a number: '" + item + "'");
    out.push_back(v);
  }
  return out;
}

json point_json(const Point& x) {
  json a = json::array();
  for (int c : x.coords()) a.push_back(c);
  return a;
}

std::string point_csv(const Point& x) {
  std::string s;
  for (int i = 0; i < x.dim(); ++i) s += std::to_string(x[i]) + ",";
  return s;
}

std::string coord_header(int d) {
  std::string s;
  for (int i = 1; i <= d; ++i) s += "x" + std::to_string(i) + ",";
  return s;
}

// JSON has no inf/nan; keep them readable as strings.
json num(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

SawCounts load_counts(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw PreconditionError("cannot read counts cache " + path);
  return read_counts(is);
}

double binom(int n, int k) {
  double b = 1;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

// ---------------------------------------------------------------- rw-green

struct RwOpts {
  int dim = 3;
  double mu = 0.1;
  int box = 2;
  int nmax = -1;
  int grid = 0;
  double a1 = -1;
  std::string out, json_out;
};

int cmd_rw_green(const RwOpts& o) {
  const RwParams p{o.dim, o.mu};
  p.validate();
  const double q = p.mu_omega();
  require(o.box >= 0, "--box must be nonnegative");
  require(o.nmax >= 0 || q < 1, "at mu = mu_c pass --nmax explicitly");
  const int N = o.nmax >= 0 ? o.nmax : series_order(p, 1e-15);
  Meta meta{"rw-green", {{"dim", o.dim}, {"mu", o.mu}, {"box", o.box}, {"nmax", N}, {"grid", o.grid}, {"a1", o.a1}}};
  const GreenSeriesTable tab = green_series_table(p, o.box, N);
  if (!o.out.empty()) {
    std::ostringstream os;
    os << meta.stamp() << "\n" << coord_header(o.dim) << "C,certificate\n";
    const Box box = Box::centered(o.dim, o.box);
    for (std::size_t i = 0; i < box.volume(); ++i) {
      const Point x = box.point(i);
      os << point_csv(x) << format_double(tab.C.at(x)) << "," << format_double(tab.certificate()) << "\n";
    }
    write_text(o.out, os.str());
  }
  json j = meta.to_json();
  json s;
  s["n_max"] = N;
  s["C0"] = tab.C.at(Point(o.dim));
  s["certificate"] = tab.certificate();
  s["m0"] = num(m0_of_mu(p));
  s["expected_sum"] = q < 1 ? num(1 / (1 - q)) : json("inf");
  if (binom(N + o.dim, o.dim) <= 2e6) {
    // every walk of length <= N stays in the radius-N box, so this sum is exact
    const GreenSeriesTable full = green_series_table(p, N, N);
    s["sum_C"] = full.C.sum();
    s["sum_C_tail"] = q < 1 ? num(std::pow(q, N + 1) / (1 - q)) : json("inf");
  } else {
    s["sum_C"] = nullptr;
    s["sum_C_note"] = "skipped: too many symmetry classes";
  }
  if (o.grid > 0) {
    double worst = 0, qerr = 0;
    for (const Point& x : orbit_reps(o.dim, o.box)) {
      const QuadratureResult r = green_quadrature(p, x, o.grid);
      worst = std::max(worst, std::abs(r.value - tab.C.at(x)));
      qerr = std::max(qerr, r.error);
    }
    s["quadrature_max_diff"] = worst;
    s["quadrature_error"] = qerr;
  }
  if (o.a1 >= 0) {
    const RwBoundReport b = verify_rw_bound(o.dim, {0.5, 0.9, 0.99, 0.999}, o.box, o.a1);
    json rows = json::array();
    for (const auto& r : b.rows)
      rows.push_back({{"mu", r.mu}, {"m0", r.m0}, {"sup", r.sup}, {"sup_inner", r.sup_inner}, {"growth", r.growth}});
    s["rw_bound"] = {{"a1", b.a1}, {"a0_empirical", b.a0_empirical}, {"growth", b.growth}, {"rows", rows}};
  }
  j["summary"] = s;
  emit_json(j, o.json_out);
  return 0;
}

// ---------------------------------------------------------------- saw-enum

struct EnumOpts {
  int dim = 2;
  int nmax = 4;
  std::string torus = "none";
  double z = -1;
  bool totals_only = false;
  std::string out, cache, json_out;
};

json zc_json(const std::vector<std::uint64_t>& totals) {
  const ZcEstimate e = estimate_zc(totals);
  return {{"zc", e.zc}, {"uncertainty", e.uncertainty}, {"connective_constant", e.mu}};
}

int cmd_saw_enum(const EnumOpts& o) {
  const int r = parse_torus(o.torus);
  Meta meta{"saw-enum", {{"dim", o.dim}, {"nmax", o.nmax}, {"torus", r}, {"z", o.z}, {"totals_only", o.totals_only}}};
  json j = meta.to_json();
  json s;
  if (o.totals_only) {
    require(r == 0, "--totals-only works on Z^d only");
    const auto totals = count_totals(o.dim, o.nmax);
    s["totals"] = std::vector<std::uint64_t>(totals.begin() + 1, totals.end());
    if (o.nmax >= 6) s["zc_estimate"] = zc_json(totals);
    j["summary"] = s;
    emit_json(j, o.json_out);
    return 0;
  }
  const SawCounts c = count_saws(o.dim, o.nmax, r);
  const auto totals = c.totals();
  s["totals"] = std::vector<std::uint64_t>(totals.begin() + 1, totals.end());
  if (!o.out.empty()) {
    std::ostringstream os;
    os << meta.stamp() << "\nn," << coord_header(o.dim) << "count\n";
    for (int n = 0; n <= c.n_max; ++n)
      for (const auto& [x, k] : c.by_length[static_cast<std::size_t>(n)]) os << n << "," << point_csv(x) << k << "\n";
    write_text(o.out, os.str());
  }
  if (!o.cache.empty()) {
    std::ostringstream os;
    write_counts(os, c);
    write_text(o.cache, os.str());
  }
  if (o.z >= 0) {
    const TruncatedSeries G = two_point(c, o.z);
    const ValueWithTail chi = susceptibility(G);
    s["chi"] = chi.value;
    s["chi_tail"] = num(chi.tail);
    s["bubble"] = bubble(G, 0);
    if (r == 0 && o.nmax >= 3) {
      const MassFit m = mass_estimate(G, 1, std::max(2, o.nmax / 2));
      s["mass"] = m.ok ? json(m.m) : json(nullptr);
      if (!m.ok) s["mass_note"] = m.reason;
    }
  }
  if (r == 0 && o.nmax >= 6) s["zc_estimate"] = zc_json(totals);
  j["summary"] = s;
  emit_json(j, o.json_out);
  return 0;
}

// ---------------------------------------------------------------- saw-mc

struct McOpts {
  McConfig cfg;
  std::string torus = "none";
  bool symmetrize = false;
  std::string out, json_out;
};

int cmd_saw_mc(McOpts o) {
  o.cfg.torus = parse_torus(o.torus);
  require(o.cfg.z > 0, "--z must be positive");
  const McConfig& c = o.cfg;
  Meta meta{"saw-mc",
            {{"dim", c.dim}, {"torus", c.torus}, {"z", c.z}, {"steps", c.steps}, {"burnin", c.burnin},
             {"thin", c.thin}, {"seed", c.seed}, {"chains", c.chains}, {"blocks", c.blocks}, {"symmetrize", o.symmetrize}}};
  const McRun run = run_mc(c);
  const Estimate chi = estimate_chi(run);
  const TwoPointEstimate G = estimate_two_point(run, o.symmetrize);
  json side = meta.to_json();
  side["rng"] = kRngId;
  json chains = json::array();
  for (const auto& ch : run.chains)
    chains.push_back({{"seed", ch.seed},
                      {"thin", ch.thin},
                      {"burnin_mean_length", ch.burnin_mean_length},
                      {"mean_length", ch.mean_length},
                      {"appends_proposed", ch.appends_proposed},
                      {"appends_accepted", ch.appends_accepted},
                      {"deletes_proposed", ch.deletes_proposed},
                      {"deletes_accepted", ch.deletes_accepted}});
  side["chains"] = chains;
  side["samples"] = run.samples();
  side["append_acceptance"] = run.append_acceptance();
  side["chi"] = {{"value", chi.value}, {"error", num(chi.error)}};
  if (!o.out.empty()) {
    std::ostringstream os;
    os << meta.stamp() << "\n" << coord_header(c.dim) << "G,error\n";
    for (const auto& [x, v] : G.G.entries()) os << point_csv(x) << format_double(v) << "," << format_double(G.error.at(x)) << "\n";
    write_text(o.out, os.str());
    LatticeField hist(c.dim);
    for (const auto& [x, n] : run.merged()) hist.set(x, static_cast<double>(n));
    std::ostringstream hs;
    hs << meta.stamp() << "\n";
    write_field(hs, hist);
    write_text(o.out + ".hist", hs.str());
    write_text(o.out + ".json", side.dump(2) + "\n");
  }
  emit_json(side, o.json_out);
  return 0;
}

// ---------------------------------------------------------------- lace

struct LaceOpts {
  std::string counts;
  std::string z = "0.05";
  double m = 0;
  int grid = 16;
  double drop = 1e-13;
  bool check = false;
  bool pi4 = false;
  std::string json_out;
};

json item_json(const AssumptionItem& it) {
  return {{"name", it.name}, {"applicable", it.applicable}, {"pass", it.pass}, {"value", num(it.value)},
          {"per_z", it.per_z},  {"witness", it.witness},       {"note", it.note}};
}

int cmd_lace(const LaceOpts& o) {
  const SawCounts c = load_counts(o.counts);
  require(c.torus == 0, "lace needs Z^d counts");
  const std::vector<double> zs = parse_list(o.z);
  require(!zs.empty(), "--z needs at least one value");
  Meta meta{"lace", {{"counts_dim", c.dim}, {"counts_nmax", c.n_max}, {"z", zs}, {"m", o.m}, {"grid", o.grid},
                     {"drop", o.drop}, {"check_assumption", o.check}, {"pi4", o.pi4}}};
  json j = meta.to_json();
  json per = json::array();
  std::vector<KernelTable> kernels;
  std::vector<double> masses;
  const int d = c.dim;
  for (double z : zs) {
    const TruncatedSeries G = two_point(c, z);
    KernelTable k = invert_to_F(G, o.grid, o.drop);
    const LatticeField pi = recover_pi(k);
    json e;
    e["z"] = z;
    e["F0"] = k.F.at(Point(d));
    e["F_hat0"] = k.F.sum();
    e["residual"] = k.residual;
    e["pruned_mass"] = k.pruned_mass;
    e["alias_level"] = k.alias_level;
    e["min_abs_ghat"] = k.min_abs_ghat;
    e["sane"] = k.sane;
    e["pi0"] = pi.at(Point(d));
    if (d > 2) e["pi_moment"] = {{"a", d - 2.0}, {"m", o.m}, {"value", pi_moment_sum(pi, d - 2.0, o.m)}};
    const double kappa = std::max(bubble(G, 0), bubble(G, o.m));
    e["bubble"] = kappa;
    e["golden_ratio_condition"] = kappa * (1 + kappa) < 1;
    if (o.pi4 && d > 2) {
      const Pi4Bound b = pi4_moment_bound(G.G, o.m, d - 2.0);
      e["pi4"] = {{"direct", b.direct}, {"norm_product", b.norm_product}, {"kappa", b.kappa}, {"K", b.K}, {"shape", b.shape},
                  {"series_bound", num(lace_series_bound(b.K, d - 2.0, b.kappa))}};
    }
    const MassFit mf = mass_estimate(G, 1, std::max(2, c.n_max / 2));
    e["mass"] = mf.ok ? json(mf.m) : json(nullptr);
    per.push_back(e);
    kernels.push_back(std::move(k));
    masses.push_back(mf.ok ? mf.m : 0.0);
  }
  j["kernels"] = per;
  if (o.check) {
    const AssumptionReport rep = check_assumption(kernels, masses);
    json items = json::array();
    for (const auto& it : rep.items) items.push_back(item_json(it));
    j["assumption"] = {{"K1", num(rep.K1)}, {"K2", num(rep.K2)}, {"eps", rep.eps}, {"p", rep.p},
                       {"items", items},    {"all_pass", rep.all_pass()}};
  }
  emit_json(j, o.json_out);
  return 0;
}

// ---------------------------------------------------------------- decomp

struct DecompOpts {
  std::string counts;
  std::string z = "1/20";
  double m = -1;
  double sigma = 0.5;
  int box = 4;
  int grid = 0;
  double drop = 1e-13;
  bool exact = false;
  std::string json_out;
};

mpq_class parse_rational(const std::string& s) {
  try {
    if (s.find('/') != std::string::npos) {
      mpq_class q(s);
      q.canonicalize();
      return q;
    }
    // decimal string, read exactly
    const auto dot = s.find('.');
    if (dot == std::string::npos) return mpq_class(mpz_class(s));
    std::string digits = s.substr(0, dot) + s.substr(dot + 1);
    mpz_class den = 1;
    for (std::size_t i = dot + 1; i < s.size(); ++i) den *= 10;
    mpq_class q(mpz_class(digits), den);
    q.canonicalize();
    return q;
  } catch (const std::invalid_argument&) {
    throw PreconditionError("not a rational number: '" + s + "'");
  }
}

int cmd_decomp(const DecompOpts& o) {
  const SawCounts c = load_counts(o.counts);
  require(c.torus == 0, "decomp needs Z^d counts");
  require(o.sigma >= 0 && o.sigma < 1, "--sigma must lie in [0, 1)");
  const mpq_class zq = parse_rational(o.z);
  const double z = zq.get_d();
  int M = o.grid;
  if (M <= 0) {
    M = 8;
    while (M <= std::max(c.n_max, o.box)) M *= 2;
  }
  require(M > c.n_max && M > o.box, "--grid must exceed both nmax and box");
  Meta meta{"decomp", {{"counts_dim", c.dim}, {"counts_nmax", c.n_max}, {"z", o.z}, {"m", o.m}, {"sigma", o.sigma},
                       {"box", o.box}, {"grid", M}, {"drop", o.drop}, {"exact", o.exact}}};
  const int d = c.dim;
  const TruncatedSeries G = two_point(c, z);
  const KernelTable k = invert_to_F(G, M, o.drop);
  const LambdaMu lm = match_lambda_mu(k);
  const LatticeField E = build_E(k, lm.lambda, lm.mu);
  double s0 = 0, s2 = 0;
  for (const auto& [x, v] : E.entries()) {
    s0 += v;
    s2 += static_cast<double>(x.norm_sq()) * v;
  }
  const MassFit mf = mass_estimate(G, 1, std::max(2, c.n_max / 2));
  const double mhat = mf.ok ? mf.m : 0.0;
  const double tilt_m = o.m >= 0 ? o.m : o.sigma * mhat;
  json j = meta.to_json();
  j["lambda"] = lm.lambda;
  j["lambda_interval"] = {lm.lambda_lo, num(lm.lambda_hi)};
  j["mu"] = lm.mu;
  j["mu_omega"] = 2.0 * d * lm.mu;
  j["mu_in_range"] = lm.mu_in_range;
  j["F_hat0"] = lm.F0;
  j["kappa"] = lm.kappa;
  j["moment_residuals"] = {{"sum_E", s0}, {"sum_x2_E", s2}};
  j["mass"] = mf.ok ? json(mhat) : json(nullptr);
  j["tilt"] = tilt_m;
  if (2.0 * d * lm.mu < 1) {
    const RemainderResult rf = remainder_f(G.G, k, lm, o.box);
    j["remainder"] = {{"discrepancy", rf.discrepancy}, {"certificate", rf.certificate}, {"within", rf.within},
                      {"worst", point_json(rf.worst)}};
    std::vector<int> radii;
    for (int R = std::max(1, o.box / 2); R <= o.box; R *= 2) radii.push_back(R);
    if (radii.back() != o.box) radii.push_back(o.box);
    const DecayReport dr = weighted_sup(rf.f_subtract, d - 2.0, tilt_m, DecayWeight::Tilt, radii);
    json rows = json::array();
    for (const auto& r : dr.rows) rows.push_back({{"radius", r.radius}, {"sup", r.sup}, {"argmax", point_json(r.argmax)}});
    j["decay"] = {{"rows", rows}, {"drift", dr.drift}, {"growth", dr.growth}};
  } else {
    j["remainder"] = nullptr;
  }
  const EBound eb = check_E_bound(E, tilt_m, 8, d > 4 ? std::min(d - 4.0, 2.0) : 1.0);
  j["E_bound"] = {{"c", eb.c}, {"E0", eb.E0}};
  if (o.exact) {
    const ExactMatch em = match_exact(series_kernel(c), zq);
    j["exact"] = {{"z", em.z.get_str()},         {"lambda", em.lambda.get_str()}, {"lambda_value", em.lambda.get_d()},
                  {"mu_omega", em.mu_omega.get_str()}, {"sum_E", em.sum_E.get_str()}, {"sum_x2_E", em.sum_x2_E.get_str()}};
  }
  emit_json(j, o.json_out);
  return 0;
}

// ---------------------------------------------------------------- plateau

struct PlateauOpts {
  int dim = 2;
  int r = 3;
  std::string z_grid = "0.1";
  int nmax = 6;
  std::string source = "enum";
  double zc = -1, zc_err = 0;
  double c3 = 1.0, c4 = 0.1, c5 = 0.5;
  std::string shells;
  McConfig mc;
  std::string out, plot;
};

int cmd_plateau(const PlateauOpts& o) {
  require(o.source == "enum" || o.source == "mc", "--source must be enum or mc");
  const std::vector<double> zs = parse_list(o.z_grid);
  require(!zs.empty(), "--z-grid needs at least one value");
  PlateauOptions po;
  po.c3 = o.c3;
  po.c4 = o.c4;
  po.c5 = o.c5;
  for (double s : parse_list(o.shells)) po.shells.push_back(static_cast<int>(s));
  if (o.zc > 0) {
    po.zc = o.zc;
    po.zc_err = o.zc_err;
  } else {
    const ZcEstimate e = estimate_zc(count_totals(o.dim, std::max(o.nmax, 6)));
    po.zc = e.zc;
    po.zc_err = e.uncertainty;
  }
  Meta meta{"plateau", {{"dim", o.dim}, {"r", o.r}, {"z_grid", zs}, {"nmax", o.nmax}, {"source", o.source},
                        {"zc", po.zc}, {"zc_err", po.zc_err}, {"c3", o.c3}, {"c4", o.c4}, {"c5", o.c5},
                        {"shells", po.shells}}};
  if (o.source == "mc")
    meta.config["mc"] = {{"steps", o.mc.steps}, {"burnin", o.mc.burnin}, {"thin", o.mc.thin}, {"seed", o.mc.seed},
                         {"chains", o.mc.chains}, {"blocks", o.mc.blocks}};
  const PlateauReport rep = o.source == "enum" ? plateau_report_enum(o.dim, o.r, zs, o.nmax, po)
                                               : plateau_report_mc(o.dim, o.r, zs, o.mc, po);
  json j = meta.to_json();
  json zj = json::array();
  for (const auto& q : rep.zs)
    zj.push_back({{"z", q.z}, {"chi", q.chi}, {"chi_err", num(q.chi_err)}, {"mass", num(q.mass)}, {"in_window", q.in_window},
                  {"plateau_level", q.chi / std::pow(rep.r, rep.dim)}});
  j["z"] = zj;
  j["window"] = {{"lo", {rep.window_lo[0], rep.window_lo[1]}}, {"hi", {rep.window_hi[0], rep.window_hi[1]}}};
  j["fitted"] = {{"c1", rep.c1}, {"c2", num(rep.c2)}, {"c5", rep.c5}, {"M", rep.M}};
  j["two_sided_ratio"] = {num(rep.cor_lo), num(rep.cor_hi)};
  j["pass"] = {{"psi_order", rep.psi_order}, {"upper", rep.upper_pass}, {"lower", rep.lower_pass}};
  json sh = json::array();
  for (const auto& s : rep.shells)
    sh.push_back({{"shell", s.shell}, {"z", s.z}, {"G", s.G}, {"G_err", s.G_err}, {"GT", s.GT}, {"GT_err", s.GT_err}});
  j["shells"] = sh;
  if (o.out.empty()) {
    emit_json(j, "");
  } else {
    emit_json(j, o.out + ".json");
    std::ostringstream os;
    os << meta.stamp() << "\n" << coord_header(rep.dim) << "z,G,GT,psi,psiT,G_err,GT_err,psi_err\n";
    for (const auto& r : rep.rows)
      os << point_csv(r.x) << format_double(r.z) << "," << format_double(r.G) << "," << format_double(r.GT) << ","
         << format_double(r.psi) << "," << format_double(r.psiT) << "," << format_double(r.G_err) << ","
         << format_double(r.GT_err) << "," << format_double(r.psi_err) << "\n";
    write_text(o.out + ".csv", os.str());
  }
  if (!o.plot.empty()) {
    std::ostringstream os;
    emit_plot_data(os, rep, meta.stamp());
    write_text(o.plot, os.str());
  }
  return 0;
}

// ---------------------------------------------------------------- selftest

int cmd_selftest() {
  int failed = 0;
  auto check = [&](const std::string& name, bool ok) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << "\n";
    if (!ok) ++failed;
  };
  {
    const RwParams p{3, 0.1};
    const int N = series_order(p, 1e-15);
    const GreenSeriesTable t = green_series_table(p, N, N);
    check("rw sum equals 1/(1 - mu|Omega|)", std::abs(t.C.sum() - 2.5) < 1e-12);
    check("m0 vanishes at mu_c", m0_of_mu(RwParams{3, 1.0 / 6}) == 0.0);
  }
  {
    const KernelTable k = invert_to_F(LatticeField::delta(3), 0.0, 4);
    check("z = 0 kernel is delta", (k.F - LatticeField::delta(3)).sup_norm() < 1e-15);
    const LambdaMu lm = match_lambda_mu(k);
    check("F = delta matches lambda 1, mu 0", std::abs(lm.lambda - 1) < 1e-15 && std::abs(lm.mu) < 1e-15);
    check("z = 0 Pi vanishes", recover_pi(k).sup_norm() < 1e-15);
  }
  {
    const auto t = count_saws(2, 4).totals();
    check("d = 2 totals 4 12 36 100", t == std::vector<std::uint64_t>{1, 4, 12, 36, 100});
    const TruncatedSeries s = two_point(count_saws(1, 30), 0.3);
    const ValueWithTail chi = susceptibility(s);
    check("d = 1 chi within its tail of (1+z)/(1-z)", std::abs(chi.value - 1.3 / 0.7) <= chi.tail + 1e-14);
  }
  {
    check("zero-step walk unfolds to itself", unfold(WalkRecord{{Point(2)}}, 3).sites.size() == 1);
    check("discrepancy vanishes for n_max < r", interaction_discrepancy(2, 4, 0.2, 3, Point{1, 0}).value == 0.0);
    check("tail sum of zero amplitude", lattice_tail_sum(5, 0.0, 2, 1.0, 4, Point(5)).value == 0.0);
    check("tail sum at nu r = 50", lattice_tail_sum(5, 1.0, 2, 12.5, 4, Point(5)).value < 1e-15);
  }
  return failed == 0 ? 0 : 1;
}

void set_threads(int threads) {
  if (threads <= 0) {
    if (const char* env = std::getenv("SAWLAB_THREADS")) threads = std::atoi(env);
  }
  if (threads > 0) omp_set_num_threads(threads);
}

}  // namespace

std::vector<PlotRow> plot_rows(const PlateauReport& rep) {
  std::vector<PlotRow> rows;
  const double vol = std::pow(rep.r, rep.dim);
  for (const auto& r : rep.rows) {
    double chi = 0;
    for (const auto& q : rep.zs)
      if (q.z == r.z) chi = q.chi;
    rows.push_back({r.z, r.x, r.x.norm_inf(), r.GT, chi / vol});
  }
  return rows;
}

void emit_plot_data(std::ostream& os, const PlateauReport& rep, const std::string& stamp) {
  if (!stamp.empty()) os << stamp << "\n";
  os << "dim=" << rep.dim << "\n";
  os << "z," << coord_header(rep.dim) << "norm_inf,GT,reference\n";
  for (const auto& r : plot_rows(rep))
    os << format_double(r.z) << "," << point_csv(r.x) << r.norm_inf << "," << format_double(r.GT) << ","
       << format_double(r.reference) << "\n";
}

std::vector<PlotRow> read_plot_data(std::istream& is) {
  std::vector<PlotRow> rows;
  std::string line;
  int dim = -1;
  bool header = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("dim=", 0) == 0) {
      dim = std::stoi(line.substr(4));
      require(dim >= 1 && dim <= kMaxDim, "bad dim line in plot data");
      continue;
    }
    if (!header) {
      header = true;
      continue;
    }
    require(dim > 0, "plot data lacks a dim line");
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    require(static_cast<int>(f.size()) == dim + 4, "plot data row has the wrong field count");
    PlotRow r;
    r.z = std::strtod(f[0].c_str(), nullptr);
    r.x = Point(dim);
    for (int i = 0; i < dim; ++i) r.x[i] = std::stoi(f[static_cast<std::size_t>(i) + 1]);
    r.norm_inf = std::stoi(f[static_cast<std::size_t>(dim) + 1]);
    r.GT = std::strtod(f[static_cast<std::size_t>(dim) + 2].c_str(), nullptr);
    r.reference = std::strtod(f[static_cast<std::size_t>(dim) + 3].c_str(), nullptr);
    rows.push_back(r);
  }
  return rows;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

int run(const std::vector<std::string>& args_in) {
  CLI::App app{"self-avoiding and simple random walk two-point functions", "sawlab"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "thread cap (also SAWLAB_THREADS)");

  RwOpts rw;
  auto* s_rw = app.add_subcommand("rw-green", "random walk Green function on a box");
  s_rw->add_option("--dim", rw.dim, "lattice dimension")->capture_default_str();
  s_rw->add_option("--mu", rw.mu, "walk fugacity, 0 <= mu <= 1/(2d)")->required();
  s_rw->add_option("--box", rw.box, "sup-norm radius");
  s_rw->add_option("--nmax", rw.nmax, "series order (default from the tail certificate)");
  s_rw->add_option("--grid", rw.grid, "cross-check by quadrature from this grid");
  s_rw->add_option("--a1", rw.a1, "also scan sup C <x>^{d-2} e^{a1 m0 |x|}");
  s_rw->add_option("--out", rw.out, "CSV table");
  s_rw->add_option("--json", rw.json_out, "summary file (default stdout)");

  EnumOpts en;
  auto* s_en = app.add_subcommand("saw-enum", "exact self-avoiding walk counts");
  s_en->add_option("--dim", en.dim, "lattice dimension")->capture_default_str();
  s_en->add_option("--nmax", en.nmax, "longest walk counted")->required();
  s_en->add_option("--torus", en.torus, "side r or none");
  s_en->add_option("--z", en.z, "also report chi, bubble and mass at this z");
  s_en->add_flag("--totals-only", en.totals_only, "c_n only, faster and deeper");
  s_en->add_option("--out", en.out, "CSV of c_n(x)");
  s_en->add_option("--cache", en.cache, "counts cache file");
  s_en->add_option("--json", en.json_out, "summary file (default stdout)");

  McOpts mc;
  auto* s_mc = app.add_subcommand("saw-mc", "Berretti-Sokal Monte Carlo");
  s_mc->add_option("--dim", mc.cfg.dim, "lattice dimension")->capture_default_str();
  s_mc->add_option("--torus", mc.torus, "side r or none");
  s_mc->add_option("--z", mc.cfg.z, "fugacity below z_c")->required();
  s_mc->add_option("--steps", mc.cfg.steps, "steps per chain after burn-in")->capture_default_str();
  s_mc->add_option("--burnin", mc.cfg.burnin, "discarded steps per chain")->capture_default_str();
  s_mc->add_option("--thin", mc.cfg.thin, "0 picks 2d <length>");
  s_mc->add_option("--seed", mc.cfg.seed, "run seed")->capture_default_str();
  s_mc->add_option("--chains", mc.cfg.chains, "independent chains")->capture_default_str();
  s_mc->add_option("--blocks", mc.cfg.blocks, "jackknife blocks per chain")->capture_default_str();
  s_mc->add_flag("--symmetrize", mc.symmetrize, "average estimates over lattice symmetries");
  s_mc->add_option("--out", mc.out, "CSV of G estimates; .hist and .json written alongside");
  s_mc->add_option("--json", mc.json_out, "summary file (default stdout)");

  LaceOpts la;
  auto* s_la = app.add_subcommand("lace", "kernel recovery and assumption checks");
  s_la->add_option("--from-counts", la.counts, "counts cache from saw-enum --cache")->required();
  s_la->add_option("--z", la.z, "comma separated");
  s_la->add_option("--m", la.m, "tilt for the moment sums");
  s_la->add_option("--grid", la.grid, "orthant grid size of the inversion")->capture_default_str();
  s_la->add_option("--drop", la.drop, "kernel entries at or below this are pruned")->capture_default_str();
  s_la->add_flag("--check-assumption", la.check, "run the five kernel checks across the z list");
  s_la->add_flag("--pi4", la.pi4, "four-loop diagram bounds");
  s_la->add_option("--out", la.json_out, "JSON report (default stdout)");

  DecompOpts de;
  auto* s_de = app.add_subcommand("decomp", "moment-matched decomposition");
  s_de->add_option("--from-counts", de.counts, "counts cache from saw-enum --cache")->required();
  s_de->add_option("--z", de.z, "decimal or p/q");
  s_de->add_option("--m", de.m, "tilt (default sigma times the fitted mass)");
  s_de->add_option("--sigma", de.sigma, "tilt as a fraction of the fitted mass")->capture_default_str();
  s_de->add_option("--box", de.box, "sup-norm radius of the remainder table")->capture_default_str();
  s_de->add_option("--grid", de.grid, "orthant grid size of the inversion");
  s_de->add_option("--drop", de.drop, "kernel entries at or below this are pruned")->capture_default_str();
  s_de->add_flag("--exact", de.exact, "also match in exact rationals");
  s_de->add_option("--out", de.json_out, "JSON report (default stdout)");

  PlateauOpts pl;
  auto* s_pl = app.add_subcommand("plateau", "torus against Z^d");
  s_pl->add_option("--dim", pl.dim, "lattice dimension")->capture_default_str();
  s_pl->add_option("--r", pl.r, "torus side")->required();
  s_pl->add_option("--z-grid", pl.z_grid, "comma separated z values");
  s_pl->add_option("--nmax", pl.nmax, "enumeration depth (enum source)")->capture_default_str();
  s_pl->add_option("--source", pl.source, "enum or mc")->capture_default_str();
  s_pl->add_option("--zc", pl.zc, "critical point (default estimated from totals)");
  s_pl->add_option("--zc-err", pl.zc_err, "uncertainty of --zc");
  s_pl->add_option("--c3", pl.c3, "window start zc - c3 r^-2")->capture_default_str();
  s_pl->add_option("--c4", pl.c4, "window end zc - c4 r^(-d/2)")->capture_default_str();
  s_pl->add_option("--c5", pl.c5, "decay constant in the upper bound")->capture_default_str();
  s_pl->add_option("--shells", pl.shells, "comma separated sup-norm shells (mc)");
  s_pl->add_option("--steps", pl.mc.steps, "mc steps per chain")->capture_default_str();
  s_pl->add_option("--burnin", pl.mc.burnin, "mc burn-in per chain")->capture_default_str();
  s_pl->add_option("--thin", pl.mc.thin, "mc thinning, 0 picks 2d <length>");
  s_pl->add_option("--seed", pl.mc.seed, "mc seed; the torus run uses seed + 1")->capture_default_str();
  s_pl->add_option("--chains", pl.mc.chains, "mc chains per run")->capture_default_str();
  s_pl->add_option("--out", pl.out, "basename for .json and .csv");
  s_pl->add_option("--plot", pl.plot, "plot data CSV");

  auto* s_st = app.add_subcommand("selftest", "quick identities");

  std::vector<std::string> args(args_in.rbegin(), args_in.rend());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  set_threads(threads);
  try {
    if (s_rw->parsed()) return cmd_rw_green(rw);
    if (s_en->parsed()) return cmd_saw_enum(en);
    if (s_mc->parsed()) return cmd_saw_mc(mc);
    if (s_la->parsed()) return cmd_lace(la);
    if (s_de->parsed()) return cmd_decomp(de);
    if (s_pl->parsed()) return cmd_plateau(pl);
    if (s_st->parsed()) return cmd_selftest();
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const BudgetError& e) {
    std::cerr << "budget exhausted: " << e.what() << "\n";
    return 3;
  }
  return 2;
}

}  // namespace sawlab
