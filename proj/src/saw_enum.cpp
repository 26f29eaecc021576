#include "sawlab/saw_enum.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "sawlab/util.hpp"

namespace sawlab {

std::uint64_t SawCounts::at(int n, const Point& x) const {
  if (n < 0 || n > n_max) return 0;
  const auto& m = by_length[static_cast<std::size_t>(n)];
  auto it = m.find(x);
  return it == m.end() ? 0 : it->second;
}

std::uint64_t SawCounts::total(int n) const {
  if (n < 0 || n > n_max) return 0;
  std::uint64_t s = 0;
  for (const auto& [x, c] : by_length[static_cast<std::size_t>(n)]) s += c;
  return s;
}

std::vector<std::uint64_t> SawCounts::totals() const {
  std::vector<std::uint64_t> t;
  for (int n = 0; n <= n_max; ++n) t.push_back(total(n));
  return t;
}

double enumeration_work_bound(int dim, int n_max) {
  double s = 1, term = 2.0 * dim;
  for (int n = 1; n <= n_max; ++n) {
    s += term;
    term *= 2.0 * dim - 1;
  }
  return s;
}

namespace {

void check_budget(int dim, int n_max, double budget, double divisor) {
  require(dim >= 1 && dim <= kMaxDim, "dimension out of range");
  require(n_max >= 0, "n_max must be nonnegative");
  if (enumeration_work_bound(dim, n_max) / divisor > budget) {
    int feasible = 0;
    while (feasible < n_max && enumeration_work_bound(dim, feasible + 1) / divisor <= budget) ++feasible;
    throw BudgetError("enumeration budget exceeded at n_max=" + std::to_string(n_max) +
                      "; feasible depth is " + std::to_string(feasible));
  }
  // Largest count is bounded by 2d(2d-1)^{n-1}; keep it inside uint64.
  require(n_max == 0 || std::log2(2.0 * dim) + (n_max - 1) * std::log2(2.0 * dim - 1) < 63,
          "n_max too large for 64-bit counts");
}

// Image of x under the isometry sending e_1 to s e_i.
Point first_step_image(const Point& x, int i, int s) {
  Point y = x;
  std::swap(y[0], y[i]);
  y[i] *= s;
  return y;
}

// Shared geometry for the dense enumerator: every site is a linear index
// into either a box of radius n_max (Z^d) or the torus.
struct DenseGeometry {
  int dim = 0, n_max = 0, torus = 0;
  std::size_t nsites = 0;
  std::size_t origin = 0;
  std::vector<Point> sites;               // index -> point
  std::vector<std::ptrdiff_t> offsets;    // Z^d: step offsets
  std::vector<std::uint32_t> neighbours;  // torus: site * 2d + dir
  std::vector<std::int32_t> slot;         // site -> endpoint slot (Z^d ball)
  std::vector<Point> slot_point;

  std::size_t step(std::size_t pos, int dir) const {
    if (torus) return neighbours[pos * static_cast<std::size_t>(2 * dim) + static_cast<std::size_t>(dir)];
    return static_cast<std::size_t>(static_cast<std::ptrdiff_t>(pos) + offsets[static_cast<std::size_t>(dir)]);
  }
};

DenseGeometry make_geometry(int dim, int n_max, int torus) {
  DenseGeometry g;
  g.dim = dim;
  g.n_max = n_max;
  g.torus = torus;
  if (torus) {
    std::size_t n = 1;
    for (int i = 0; i < dim; ++i) n *= static_cast<std::size_t>(torus);
    g.nsites = n;
    g.neighbours.resize(n * static_cast<std::size_t>(2 * dim));
    g.sites.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
      const Point x = torus_point_from_index(s, dim, torus);
      g.sites.push_back(x);
      for (int i = 0; i < dim; ++i) {
        for (int sg = 0; sg < 2; ++sg) {
          const Point y = project_torus(x + Point::unit(dim, i, sg ? -1 : 1), torus).coords;
          g.neighbours[s * static_cast<std::size_t>(2 * dim) + static_cast<std::size_t>(2 * i + sg)] =
              static_cast<std::uint32_t>(torus_index(y, torus));
        }
      }
    }
    g.origin = torus_index(Point(dim), torus);
    g.slot.resize(n);
    for (std::size_t s = 0; s < n; ++s) {
      g.slot[s] = static_cast<std::int32_t>(s);
      g.slot_point.push_back(g.sites[s]);
    }
  } else {
    const Box box = Box::centered(dim, n_max);
    g.nsites = box.volume();
    std::ptrdiff_t stride = 1;
    std::vector<std::ptrdiff_t> strides(static_cast<std::size_t>(dim));
    for (int i = dim - 1; i >= 0; --i) {
      strides[static_cast<std::size_t>(i)] = stride;
      stride *= box.extent(i);
    }
    for (int i = 0; i < dim; ++i) {
      g.offsets.push_back(strides[static_cast<std::size_t>(i)]);
      g.offsets.push_back(-strides[static_cast<std::size_t>(i)]);
    }
    g.origin = box.index(Point(dim));
    g.slot.assign(g.nsites, -1);
    for (std::size_t s = 0; s < g.nsites; ++s) {
      const Point x = box.point(s);
      if (x.norm_1() <= n_max) {
        g.slot[s] = static_cast<std::int32_t>(g.slot_point.size());
        g.slot_point.push_back(x);
      }
    }
  }
  return g;
}

struct DenseWalker {
  const DenseGeometry& g;
  std::vector<char> occ;
  std::vector<std::uint64_t> counts;  // (n_max+1) x slots
  std::size_t nslots;

  explicit DenseWalker(const DenseGeometry& geo)
      : g(geo), occ(geo.nsites, 0), counts((static_cast<std::size_t>(geo.n_max) + 1) * geo.slot_point.size(), 0),
        nslots(geo.slot_point.size()) {}

  void record(int depth, std::size_t pos) {
    ++counts[static_cast<std::size_t>(depth) * nslots + static_cast<std::size_t>(g.slot[pos])];
  }

  void dfs(std::size_t pos, int depth) {
    record(depth, pos);
    if (depth == g.n_max) return;
    for (int dir = 0; dir < 2 * g.dim; ++dir) {
      const std::size_t np = g.step(pos, dir);
      if (occ[np]) continue;
      occ[np] = 1;
      dfs(np, depth + 1);
      occ[np] = 0;
    }
  }
};

SawCounts count_dense(int dim, int n_max, int torus) {
  const DenseGeometry g = make_geometry(dim, n_max, torus);
  const std::size_t nslots = g.slot_point.size();
  std::vector<std::uint64_t> merged((static_cast<std::size_t>(n_max) + 1) * nslots, 0);

  // Subtrees: first step +e_1 (the others are images), second step any
  // direction that leaves a fresh site.
  std::vector<int> second;
  const std::size_t first = g.step(g.origin, 0);
  if (n_max >= 2)
    for (int dir = 0; dir < 2 * dim; ++dir)
      if (g.step(first, dir) != g.origin && g.step(first, dir) != first) second.push_back(dir);

#pragma omp parallel
  {
    DenseWalker w(g);
    w.occ[g.origin] = 1;
    w.occ[first] = 1;
#pragma omp for schedule(dynamic, 1)
    for (std::size_t t = 0; t < second.size(); ++t) {
      const std::size_t p2 = g.step(first, second[t]);
      w.occ[p2] = 1;
      w.dfs(p2, 2);
      w.occ[p2] = 0;
    }
#pragma omp critical(sawlab_enum_merge)
    for (std::size_t i = 0; i < merged.size(); ++i) merged[i] += w.counts[i];
  }
  if (n_max >= 1 && first != g.origin) ++merged[1 * nslots + static_cast<std::size_t>(g.slot[first])];

  SawCounts out;
  out.dim = dim;
  out.torus = torus;
  out.n_max = n_max;
  out.by_length.resize(static_cast<std::size_t>(n_max) + 1);
  out.by_length[0][Point(dim)] = 1;
  for (int n = 1; n <= n_max; ++n) {
    auto& table = out.by_length[static_cast<std::size_t>(n)];
    for (std::size_t s = 0; s < nslots; ++s) {
      const std::uint64_t c = merged[static_cast<std::size_t>(n) * nslots + s];
      if (!c) continue;
      for (int i = 0; i < dim; ++i) {
        for (int sg : {1, -1}) {
          Point y = first_step_image(g.slot_point[s], i, sg);
          if (torus) y = project_torus(y, torus).coords;
          table[y] += c;
        }
      }
    }
  }
  return out;
}

struct SortedWalker {
  int dim, n_max, torus;
  std::vector<Point> visited;  // kept sorted
  SawCounts* out;

  void dfs(const Point& pos, int depth) {
    ++out->by_length[static_cast<std::size_t>(depth)][pos];
    if (depth == n_max) return;
    for (int i = 0; i < dim; ++i) {
      for (int sg : {1, -1}) {
        Point np = pos + Point::unit(dim, i, sg);
        if (torus) np = project_torus(np, torus).coords;
        auto it = std::lower_bound(visited.begin(), visited.end(), np);
        if (it != visited.end() && *it == np) continue;
        it = visited.insert(it, np);
        dfs(np, depth + 1);
        visited.erase(std::lower_bound(visited.begin(), visited.end(), np));
      }
    }
  }
};

SawCounts count_sorted(int dim, int n_max, int torus) {
  SawCounts out;
  out.dim = dim;
  out.torus = torus;
  out.n_max = n_max;
  out.by_length.resize(static_cast<std::size_t>(n_max) + 1);
  SortedWalker w{dim, n_max, torus, {Point(dim)}, &out};
  w.dfs(Point(dim), 0);
  return out;
}

}  // namespace

SawCounts count_saws(int dim, int n_max, int torus, Enumerator how, double budget) {
  require(torus == 0 || torus >= 3, "torus side must be >= 3");
  check_budget(dim, n_max, budget, 1.0);
  if (torus) {
    double sites = std::pow(static_cast<double>(torus), dim);
    require(sites <= 1e7, "torus too large for enumeration");
  }
  return how == Enumerator::Dense ? count_dense(dim, n_max, torus) : count_sorted(dim, n_max, torus);
}

std::vector<std::uint64_t> count_totals(int dim, int n_max, double budget) {
  check_budget(dim, std::max(0, n_max - 1), budget, 2.0 * dim);
  std::vector<std::uint64_t> totals(static_cast<std::size_t>(n_max) + 1, 0);
  totals[0] = 1;
  if (n_max >= 1) totals[1] = static_cast<std::uint64_t>(2 * dim);
  if (n_max < 2) return totals;

  const DenseGeometry g = make_geometry(dim, n_max, 0);
  const std::size_t first = g.step(g.origin, 0);
  // (second dir, third dir, multiplicity); the second step is +e_1 or +e_2.
  struct Prefix {
    int d2, d3;
    std::uint64_t mult;
  };
  std::vector<Prefix> prefixes;
  std::vector<int> seconds = {0};
  if (dim >= 2) seconds.push_back(2);
  std::vector<std::uint64_t> t2(static_cast<std::size_t>(n_max) + 1, 0);
  for (int d2 : seconds) {
    const std::uint64_t mult = d2 == 0 ? 1 : static_cast<std::uint64_t>(2 * (dim - 1));
    t2[2] += mult;
    const std::size_t p2 = g.step(first, d2);
    if (n_max >= 3)
      for (int d3 = 0; d3 < 2 * dim; ++d3) {
        const std::size_t p3 = g.step(p2, d3);
        if (p3 != first) prefixes.push_back({d2, d3, mult});
      }
  }

  const int last = n_max;
#pragma omp parallel
  {
    std::vector<char> occ(g.nsites, 0);
    std::vector<std::uint64_t> acc(static_cast<std::size_t>(n_max) + 1, 0);
    occ[g.origin] = occ[first] = 1;
    // Counts walks of every length through depth `last`, weighting by mult.
    auto dfs = [&](auto&& self, std::size_t pos, int depth, std::uint64_t mult) -> void {
      acc[static_cast<std::size_t>(depth)] += mult;
      if (depth == last) return;
      if (depth == last - 1) {
        std::uint64_t free = 0;
        for (int dir = 0; dir < 2 * dim; ++dir) free += occ[g.step(pos, dir)] == 0;
        acc[static_cast<std::size_t>(last)] += free * mult;
        return;
      }
      for (int dir = 0; dir < 2 * dim; ++dir) {
        const std::size_t np = g.step(pos, dir);
        if (occ[np]) continue;
        occ[np] = 1;
        self(self, np, depth + 1, mult);
        occ[np] = 0;
      }
    };
#pragma omp for schedule(dynamic, 1)
    for (std::size_t t = 0; t < prefixes.size(); ++t) {
      const std::size_t p2 = g.step(first, prefixes[t].d2);
      const std::size_t p3 = g.step(p2, prefixes[t].d3);
      occ[p2] = 1;
      occ[p3] = 1;
      dfs(dfs, p3, 3, prefixes[t].mult);
      occ[p3] = 0;
      occ[p2] = 0;
    }
#pragma omp critical(sawlab_totals_merge)
    for (std::size_t n = 0; n < acc.size(); ++n) t2[n] += acc[n];
  }
  for (int n = 2; n <= n_max; ++n) totals[static_cast<std::size_t>(n)] = static_cast<std::uint64_t>(2 * dim) * t2[static_cast<std::size_t>(n)];
  return totals;
}

double tail_bound(int dim, int n_max, double z) {
  const double q = (2.0 * dim - 1) * z;
  require(z >= 0, "z must be nonnegative");
  require(q < 1, "tail bound needs (2d-1) z < 1");
  if (z == 0) return 0;
  return 2.0 * dim * std::pow(2.0 * dim - 1, n_max) * std::pow(z, n_max + 1) / (1 - q);
}

TruncatedSeries two_point(const SawCounts& counts, double z) {
  require(z >= 0, "z must be nonnegative");
  TruncatedSeries s;
  s.z = z;
  s.n_max = counts.n_max;
  s.dim = counts.dim;
  s.torus = counts.torus;
  s.G = LatticeField(counts.dim);
  std::map<Point, std::vector<std::uint64_t>> per_site;
  for (int n = 0; n <= counts.n_max; ++n)
    for (const auto& [x, c] : counts.by_length[static_cast<std::size_t>(n)]) {
      auto& v = per_site[x];
      v.resize(static_cast<std::size_t>(counts.n_max) + 1, 0);
      v[static_cast<std::size_t>(n)] = c;
    }
  for (const auto& [x, v] : per_site) {
    double h = 0;
    for (auto it = v.rbegin(); it != v.rend(); ++it) h = h * z + static_cast<double>(*it);
    s.G.set(x, h);
  }
  if ((2.0 * counts.dim - 1) * z < 1) s.tail = tail_bound(counts.dim, counts.n_max, z);
  return s;
}

ValueWithTail susceptibility(const TruncatedSeries& s) {
  require(s.tail.has_value(), "susceptibility needs a tail certificate ((2d-1) z < 1)");
  return {s.G.sum(), *s.tail};
}

double bubble(const TruncatedSeries& s, double m) {
  require(m >= 0, "tilt must be nonnegative");
  double b = 0;
  for (const auto& [x, v] : s.G.entries()) {
    if (x.is_origin()) continue;
    const double w = v * std::exp(m * x[0]);
    b += w * w;
  }
  return b;
}

MassFit mass_estimate(const LatticeField& G, int lo, int hi, double min_decades) {
  require(lo >= 1 && hi > lo, "fit range must satisfy 1 <= lo < hi");
  const int d = G.dim();
  MassFit fit;
  std::vector<double> ts, ys;
  double gmax = 0, gmin = 0;
  for (int t = lo; t <= hi; ++t) {
    const double g = G.at(Point::unit(d, 0, t));
    if (!(g > 0)) continue;
    ts.push_back(t);
    ys.push_back(std::log(g) + 0.5 * (d - 1) * std::log(static_cast<double>(t)));
    if (ts.size() == 1) gmax = g;
    gmin = g;
  }
  fit.points = static_cast<int>(ts.size());
  if (ts.size() < 2) {
    fit.reason = "fewer than two positive axis values in range";
    return fit;
  }
  const double n = static_cast<double>(ts.size());
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    st += ts[i];
    sy += ys[i];
    stt += ts[i] * ts[i];
    sty += ts[i] * ys[i];
  }
  const double slope = (n * sty - st * sy) / (n * stt - st * st);
  fit.m = -slope;
  fit.intercept = (sy - slope * st) / n;
  if (std::log10(gmax / gmin) < min_decades) {
    fit.reason = "insufficient dynamic range";
    return fit;
  }
  fit.ok = true;
  return fit;
}

MassFit mass_estimate(const TruncatedSeries& s, int lo, int hi, double min_decades) {
  require(s.torus == 0, "mass fit needs a Z^d series");
  require(hi <= s.n_max, "fit range beyond the enumerated length");
  return mass_estimate(s.G, lo, hi, min_decades);
}

ZcEstimate estimate_zc(const std::vector<std::uint64_t>& c) {
  const int N = static_cast<int>(c.size()) - 1;
  require(N >= 4, "z_c estimate needs totals through n >= 4");
  // Alternate-term ratios remove the bipartite (-z_c) oscillation.
  std::vector<double> r(c.size(), 0.0), J(c.size(), 0.0);
  for (int n = 2; n <= N; ++n) r[n] = std::sqrt(static_cast<double>(c[n]) / static_cast<double>(c[n - 2]));
  ZcEstimate e;
  for (int n = 3; n <= N; ++n) {
    J[n] = n * r[n] - (n - 1) * r[n - 1];
    e.intercepts.push_back(J[n]);
  }
  double mu = J[N];
  if (N >= 7) {
    const double d1 = J[N - 2] - J[N - 4], d2 = J[N] - J[N - 2];
    if (std::abs(d2 - d1) > 1e-12 * std::abs(J[N])) {
      const double a = J[N] - d2 * d2 / (d2 - d1);
      if (std::isfinite(a)) mu = a;
    }
  }
  const double spread = std::max(std::abs(mu - J[N]), std::abs(J[N] - J[N - 1]));
  e.mu = mu;
  e.zc = 1 / mu;
  e.uncertainty = spread / (mu * mu);
  return e;
}

void write_counts(std::ostream& os, const SawCounts& c) {
  std::ostringstream body;
  body << "dim=" << c.dim << '\n';
  body << "torus=" << (c.torus ? std::to_string(c.torus) : std::string("none")) << '\n';
  body << "nmax=" << c.n_max << '\n';
  for (int n = 0; n <= c.n_max; ++n)
    for (const auto& [x, v] : c.by_length[static_cast<std::size_t>(n)]) {
      body << n;
      for (int i = 0; i < x.dim(); ++i) body << ' ' << x[i];
      body << ' ' << v << '\n';
    }
  const std::string s = body.str();
  os << s << "checksum=" << hex64(fnv1a64(s)) << '\n';
}

SawCounts read_counts(std::istream& is) {
  std::string body, line;
  SawCounts c;
  bool have_checksum = false;
  int header = 0;
  while (std::getline(is, line)) {
    if (line.rfind("checksum=", 0) == 0) {
      require(line.substr(9) == hex64(fnv1a64(body)), "counts cache checksum mismatch");
      have_checksum = true;
      break;
    }
    body += line;
    body += '\n';
    if (header < 3) {
      const auto eq = line.find('=');
      require(eq != std::string::npos, "counts cache header is malformed");
      const std::string key = line.substr(0, eq), val = line.substr(eq + 1);
      if (key == "dim") {
        c.dim = std::stoi(val);
      } else if (key == "torus") {
        c.torus = val == "none" ? 0 : std::stoi(val);
      } else if (key == "nmax") {
        c.n_max = std::stoi(val);
        c.by_length.resize(static_cast<std::size_t>(c.n_max) + 1);
      } else {
        throw PreconditionError("unknown counts cache key: " + key);
      }
      ++header;
      continue;
    }
    std::istringstream ls(line);
    int n;
    Point x(c.dim);
    std::uint64_t v;
    require(static_cast<bool>(ls >> n), "malformed counts line: " + line);
    for (int i = 0; i < c.dim; ++i) require(static_cast<bool>(ls >> x[i]), "malformed counts line: " + line);
    require(static_cast<bool>(ls >> v), "malformed counts line: " + line);
    require(n >= 0 && n <= c.n_max, "length out of range in counts cache");
    c.by_length[static_cast<std::size_t>(n)][x] = v;
  }
  require(have_checksum, "counts cache has no checksum trailer");
  require(header == 3, "counts cache header incomplete");
  return c;
}

}  // namespace sawlab
