#include "sawlab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

namespace sawlab {

// ---------------------------------------------------------------- Point

Point::Point(int dim) : dim_(dim) {
  require(dim >= 1 && dim <= kMaxDim, "dimension must be in [1, " + std::to_string(kMaxDim) + "]");
}

Point::Point(std::initializer_list<int> coords) : Point(static_cast<int>(coords.size())) {
  std::copy(coords.begin(), coords.end(), c_.begin());
}

Point Point::from_span(std::span<const int> coords) {
  Point p(static_cast<int>(coords.size()));
  std::copy(coords.begin(), coords.end(), p.c_.begin());
  return p;
}

Point Point::unit(int dim, int axis, int sign) {
  Point p(dim);
  p[axis] = sign;
  return p;
}

Point Point::operator+(const Point& o) const {
  Point r = *this;
  r += o;
  return r;
}

Point& Point::operator+=(const Point& o) {
  for (int i = 0; i < dim_; ++i) c_[i] += o.c_[i];
  return *this;
}

Point Point::operator-(const Point& o) const {
  Point r = *this;
  for (int i = 0; i < dim_; ++i) r.c_[i] -= o.c_[i];
  return r;
}

Point Point::operator-() const {
  Point r = *this;
  for (int i = 0; i < dim_; ++i) r.c_[i] = -r.c_[i];
  return r;
}

Point Point::operator*(int s) const {
  Point r = *this;
  for (int i = 0; i < dim_; ++i) r.c_[i] *= s;
  return r;
}

bool Point::is_origin() const {
  for (int i = 0; i < dim_; ++i)
    if (c_[i] != 0) return false;
  return true;
}

long long Point::norm_sq() const {
  long long s = 0;
  for (int i = 0; i < dim_; ++i) s += static_cast<long long>(c_[i]) * c_[i];
  return s;
}

double Point::norm() const { return std::sqrt(static_cast<double>(norm_sq())); }

int Point::norm_inf() const {
  int m = 0;
  for (int i = 0; i < dim_; ++i) m = std::max(m, std::abs(c_[i]));
  return m;
}

int Point::norm_1() const {
  int s = 0;
  for (int i = 0; i < dim_; ++i) s += std::abs(c_[i]);
  return s;
}

std::strong_ordering operator<=>(const Point& a, const Point& b) {
  if (auto c = a.dim_ <=> b.dim_; c != 0) return c;
  for (int i = 0; i < a.dim_; ++i)
    if (auto c = a.c_[i] <=> b.c_[i]; c != 0) return c;
  return std::strong_ordering::equal;
}

std::size_t PointHash::operator()(const Point& p) const noexcept {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(p.dim());
  for (int i = 0; i < p.dim(); ++i) {
    h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(p[i])) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

std::ostream& operator<<(std::ostream& os, const Point& p) {
  os << '(';
  for (int i = 0; i < p.dim(); ++i) os << (i ? "," : "") << p[i];
  return os << ')';
}

double xvee(const Point& x) { return std::max(x.norm(), 1.0); }

// ---------------------------------------------------------------- torus

int torus_lo(int r) { return -(r / 2); }

int torus_reduce(int coord, int r) {
  const int lo = torus_lo(r);
  int v = (coord - lo) % r;
  if (v < 0) v += r;
  return v + lo;
}

TorusPoint project_torus(const Point& x, int r) {
  require(r >= 3, "torus side must be >= 3");
  Point y = x;
  for (int i = 0; i < x.dim(); ++i) y[i] = torus_reduce(x[i], r);
  return {y, r};
}

std::size_t torus_index(const Point& x, int r) {
  const int lo = torus_lo(r);
  std::size_t idx = 0;
  for (int i = 0; i < x.dim(); ++i) idx = idx * static_cast<std::size_t>(r) + static_cast<std::size_t>(x[i] - lo);
  return idx;
}

Point torus_point_from_index(std::size_t idx, int dim, int r) {
  Point p(dim);
  const int lo = torus_lo(r);
  for (int i = dim - 1; i >= 0; --i) {
    p[i] = static_cast<int>(idx % static_cast<std::size_t>(r)) + lo;
    idx /= static_cast<std::size_t>(r);
  }
  return p;
}

// ---------------------------------------------------------------- Box

Box::Box(Point lo, Point hi) : lo_(lo), hi_(hi) {
  require(lo.dim() == hi.dim(), "box corners must share a dimension");
}

Box Box::centered(int dim, int radius) {
  Point lo(dim), hi(dim);
  for (int i = 0; i < dim; ++i) {
    lo[i] = -radius;
    hi[i] = radius;
  }
  return {lo, hi};
}

bool Box::empty() const {
  if (dim() == 0) return true;
  for (int i = 0; i < dim(); ++i)
    if (hi_[i] < lo_[i]) return true;
  return false;
}

std::size_t Box::volume() const {
  if (empty()) return 0;
  std::size_t v = 1;
  for (int i = 0; i < dim(); ++i) v *= static_cast<std::size_t>(extent(i));
  return v;
}

bool Box::contains(const Point& x) const {
  for (int i = 0; i < dim(); ++i)
    if (x[i] < lo_[i] || x[i] > hi_[i]) return false;
  return true;
}

std::size_t Box::index(const Point& x) const {
  std::size_t idx = 0;
  for (int i = 0; i < dim(); ++i)
    idx = idx * static_cast<std::size_t>(extent(i)) + static_cast<std::size_t>(x[i] - lo_[i]);
  return idx;
}

Point Box::point(std::size_t idx) const {
  Point p(dim());
  for (int i = dim() - 1; i >= 0; --i) {
    const auto e = static_cast<std::size_t>(extent(i));
    p[i] = lo_[i] + static_cast<int>(idx % e);
    idx /= e;
  }
  return p;
}

Box Box::expanded(int by) const {
  Point lo = lo_, hi = hi_;
  for (int i = 0; i < dim(); ++i) {
    lo[i] -= by;
    hi[i] += by;
  }
  return {lo, hi};
}

Box Box::intersect(const Box& o) const {
  Point lo = lo_, hi = hi_;
  for (int i = 0; i < dim(); ++i) {
    lo[i] = std::max(lo[i], o.lo_[i]);
    hi[i] = std::min(hi[i], o.hi_[i]);
  }
  return {lo, hi};
}

Box Box::minkowski_sum(const Box& o) const { return {lo_ + o.lo_, hi_ + o.hi_}; }

// ---------------------------------------------------------------- momenta

MomentumPoint::MomentumPoint(std::span<const double> comps) : dim(static_cast<int>(comps.size())) {
  require(dim >= 1 && dim <= kMaxDim, "momentum dimension out of range");
  std::copy(comps.begin(), comps.end(), k.begin());
}

MomentumPoint::MomentumPoint(std::initializer_list<double> comps)
    : MomentumPoint(std::span<const double>(comps.begin(), comps.size())) {}

double MomentumPoint::norm() const {
  double s = 0;
  for (int i = 0; i < dim; ++i) s += k[i] * k[i];
  return std::sqrt(s);
}

bool MomentumPoint::in_zone() const {
  for (int i = 0; i < dim; ++i)
    if (!(k[i] > -std::numbers::pi && k[i] <= std::numbers::pi)) return false;
  return true;
}

// ---------------------------------------------------------------- LatticeField

LatticeField LatticeField::delta(int dim) {
  LatticeField f(dim);
  f.set(Point(dim), 1.0);
  return f;
}

LatticeField LatticeField::step_distribution(int dim) {
  LatticeField f(dim);
  const double w = 1.0 / (2.0 * dim);
  for (int i = 0; i < dim; ++i) {
    f.set(Point::unit(dim, i, 1), w);
    f.set(Point::unit(dim, i, -1), w);
  }
  return f;
}

LatticeField LatticeField::from_dense(const Box& box, std::span<const double> values, double drop) {
  require(values.size() == box.volume(), "dense buffer does not match box volume");
  LatticeField f(box.dim());
  auto hint = f.map_.end();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (std::abs(values[i]) > drop || (drop == 0.0 && values[i] != 0.0)) {
      hint = f.map_.emplace_hint(hint, box.point(i), values[i]);
      ++hint;
    }
  }
  return f;
}

double LatticeField::at(const Point& x) const {
  auto it = map_.find(x);
  return it == map_.end() ? 0.0 : it->second;
}

void LatticeField::set(const Point& x, double v) {
  require(x.dim() == dim_, "site dimension does not match field");
  map_[x] = v;
}

void LatticeField::add(const Point& x, double v) {
  require(x.dim() == dim_, "site dimension does not match field");
  map_[x] += v;
}

Box LatticeField::support_box() const {
  if (map_.empty()) return Box(Point(dim_), Point(dim_));
  Point lo = map_.begin()->first, hi = lo;
  for (const auto& [x, v] : map_) {
    for (int i = 0; i < dim_; ++i) {
      lo[i] = std::min(lo[i], x[i]);
      hi[i] = std::max(hi[i], x[i]);
    }
  }
  return {lo, hi};
}

double LatticeField::sum() const {
  double s = 0;
  for (const auto& [x, v] : map_) s += v;
  return s;
}

double LatticeField::sup_norm() const {
  double s = 0;
  for (const auto& [x, v] : map_) s = std::max(s, std::abs(v));
  return s;
}

double LatticeField::l1_norm() const {
  double s = 0;
  for (const auto& [x, v] : map_) s += std::abs(v);
  return s;
}

double LatticeField::l2_norm_sq() const {
  double s = 0;
  for (const auto& [x, v] : map_) s += v * v;
  return s;
}

LatticeField& LatticeField::operator+=(const LatticeField& o) {
  require(o.dim_ == dim_ || o.empty(), "dimension mismatch");
  for (const auto& [x, v] : o.map_) map_[x] += v;
  return *this;
}

LatticeField& LatticeField::operator-=(const LatticeField& o) {
  require(o.dim_ == dim_ || o.empty(), "dimension mismatch");
  for (const auto& [x, v] : o.map_) map_[x] -= v;
  return *this;
}

LatticeField& LatticeField::operator*=(double s) {
  for (auto& [x, v] : map_) v *= s;
  return *this;
}

double LatticeField::prune(double tol) {
  double removed = 0;
  for (auto it = map_.begin(); it != map_.end();) {
    if (std::abs(it->second) <= tol) {
      removed += std::abs(it->second);
      it = map_.erase(it);
    } else {
      ++it;
    }
  }
  return removed;
}

LatticeField LatticeField::restricted(const Box& box) const {
  LatticeField f(dim_);
  for (const auto& [x, v] : map_)
    if (box.contains(x)) f.map_.emplace_hint(f.map_.end(), x, v);
  return f;
}

std::vector<double> LatticeField::to_dense(const Box& box) const {
  std::vector<double> out(box.volume(), 0.0);
  for (const auto& [x, v] : map_)
    if (box.contains(x)) out[box.index(x)] = v;
  return out;
}

bool LatticeField::is_symmetric(double rel_tol) const {
  struct Agg {
    double lo = 0, hi = 0, maxabs = 0;
    std::size_t count = 0;
  };
  std::map<Point, Agg> reps;
  for (const auto& [x, v] : map_) {
    auto& a = reps[canonical_rep(x)];
    if (a.count == 0) {
      a.lo = a.hi = v;
    } else {
      a.lo = std::min(a.lo, v);
      a.hi = std::max(a.hi, v);
    }
    a.maxabs = std::max(a.maxabs, std::abs(v));
    ++a.count;
  }
  const double tol = rel_tol * std::max(sup_norm(), 1e-300);
  for (const auto& [rep, a] : reps) {
    if (a.count == orbit_size(rep)) {
      if (a.hi - a.lo > tol) return false;
    } else if (a.maxabs > tol) {
      return false;
    }
  }
  return true;
}

LatticeField LatticeField::symmetrized() const {
  std::map<Point, double> rep_sum;
  for (const auto& [x, v] : map_) rep_sum[canonical_rep(x)] += v;
  LatticeField out(dim_);
  for (const auto& [rep, s] : rep_sum) {
    const auto images = orbit(rep);
    const double avg = s / static_cast<double>(images.size());
    for (const auto& y : images) out.map_[y] = avg;
  }
  return out;
}

// ---------------------------------------------------------------- operations

LatticeField convolve(const LatticeField& f, const LatticeField& g, const Box& box) {
  require(f.dim() == g.dim() && f.dim() == box.dim(), "convolution dimension mismatch");
  std::vector<double> buf(box.volume(), 0.0);
  std::vector<char> touched(box.volume(), 0);
  for (const auto& [y, fv] : f.entries()) {
    for (const auto& [w, gv] : g.entries()) {
      const Point x = y + w;
      if (!box.contains(x)) continue;
      const auto idx = box.index(x);
      buf[idx] += fv * gv;
      touched[idx] = 1;
    }
  }
  LatticeField out(f.dim());
  for (std::size_t i = 0; i < buf.size(); ++i)
    if (touched[i]) out.set(box.point(i), buf[i]);
  return out;
}

LatticeField convolve(const LatticeField& f, const LatticeField& g) {
  if (f.empty() || g.empty()) return LatticeField(std::max(f.dim(), g.dim()));
  return convolve(f, g, f.support_box().minkowski_sum(g.support_box()));
}

LatticeField tilt(const LatticeField& f, double m) {
  require(m >= 0, "tilt must be nonnegative");
  LatticeField out(f.dim());
  for (const auto& [x, v] : f.entries()) out.set(x, v * std::exp(m * x[0]));
  return out;
}

std::complex<double> fourier_eval(const LatticeField& f, const MomentumPoint& k) {
  require(k.dim == f.dim() || f.empty(), "momentum dimension mismatch");
  double re = 0, im = 0;
  for (const auto& [x, v] : f.entries()) {
    double phase = 0;
    for (int i = 0; i < x.dim(); ++i) phase += k.k[i] * x[i];
    re += v * std::cos(phase);
    im += v * std::sin(phase);
  }
  return {re, im};
}

double moment_sum(const LatticeField& f, double a, double m) {
  require(a >= 0 && m >= 0, "moment order and tilt must be nonnegative");
  double s = 0;
  for (const auto& [x, v] : f.entries()) {
    const double r = x.norm();
    const double w = (a == 0.0) ? 1.0 : std::pow(r, a);
    s += w * std::abs(v) * std::exp(m * x[0]);
  }
  return s;
}

// ---------------------------------------------------------------- symmetry

Point canonical_rep(const Point& x) {
  Point r = x;
  std::array<int, kMaxDim> a{};
  for (int i = 0; i < x.dim(); ++i) a[i] = std::abs(x[i]);
  std::sort(a.begin(), a.begin() + x.dim(), std::greater<>());
  for (int i = 0; i < x.dim(); ++i) r[i] = a[i];
  return r;
}

std::size_t orbit_size(const Point& rep) {
  const Point c = canonical_rep(rep);
  std::size_t n = 1;
  for (int i = 2; i <= c.dim(); ++i) n *= static_cast<std::size_t>(i);
  int run = 1;
  for (int i = 1; i <= c.dim(); ++i) {
    if (i < c.dim() && c[i] == c[i - 1]) {
      ++run;
    } else {
      for (int j = 2; j <= run; ++j) n /= static_cast<std::size_t>(j);
      run = 1;
    }
  }
  for (int i = 0; i < c.dim(); ++i)
    if (c[i] != 0) n *= 2;
  return n;
}

std::vector<Point> orbit(const Point& x) {
  const int d = x.dim();
  std::array<int, kMaxDim> perm{};
  for (int i = 0; i < d; ++i) perm[i] = i;
  std::set<Point> seen;
  do {
    for (unsigned signs = 0; signs < (1u << d); ++signs) {
      Point y(d);
      for (int i = 0; i < d; ++i) {
        const int v = x[perm[i]];
        y[i] = (signs >> i & 1u) ? -v : v;
      }
      seen.insert(y);
    }
  } while (std::next_permutation(perm.begin(), perm.begin() + d));
  return {seen.begin(), seen.end()};
}

std::vector<Point> orbit_reps(int dim, int radius) {
  std::vector<Point> out;
  Point p(dim);
  // Nonincreasing sequences with entries in [0, radius].
  std::function<void(int, int)> rec = [&](int i, int cap) {
    if (i == dim) {
      out.push_back(p);
      return;
    }
    for (int v = 0; v <= cap; ++v) {
      p[i] = v;
      rec(i + 1, v);
    }
  };
  rec(0, radius);
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------- SymmetricTable

SymmetricTable::SymmetricTable(int dim, int radius)
    : dim_(dim), radius_(radius), reps_(orbit_reps(dim, radius)), values_(reps_.size(), 0.0) {
  require(radius >= 0, "table radius must be nonnegative");
  index_.reserve(reps_.size());
  for (std::size_t i = 0; i < reps_.size(); ++i) index_.emplace(reps_[i], i);
}

std::size_t SymmetricTable::rep_index(const Point& x) const {
  if (x.norm_inf() > radius_) return reps_.size();
  return index_.at(canonical_rep(x));
}

double SymmetricTable::at(const Point& x) const {
  const auto i = rep_index(x);
  return i == reps_.size() ? 0.0 : values_[i];
}

double SymmetricTable::sum() const {
  double s = 0;
  for (std::size_t i = 0; i < reps_.size(); ++i) s += static_cast<double>(orbit_size(reps_[i])) * values_[i];
  return s;
}

LatticeField SymmetricTable::to_field(const Box& box) const {
  LatticeField f(dim_);
  for (std::size_t i = 0; i < box.volume(); ++i) {
    const Point x = box.point(i);
    const auto r = rep_index(x);
    if (r < reps_.size()) f.set(x, values_[r]);
  }
  return f;
}

// ---------------------------------------------------------------- text I/O

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_field(std::ostream& os, const LatticeField& f) {
  os << "dim=" << f.dim() << '\n';
  for (const auto& [x, v] : f.entries()) {
    for (int i = 0; i < x.dim(); ++i) os << x[i] << ' ';
    os << format_double(v) << '\n';
  }
}

LatticeField read_field(std::istream& is) {
  std::string line;
  int dim = 0;
  LatticeField f;
  while (std::getline(is, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    if (dim == 0) {
      require(line.compare(first, 4, "dim=") == 0, "field file must start with a dim=<d> header");
      dim = std::stoi(line.substr(first + 4));
      f = LatticeField(dim);
      continue;
    }
    std::istringstream ls(line);
    Point x(dim);
    for (int i = 0; i < dim; ++i) {
      require(static_cast<bool>(ls >> x[i]), "malformed field line: " + line);
    }
    std::string tok;
    require(static_cast<bool>(ls >> tok), "missing value in field line: " + line);
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    require(end && *end == '\0', "bad value in field line: " + line);
    f.set(x, v);
  }
  require(dim > 0, "field file has no dim header");
  return f;
}

}  // namespace sawlab
