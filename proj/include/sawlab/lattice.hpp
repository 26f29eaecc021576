#pragma once

#include <array>
#include <compare>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sawlab/errors.hpp"

namespace sawlab {

inline constexpr int kMaxDim = 6;

// A site of Z^d. Coordinates beyond dim() are kept at zero so that
// comparison and hashing can work on the full array.
class Point {
 public:
  Point() = default;
  explicit Point(int dim);
  Point(std::initializer_list<int> coords);

  static Point from_span(std::span<const int> coords);
  static Point unit(int dim, int axis, int sign = 1);

  int dim() const { return dim_; }
  int operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }
  int& operator[](int i) { return c_[static_cast<std::size_t>(i)]; }
  std::span<const int> coords() const { return {c_.data(), static_cast<std::size_t>(dim_)}; }

  Point operator+(const Point& o) const;
  Point operator-(const Point& o) const;
  Point operator-() const;
  Point operator*(int s) const;
  Point& operator+=(const Point& o);

  bool is_origin() const;
  long long norm_sq() const;
  double norm() const;
  int norm_inf() const;
  int norm_1() const;

  friend bool operator==(const Point&, const Point&) = default;
  friend std::strong_ordering operator<=>(const Point& a, const Point& b);

 private:
  std::array<int, kMaxDim> c_{};
  int dim_ = 0;
};

struct PointHash {
  std::size_t operator()(const Point& p) const noexcept;
};

std::ostream& operator<<(std::ostream& os, const Point& p);

/// max{|x|, 1}; keeps power-law weights finite at the origin.
double xvee(const Point& x);

// Site of the discrete torus, stored in the fundamental domain
// [-floor(r/2), ceil(r/2) - 1]^d.
struct TorusPoint {
  Point coords;
  int side = 0;
  friend bool operator==(const TorusPoint&, const TorusPoint&) = default;
};

int torus_lo(int r);
int torus_reduce(int coord, int r);
TorusPoint project_torus(const Point& x, int r);
// Row-major index of a fundamental-domain site, in [0, r^d).
std::size_t torus_index(const Point& x, int r);
Point torus_point_from_index(std::size_t idx, int dim, int r);

// Axis-aligned integer box, inclusive bounds.
class Box {
 public:
  Box() = default;
  Box(Point lo, Point hi);
  static Box centered(int dim, int radius);

  int dim() const { return lo_.dim(); }
  const Point& lo() const { return lo_; }
  const Point& hi() const { return hi_; }
  int extent(int axis) const { return hi_[axis] - lo_[axis] + 1; }
  bool empty() const;
  std::size_t volume() const;
  bool contains(const Point& x) const;
  std::size_t index(const Point& x) const;
  Point point(std::size_t idx) const;
  Box expanded(int by) const;
  Box intersect(const Box& o) const;
  Box minkowski_sum(const Box& o) const;
  friend bool operator==(const Box&, const Box&) = default;

 private:
  Point lo_, hi_;
};

struct MomentumPoint {
  std::array<double, kMaxDim> k{};
  int dim = 0;

  MomentumPoint() = default;
  explicit MomentumPoint(std::span<const double> comps);
  MomentumPoint(std::initializer_list<double> comps);
  double norm() const;
  // Each component in (-pi, pi].
  bool in_zone() const;
};

// Finitely supported real function on Z^d.
class LatticeField {
 public:
  using Map = std::map<Point, double>;

  LatticeField() = default;
  explicit LatticeField(int dim) : dim_(dim) {}

  static LatticeField delta(int dim);
  // Nearest-neighbour step distribution D(x) = 1{|x|=1}/(2d).
  static LatticeField step_distribution(int dim);
  // Dense box buffer to sparse field; entries with |v| <= drop are omitted.
  static LatticeField from_dense(const Box& box, std::span<const double> values, double drop = 0.0);

  int dim() const { return dim_; }
  std::size_t size() const { return map_.size(); }
  bool empty() const { return map_.empty(); }
  const Map& entries() const { return map_; }

  double at(const Point& x) const;
  void set(const Point& x, double v);
  void add(const Point& x, double v);
  void erase(const Point& x) { map_.erase(x); }

  Box support_box() const;
  double sum() const;
  double sup_norm() const;
  double l1_norm() const;
  double l2_norm_sq() const;

  LatticeField& operator+=(const LatticeField& o);
  LatticeField& operator-=(const LatticeField& o);
  LatticeField& operator*=(double s);
  friend LatticeField operator+(LatticeField a, const LatticeField& b) { return a += b; }
  friend LatticeField operator-(LatticeField a, const LatticeField& b) { return a -= b; }
  friend LatticeField operator*(double s, LatticeField a) { return a *= s; }

  // Drop entries with |v| <= tol. Returns the l1 mass removed.
  double prune(double tol);
  LatticeField restricted(const Box& box) const;
  std::vector<double> to_dense(const Box& box) const;

  // Invariance under coordinate permutations and sign flips, checked orbit by
  // orbit; missing orbit members count as zero.
  bool is_symmetric(double rel_tol = 1e-10) const;
  LatticeField symmetrized() const;

  friend bool operator==(const LatticeField&, const LatticeField&) = default;

 private:
  int dim_ = 0;
  Map map_;
};

// Exact convolution restricted to the output box.
LatticeField convolve(const LatticeField& f, const LatticeField& g, const Box& box);
LatticeField convolve(const LatticeField& f, const LatticeField& g);

// f(x) e^{m x_1}.
LatticeField tilt(const LatticeField& f, double m);

// sum_x f(x) e^{i k.x}
std::complex<double> fourier_eval(const LatticeField& f, const MomentumPoint& k);

// sum_x |x|^a |f(x)| e^{m x_1}
double moment_sum(const LatticeField& f, double a, double m);

// Hyperoctahedral symmetry helpers.
Point canonical_rep(const Point& x);  // sorted |coords|, descending
std::size_t orbit_size(const Point& rep);
std::vector<Point> orbit(const Point& x);
// All canonical representatives with max coordinate <= radius.
std::vector<Point> orbit_reps(int dim, int radius);

// Function on Z^d invariant under coordinate permutations and sign flips,
// stored on canonical representatives with sup-norm <= radius. Sites
// outside read as 0.
class SymmetricTable {
 public:
  SymmetricTable() = default;
  SymmetricTable(int dim, int radius);

  int dim() const { return dim_; }
  int radius() const { return radius_; }
  std::size_t size() const { return reps_.size(); }
  const std::vector<Point>& reps() const { return reps_; }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  // Index of canonical_rep(x), or size() when outside.
  std::size_t rep_index(const Point& x) const;
  double at(const Point& x) const;
  // Sum over every site of Z^d (orbit-weighted).
  double sum() const;
  LatticeField to_field(const Box& box) const;
  LatticeField to_field() const { return to_field(Box::centered(dim_, radius_)); }

 private:
  int dim_ = 0, radius_ = 0;
  std::vector<Point> reps_;
  std::vector<double> values_;
  std::unordered_map<Point, std::size_t, PointHash> index_;
};

// Text format: "dim=<d>" header, then "x_1 ... x_d value" lines; '#' comments.
void write_field(std::ostream& os, const LatticeField& f);
LatticeField read_field(std::istream& is);

// %.17g
std::string format_double(double v);

}  // namespace sawlab
