#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "sawlab/lattice.hpp"

namespace sawlab {

// Shifted momentum grid with 2M points per axis, restricted to the positive
// orthant: k_j = pi (j + 1/2) / M for j in [0, M). The origin is never sampled.
double orthant_momentum(int j, int M);

// Row-major array over [0, M)^d. Holds either the x >= 0 part of a
// reflection-symmetric field or its transform at the orthant momenta.
class OrthantArray {
 public:
  OrthantArray(int dim, int M);

  int dim() const { return dim_; }
  int M() const { return M_; }
  std::size_t size() const { return v_.size(); }
  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  double& operator[](std::size_t i) { return v_[i]; }
  double operator[](std::size_t i) const { return v_[i]; }
  std::size_t index(const Point& x) const;
  Point point(std::size_t idx) const;
  MomentumPoint momentum(std::size_t idx) const;

 private:
  int dim_, M_;
  std::vector<double> v_;
};

// Places a reflection-symmetric field on the orthant. Sites with some
// |x_i| >= M are folded antiperiodically with period 2M, which is exactly what
// the cosine transform on the shifted grid sees. Only entries with all
// coordinates >= 0 are read.
OrthantArray fold_even(const LatticeField& f, int M);

// Coefficients -> values at the orthant momenta (exact for the folded field).
void dct_forward(OrthantArray& a);
// Values at the orthant momenta -> folded coefficients.
void dct_inverse(OrthantArray& a);

// 1 - D^(k) at every orthant momentum, built from a per-axis cosine table.
OrthantArray one_minus_step_symbol(int dim, int M);

// Orthant coefficients back to a sparse field on the full box [-(M-1), M-1]^d,
// keeping |v| > drop.
LatticeField unfold_even(const OrthantArray& a, double drop);

}  // namespace sawlab
