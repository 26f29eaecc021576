#include "sawlab/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

namespace sawlab {

namespace {

std::mutex planner_mutex;  // the FFTW planner is not reentrant

void run_r2r(OrthantArray& a, fftw_r2r_kind kind) {
  std::array<int, kMaxDim> n{};
  std::array<fftw_r2r_kind, kMaxDim> kinds{};
  for (int i = 0; i < a.dim(); ++i) {
    n[i] = a.M();
    kinds[i] = kind;
  }
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex);
    plan = fftw_plan_r2r(a.dim(), n.data(), a.data(), a.data(), kinds.data(), FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard lock(planner_mutex);
  fftw_destroy_plan(plan);
}

}  // namespace

double orthant_momentum(int j, int M) { return std::numbers::pi * (j + 0.5) / M; }

OrthantArray::OrthantArray(int dim, int M) : dim_(dim), M_(M) {
  require(dim >= 1 && dim <= kMaxDim, "orthant dimension out of range");
  require(M >= 1, "orthant size must be positive");
  std::size_t n = 1;
  for (int i = 0; i < dim; ++i) n *= static_cast<std::size_t>(M);
  v_.assign(n, 0.0);
}

std::size_t OrthantArray::index(const Point& x) const {
  std::size_t idx = 0;
  for (int i = 0; i < dim_; ++i) idx = idx * static_cast<std::size_t>(M_) + static_cast<std::size_t>(x[i]);
  return idx;
}

Point OrthantArray::point(std::size_t idx) const {
  Point p(dim_);
  for (int i = dim_ - 1; i >= 0; --i) {
    p[i] = static_cast<int>(idx % static_cast<std::size_t>(M_));
    idx /= static_cast<std::size_t>(M_);
  }
  return p;
}

MomentumPoint OrthantArray::momentum(std::size_t idx) const {
  const Point j = point(idx);
  std::array<double, kMaxDim> k{};
  for (int i = 0; i < dim_; ++i) k[i] = orthant_momentum(j[i], M_);
  return MomentumPoint(std::span<const double>(k.data(), static_cast<std::size_t>(dim_)));
}

OrthantArray fold_even(const LatticeField& f, int M) {
  OrthantArray a(f.dim(), M);
  const int period = 2 * M;
  for (const auto& [x, v] : f.entries()) {
    Point y(f.dim());
    double sign = 1.0;
    bool vanishes = false;
    for (int i = 0; i < f.dim() && !vanishes; ++i) {
      if (x[i] < 0) {
        vanishes = true;  // negative images are implied by symmetry
        break;
      }
      int s = x[i] % period;
      if ((x[i] / period) % 2 == 1) sign = -sign;
      if (s == M) {
        vanishes = true;
      } else if (s > M) {
        s = period - s;
        sign = -sign;
      }
      y[i] = s;
    }
    if (!vanishes) a[a.index(y)] += sign * v;
  }
  return a;
}

void dct_forward(OrthantArray& a) { run_r2r(a, FFTW_REDFT01); }

void dct_inverse(OrthantArray& a) {
  run_r2r(a, FFTW_REDFT10);
  const double scale = std::pow(2.0 * a.M(), -a.dim());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] *= scale;
}

OrthantArray one_minus_step_symbol(int dim, int M) {
  OrthantArray a(dim, M);
  std::vector<double> c(static_cast<std::size_t>(M));
  for (int j = 0; j < M; ++j) c[static_cast<std::size_t>(j)] = std::cos(orthant_momentum(j, M));
  for (std::size_t idx = 0; idx < a.size(); ++idx) {
    std::size_t rest = idx;
    double s = 0;
    for (int i = 0; i < dim; ++i) {
      s += c[rest % static_cast<std::size_t>(M)];
      rest /= static_cast<std::size_t>(M);
    }
    a[idx] = 1.0 - s / dim;
  }
  return a;
}

LatticeField unfold_even(const OrthantArray& a, double drop) {
  LatticeField f(a.dim());
  for (std::size_t idx = 0; idx < a.size(); ++idx) {
    const double v = a[idx];
    if (std::abs(v) <= drop) continue;
    const Point x = a.point(idx);
    for (unsigned signs = 0; signs < (1u << a.dim()); ++signs) {
      Point y = x;
      bool dup = false;
      for (int i = 0; i < a.dim(); ++i) {
        if (signs >> i & 1u) {
          if (x[i] == 0) {
            dup = true;
            break;
          }
          y[i] = -x[i];
        }
      }
      if (!dup) f.set(y, v);
    }
  }
  return f;
}

}  // namespace sawlab
