#pragma once

// Weighted least squares over a monotone cumulative vector, the workhorse of
// every IRLS solve in the library.
//
// Unknowns are x_1..x_{m-1} with x_0 = 0 and x_m = 1; increments
// g_j = x_j - x_{j-1} must stay positive. The objective is
//   1/2 sum_r w_r e_r(x)^2 + lambda sum_j mult_j exp(-rho g_j / mult_j),
// where every residual e_r = offset_r - <coef_r, x> touches a short
// contiguous run of unknowns, so the Hessian is banded.

#include <span>
#include <vector>

namespace cetrace::detail {

class SparseRows {
 public:
  explicit SparseRows(int unknowns) : unknowns_(unknowns) {}

  /// Appends a row touching unknowns first..first+coef.size()-1.
  void add_row(double offset, int first, std::span<const double> coef);

  int unknowns() const noexcept { return unknowns_; }
  int rows() const noexcept { return static_cast<int>(offset_.size()); }
  /// Largest column distance within any row.
  int bandwidth() const noexcept { return bandwidth_; }

  void residual(std::span<const double> x, std::span<double> out) const;
  /// out += B^T v for residual direction e = offset - B x.
  void add_transpose(std::span<const double> v, std::span<double> out) const;

  int first(int r) const { return first_[r]; }
  std::span<const double> coef(int r) const {
    return {coef_.data() + start_[r], static_cast<std::size_t>(start_[r + 1] - start_[r])};
  }

 private:
  int unknowns_;
  int bandwidth_ = 0;
  std::vector<double> offset_;
  std::vector<int> first_;
  std::vector<int> start_{0};
  std::vector<double> coef_;
};

/// lambda * sum_j mult_j exp(-rho g_j / mult_j); lambda = 0 disables it.
struct IncrementPrior {
  double lambda = 0.0;
  double rho = 1.0;
  std::vector<double> mult;
};

/// Symmetric positive definite band matrix with in-place Cholesky.
class BandedSpd {
 public:
  BandedSpd(int size, int bandwidth);

  void clear();
  /// Adds v to entry (i, j) with i >= j >= i - bandwidth.
  void add(int i, int j, double v) { data_[index(i, j)] += v; }
  double get(int i, int j) const { return data_[index(i, j)]; }
  int size() const noexcept { return size_; }
  int bandwidth() const noexcept { return bandwidth_; }

  /// Factors in place; returns false on a non-positive pivot.
  bool factor();
  /// Solves with the factored matrix, overwriting rhs.
  void solve(std::span<double> rhs) const;

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * (bandwidth_ + 1) + static_cast<std::size_t>(i - j);
  }
  int size_;
  int bandwidth_;
  std::vector<double> data_;
};

struct BarrierOptions {
  double t_initial = 1.0;
  double t_growth = 20.0;
  double gap = 1e-12;          // stop once unknowns / t falls below this
  double newton_tol = 1e-6;    // half the squared Newton decrement
  double precision = 1e-17;    // the same, divided by t
  int newton_max = 100;
};

/// x_j values to increments, with the fixed end points.
std::vector<double> increments(std::span<const double> x);
std::vector<double> cumulative_from_increments(std::span<const double> g);

/// Minimizes the weighted objective from a strictly interior start with a
/// log-barrier Newton method. Returns the final interior point.
std::vector<double> barrier_newton(const SparseRows& rows, std::span<const double> weights,
                                   const IncrementPrior& prior, std::vector<double> x,
                                   const BarrierOptions& opt = {});

}  // namespace cetrace::detail

namespace cetrace {
class NoiseMatrix;
}

namespace cetrace::detail {

/// Appends rows k = 0..n-1 of  F c_obs - F R G, where the model cumulative G
/// at level l is x_{below[l]} (x_0 = 0, x_m = 1) and is 1 above the grid.
/// Row n is omitted: it equals total mass minus one, which is always zero.
void append_noise_rows(SparseRows& rows, std::span<const double> c_obs, const NoiseMatrix& noise,
                       std::span<const int> below);

}  // namespace cetrace::detail
