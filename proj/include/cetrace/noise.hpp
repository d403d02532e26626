#pragma once

#include <span>
#include <vector>

#include "cetrace/histogram.hpp"

namespace cetrace {

/// Additive zero-mean Gaussian noise on gray levels, clipped to [0, n].
struct NoiseSpec {
  double sigma = 0.0;
};

/// Banded Toeplitz noise operator R with boundary mass folded into bins 0 and n.
/// Column j holds the distribution of clamp(j + d) where d ~ round(N(0, sigma^2)).
class NoiseMatrix {
 public:
  NoiseMatrix(double sigma, int top);

  static NoiseMatrix identity(int top) { return NoiseMatrix(0.0, top); }

  double sigma() const noexcept { return sigma_; }
  int top() const noexcept { return top_; }
  /// Band half-width D: r[d] = 0 for |d| > D.
  int reach() const noexcept { return reach_; }
  /// Band value r[d]; zero outside [-D, D].
  double band(int d) const noexcept;
  std::span<const double> band_values() const noexcept { return band_; }

  /// out = R * in.
  std::vector<double> apply(std::span<const double> in) const;
  /// out = R^T * in.
  std::vector<double> apply_transpose(std::span<const double> in) const;
  /// Dense (n+1)x(n+1) matrix, row-major; meant for small-n tests.
  std::vector<double> dense() const;

 private:
  double sigma_;
  int top_;
  int reach_;
  std::vector<double> band_;  // band_[d + reach_]
};

/// Builds R for sigma >= 0 on the grid 0..top. sigma = 0 gives the identity.
NoiseMatrix gaussian_noise_matrix(double sigma, int top);

PixelHistogram apply_noise(const NoiseMatrix& noise, const PixelHistogram& h);

}  // namespace cetrace
