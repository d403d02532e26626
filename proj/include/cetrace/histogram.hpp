#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cetrace {

/// Bins at or below this mass count as empty.
inline constexpr double kEmptyBinEps = 1e-8;

/// Normalized gray-level histogram with 2^bits bins, indexed 0..top().
class PixelHistogram {
 public:
  /// Validates nonnegativity and unit mass (within 1e-9).
  PixelHistogram(int bits, std::vector<double> values);

  static PixelHistogram uniform(int bits);
  /// Normalizes raw counts. Throws InputError if the total is zero.
  static PixelHistogram from_counts(int bits, std::span<const double> counts);

  int bits() const noexcept { return bits_; }
  std::size_t size() const noexcept { return values_.size(); }
  /// Largest gray level, n = 2^bits - 1.
  int top() const noexcept { return static_cast<int>(values_.size()) - 1; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  bool operator==(const PixelHistogram&) const = default;

 private:
  int bits_;
  std::vector<double> values_;
};

/// Normalized pixel-value counts. Throws InputError on an empty sequence or
/// any value above 2^bits - 1.
PixelHistogram from_pixels(std::span<const std::uint16_t> pixels, int bits);

/// Number of bins for a bit depth; throws InputError outside 1..16.
std::size_t bins_for_bits(int bits);

/// Running sums C(i) = h(0) + ... + h(i).
std::vector<double> cumulative(std::span<const double> h);

/// 1-Wasserstein distance between two histograms on the same grid,
/// evaluated as the L1 distance of their cumulatives.
double w1_distance(std::span<const double> a, std::span<const double> b);
double w1_distance(const PixelHistogram& a, const PixelHistogram& b);

/// Count of bins (all n+1 of them) with mass at most eps.
int empty_bin_count(std::span<const double> h, double eps = kEmptyBinEps);
int empty_bin_count(const PixelHistogram& h, double eps = kEmptyBinEps);

/// Euclidean projection onto the probability simplex.
std::vector<double> project_to_simplex(std::span<const double> x);

}  // namespace cetrace
