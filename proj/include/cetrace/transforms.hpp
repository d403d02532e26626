#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cetrace/histogram.hpp"
#include "cetrace/noise.hpp"

namespace cetrace {

/// Monotone non-decreasing integer map phi: {0..n} -> {0..n}.
class TransformCurve {
 public:
  /// Throws InputError unless phi has n+1 entries in [0, n] and is non-decreasing.
  TransformCurve(int top, std::vector<int> phi);

  static TransformCurve identity(int top);

  int top() const noexcept { return top_; }
  std::size_t size() const noexcept { return phi_.size(); }
  std::span<const int> map() const noexcept { return phi_; }
  int operator()(int level) const { return phi_[static_cast<std::size_t>(level)]; }

  bool operator==(const TransformCurve&) const = default;

 private:
  int top_;
  std::vector<int> phi_;
};

/// Sparse 0/1 column-stochastic matrix of a curve: column i has its single
/// one in row phi(i). Never materialized densely.
class TransferMatrix {
 public:
  explicit TransferMatrix(TransformCurve curve) : curve_(std::move(curve)) {}

  const TransformCurve& curve() const noexcept { return curve_; }
  int column_target(int i) const { return curve_(i); }

  /// out[j] = sum of in[i] over i with phi(i) = j.
  std::vector<double> apply(std::span<const double> in) const;
  /// out[i] = in[phi(i)].
  std::vector<double> apply_transpose(std::span<const double> in) const;

 private:
  TransformCurve curve_;
};

struct ControlPoint {
  int input;
  int output;
};

/// Rounds half away from zero, the convention used for every curve.
int round_level(double v);

TransformCurve gamma_curve(double gamma, int top);
TransformCurve sigmoid_curve(double alpha, double mu, int top);
TransformCurve hist_eq_curve(const PixelHistogram& h);
/// Monotone piecewise-cubic Hermite interpolation (Fritsch-Carlson slopes)
/// through the control points; (0,0) and (n,n) are added when absent.
TransformCurve spline_curve(std::span<const ControlPoint> controls, int top);

PixelHistogram apply_to_histogram(const TransferMatrix& t, const PixelHistogram& h);

/// Maps pixels through the curve and, if noise is given, adds rounded
/// Gaussian noise clipped to [0, n]. Deterministic for a fixed seed.
std::vector<std::uint16_t> apply_to_pixels(const TransformCurve& curve,
                                           std::span<const std::uint16_t> pixels,
                                           std::optional<NoiseSpec> noise = std::nullopt,
                                           std::uint64_t seed = 0);

/// One cell of the gamma partition: gamma_curve(g)(level) == output exactly
/// when lower < g <= upper.
struct GammaCell {
  int level;
  int output;
  double lower;
  double upper;
};

/// All (n-1)^2 cells for levels and outputs in 1..n-1, sorted by lower bound.
std::vector<GammaCell> distinguishable_gammas(int top);

/// Sorted distinct gamma values in (0, gamma_max] where some level changes
/// its output. gamma_curve is constant between consecutive breakpoints.
std::vector<double> gamma_breakpoints(int top, double gamma_max);

/// phi(i) = smallest j with C_target(j) >= C_source(i).
TransformCurve histogram_matching_transform(const PixelHistogram& source,
                                            const PixelHistogram& target);

}  // namespace cetrace
