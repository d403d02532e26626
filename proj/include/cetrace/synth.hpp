#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cetrace/histogram.hpp"
#include "cetrace/image_io.hpp"
#include "cetrace/transforms.hpp"

namespace cetrace {

/// Curve description used by the generators and the CLI:
/// "identity", "gamma:1.4", "sigmoid:0.25,0.5", "histeq", "spline:64,40;128,110;192,200".
struct CurveSpec {
  enum class Kind { kIdentity, kGamma, kSigmoid, kHistEq, kSpline };

  Kind kind = Kind::kIdentity;
  double gamma = 1.0;
  double alpha = 0.25;
  double mu = 0.5;
  std::vector<ControlPoint> controls;

  static CurveSpec parse(std::string_view text);
  std::string to_string() const;
  /// Histogram equalization equalizes the given pre-transform histogram.
  TransformCurve build(const PixelHistogram& pre) const;
};

struct BaseHistogramSpec {
  enum class Kind { kSmoothRandom, kFromImage };
  Kind kind = Kind::kSmoothRandom;
  /// Kernel width in bins at 8 bits; scaled with the bin count.
  double smoothness = 8.0;
  std::string path;
};

struct SynthSpec {
  int bits = 8;
  int width = 1000;
  int height = 1000;
  BaseHistogramSpec base;
  CurveSpec curve;
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

struct SynthResult {
  GrayImage pre;
  GrayImage transformed;
  TransformCurve truth;
  PixelHistogram base;
};

/// exp of a smoothed Gaussian sequence plus a weak random walk, normalized.
PixelHistogram smooth_random_histogram(int bits, double smoothness, std::uint64_t seed);

/// Draws i.i.d. pixels from the base histogram and passes them through the
/// curve and noise. Identical specs give identical images.
SynthResult synth_image(const SynthSpec& spec);

struct Rect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
};

struct CompositeResult {
  GrayImage image;
  std::vector<std::uint8_t> truth_mask;
  TransformCurve curve0;
  TransformCurve curve1;
};

/// Shared pre-transform image from spec0; pixels inside the region use
/// spec1's curve and noise level, the rest spec0's.
CompositeResult synth_composite(const SynthSpec& spec0, const SynthSpec& spec1, const Rect& region);

/// Fraction of estimates within eps of the truth.
double accuracy_rate(std::span<const double> estimates, double truth, double eps);
/// ||phi - phi*|| / ||phi*|| treating curves as real vectors.
double curve_relative_error(const TransformCurve& estimate, const TransformCurve& truth);
/// Fraction of curve estimates with relative error at most eps.
double curve_accuracy_rate(std::span<const TransformCurve> estimates, const TransformCurve& truth, double eps);

/// Decorrelated child seed for a named stream.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace cetrace
