#pragma once

#include <cstdint>
#include <vector>

#include "cetrace/execution.hpp"
#include "cetrace/local_detector.hpp"
#include "cetrace/parametric.hpp"
#include "cetrace/synth.hpp"

namespace cetrace {

/// Synthetic gamma-recovery sweep: every image is enhanced with every gamma
/// at every noise level, and the probe uses the matching noise level.
struct GammaEvalSpec {
  int images = 20;
  int bits = 8;
  int side = 1000;
  std::vector<double> gammas{0.4, 0.7, 1.3, 1.8, 2.2};
  std::vector<double> sigmas{0.01};
  ParamGrid grid = ParamGrid::gamma_range(0.1, 0.01, 2.5);
  double eps = 0.05;
  SolverConfig solver;
  std::uint64_t seed = 1;
};

struct GammaCase {
  int image = 0;
  double sigma = 0.0;
  double truth = 0.0;
  double estimate = 0.0;
  double objective = 0.0;
};

struct GammaEvalResult {
  /// Grouped by sigma, then image, then gamma.
  std::vector<GammaCase> cases;
  /// Pooled accuracy rate per entry of GammaEvalSpec::sigmas.
  std::vector<double> accuracy;
};

GammaEvalResult run_gamma_eval(const GammaEvalSpec& spec, Execution exec = Execution::kParallel);

enum class CurveCaseKind { kSpline, kHistEq };

struct CurveEvalSpec {
  int images = 10;
  int bits = 8;
  int side = 1000;
  CurveCaseKind kind = CurveCaseKind::kSpline;
  double sigma = 0.0;
  double eps = 0.05;
  NonparamConfig config;
  std::uint64_t seed = 1;
};

struct CurveCase {
  int image = 0;
  CurveSpec curve;
  double relative_error = 0.0;
  int alternations = 0;
  TransformCurve estimate = TransformCurve::identity(1);
};

struct CurveEvalResult {
  std::vector<CurveCase> cases;
  double accuracy = 0.0;
};

/// Three interior control points jittered around the quartiles, outputs
/// kept strictly increasing and inside the level range.
CurveSpec random_spline_spec(int top, std::uint64_t seed);

CurveEvalResult run_curve_eval(const CurveEvalSpec& spec, Execution exec = Execution::kParallel);

struct LocalizeEvalSpec {
  int images = 10;
  int side = 512;
  double gamma0 = 0.6;
  double gamma1 = 1.4;
  double min_area = 0.2;
  double max_area = 0.4;
  double sigma = 0.0;
  EnergyParams params{.stride = 8};
  std::uint64_t seed = 1;
};

struct LocalizeCase {
  int image = 0;
  Rect region;
  DetectionScore score;
  DetectionDiagnostics diagnostics;
};

struct LocalizeEvalResult {
  std::vector<LocalizeCase> cases;
  double mean_de = 0.0;
  double mean_fp = 0.0;
};

/// Rectangle of the given area fraction (rounded to whole pixels), random
/// aspect in [0.6, 1.6] and position.
Rect random_region(int width, int height, double min_area, double max_area, std::uint64_t seed);

LocalizeEvalResult run_localize_eval(const LocalizeEvalSpec& spec, Execution exec = Execution::kParallel);

}  // namespace cetrace
