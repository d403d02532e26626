#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "cetrace/execution.hpp"
#include "cetrace/solver.hpp"

namespace cetrace {

enum class CurveFamily { kGamma, kSigmoid };

/// Gamma uses the first slot; sigmoid stores (alpha, mu).
using CurveParam = std::array<double, 2>;

struct ParamGrid {
  CurveFamily family = CurveFamily::kGamma;
  std::vector<CurveParam> values;

  /// lo, lo+step, ... up to hi (inclusive within half a step).
  static ParamGrid gamma_range(double lo, double step, double hi);
  /// Parses "lo:step:hi".
  static ParamGrid parse_gamma(std::string_view spec);
  /// alpha in 0.05:0.05:0.5 times mu in 0.1:0.1:0.9.
  static ParamGrid sigmoid_default();
};

TransformCurve make_curve(CurveFamily family, const CurveParam& param, int top);
std::string format_param(CurveFamily family, const CurveParam& param);

struct LandscapePoint {
  CurveParam param;
  double objective;
};

struct ParametricEstimate {
  CurveParam best_param{};
  double best_objective = 0.0;
  /// One entry per grid value, in grid order.
  std::vector<LandscapePoint> landscape;
};

/// Grid entries whose curves repeat an earlier entry are dropped;
/// duplicates[k] lists the original indices represented by entry k.
struct DedupedGrid {
  ParamGrid grid;
  std::vector<std::vector<std::size_t>> duplicates;
};

DedupedGrid dedupe_grid_by_curve(const ParamGrid& grid, int top);

/// Minimizes the recovered objective over the grid. Every distinct curve is
/// solved once; ties go to the earliest grid entry.
ParametricEstimate estimate_parametric(const PixelHistogram& h_obs, const ParamGrid& grid,
                                       const NoiseMatrix& noise, const SolverConfig& cfg = {},
                                       Execution exec = Execution::kParallel);

}  // namespace cetrace
