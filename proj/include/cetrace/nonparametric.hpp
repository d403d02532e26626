#pragma once

#include <vector>

#include "cetrace/solver.hpp"

namespace cetrace {

struct NonparamConfig {
  double xi = 10.0;
  SolverConfig solver;
  int alt_max = 15;
  /// Relative change of the alternation objective that ends the loop.
  double tol = 1e-6;
  /// Longest run of input levels the initializer lets share one output.
  int max_block = 48;
  /// Work limit (states x transitions) for the initializer's exact search;
  /// above it the initializer splits levels by the observed CDF instead.
  double init_budget = 2e9;

  void validate() const;
};

struct HHatReport {
  PixelHistogram h_hat;
  /// W1(h_obs, R h_hat) + xi * W1(h_hat, T h).
  double objective = 0.0;
  std::vector<double> trace{};
  int iterations = 0;
};

/// Denoised histogram step: minimizes W1(h_obs, R g) + xi * W1(g, T h) over
/// the simplex by reweighted least squares, starting from T h.
HHatReport solve_h_hat(const PixelHistogram& h_obs, const PixelHistogram& h, const TransformCurve& curve,
                       const NoiseMatrix& noise, const NonparamConfig& cfg = {});

/// W1(h_obs, R h_hat) + xi * W1(h_hat, T h).
double alternation_objective(const PixelHistogram& h_obs, const PixelHistogram& h,
                             const PixelHistogram& h_hat, const TransformCurve& curve,
                             const NoiseMatrix& noise, double xi);

/// Starting curve: every occupied output level receives a run of consecutive
/// input levels, with run lengths chosen so the implied pre-transform
/// histogram is as smooth as possible in log scale.
TransformCurve smooth_partition_curve(const PixelHistogram& h_obs, int max_block = 48,
                                      double budget = 2e9);

struct NonparamEstimate {
  TransformCurve curve;
  PixelHistogram h_star;
  PixelHistogram h_hat;
  /// Alternation objective at the start and after each accepted round.
  std::vector<double> objective_trace;
  int alternations = 0;
};

/// Joint estimate of a free-form monotone curve and the pre-transform histogram.
NonparamEstimate estimate_nonparametric(const PixelHistogram& h_obs, const NoiseMatrix& noise,
                                        const NonparamConfig& cfg = {});

}  // namespace cetrace
