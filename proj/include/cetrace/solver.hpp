#pragma once

#include <span>
#include <vector>

#include "cetrace/histogram.hpp"
#include "cetrace/noise.hpp"
#include "cetrace/transforms.hpp"

namespace cetrace {

/// How each reweighted subproblem is minimized.
enum class InnerSolver {
  /// Exact minimization in cumulative coordinates of the curve's range
  /// (banded Newton with a log barrier). Default.
  kNewton,
  /// Projected gradient on the simplex with step eta0 / ((tau + 1) L),
  /// L the subproblem's curvature bound, plus backtracking.
  kProjectedGradient,
};

struct SolverConfig {
  double lambda = 0.75;
  double rho = 1.0;
  double eta0 = 1.2;
  int outer_max = 50;
  int inner_max = 10;  // projected-gradient steps per reweighting
  double tol = 1e-6;
  double u_floor = 1e-12;
  InnerSolver inner = InnerSolver::kNewton;

  /// Throws InputError on non-positive values or tol >= 1.
  void validate() const;
};

struct SolverReport {
  PixelHistogram h_star;
  /// W1(h_obs, R T h*) + lambda * sum exp(-rho h*).
  double objective = 0.0;
  int iterations = 0;
  /// Objective at the start point and after every outer iteration.
  std::vector<double> trace{};
  double w1_term = 0.0;
  /// sum exp(-rho h*), before the lambda weight.
  double surrogate_term = 0.0;
  /// Hard empty-bin count of h* at kEmptyBinEps.
  int empty_bins = 0;
};

/// Recovers the pre-transform histogram for a known curve and noise level.
/// Throws InputError on size mismatch, NumericalError on a non-finite objective.
SolverReport recover_histogram(const PixelHistogram& h_obs, const TransformCurve& curve,
                               const NoiseMatrix& noise, const SolverConfig& cfg = {});

/// Cumulative of the forward model, F R T h.
std::vector<double> forward_cumulative(std::span<const double> h, const TransformCurve& curve,
                                       const NoiseMatrix& noise);

/// W1(h_obs, R T h) + lambda * sum_i exp(-rho h_i).
double solver_objective(std::span<const double> h, const PixelHistogram& h_obs,
                        const TransformCurve& curve, const NoiseMatrix& noise,
                        const SolverConfig& cfg = {});
double solver_objective(const PixelHistogram& h, const PixelHistogram& h_obs,
                        const TransformCurve& curve, const NoiseMatrix& noise,
                        const SolverConfig& cfg = {});

/// Reweighted bound for fixed weights u > 0:
/// 1/2 sum_k (r_k^2 / u_k + u_k) + lambda * sum exp(-rho h), r = F h_obs - F R T h.
double majorizer_value(std::span<const double> h, std::span<const double> u,
                       const PixelHistogram& h_obs, const TransformCurve& curve,
                       const NoiseMatrix& noise, const SolverConfig& cfg = {});
std::vector<double> majorizer_gradient(std::span<const double> h, std::span<const double> u,
                                       const PixelHistogram& h_obs, const TransformCurve& curve,
                                       const NoiseMatrix& noise, const SolverConfig& cfg = {});

struct VariationalL1 {
  double value = 0.0;
  std::vector<double> z;
};

/// Evaluates 1/2 (x^T diag(z)^-1 x + 1^T z) at its minimizer z = |x|, with
/// 0/0 read as 0. The value equals the l1 norm of x.
VariationalL1 l1_variational_check(std::span<const double> x);

}  // namespace cetrace
