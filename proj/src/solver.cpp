#include "cetrace/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cetrace/error.hpp"
#include "monotone_qp.hpp"

namespace cetrace {
namespace {

// Barrier parameter for re-solves after the first reweighting, whose start
// point is already close to the new optimum.
constexpr double kWarmBarrier = 1e6;

// The curve seen through its range: every level maps to one of the m
// distinct outputs, and the optimum spreads each output's mass evenly over
// its preimage, so only the m output masses are unknown.
struct ReducedCurve {
  std::vector<int> range;
  std::vector<double> mult;
  std::vector<int> slot;   // level -> index into range
  std::vector<int> below;  // level l -> number of range points <= l
};

ReducedCurve reduce(const TransformCurve& curve) {
  ReducedCurve rc;
  const auto phi = curve.map();
  rc.slot.resize(phi.size());
  for (std::size_t i = 0; i < phi.size(); ++i) {
    if (rc.range.empty() || rc.range.back() != phi[i]) {
      rc.range.push_back(phi[i]);
      rc.mult.push_back(0.0);
    }
    rc.mult.back() += 1.0;
    rc.slot[i] = static_cast<int>(rc.range.size()) - 1;
  }
  rc.below.resize(phi.size());
  int count = 0;
  for (std::size_t l = 0; l < phi.size(); ++l) {
    while (count < static_cast<int>(rc.range.size()) && rc.range[count] <= static_cast<int>(l)) ++count;
    rc.below[l] = count;
  }
  return rc;
}

std::vector<double> expand(const ReducedCurve& rc, std::span<const double> g) {
  std::vector<double> h(rc.slot.size());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = g[rc.slot[i]] / rc.mult[rc.slot[i]];
  return h;
}

// Each observed bin's mass goes to the nearest reachable output (lower on ties).
std::vector<double> nearest_reachable(const ReducedCurve& rc, const PixelHistogram& h_obs) {
  std::vector<double> g(rc.range.size(), 0.0);
  for (int j = 0; j <= h_obs.top(); ++j) {
    auto it = std::lower_bound(rc.range.begin(), rc.range.end(), j);
    std::size_t k;
    if (it == rc.range.end()) {
      k = rc.range.size() - 1;
    } else if (*it == j || it == rc.range.begin()) {
      k = static_cast<std::size_t>(it - rc.range.begin());
    } else {
      k = static_cast<std::size_t>(it - rc.range.begin());
      if (j - *(it - 1) <= *it - j) --k;
    }
    g[k] += h_obs[j];
  }
  return g;
}

void check_sizes(const PixelHistogram& h_obs, const TransformCurve& curve, const NoiseMatrix& noise) {
  if (curve.top() != h_obs.top() || noise.top() != h_obs.top()) {
    throw InputError("histogram, curve and noise matrix must share n (histogram n=" +
                     std::to_string(h_obs.top()) + ", curve n=" + std::to_string(curve.top()) +
                     ", noise n=" + std::to_string(noise.top()) + ")");
  }
}

// A^T y for A h = F R T h.
std::vector<double> forward_adjoint(std::span<const double> y, const TransformCurve& curve,
                                    const NoiseMatrix& noise) {
  std::vector<double> suffix(y.size());
  double run = 0.0;
  for (std::size_t k = y.size(); k-- > 0;) {
    run += y[k];
    suffix[k] = run;
  }
  return TransferMatrix(curve).apply_transpose(noise.apply_transpose(suffix));
}

PixelHistogram to_histogram(int bits, std::vector<double> h) {
  for (double& v : h) v = std::max(v, 0.0);
  const double total = std::accumulate(h.begin(), h.end(), 0.0);
  for (double& v : h) v /= total;
  return PixelHistogram(bits, std::move(h));
}

void require_finite(double value, const std::vector<double>& trace) {
  if (!std::isfinite(value)) throw NumericalError("histogram solver produced a non-finite objective", trace);
}

struct Solution {
  std::vector<double> h;
  std::vector<double> trace;
  int iterations = 0;
};

Solution solve_newton(const PixelHistogram& h_obs, const TransformCurve& curve, const NoiseMatrix& noise,
                      const SolverConfig& cfg) {
  const ReducedCurve rc = reduce(curve);
  const int m = static_cast<int>(rc.range.size());
  const std::vector<double> c_obs = cumulative(h_obs.values());
  detail::SparseRows rows(m - 1);
  detail::append_noise_rows(rows, c_obs, noise, rc.below);

  // Strictly interior start for the barrier.
  std::vector<double> g = nearest_reachable(rc, h_obs);
  constexpr double kBlend = 1e-9;
  for (double& v : g) v = (1.0 - kBlend) * v + kBlend / m;
  std::vector<double> x = detail::cumulative_from_increments(g);

  detail::IncrementPrior prior{cfg.lambda, cfg.rho, rc.mult};
  Solution sol;
  sol.h = expand(rc, g);
  double current = solver_objective(sol.h, h_obs, curve, noise, cfg);
  sol.trace.push_back(current);
  require_finite(current, sol.trace);

  std::vector<double> resid(rows.rows()), weights(rows.rows());
  for (int it = 1; it <= cfg.outer_max && m > 1; ++it) {
    rows.residual(x, resid);
    for (std::size_t r = 0; r < resid.size(); ++r) weights[r] = 1.0 / std::max(std::abs(resid[r]), cfg.u_floor);
    detail::BarrierOptions barrier;
    if (it > 1) barrier.t_initial = kWarmBarrier;
    std::vector<double> next = detail::barrier_newton(rows, weights, prior, x, barrier);
    std::vector<double> h_next = expand(rc, detail::increments(next));
    const double value = solver_objective(h_next, h_obs, curve, noise, cfg);
    require_finite(value, sol.trace);
    // The floored weights can loosen the bound by up to n * u_floor / 2;
    // an uphill step is rejected rather than recorded.
    if (value > current) break;
    x.swap(next);
    sol.h.swap(h_next);
    sol.trace.push_back(value);
    sol.iterations = it;
    const bool settled = std::abs(current - value) <= cfg.tol * std::abs(value);
    current = value;
    if (settled) break;
  }
  return sol;
}

// Largest eigenvalue of A^T diag(w) A by power iteration.
double curvature_bound(std::span<const double> w, const TransformCurve& curve, const NoiseMatrix& noise) {
  std::vector<double> v(curve.size(), 1.0 / std::sqrt(static_cast<double>(curve.size())));
  double eig = 0.0;
  for (int k = 0; k < 30; ++k) {
    std::vector<double> av = forward_cumulative(v, curve, noise);
    for (std::size_t i = 0; i < av.size(); ++i) av[i] *= w[i];
    std::vector<double> next = forward_adjoint(av, curve, noise);
    const double norm = std::sqrt(std::inner_product(next.begin(), next.end(), next.begin(), 0.0));
    if (!(norm > 0.0)) break;
    eig = norm;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = next[i] / norm;
  }
  return eig * 1.01;
}

Solution solve_projected_gradient(const PixelHistogram& h_obs, const TransformCurve& curve,
                                  const NoiseMatrix& noise, const SolverConfig& cfg) {
  const ReducedCurve rc = reduce(curve);
  const std::vector<double> c_obs = cumulative(h_obs.values());
  Solution sol;
  sol.h = expand(rc, nearest_reachable(rc, h_obs));
  double current = solver_objective(sol.h, h_obs, curve, noise, cfg);
  sol.trace.push_back(current);
  require_finite(current, sol.trace);

  std::vector<double> u(c_obs.size()), w(c_obs.size());
  for (int it = 1; it <= cfg.outer_max; ++it) {
    const std::vector<double> model = forward_cumulative(sol.h, curve, noise);
    for (std::size_t k = 0; k < u.size(); ++k) {
      u[k] = std::max(std::abs(c_obs[k] - model[k]), cfg.u_floor);
      w[k] = 1.0 / u[k];
    }
    const double lipschitz = curvature_bound(w, curve, noise) + cfg.lambda * cfg.rho * cfg.rho;
    std::vector<double> h = sol.h;
    double bound = majorizer_value(h, u, h_obs, curve, noise, cfg);
    for (int tau = 0; tau < cfg.inner_max; ++tau) {
      const std::vector<double> grad = majorizer_gradient(h, u, h_obs, curve, noise, cfg);
      double step = cfg.eta0 / ((tau + 1) * lipschitz);
      for (int halving = 0; halving < 40; ++halving, step *= 0.5) {
        std::vector<double> trial(h.size());
        for (std::size_t i = 0; i < h.size(); ++i) trial[i] = h[i] - step * grad[i];
        trial = project_to_simplex(trial);
        const double b = majorizer_value(trial, u, h_obs, curve, noise, cfg);
        if (b <= bound) {
          h.swap(trial);
          bound = b;
          break;
        }
      }
    }
    const double value = solver_objective(h, h_obs, curve, noise, cfg);
    require_finite(value, sol.trace);
    if (value > current) break;
    sol.h.swap(h);
    sol.trace.push_back(value);
    sol.iterations = it;
    const bool settled = std::abs(current - value) <= cfg.tol * std::abs(value);
    current = value;
    if (settled) break;
  }
  return sol;
}

}  // namespace

void SolverConfig::validate() const {
  const bool ok = lambda > 0 && rho > 0 && eta0 > 0 && outer_max > 0 && inner_max > 0 && tol > 0 &&
                  tol < 1 && u_floor > 0 && std::isfinite(lambda) && std::isfinite(rho) &&
                  std::isfinite(eta0);
  if (!ok) throw InputError("solver config values must be positive and finite, with tol < 1");
}

std::vector<double> forward_cumulative(std::span<const double> h, const TransformCurve& curve,
                                       const NoiseMatrix& noise) {
  if (h.size() != curve.size() || noise.top() != curve.top()) {
    throw InputError("forward model operands differ in size");
  }
  return cumulative(noise.apply(TransferMatrix(curve).apply(h)));
}

double solver_objective(std::span<const double> h, const PixelHistogram& h_obs,
                        const TransformCurve& curve, const NoiseMatrix& noise, const SolverConfig& cfg) {
  check_sizes(h_obs, curve, noise);
  const std::vector<double> model = forward_cumulative(h, curve, noise);
  const std::vector<double> c_obs = cumulative(h_obs.values());
  double w1 = 0.0, prior = 0.0;
  for (std::size_t k = 0; k < model.size(); ++k) w1 += std::abs(c_obs[k] - model[k]);
  for (double v : h) prior += std::exp(-cfg.rho * v);
  return w1 + cfg.lambda * prior;
}

double solver_objective(const PixelHistogram& h, const PixelHistogram& h_obs, const TransformCurve& curve,
                        const NoiseMatrix& noise, const SolverConfig& cfg) {
  return solver_objective(h.values(), h_obs, curve, noise, cfg);
}

double majorizer_value(std::span<const double> h, std::span<const double> u, const PixelHistogram& h_obs,
                       const TransformCurve& curve, const NoiseMatrix& noise, const SolverConfig& cfg) {
  check_sizes(h_obs, curve, noise);
  if (u.size() != h.size()) throw InputError("weight vector has wrong length");
  const std::vector<double> model = forward_cumulative(h, curve, noise);
  const std::vector<double> c_obs = cumulative(h_obs.values());
  double value = 0.0;
  for (std::size_t k = 0; k < model.size(); ++k) {
    const double r = c_obs[k] - model[k];
    value += 0.5 * (r * r / u[k] + u[k]);
  }
  for (double v : h) value += cfg.lambda * std::exp(-cfg.rho * v);
  return value;
}

std::vector<double> majorizer_gradient(std::span<const double> h, std::span<const double> u,
                                       const PixelHistogram& h_obs, const TransformCurve& curve,
                                       const NoiseMatrix& noise, const SolverConfig& cfg) {
  check_sizes(h_obs, curve, noise);
  if (u.size() != h.size()) throw InputError("weight vector has wrong length");
  const std::vector<double> model = forward_cumulative(h, curve, noise);
  const std::vector<double> c_obs = cumulative(h_obs.values());
  std::vector<double> scaled(model.size());
  for (std::size_t k = 0; k < model.size(); ++k) scaled[k] = (c_obs[k] - model[k]) / u[k];
  std::vector<double> grad = forward_adjoint(scaled, curve, noise);
  for (std::size_t i = 0; i < grad.size(); ++i) {
    grad[i] = -grad[i] - cfg.lambda * cfg.rho * std::exp(-cfg.rho * h[i]);
  }
  return grad;
}

SolverReport recover_histogram(const PixelHistogram& h_obs, const TransformCurve& curve,
                               const NoiseMatrix& noise, const SolverConfig& cfg) {
  cfg.validate();
  check_sizes(h_obs, curve, noise);
  Solution sol = cfg.inner == InnerSolver::kNewton ? solve_newton(h_obs, curve, noise, cfg)
                                                   : solve_projected_gradient(h_obs, curve, noise, cfg);
  PixelHistogram h_star = to_histogram(h_obs.bits(), std::move(sol.h));
  SolverReport report{.h_star = h_star};
  report.iterations = sol.iterations;
  const std::vector<double> model = forward_cumulative(h_star.values(), curve, noise);
  const std::vector<double> c_obs = cumulative(h_obs.values());
  for (std::size_t k = 0; k < model.size(); ++k) report.w1_term += std::abs(c_obs[k] - model[k]);
  for (double v : h_star.values()) report.surrogate_term += std::exp(-cfg.rho * v);
  report.objective = solver_objective(h_star, h_obs, curve, noise, cfg);
  report.empty_bins = empty_bin_count(h_star);
  sol.trace.back() = report.objective;
  report.trace = std::move(sol.trace);
  return report;
}

VariationalL1 l1_variational_check(std::span<const double> x) {
  VariationalL1 out;
  out.z.resize(x.size());
  double quad = 0.0, linear = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) throw InputError("l1_variational_check needs finite entries");
    const double z = std::abs(x[i]);
    out.z[i] = z;
    if (z > 0.0) quad += x[i] * x[i] / z;
    linear += z;
  }
  out.value = 0.5 * (quad + linear);
  return out;
}

}  // namespace cetrace
