#include "cetrace/nonparametric.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>

#include "cetrace/error.hpp"
#include "monotone_qp.hpp"

namespace cetrace {
namespace {

constexpr double kWarmBarrier = 1e6;

double fit_objective(std::span<const double> g, const PixelHistogram& h_obs, const NoiseMatrix& noise,
                     std::span<const double> target, double xi) {
  double value = w1_distance(h_obs.values(), noise.apply(g));
  if (!target.empty()) value += xi * w1_distance(g, target);
  return value;
}

PixelHistogram normalized(int bits, std::vector<double> v) {
  for (double& x : v) x = std::max(x, 0.0);
  const double total = std::accumulate(v.begin(), v.end(), 0.0);
  for (double& x : v) x /= total;
  return PixelHistogram(bits, std::move(v));
}

// Reweighted least squares for min_g W1(h_obs, R g) + xi * W1(g, target)
// over full-resolution cumulative unknowns; target may be empty (xi unused).
HHatReport fit_cumulative(const PixelHistogram& h_obs, const NoiseMatrix& noise,
                          std::span<const double> target, double xi, std::span<const double> start,
                          const SolverConfig& cfg) {
  const int top = h_obs.top();
  const int m = top + 1;
  const std::vector<double> c_obs = cumulative(h_obs.values());
  std::vector<int> below(static_cast<std::size_t>(m));
  std::iota(below.begin(), below.end(), 1);

  detail::SparseRows rows(m - 1);
  detail::append_noise_rows(rows, c_obs, noise, below);
  const int fit_rows = rows.rows();
  if (!target.empty()) {
    const std::vector<double> c_target = cumulative(target);
    const double one = 1.0;
    for (int k = 0; k < top; ++k) rows.add_row(c_target[k], k, std::span<const double>(&one, 1));
  }

  std::vector<double> g(start.begin(), start.end());
  constexpr double kBlend = 1e-9;
  for (double& v : g) v = (1.0 - kBlend) * v + kBlend / m;
  std::vector<double> x = detail::cumulative_from_increments(g);

  HHatReport report{.h_hat = normalized(h_obs.bits(), g)};
  double current = fit_objective(report.h_hat.values(), h_obs, noise, target, xi);
  report.trace.push_back(current);
  if (!std::isfinite(current)) throw NumericalError("denoising step produced a non-finite objective", report.trace);

  std::vector<double> resid(rows.rows()), weights(rows.rows());
  const detail::IncrementPrior none;
  for (int it = 1; it <= cfg.outer_max; ++it) {
    rows.residual(x, resid);
    for (int r = 0; r < rows.rows(); ++r) {
      const double scale = r < fit_rows ? 1.0 : xi;
      weights[r] = scale / std::max(std::abs(resid[r]), cfg.u_floor);
    }
    detail::BarrierOptions barrier;
    if (it > 1) barrier.t_initial = kWarmBarrier;
    std::vector<double> next = detail::barrier_newton(rows, weights, none, x, barrier);
    PixelHistogram candidate = normalized(h_obs.bits(), detail::increments(next));
    const double value = fit_objective(candidate.values(), h_obs, noise, target, xi);
    if (!std::isfinite(value)) throw NumericalError("denoising step produced a non-finite objective", report.trace);
    if (value > current) break;
    x.swap(next);
    report.h_hat = std::move(candidate);
    report.trace.push_back(value);
    report.iterations = it;
    const bool settled = std::abs(current - value) <= cfg.tol * std::abs(value);
    current = value;
    if (settled || value == 0.0) break;
  }
  report.objective = current;
  return report;
}

}  // namespace

void NonparamConfig::validate() const {
  solver.validate();
  if (!(xi > 0.0) || !std::isfinite(xi)) throw InputError("xi must be positive");
  if (alt_max < 0) throw InputError("alt_max must be >= 0");
  if (!(tol > 0.0 && tol < 1.0)) throw InputError("tol must lie in (0, 1)");
  if (max_block < 1) throw InputError("max_block must be >= 1");
}

double alternation_objective(const PixelHistogram& h_obs, const PixelHistogram& h, const PixelHistogram& h_hat,
                             const TransformCurve& curve, const NoiseMatrix& noise, double xi) {
  if (h.top() != h_obs.top() || h_hat.top() != h_obs.top() || curve.top() != h_obs.top() ||
      noise.top() != h_obs.top()) {
    throw InputError("alternation operands differ in size");
  }
  return w1_distance(h_obs.values(), noise.apply(h_hat.values())) +
         xi * w1_distance(h_hat.values(), TransferMatrix(curve).apply(h.values()));
}

HHatReport solve_h_hat(const PixelHistogram& h_obs, const PixelHistogram& h, const TransformCurve& curve,
                       const NoiseMatrix& noise, const NonparamConfig& cfg) {
  cfg.validate();
  if (h.top() != h_obs.top() || curve.top() != h_obs.top() || noise.top() != h_obs.top()) {
    throw InputError("denoising operands differ in size");
  }
  const std::vector<double> pushed = TransferMatrix(curve).apply(h.values());
  return fit_cumulative(h_obs, noise, pushed, cfg.xi, pushed, cfg.solver);
}

TransformCurve smooth_partition_curve(const PixelHistogram& h_obs, int max_block, double budget) {
  const int levels = static_cast<int>(h_obs.size());
  std::vector<int> outputs;
  std::vector<double> log_mass;
  for (int j = 0; j < levels; ++j) {
    if (h_obs[j] > kEmptyBinEps) {
      outputs.push_back(j);
      log_mass.push_back(std::log(h_obs[j]));
    }
  }
  const int count = static_cast<int>(outputs.size());
  if (count == 0) throw InputError("histogram has no occupied bins");
  if (count == 1) return TransformCurve(h_obs.top(), std::vector<int>(levels, outputs.front()));

  const int longest = std::min(levels - count + 1, std::max(max_block, (2 * levels + count - 1) / count));
  const double work = static_cast<double>(count) * (levels + 1) * longest * longest;
  if (work > budget || longest > std::numeric_limits<std::uint16_t>::max()) {
    return histogram_matching_transform(PixelHistogram::uniform(h_obs.bits()), h_obs);
  }

  // cost[c][b]: least roughness with c input levels spent and the latest run of length b.
  const int width = longest + 1;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> best(static_cast<std::size_t>(levels + 1) * width, kInf);
  std::vector<double> next(best.size());
  std::vector<std::uint16_t> choice(static_cast<std::size_t>(count) * (levels + 1) * width, 0);
  std::vector<double> log_len(width, 0.0);
  for (int b = 1; b < width; ++b) log_len[b] = std::log(static_cast<double>(b));
  auto at = [width](int c, int b) { return static_cast<std::size_t>(c) * width + b; };

  for (int b = 1; b <= std::min(longest, levels - count + 1); ++b) best[at(b, b)] = 0.0;
  for (int k = 1; k < count; ++k) {
    std::fill(next.begin(), next.end(), kInf);
    const double step = log_mass[k] - log_mass[k - 1];
    const int remaining = count - 1 - k;
    const int c_hi = std::min((k + 1) * longest, levels - remaining);
    std::uint16_t* arg = choice.data() + static_cast<std::size_t>(k) * (levels + 1) * width;
    for (int c = k + 1; c <= c_hi; ++c) {
      for (int b = 1; b <= std::min(longest, c - k); ++b) {
        const int prev = c - b;
        double best_cost = kInf;
        int best_b = 0;
        for (int bp = 1; bp < width; ++bp) {
          const double base = best[at(prev, bp)];
          if (base == kInf) continue;
          const double d = step - log_len[b] + log_len[bp];
          const double cost = base + d * d;
          if (cost < best_cost) {
            best_cost = cost;
            best_b = bp;
          }
        }
        next[at(c, b)] = best_cost;
        arg[at(c, b)] = static_cast<std::uint16_t>(best_b);
      }
    }
    best.swap(next);
  }

  int run = 1;
  for (int b = 2; b < width; ++b) {
    if (best[at(levels, b)] < best[at(levels, run)]) run = b;
  }
  if (best[at(levels, run)] == kInf) {
    return histogram_matching_transform(PixelHistogram::uniform(h_obs.bits()), h_obs);
  }
  std::vector<int> lengths(static_cast<std::size_t>(count));
  int used = levels;
  for (int k = count - 1; k >= 0; --k) {
    lengths[k] = run;
    if (k > 0) {
      const int prev_run = choice[static_cast<std::size_t>(k) * (levels + 1) * width + at(used, run)];
      used -= run;
      run = prev_run;
    }
  }
  std::vector<int> phi;
  phi.reserve(static_cast<std::size_t>(levels));
  for (int k = 0; k < count; ++k) phi.insert(phi.end(), lengths[k], outputs[k]);
  return TransformCurve(h_obs.top(), std::move(phi));
}

NonparamEstimate estimate_nonparametric(const PixelHistogram& h_obs, const NoiseMatrix& noise,
                                        const NonparamConfig& cfg) {
  cfg.validate();
  if (noise.top() != h_obs.top()) throw InputError("noise matrix and histogram differ in size");

  // Occupied levels are read off a deconvolved histogram when noise is modeled.
  PixelHistogram support = h_obs;
  if (noise.reach() > 0) {
    support = fit_cumulative(h_obs, noise, {}, 0.0, h_obs.values(), cfg.solver).h_hat;
  }
  TransformCurve curve = smooth_partition_curve(support, cfg.max_block, cfg.init_budget);
  PixelHistogram h = recover_histogram(h_obs, curve, noise, cfg.solver).h_star;
  PixelHistogram h_hat = solve_h_hat(h_obs, h, curve, noise, cfg).h_hat;
  double current = alternation_objective(h_obs, h, h_hat, curve, noise, cfg.xi);

  NonparamEstimate est{curve, h, h_hat, {current}, 0};
  for (int round = 1; round <= cfg.alt_max; ++round) {
    TransformCurve next_curve = histogram_matching_transform(est.h_star, est.h_hat);
    PixelHistogram next_h = recover_histogram(h_obs, next_curve, noise, cfg.solver).h_star;
    PixelHistogram next_hat = solve_h_hat(h_obs, next_h, next_curve, noise, cfg).h_hat;
    const double value = alternation_objective(h_obs, next_h, next_hat, next_curve, noise, cfg.xi);
    if (!std::isfinite(value)) throw NumericalError("curve alternation produced a non-finite objective", est.objective_trace);
    if (value > current) break;
    est.curve = std::move(next_curve);
    est.h_star = std::move(next_h);
    est.h_hat = std::move(next_hat);
    est.objective_trace.push_back(value);
    est.alternations = round;
    const bool settled = std::abs(current - value) <= cfg.tol * std::abs(value);
    current = value;
    if (settled) break;
  }
  return est;
}

}  // namespace cetrace
