#include "cetrace/parametric.hpp"

#include <charconv>
#include <exception>
#include <cmath>
#include <cstdio>
#include <map>

#include "cetrace/error.hpp"

namespace cetrace {
namespace {

double parse_number(std::string_view text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw InputError("cannot parse number '" + std::string(text) + "'");
  }
  return v;
}

std::vector<double> arithmetic_range(double lo, double step, double hi) {
  if (!(step > 0.0) || !(hi >= lo)) throw InputError("grid range needs step > 0 and hi >= lo");
  const auto count = static_cast<long>(std::floor((hi - lo) / step + 0.5)) + 1;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  // Computed from the index to avoid accumulating rounding from repeated addition.
  for (long k = 0; k < count; ++k) out.push_back(lo + static_cast<double>(k) * step);
  return out;
}

}  // namespace

ParamGrid ParamGrid::gamma_range(double lo, double step, double hi) {
  if (!(lo > 0.0)) throw InputError("gamma grid values must be positive");
  ParamGrid grid;
  for (double g : arithmetic_range(lo, step, hi)) grid.values.push_back({g, 0.0});
  return grid;
}

ParamGrid ParamGrid::parse_gamma(std::string_view spec) {
  const auto first = spec.find(':');
  const auto second = first == std::string_view::npos ? first : spec.find(':', first + 1);
  if (second == std::string_view::npos) throw InputError("grid must look like lo:step:hi");
  return gamma_range(parse_number(spec.substr(0, first)),
                     parse_number(spec.substr(first + 1, second - first - 1)),
                     parse_number(spec.substr(second + 1)));
}

ParamGrid ParamGrid::sigmoid_default() {
  ParamGrid grid;
  grid.family = CurveFamily::kSigmoid;
  for (double alpha : arithmetic_range(0.05, 0.05, 0.5)) {
    for (double mu : arithmetic_range(0.1, 0.1, 0.9)) grid.values.push_back({alpha, mu});
  }
  return grid;
}

TransformCurve make_curve(CurveFamily family, const CurveParam& param, int top) {
  return family == CurveFamily::kGamma ? gamma_curve(param[0], top)
                                       : sigmoid_curve(param[0], param[1], top);
}

std::string format_param(CurveFamily family, const CurveParam& param) {
  char buf[64];
  if (family == CurveFamily::kGamma) {
    std::snprintf(buf, sizeof buf, "%.10g", param[0]);
  } else {
    std::snprintf(buf, sizeof buf, "%.10g;%.10g", param[0], param[1]);
  }
  return buf;
}

DedupedGrid dedupe_grid_by_curve(const ParamGrid& grid, int top) {
  DedupedGrid out;
  out.grid.family = grid.family;
  std::map<std::vector<int>, std::size_t> seen;
  for (std::size_t k = 0; k < grid.values.size(); ++k) {
    const TransformCurve curve = make_curve(grid.family, grid.values[k], top);
    std::vector<int> key(curve.map().begin(), curve.map().end());
    const auto [it, inserted] = seen.emplace(std::move(key), out.grid.values.size());
    if (inserted) {
      out.grid.values.push_back(grid.values[k]);
      out.duplicates.push_back({k});
    } else {
      out.duplicates[it->second].push_back(k);
    }
  }
  return out;
}

ParametricEstimate estimate_parametric(const PixelHistogram& h_obs, const ParamGrid& grid,
                                       const NoiseMatrix& noise, const SolverConfig& cfg, Execution exec) {
  if (grid.values.empty()) throw InputError("parameter grid is empty");
  cfg.validate();
  const DedupedGrid unique = dedupe_grid_by_curve(grid, h_obs.top());
  const auto count = static_cast<long>(unique.grid.values.size());
  std::vector<double> objective(static_cast<std::size_t>(count));

  if (exec == Execution::kParallel) {
    // Exceptions may not cross the OpenMP region; the first one is rethrown after it.
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (long k = 0; k < count; ++k) {
      try {
        const TransformCurve curve = make_curve(grid.family, unique.grid.values[k], h_obs.top());
        objective[k] = recover_histogram(h_obs, curve, noise, cfg).objective;
      } catch (...) {
#pragma omp critical(cetrace_parametric_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  } else {
    for (long k = 0; k < count; ++k) {
      const TransformCurve curve = make_curve(grid.family, unique.grid.values[k], h_obs.top());
      objective[k] = recover_histogram(h_obs, curve, noise, cfg).objective;
    }
  }

  ParametricEstimate est;
  est.landscape.resize(grid.values.size());
  for (std::size_t k = 0; k < unique.duplicates.size(); ++k) {
    for (std::size_t original : unique.duplicates[k]) {
      est.landscape[original] = {grid.values[original], objective[k]};
    }
  }
  est.best_param = est.landscape.front().param;
  est.best_objective = est.landscape.front().objective;
  for (const LandscapePoint& p : est.landscape) {
    if (p.objective < est.best_objective) {
      est.best_objective = p.objective;
      est.best_param = p.param;
    }
  }
  return est;
}

}  // namespace cetrace
