#include "cetrace/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <random>

#include "cetrace/error.hpp"

namespace cetrace {
namespace {

// Runs body(k) for k in [0, count); cases go to threads, each case runs its
// own kernels serially. Results are stored by index, so order is fixed.
template <typename Body>
void for_each_case(int count, Execution exec, Body&& body) {
  if (exec == Execution::kSerial) {
    for (int k = 0; k < count; ++k) body(k, Execution::kSerial);
    return;
  }
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < count; ++k) {
    try {
      body(k, Execution::kSerial);
    } catch (...) {
#pragma omp critical(cetrace_eval_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

SynthSpec base_spec(int bits, int side, std::uint64_t seed) {
  SynthSpec s;
  s.bits = bits;
  s.width = side;
  s.height = side;
  s.seed = seed;
  return s;
}

}  // namespace

GammaEvalResult run_gamma_eval(const GammaEvalSpec& spec, Execution exec) {
  if (spec.images < 1 || spec.gammas.empty() || spec.sigmas.empty()) throw InputError("empty gamma evaluation");
  const int per_sigma = spec.images * static_cast<int>(spec.gammas.size());
  const int total = per_sigma * static_cast<int>(spec.sigmas.size());
  GammaEvalResult out;
  out.cases.resize(static_cast<std::size_t>(total));
  for_each_case(total, exec, [&](int k, Execution inner) {
    const int s = k / per_sigma;
    const int image = (k % per_sigma) / static_cast<int>(spec.gammas.size());
    const int g = k % static_cast<int>(spec.gammas.size());
    SynthSpec synth = base_spec(spec.bits, spec.side, derive_seed(spec.seed, 1000 + image));
    synth.curve.kind = CurveSpec::Kind::kGamma;
    synth.curve.gamma = spec.gammas[g];
    synth.sigma = spec.sigmas[s];
    // Noise draws differ per (gamma, sigma) while the base image is shared.
    synth.seed = derive_seed(synth.seed, 1 + static_cast<std::uint64_t>(s * spec.gammas.size() + g));
    const SynthResult img = synth_image(synth);
    const PixelHistogram h_obs = from_pixels(img.transformed.pixels(), spec.bits);
    const NoiseMatrix noise(spec.sigmas[s], h_obs.top());
    const ParametricEstimate est = estimate_parametric(h_obs, spec.grid, noise, spec.solver, inner);
    out.cases[k] = GammaCase{image, spec.sigmas[s], spec.gammas[g], est.best_param[0], est.best_objective};
  });
  for (std::size_t s = 0; s < spec.sigmas.size(); ++s) {
    int hits = 0;
    for (int k = 0; k < per_sigma; ++k) {
      const GammaCase& c = out.cases[s * per_sigma + k];
      std::vector<double> one{c.estimate};
      hits += accuracy_rate(one, c.truth, spec.eps) == 1.0;
    }
    out.accuracy.push_back(static_cast<double>(hits) / per_sigma);
  }
  return out;
}

CurveSpec random_spline_spec(int top, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double n = top;
  CurveSpec spec;
  spec.kind = CurveSpec::Kind::kSpline;
  std::vector<int> ys;
  for (int q = 1; q <= 3; ++q) {
    const double x = n * (0.25 * q + 0.125 * (unit(rng) - 0.5));
    const double y = x + n * 0.2 * (2.0 * unit(rng) - 1.0);
    spec.controls.push_back(ControlPoint{static_cast<int>(std::lround(x)), 0});
    ys.push_back(static_cast<int>(std::lround(std::clamp(y, 0.04 * n, 0.96 * n))));
  }
  std::sort(ys.begin(), ys.end());
  const int gap = std::max(1, top / 32);
  for (std::size_t k = 1; k < ys.size(); ++k) ys[k] = std::max(ys[k], ys[k - 1] + gap);
  for (std::size_t k = 0; k < ys.size(); ++k) spec.controls[k].output = std::min(ys[k], top - gap);
  return spec;
}

CurveEvalResult run_curve_eval(const CurveEvalSpec& spec, Execution exec) {
  if (spec.images < 1) throw InputError("empty curve evaluation");
  CurveEvalResult out;
  out.cases.resize(static_cast<std::size_t>(spec.images));
  for_each_case(spec.images, exec, [&](int k, Execution) {
    SynthSpec synth = base_spec(spec.bits, spec.side, derive_seed(spec.seed, 2000 + k));
    synth.sigma = spec.sigma;
    if (spec.kind == CurveCaseKind::kSpline) {
      synth.curve = random_spline_spec(static_cast<int>(bins_for_bits(spec.bits)) - 1, derive_seed(synth.seed, 9));
    } else {
      synth.curve.kind = CurveSpec::Kind::kHistEq;
    }
    const SynthResult img = synth_image(synth);
    const PixelHistogram h_obs = from_pixels(img.transformed.pixels(), spec.bits);
    const NonparamEstimate est = estimate_nonparametric(h_obs, NoiseMatrix(spec.sigma, h_obs.top()), spec.config);
    out.cases[k] = CurveCase{k, synth.curve, curve_relative_error(est.curve, img.truth), est.alternations, est.curve};
  });
  int hits = 0;
  for (const CurveCase& c : out.cases) hits += c.relative_error <= spec.eps;
  out.accuracy = static_cast<double>(hits) / spec.images;
  return out;
}

Rect random_region(int width, int height, double min_area, double max_area, std::uint64_t seed) {
  if (!(min_area > 0.0) || max_area > 1.0 || min_area > max_area) throw InputError("invalid region area range");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double area = (min_area + (max_area - min_area) * unit(rng)) * width * height;
  const double aspect = 0.6 + unit(rng);
  const int w = std::clamp(static_cast<int>(std::lround(std::sqrt(area * aspect))), 1, width);
  const int h = std::clamp(static_cast<int>(std::lround(area / w)), 1, height);
  const int x = static_cast<int>(std::floor(unit(rng) * (width - w + 1)));
  const int y = static_cast<int>(std::floor(unit(rng) * (height - h + 1)));
  return Rect{std::min(x, width - w), std::min(y, height - h), w, h};
}

LocalizeEvalResult run_localize_eval(const LocalizeEvalSpec& spec, Execution exec) {
  if (spec.images < 1) throw InputError("empty localization evaluation");
  LocalizeEvalResult out;
  out.cases.resize(static_cast<std::size_t>(spec.images));
  for_each_case(spec.images, exec, [&](int k, Execution inner) {
    SynthSpec s0 = base_spec(8, spec.side, derive_seed(spec.seed, 3000 + k));
    s0.sigma = spec.sigma;
    s0.curve.kind = CurveSpec::Kind::kGamma;
    s0.curve.gamma = spec.gamma0;
    SynthSpec s1 = s0;
    s1.curve.gamma = spec.gamma1;
    const Rect region =
        random_region(spec.side, spec.side, spec.min_area, spec.max_area, derive_seed(s0.seed, 9));
    const CompositeResult comp = synth_composite(s0, s1, region);
    const Detection det = detect_regions(comp.image, spec.params, inner);
    out.cases[k] = LocalizeCase{k, region, de_fp_metrics(det.field.pixel_mask, comp.truth_mask), det.diagnostics};
  });
  for (const LocalizeCase& c : out.cases) {
    out.mean_de += c.score.de / spec.images;
    out.mean_fp += c.score.fp / spec.images;
  }
  return out;
}

}  // namespace cetrace
