#include "cetrace/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <random>

#include "cetrace/error.hpp"

namespace cetrace {
namespace {

double parse_double(std::string_view text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw InputError("cannot parse number '" + std::string(text) + "'");
  }
  return v;
}

int parse_int(std::string_view text) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw InputError("cannot parse integer '" + std::string(text) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::vector<std::uint16_t> sample_pixels(const PixelHistogram& h, std::size_t count, std::uint64_t seed) {
  const std::vector<double> cdf = cumulative(h.values());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::uint16_t> out(count);
  for (auto& p : out) {
    const double u = unit(rng) * cdf.back();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    p = static_cast<std::uint16_t>(std::min<std::ptrdiff_t>(it - cdf.begin(), h.top()));
  }
  return out;
}

PixelHistogram base_histogram(const SynthSpec& spec) {
  if (spec.base.kind == BaseHistogramSpec::Kind::kFromImage) {
    const GrayImage img = read_image(spec.base.path);
    if (img.bits() != spec.bits) throw InputError("base image bit depth does not match the spec");
    return from_pixels(img.pixels(), img.bits());
  }
  return smooth_random_histogram(spec.bits, spec.base.smoothness, derive_seed(spec.seed, 1));
}

void validate(const SynthSpec& spec) {
  bins_for_bits(spec.bits);
  if (spec.width <= 0 || spec.height <= 0) throw InputError("synthetic image dimensions must be positive");
  if (!(spec.sigma >= 0.0) || !std::isfinite(spec.sigma)) throw InputError("sigma must be finite and >= 0");
}

}  // namespace

CurveSpec CurveSpec::parse(std::string_view text) {
  CurveSpec spec;
  const std::size_t colon = text.find(':');
  const std::string_view name = text.substr(0, colon);
  const std::string_view args = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  if (name == "identity") {
    spec.kind = Kind::kIdentity;
  } else if (name == "histeq") {
    spec.kind = Kind::kHistEq;
  } else if (name == "gamma") {
    spec.kind = Kind::kGamma;
    spec.gamma = parse_double(args);
    if (!(spec.gamma > 0.0)) throw InputError("gamma must be positive");
  } else if (name == "sigmoid") {
    spec.kind = Kind::kSigmoid;
    const auto parts = split(args, ',');
    if (parts.size() != 2) throw InputError("sigmoid curve needs alpha,mu");
    spec.alpha = parse_double(parts[0]);
    spec.mu = parse_double(parts[1]);
  } else if (name == "spline") {
    spec.kind = Kind::kSpline;
    for (std::string_view point : split(args, ';')) {
      const auto xy = split(point, ',');
      if (xy.size() != 2) throw InputError("spline control points look like i,j;i,j");
      spec.controls.push_back({parse_int(xy[0]), parse_int(xy[1])});
    }
  } else {
    throw InputError("unknown curve '" + std::string(text) + "'");
  }
  return spec;
}

std::string CurveSpec::to_string() const {
  char buf[64];
  switch (kind) {
    case Kind::kIdentity: return "identity";
    case Kind::kHistEq: return "histeq";
    case Kind::kGamma:
      std::snprintf(buf, sizeof buf, "gamma:%.10g", gamma);
      return buf;
    case Kind::kSigmoid:
      std::snprintf(buf, sizeof buf, "sigmoid:%.10g,%.10g", alpha, mu);
      return buf;
    case Kind::kSpline: {
      std::string out = "spline:";
      for (std::size_t k = 0; k < controls.size(); ++k) {
        if (k) out += ';';
        out += std::to_string(controls[k].input) + ',' + std::to_string(controls[k].output);
      }
      return out;
    }
  }
  return "identity";
}

TransformCurve CurveSpec::build(const PixelHistogram& pre) const {
  const int top = pre.top();
  switch (kind) {
    case Kind::kIdentity: return TransformCurve::identity(top);
    case Kind::kGamma: return gamma_curve(gamma, top);
    case Kind::kSigmoid: return sigmoid_curve(alpha, mu, top);
    case Kind::kHistEq: return hist_eq_curve(pre);
    case Kind::kSpline: return spline_curve(controls, top);
  }
  return TransformCurve::identity(top);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined state.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

PixelHistogram smooth_random_histogram(int bits, double smoothness, std::uint64_t seed) {
  const std::size_t bins = bins_for_bits(bits);
  if (!(smoothness > 0.0)) throw InputError("smoothness must be positive");
  const double width = smoothness * static_cast<double>(bins) / 256.0;
  const int radius = static_cast<int>(std::ceil(4.0 * width));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<double> white(bins + 2 * radius);
  for (double& v : white) v = gauss(rng);
  std::vector<double> kernel(2 * radius + 1);
  double ksum = 0.0;
  for (int d = -radius; d <= radius; ++d) ksum += kernel[d + radius] = std::exp(-0.5 * (d / width) * (d / width));
  for (double& k : kernel) k /= ksum;

  std::vector<double> log_density(bins);
  double walk = 0.0;
  const double walk_step = 0.05 * std::sqrt(256.0 / static_cast<double>(bins));
  for (std::size_t i = 0; i < bins; ++i) {
    double s = 0.0;
    for (int d = -radius; d <= radius; ++d) s += kernel[d + radius] * white[i + radius + d];
    walk += walk_step * gauss(rng);
    log_density[i] = 3.0 * s * std::sqrt(width / 8.0) + walk;
  }
  const double peak = *std::max_element(log_density.begin(), log_density.end());
  std::vector<double> h(bins);
  for (std::size_t i = 0; i < bins; ++i) h[i] = std::exp(log_density[i] - peak);
  return PixelHistogram::from_counts(bits, h);
}

SynthResult synth_image(const SynthSpec& spec) {
  validate(spec);
  const PixelHistogram base = base_histogram(spec);
  const std::size_t count = static_cast<std::size_t>(spec.width) * spec.height;
  GrayImage pre(spec.width, spec.height, spec.bits, sample_pixels(base, count, derive_seed(spec.seed, 2)));
  TransformCurve truth = spec.curve.build(from_pixels(pre.pixels(), spec.bits));
  std::vector<std::uint16_t> out =
      apply_to_pixels(truth, pre.pixels(), NoiseSpec{spec.sigma}, derive_seed(spec.seed, 3));
  GrayImage transformed(spec.width, spec.height, spec.bits, std::move(out));
  return SynthResult{std::move(pre), std::move(transformed), std::move(truth), base};
}

CompositeResult synth_composite(const SynthSpec& spec0, const SynthSpec& spec1, const Rect& region) {
  validate(spec0);
  validate(spec1);
  if (spec0.bits != spec1.bits || spec0.width != spec1.width || spec0.height != spec1.height) {
    throw InputError("composite specs must share bit depth and dimensions");
  }
  if (region.x < 0 || region.y < 0 || region.width < 0 || region.height < 0 ||
      region.x + region.width > spec0.width || region.y + region.height > spec0.height) {
    throw InputError("composite region lies outside the image");
  }
  const PixelHistogram base = base_histogram(spec0);
  const std::size_t count = static_cast<std::size_t>(spec0.width) * spec0.height;
  const std::vector<std::uint16_t> pre = sample_pixels(base, count, derive_seed(spec0.seed, 2));
  const PixelHistogram pre_hist = from_pixels(pre, spec0.bits);
  TransformCurve curve0 = spec0.curve.build(pre_hist);
  TransformCurve curve1 = spec1.curve.build(pre_hist);
  const std::vector<std::uint16_t> out0 = apply_to_pixels(curve0, pre, NoiseSpec{spec0.sigma}, derive_seed(spec0.seed, 3));
  const std::vector<std::uint16_t> out1 = apply_to_pixels(curve1, pre, NoiseSpec{spec1.sigma}, derive_seed(spec0.seed, 4));

  std::vector<std::uint16_t> pixels(count);
  std::vector<std::uint8_t> mask(count, 0);
  for (int y = 0; y < spec0.height; ++y) {
    for (int x = 0; x < spec0.width; ++x) {
      const std::size_t k = static_cast<std::size_t>(y) * spec0.width + x;
      const bool inside = x >= region.x && x < region.x + region.width && y >= region.y &&
                          y < region.y + region.height;
      mask[k] = inside ? 1 : 0;
      pixels[k] = inside ? out1[k] : out0[k];
    }
  }
  return CompositeResult{GrayImage(spec0.width, spec0.height, spec0.bits, std::move(pixels)), std::move(mask),
                         std::move(curve0), std::move(curve1)};
}

double accuracy_rate(std::span<const double> estimates, double truth, double eps) {
  if (estimates.empty()) throw InputError("accuracy_rate needs at least one estimate");
  // A hair of slack so decimal grid points on the boundary count as hits.
  const double slack = 1e-9 * std::max(1.0, std::abs(truth));
  const auto hits = std::count_if(estimates.begin(), estimates.end(),
                                  [&](double e) { return std::abs(e - truth) <= eps + slack; });
  return static_cast<double>(hits) / static_cast<double>(estimates.size());
}

double curve_relative_error(const TransformCurve& estimate, const TransformCurve& truth) {
  if (estimate.top() != truth.top()) throw InputError("curves differ in size");
  double diff = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double d = estimate.map()[i] - truth.map()[i];
    diff += d * d;
    norm += static_cast<double>(truth.map()[i]) * truth.map()[i];
  }
  if (norm == 0.0) throw InputError("reference curve has zero norm");
  return std::sqrt(diff / norm);
}

double curve_accuracy_rate(std::span<const TransformCurve> estimates, const TransformCurve& truth, double eps) {
  if (estimates.empty()) throw InputError("curve_accuracy_rate needs at least one estimate");
  const auto hits = std::count_if(estimates.begin(), estimates.end(), [&](const TransformCurve& c) {
    return curve_relative_error(c, truth) <= eps;
  });
  return static_cast<double>(hits) / static_cast<double>(estimates.size());
}

}  // namespace cetrace
