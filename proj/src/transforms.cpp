#include "cetrace/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "cetrace/error.hpp"

namespace cetrace {
namespace {

void require_top(int top) {
  if (top < 1) throw InputError("curve needs at least two levels, got top=" + std::to_string(top));
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Fritsch-Carlson end slope from the two adjacent secants.
double end_slope(double h0, double h1, double d0, double d1) {
  double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
  if (m * d0 <= 0.0) return 0.0;
  if (d0 * d1 <= 0.0 && std::abs(m) > 3.0 * std::abs(d0)) return 3.0 * d0;
  return m;
}

}  // namespace

TransformCurve::TransformCurve(int top, std::vector<int> phi) : top_(top), phi_(std::move(phi)) {
  require_top(top);
  if (phi_.size() != static_cast<std::size_t>(top) + 1) {
    throw InputError("curve length " + std::to_string(phi_.size()) + " does not match n+1=" +
                     std::to_string(top + 1));
  }
  for (std::size_t i = 0; i < phi_.size(); ++i) {
    if (phi_[i] < 0 || phi_[i] > top) throw InputError("curve value out of range at " + std::to_string(i));
    if (i > 0 && phi_[i] < phi_[i - 1]) throw InputError("curve is not monotone at " + std::to_string(i));
  }
}

TransformCurve TransformCurve::identity(int top) {
  require_top(top);
  std::vector<int> phi(static_cast<std::size_t>(top) + 1);
  for (int i = 0; i <= top; ++i) phi[i] = i;
  return TransformCurve(top, std::move(phi));
}

std::vector<double> TransferMatrix::apply(std::span<const double> in) const {
  if (in.size() != curve_.size()) throw InputError("transfer operand has wrong length");
  std::vector<double> out(in.size(), 0.0);
  for (std::size_t i = 0; i < in.size(); ++i) out[curve_(static_cast<int>(i))] += in[i];
  return out;
}

std::vector<double> TransferMatrix::apply_transpose(std::span<const double> in) const {
  if (in.size() != curve_.size()) throw InputError("transfer operand has wrong length");
  std::vector<double> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[curve_(static_cast<int>(i))];
  return out;
}

int round_level(double v) { return static_cast<int>(std::round(v)); }

TransformCurve gamma_curve(double gamma, int top) {
  require_top(top);
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw InputError("gamma must be positive, got " + std::to_string(gamma));
  }
  const double n = top;
  std::vector<int> phi(static_cast<std::size_t>(top) + 1);
  for (int i = 0; i <= top; ++i) {
    phi[i] = std::clamp(round_level(n * std::pow(i / n, gamma)), 0, top);
  }
  return TransformCurve(top, std::move(phi));
}

TransformCurve sigmoid_curve(double alpha, double mu, int top) {
  require_top(top);
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InputError("sigmoid alpha must be positive");
  if (!(mu >= 0.0 && mu <= 1.0)) throw InputError("sigmoid mu must lie in [0, 1]");
  const double n = top;
  const double scale = n * alpha;
  const double low = logistic(-n * mu / scale);
  const double high = logistic(n * (1.0 - mu) / scale);
  std::vector<int> phi(static_cast<std::size_t>(top) + 1);
  for (int i = 0; i <= top; ++i) {
    const double s = (logistic((i - n * mu) / scale) - low) / (high - low);
    phi[i] = std::clamp(round_level(n * s), 0, top);
  }
  // Guard against last-ulp inversions of the logistic near saturation.
  for (int i = 1; i <= top; ++i) phi[i] = std::max(phi[i], phi[i - 1]);
  return TransformCurve(top, std::move(phi));
}

TransformCurve hist_eq_curve(const PixelHistogram& h) {
  const int top = h.top();
  const std::vector<double> c = cumulative(h.values());
  std::vector<int> phi(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) phi[i] = std::clamp(round_level(top * c[i]), 0, top);
  for (std::size_t i = 1; i < phi.size(); ++i) phi[i] = std::max(phi[i], phi[i - 1]);
  return TransformCurve(top, std::move(phi));
}

TransformCurve spline_curve(std::span<const ControlPoint> controls, int top) {
  require_top(top);
  std::vector<ControlPoint> pts(controls.begin(), controls.end());
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const ControlPoint& p = pts[k];
    if (p.input < 0 || p.input > top || p.output < 0 || p.output > top) {
      throw InputError("spline control point out of range");
    }
    if (k > 0 && p.input <= pts[k - 1].input) throw InputError("spline inputs must strictly increase");
    if (k > 0 && p.output < pts[k - 1].output) throw InputError("spline outputs must not decrease");
  }
  if (pts.empty() || pts.front().input != 0) pts.insert(pts.begin(), ControlPoint{0, 0});
  if (pts.back().input != top) pts.push_back(ControlPoint{top, top});

  const std::size_t m = pts.size();
  std::vector<double> width(m - 1), secant(m - 1), slope(m, 0.0);
  for (std::size_t k = 0; k + 1 < m; ++k) {
    width[k] = pts[k + 1].input - pts[k].input;
    secant[k] = (pts[k + 1].output - pts[k].output) / width[k];
  }
  if (m == 2) {
    slope[0] = slope[1] = secant[0];
  } else {
    for (std::size_t k = 1; k + 1 < m; ++k) {
      if (secant[k - 1] * secant[k] <= 0.0) continue;
      const double w1 = 2.0 * width[k] + width[k - 1];
      const double w2 = width[k] + 2.0 * width[k - 1];
      slope[k] = (w1 + w2) / (w1 / secant[k - 1] + w2 / secant[k]);
    }
    slope[0] = end_slope(width[0], width[1], secant[0], secant[1]);
    slope[m - 1] = end_slope(width[m - 2], width[m - 3], secant[m - 2], secant[m - 3]);
  }

  std::vector<int> phi(static_cast<std::size_t>(top) + 1);
  std::size_t seg = 0;
  for (int i = 0; i <= top; ++i) {
    while (seg + 2 < m && i > pts[seg + 1].input) ++seg;
    const double h = width[seg];
    const double t = (i - pts[seg].input) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double v = (2 * t3 - 3 * t2 + 1) * pts[seg].output + (t3 - 2 * t2 + t) * h * slope[seg] +
                     (-2 * t3 + 3 * t2) * pts[seg + 1].output + (t3 - t2) * h * slope[seg + 1];
    phi[i] = std::clamp(round_level(v), 0, top);
  }
  for (int i = 1; i <= top; ++i) phi[i] = std::max(phi[i], phi[i - 1]);
  return TransformCurve(top, std::move(phi));
}

PixelHistogram apply_to_histogram(const TransferMatrix& t, const PixelHistogram& h) {
  if (t.curve().top() != h.top()) throw InputError("curve and histogram differ in size");
  return PixelHistogram(h.bits(), t.apply(h.values()));
}

std::vector<std::uint16_t> apply_to_pixels(const TransformCurve& curve,
                                           std::span<const std::uint16_t> pixels,
                                           std::optional<NoiseSpec> noise, std::uint64_t seed) {
  const int top = curve.top();
  std::vector<std::uint16_t> out(pixels.size());
  const bool noisy = noise && noise->sigma > 0.0;
  if (noise && (!std::isfinite(noise->sigma) || noise->sigma < 0.0)) {
    throw InputError("noise sigma must be finite and >= 0");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, noisy ? noise->sigma : 1.0);
  for (std::size_t k = 0; k < pixels.size(); ++k) {
    if (pixels[k] > top) throw InputError("pixel value exceeds curve range");
    int v = curve(pixels[k]);
    if (noisy) v = std::clamp(round_level(v + gauss(rng)), 0, top);
    out[k] = static_cast<std::uint16_t>(v);
  }
  return out;
}

std::vector<GammaCell> distinguishable_gammas(int top) {
  if (top < 2) throw InputError("distinguishable_gammas needs n >= 2");
  const double log_n = std::log(static_cast<double>(top));
  std::vector<GammaCell> cells;
  cells.reserve(static_cast<std::size_t>(top - 1) * (top - 1));
  for (int i = 1; i < top; ++i) {
    const double denom = log_n - std::log(static_cast<double>(i));
    for (int j = 1; j < top; ++j) {
      cells.push_back(GammaCell{i, j, (log_n - std::log(j + 0.5)) / denom,
                                (log_n - std::log(j - 0.5)) / denom});
    }
  }
  std::sort(cells.begin(), cells.end(), [](const GammaCell& a, const GammaCell& b) {
    if (a.lower != b.lower) return a.lower < b.lower;
    if (a.level != b.level) return a.level < b.level;
    return a.output < b.output;
  });
  return cells;
}

std::vector<double> gamma_breakpoints(int top, double gamma_max) {
  if (top < 2) throw InputError("gamma_breakpoints needs n >= 2");
  const double log_n = std::log(static_cast<double>(top));
  std::vector<double> points;
  for (int i = 1; i < top; ++i) {
    const double denom = log_n - std::log(static_cast<double>(i));
    // Level i crosses from output j+1 to j at (log n - log(j + 1/2)) / denom, for j = 0..n-1.
    for (int j = 0; j < top; ++j) {
      const double g = (log_n - std::log(j + 0.5)) / denom;
      if (g > 0.0 && g <= gamma_max) points.push_back(g);
    }
  }
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  return points;
}

TransformCurve histogram_matching_transform(const PixelHistogram& source, const PixelHistogram& target) {
  if (source.size() != target.size()) throw InputError("matching operands differ in size");
  const int top = source.top();
  const std::vector<double> cs = cumulative(source.values());
  const std::vector<double> ct = cumulative(target.values());
  constexpr double kSlack = 1e-12;
  std::vector<int> phi(cs.size());
  int j = 0;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    while (j < top && ct[j] < cs[i] - kSlack) ++j;
    phi[i] = j;
  }
  return TransformCurve(top, std::move(phi));
}

}  // namespace cetrace
