#include "cetrace/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cetrace/error.hpp"

namespace cetrace {
namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

NoiseMatrix::NoiseMatrix(double sigma, int top) : sigma_(sigma), top_(top) {
  if (!std::isfinite(sigma) || sigma < 0.0) {
    throw InputError("noise sigma must be finite and >= 0, got " + std::to_string(sigma));
  }
  if (top < 1) throw InputError("noise grid needs at least two levels");
  if (sigma == 0.0) {
    reach_ = 0;
    band_ = {1.0};
    return;
  }
  reach_ = static_cast<int>(std::ceil(6.0 * sigma)) + 1;
  band_.assign(2 * reach_ + 1, 0.0);
  for (int d = 0; d <= reach_; ++d) {
    const double mass = normal_cdf((d + 0.5) / sigma) - normal_cdf((d - 0.5) / sigma);
    band_[reach_ + d] = mass;
    band_[reach_ - d] = mass;
  }
  // Mass beyond the truncation goes to the outermost entries so columns sum to 1.
  const double tail = 0.5 * (1.0 - std::accumulate(band_.begin(), band_.end(), 0.0));
  band_.front() += tail;
  band_.back() += tail;
}

double NoiseMatrix::band(int d) const noexcept {
  if (d < -reach_ || d > reach_) return 0.0;
  return band_[d + reach_];
}

std::vector<double> NoiseMatrix::apply(std::span<const double> in) const {
  if (static_cast<int>(in.size()) != top_ + 1) throw InputError("noise operand has wrong length");
  std::vector<double> out(in.size(), 0.0);
  for (int j = 0; j <= top_; ++j) {
    const double mass = in[j];
    if (mass == 0.0) continue;
    for (int d = -reach_; d <= reach_; ++d) {
      out[std::clamp(j + d, 0, top_)] += band_[d + reach_] * mass;
    }
  }
  return out;
}

std::vector<double> NoiseMatrix::apply_transpose(std::span<const double> in) const {
  if (static_cast<int>(in.size()) != top_ + 1) throw InputError("noise operand has wrong length");
  std::vector<double> out(in.size(), 0.0);
  for (int j = 0; j <= top_; ++j) {
    double acc = 0.0;
    for (int d = -reach_; d <= reach_; ++d) {
      acc += band_[d + reach_] * in[std::clamp(j + d, 0, top_)];
    }
    out[j] = acc;
  }
  return out;
}

std::vector<double> NoiseMatrix::dense() const {
  const int size = top_ + 1;
  std::vector<double> m(static_cast<std::size_t>(size) * size, 0.0);
  for (int j = 0; j < size; ++j) {
    for (int d = -reach_; d <= reach_; ++d) {
      m[static_cast<std::size_t>(std::clamp(j + d, 0, top_)) * size + j] += band_[d + reach_];
    }
  }
  return m;
}

NoiseMatrix gaussian_noise_matrix(double sigma, int top) { return NoiseMatrix(sigma, top); }

PixelHistogram apply_noise(const NoiseMatrix& noise, const PixelHistogram& h) {
  if (noise.top() != h.top()) throw InputError("noise matrix and histogram differ in size");
  std::vector<double> out = noise.apply(h.values());
  // Renormalize away rounding drift so the result passes the unit-mass check.
  const double total = std::accumulate(out.begin(), out.end(), 0.0);
  for (double& v : out) v /= total;
  return PixelHistogram(h.bits(), std::move(out));
}

}  // namespace cetrace
