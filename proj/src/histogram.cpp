#include "cetrace/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "cetrace/error.hpp"

namespace cetrace {

std::size_t bins_for_bits(int bits) {
  if (bits < 1 || bits > 16) {
    throw InputError("bit depth must be in 1..16, got " + std::to_string(bits));
  }
  return std::size_t{1} << bits;
}

PixelHistogram::PixelHistogram(int bits, std::vector<double> values)
    : bits_(bits), values_(std::move(values)) {
  if (values_.size() != bins_for_bits(bits)) {
    throw InputError("histogram length " + std::to_string(values_.size()) +
                     " does not match 2^" + std::to_string(bits));
  }
  double total = 0.0;
  for (double v : values_) {
    if (!std::isfinite(v) || v < 0.0) {
      throw InputError("histogram entries must be finite and nonnegative");
    }
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw InputError("histogram mass must be 1, got " + std::to_string(total));
  }
}

PixelHistogram PixelHistogram::uniform(int bits) {
  const std::size_t n = bins_for_bits(bits);
  return PixelHistogram(bits, std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

PixelHistogram PixelHistogram::from_counts(int bits, std::span<const double> counts) {
  if (counts.size() != bins_for_bits(bits)) {
    throw InputError("count vector length does not match bit depth");
  }
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  if (!(total > 0.0)) throw InputError("cannot normalize an all-zero histogram");
  std::vector<double> v(counts.begin(), counts.end());
  for (double& x : v) x /= total;
  return PixelHistogram(bits, std::move(v));
}

PixelHistogram from_pixels(std::span<const std::uint16_t> pixels, int bits) {
  const std::size_t bins = bins_for_bits(bits);
  if (pixels.empty()) throw InputError("cannot build a histogram from zero pixels");
  std::vector<std::uint64_t> counts(bins, 0);
  for (std::uint16_t p : pixels) {
    if (p >= bins) {
      throw InputError("pixel value " + std::to_string(p) + " exceeds " + std::to_string(bins - 1));
    }
    ++counts[p];
  }
  const double total = static_cast<double>(pixels.size());
  std::vector<double> v(bins);
  for (std::size_t i = 0; i < bins; ++i) v[i] = static_cast<double>(counts[i]) / total;
  return PixelHistogram(bits, std::move(v));
}

std::vector<double> cumulative(std::span<const double> h) {
  std::vector<double> c(h.size());
  std::partial_sum(h.begin(), h.end(), c.begin());
  return c;
}

double w1_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InputError("W1 operands differ in length");
  double ca = 0.0, cb = 0.0, d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca += a[i];
    cb += b[i];
    d += std::abs(ca - cb);
  }
  return d;
}

double w1_distance(const PixelHistogram& a, const PixelHistogram& b) {
  if (a.bits() != b.bits()) throw InputError("W1 operands differ in bit depth");
  return w1_distance(a.values(), b.values());
}

int empty_bin_count(std::span<const double> h, double eps) {
  return static_cast<int>(std::count_if(h.begin(), h.end(), [eps](double v) { return v <= eps; }));
}

int empty_bin_count(const PixelHistogram& h, double eps) { return empty_bin_count(h.values(), eps); }

std::vector<double> project_to_simplex(std::span<const double> x) {
  if (x.empty()) throw InputError("cannot project an empty vector");
  if (!std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); })) {
    throw InputError("cannot project a vector with non-finite entries");
  }
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end(), std::greater<>());
  // Largest k with s_k - (sum_{i<=k} s_i - 1)/k > 0 fixes the shift.
  double running = 0.0, shift = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    running += s[k];
    const double candidate = (running - 1.0) / static_cast<double>(k + 1);
    if (s[k] - candidate > 0.0) shift = candidate;
  }
  std::vector<double> out(x.size());
  std::transform(x.begin(), x.end(), out.begin(),
                 [shift](double v) { return std::max(v - shift, 0.0); });
  return out;
}

}  // namespace cetrace
