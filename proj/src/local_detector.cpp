#include "cetrace/local_detector.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <string>

#include "cetrace/error.hpp"

namespace cetrace {
namespace {

constexpr double kLogFloor = 1e-12;

// Per-pixel count of covering blocks carrying the wanted label and of those carrying the other one.
struct Coverage {
  std::vector<int> wanted;
  std::vector<int> other;
};

Coverage label_coverage(const BlockGrid& grid, std::span<const std::uint8_t> labels, std::uint8_t wanted) {
  const int w = grid.image_width, h = grid.image_height;
  Coverage cov{std::vector<int>(static_cast<std::size_t>(w + 1) * (h + 1), 0),
               std::vector<int>(static_cast<std::size_t>(w + 1) * (h + 1), 0)};
  auto at = [w](int x, int y) { return static_cast<std::size_t>(y) * (w + 1) + x; };
  for (std::size_t k = 0; k < grid.blocks.size(); ++k) {
    std::vector<int>& acc = labels[k] == wanted ? cov.wanted : cov.other;
    const Block& b = grid.blocks[k];
    const int x1 = b.x + grid.block_size, y1 = b.y + grid.block_size;
    ++acc[at(b.x, b.y)];
    --acc[at(x1, b.y)];
    --acc[at(b.x, y1)];
    ++acc[at(x1, y1)];
  }
  for (std::vector<int>* acc : {&cov.wanted, &cov.other}) {
    for (int y = 0; y <= h; ++y) {
      for (int x = 1; x <= w; ++x) (*acc)[at(x, y)] += (*acc)[at(x - 1, y)];
    }
    for (int y = 1; y <= h; ++y) {
      for (int x = 0; x <= w; ++x) (*acc)[at(x, y)] += (*acc)[at(x, y - 1)];
    }
  }
  return cov;
}

// Pixels covered only by blocks of the wanted label. A handful of pixels
// leaking in from the other region would fill the empty bins that identify
// the curve, so shared pixels are left out unless nothing else remains.
PixelHistogram label_histogram(const GrayImage& img, const BlockGrid& grid, std::span<const std::uint8_t> labels,
                               std::uint8_t wanted) {
  const Coverage cov = label_coverage(grid, labels, wanted);
  const int w = img.width();
  auto at = [w](int x, int y) { return static_cast<std::size_t>(y) * (w + 1) + x; };
  std::vector<double> exclusive(static_cast<std::size_t>(img.top()) + 1, 0.0);
  std::vector<double> shared(exclusive.size(), 0.0);
  double exclusive_total = 0.0;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < w; ++x) {
      if (cov.wanted[at(x, y)] == 0) continue;
      const std::uint16_t v = img.at(x, y);
      shared[v] += 1.0;
      if (cov.other[at(x, y)] == 0) {
        exclusive[v] += 1.0;
        exclusive_total += 1.0;
      }
    }
  }
  return PixelHistogram::from_counts(img.bits(), exclusive_total > 0.0 ? exclusive : shared);
}

double cdf_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return d;
}

}  // namespace

std::vector<Edge> BlockGrid::edges() const {
  std::vector<Edge> out;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int k = r * cols + c;
      if (c + 1 < cols) out.emplace_back(k, k + 1);
      if (r + 1 < rows) out.emplace_back(k, k + cols);
    }
  }
  return out;
}

BlockGrid extract_blocks(const GrayImage& img, int block_size, int stride) {
  if (block_size <= 0 || stride <= 0) throw InputError("block size and stride must be positive");
  if (img.width() < block_size || img.height() < block_size) {
    throw InputError("image is smaller than one block (" + std::to_string(block_size) + " px)");
  }
  BlockGrid grid;
  grid.image_width = img.width();
  grid.image_height = img.height();
  grid.block_size = block_size;
  grid.stride = stride;
  grid.cols = (img.width() - block_size) / stride + 1;
  grid.rows = (img.height() - block_size) / stride + 1;
  grid.blocks.reserve(static_cast<std::size_t>(grid.cols) * grid.rows);
  std::vector<std::uint16_t> pixels(static_cast<std::size_t>(block_size) * block_size);
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      const int x0 = c * stride, y0 = r * stride;
      std::size_t k = 0;
      for (int y = y0; y < y0 + block_size; ++y) {
        for (int x = x0; x < x0 + block_size; ++x) pixels[k++] = img.at(x, y);
      }
      grid.blocks.push_back(Block{x0, y0, from_pixels(pixels, img.bits())});
    }
  }
  return grid;
}

void EnergyParams::validate() const {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw InputError("beta must be finite and >= 0");
  if (!(lambda > 0.0)) throw InputError("lambda must be positive");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InputError("sigma must be finite and >= 0");
  if (em_max < 1) throw InputError("em_max must be >= 1");
  if (block_size < 1 || stride < 1) throw InputError("block size and stride must be positive");
  curve.validate();
}

double unary_energy(const PixelHistogram& block, const TransformCurve& curve, const NoiseMatrix& noise,
                    const SolverConfig& cfg) {
  const SolverReport rep = recover_histogram(block, curve, noise, cfg);
  return std::log(std::max(rep.w1_term + cfg.lambda * rep.empty_bins, kLogFloor));
}

std::vector<UnaryCosts> compute_unaries(const BlockGrid& grid, const TransformCurve& curve0,
                                        const TransformCurve& curve1, const NoiseMatrix& noise,
                                        const SolverConfig& cfg, Execution exec) {
  const auto count = static_cast<long>(grid.blocks.size());
  std::vector<UnaryCosts> out(static_cast<std::size_t>(count));
  auto evaluate = [&](long k) {
    try {
      const PixelHistogram& h = grid.blocks[k].hist;
      out[k] = {unary_energy(h, curve0, noise, cfg), unary_energy(h, curve1, noise, cfg)};
    } catch (const NumericalError& e) {
      throw NumericalError("block " + std::to_string(k) + ": " + e.what(), e.trace());
    }
  };
  if (exec == Execution::kParallel) {
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 16)
    for (long k = 0; k < count; ++k) {
      try {
        evaluate(k);
      } catch (...) {
#pragma omp critical(cetrace_unary_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  } else {
    for (long k = 0; k < count; ++k) evaluate(k);
  }
  return out;
}

std::vector<std::uint8_t> cluster_blocks(const BlockGrid& grid) {
  const std::size_t count = grid.blocks.size();
  if (count == 0) return {};
  std::vector<std::vector<double>> cdf(count);
  for (std::size_t k = 0; k < count; ++k) cdf[k] = cumulative(grid.blocks[k].hist.values());

  auto farthest_from = [&](std::span<const double> ref) {
    std::size_t best = 0;
    double best_d = -1.0;
    for (std::size_t k = 0; k < count; ++k) {
      const double d = cdf_distance(cdf[k], ref);
      if (d > best_d) {
        best_d = d;
        best = k;
      }
    }
    return best;
  };
  // Two sweeps of farthest-point search approximate the most distant pair.
  const std::size_t seed_a = farthest_from(cdf[0]);
  const std::size_t seed_b = farthest_from(cdf[seed_a]);
  std::vector<std::vector<double>> centers{cdf[seed_a], cdf[seed_b]};

  std::vector<std::uint8_t> labels(count, 0);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = iter == 0;
    for (std::size_t k = 0; k < count; ++k) {
      const std::uint8_t next = cdf_distance(cdf[k], centers[1]) < cdf_distance(cdf[k], centers[0]) ? 1 : 0;
      changed = changed || next != labels[k];
      labels[k] = next;
    }
    if (!changed) break;
    for (int c = 0; c < 2; ++c) {
      std::vector<double> sum(cdf[0].size(), 0.0);
      std::size_t members = 0;
      for (std::size_t k = 0; k < count; ++k) {
        if (labels[k] != c) continue;
        ++members;
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += cdf[k][i];
      }
      if (members == 0) continue;
      for (double& v : sum) v /= static_cast<double>(members);
      centers[c] = std::move(sum);
    }
  }
  return labels;
}

std::vector<std::uint8_t> majority_mask(const BlockGrid& grid, std::span<const std::uint8_t> labels) {
  if (labels.size() != grid.blocks.size()) throw InputError("label count does not match block count");
  const int w = grid.image_width, h = grid.image_height;
  std::vector<int> votes(static_cast<std::size_t>(w + 1) * (h + 1), 0);
  std::vector<int> cover(votes.size(), 0);
  auto at = [w](int x, int y) { return static_cast<std::size_t>(y) * (w + 1) + x; };
  auto add_rect = [&](std::vector<int>& acc, const Block& b) {
    const int x1 = b.x + grid.block_size, y1 = b.y + grid.block_size;
    ++acc[at(b.x, b.y)];
    --acc[at(x1, b.y)];
    --acc[at(b.x, y1)];
    ++acc[at(x1, y1)];
  };
  for (std::size_t k = 0; k < grid.blocks.size(); ++k) {
    add_rect(cover, grid.blocks[k]);
    if (labels[k]) add_rect(votes, grid.blocks[k]);
  }
  // Two-dimensional prefix sums turn the corner marks into per-pixel counts.
  for (int y = 0; y <= h; ++y) {
    for (int x = 0; x <= w; ++x) {
      if (x > 0) {
        votes[at(x, y)] += votes[at(x - 1, y)];
        cover[at(x, y)] += cover[at(x - 1, y)];
      }
    }
  }
  for (int y = 1; y <= h; ++y) {
    for (int x = 0; x <= w; ++x) {
      votes[at(x, y)] += votes[at(x, y - 1)];
      cover[at(x, y)] += cover[at(x, y - 1)];
    }
  }
  const int covered_w = (grid.cols - 1) * grid.stride + grid.block_size;
  const int covered_h = (grid.rows - 1) * grid.stride + grid.block_size;
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(w) * h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int sx = std::min(x, covered_w - 1), sy = std::min(y, covered_h - 1);
      const int ones = votes[at(sx, sy)];
      const int total = cover[at(sx, sy)];
      mask[static_cast<std::size_t>(y) * w + x] = 2 * ones > total ? 1 : 0;
    }
  }
  return mask;
}

Detection detect_regions(const GrayImage& img, const EnergyParams& params, Execution exec) {
  params.validate();
  if (img.width() < 2 * params.block_size || img.height() < 2 * params.block_size) {
    throw InputError("image must be at least twice the block size in each dimension");
  }
  const BlockGrid grid = extract_blocks(img, params.block_size, params.stride);
  const std::vector<Edge> edges = grid.edges();
  const NoiseMatrix noise(params.sigma, img.top());
  NonparamConfig curve_cfg = params.curve;
  curve_cfg.solver.lambda = params.lambda;

  Detection det{LabelField{grid.cols, grid.rows, cluster_blocks(grid), img.width(), img.height(), {}},
                TransformCurve::identity(img.top()), TransformCurve::identity(img.top()), {}};
  det.diagnostics.blocks = grid.blocks.size();
  std::vector<std::uint8_t>& labels = det.field.labels;

  auto is_degenerate = [](std::span<const std::uint8_t> l) {
    return std::all_of(l.begin(), l.end(), [&](std::uint8_t v) { return v == l.front(); });
  };
  double energy = std::numeric_limits<double>::infinity();
  for (int round = 1; round <= params.em_max && !is_degenerate(labels); ++round) {
    TransformCurve curve0 =
        estimate_nonparametric(label_histogram(img, grid, labels, 0), noise, curve_cfg).curve;
    TransformCurve curve1 =
        estimate_nonparametric(label_histogram(img, grid, labels, 1), noise, curve_cfg).curve;
    const std::vector<UnaryCosts> unaries = compute_unaries(grid, curve0, curve1, noise, curve_cfg.solver, exec);
    std::vector<std::uint8_t> next = graph_cut_labels(unaries, edges, params.beta);
    const double next_energy = labeling_energy(unaries, edges, params.beta, next);
    if (next_energy > energy) break;
    const bool fixed_point = next == labels;
    labels = std::move(next);
    det.curve0 = std::move(curve0);
    det.curve1 = std::move(curve1);
    energy = next_energy;
    det.diagnostics.energy_trace.push_back(energy);
    det.diagnostics.alternations = round;
    if (fixed_point) break;
  }
  det.diagnostics.degenerate = is_degenerate(labels);
  det.field.pixel_mask = majority_mask(grid, labels);
  return det;
}

DetectionScore de_fp_metrics(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> truth,
                             bool allow_flip) {
  if (predicted.size() != truth.size()) throw InputError("predicted and truth masks differ in size");
  std::size_t truth_size = 0, detected = 0, overlap = 0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const bool t = truth[k] != 0, d = predicted[k] != 0;
    truth_size += t;
    detected += d;
    overlap += t && d;
  }
  if (truth_size == 0) throw InputError("truth region is empty");
  const std::size_t total = truth.size();
  auto score = [&](std::size_t inter, std::size_t size, bool flipped) {
    DetectionScore s;
    s.de = static_cast<double>(inter) / static_cast<double>(truth_size);
    s.fp = size == 0 ? 0.0 : 1.0 - static_cast<double>(inter) / static_cast<double>(size);
    s.flipped = flipped;
    return s;
  };
  const DetectionScore direct = score(overlap, detected, false);
  if (!allow_flip) return direct;
  const DetectionScore flipped = score(truth_size - overlap, total - detected, true);
  return flipped.de > direct.de ? flipped : direct;
}

}  // namespace cetrace
