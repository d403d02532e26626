#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cetrace/execution.hpp"
#include "cetrace/graph_cut.hpp"
#include "cetrace/image_io.hpp"
#include "cetrace/nonparametric.hpp"

namespace cetrace {

struct Block {
  int x;
  int y;
  PixelHistogram hist;
};

/// Overlapping square blocks anchored on a stride lattice, row-major.
struct BlockGrid {
  int image_width = 0;
  int image_height = 0;
  int block_size = 0;
  int stride = 0;
  int cols = 0;
  int rows = 0;
  std::vector<Block> blocks;

  /// 4-neighborhood on the lattice, each pair once.
  std::vector<Edge> edges() const;
};

/// Throws InputError if the image is smaller than one block or the sizes are non-positive.
BlockGrid extract_blocks(const GrayImage& img, int block_size, int stride);

struct EnergyParams {
  double beta = 0.1;
  double lambda = 0.75;
  double sigma = 0.01;
  int em_max = 10;
  int block_size = 50;
  int stride = 2;
  /// Curve re-estimation settings; its solver lambda is overridden by lambda.
  NonparamConfig curve{};

  void validate() const;
};

/// log(W1(block, R T h*) + lambda * #empty bins of h*), floored at 1e-12 inside the log.
double unary_energy(const PixelHistogram& block, const TransformCurve& curve, const NoiseMatrix& noise,
                    const SolverConfig& cfg);

/// Unary energies of every block under both curves.
std::vector<UnaryCosts> compute_unaries(const BlockGrid& grid, const TransformCurve& curve0,
                                        const TransformCurve& curve1, const NoiseMatrix& noise,
                                        const SolverConfig& cfg, Execution exec = Execution::kParallel);

/// Two-way clustering of block CDFs (W1 assignment, mean update), seeded by
/// a far-apart pair of blocks. The first seed's cluster is label 0.
std::vector<std::uint8_t> cluster_blocks(const BlockGrid& grid);

/// Per-pixel majority over covering blocks, ties to 0. Pixels no block
/// covers take the vote of the nearest covered pixel.
std::vector<std::uint8_t> majority_mask(const BlockGrid& grid, std::span<const std::uint8_t> labels);

struct LabelField {
  int cols = 0;
  int rows = 0;
  std::vector<std::uint8_t> labels;
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixel_mask;
};

struct DetectionDiagnostics {
  /// All blocks ended up with one label.
  bool degenerate = false;
  int alternations = 0;
  /// Labeling energy after each accepted alternation.
  std::vector<double> energy_trace;
  std::size_t blocks = 0;
};

struct Detection {
  LabelField field;
  TransformCurve curve0;
  TransformCurve curve1;
  DetectionDiagnostics diagnostics;
};

/// Alternates curve estimation on each label's pixels, unary evaluation and
/// graph-cut relabeling. Rejects images under twice the block size.
Detection detect_regions(const GrayImage& img, const EnergyParams& params = {},
                         Execution exec = Execution::kParallel);

struct DetectionScore {
  double de = 0.0;
  double fp = 0.0;
  /// The complement of the prediction scored higher.
  bool flipped = false;
};

/// DE = |T & D| / |T|, FP = 1 - |T & D| / |D| (0 when D is empty). With
/// allow_flip, whichever of the prediction and its complement detects more is scored.
DetectionScore de_fp_metrics(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> truth,
                             bool allow_flip = true);

}  // namespace cetrace
