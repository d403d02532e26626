#include <gtest/gtest.h>

#include "cetrace/error.hpp"
#include "cetrace/parametric.hpp"
#include "cetrace/synth.hpp"

using namespace cetrace;

namespace {

PixelHistogram observe(double gamma, std::uint64_t seed) {
  const PixelHistogram h_true = smooth_random_histogram(8, 8.0, seed);
  return apply_to_histogram(TransferMatrix(gamma_curve(gamma, 255)), h_true);
}

ParamGrid grid_around(double center) { return ParamGrid::gamma_range(center - 0.3, 0.02, center + 0.3); }

}  // namespace

TEST(ParamGrid, RangeAndParse) {
  const ParamGrid g = ParamGrid::parse_gamma("0.1:0.01:2.5");
  ASSERT_EQ(g.values.size(), 241u);
  EXPECT_DOUBLE_EQ(g.values.front()[0], 0.1);
  EXPECT_DOUBLE_EQ(g.values.back()[0], 2.5);
  EXPECT_DOUBLE_EQ(g.values[140][0], 1.5);
  EXPECT_THROW(ParamGrid::parse_gamma("0.1:0:2"), InputError);
  EXPECT_THROW(ParamGrid::parse_gamma("-1:0.1:2"), InputError);
  EXPECT_THROW(ParamGrid::parse_gamma("1,2"), InputError);
  EXPECT_EQ(ParamGrid::sigmoid_default().values.size(), 90u);
}

TEST(Parametric, FindsTrueGamma) {
  const ParametricEstimate est = estimate_parametric(observe(1.4, 31), grid_around(1.4), NoiseMatrix(0.0, 255));
  EXPECT_NEAR(est.best_param[0], 1.4, 0.05);
}

TEST(Parametric, UntransformedGivesUnitGamma) {
  const PixelHistogram h = smooth_random_histogram(8, 8.0, 32);
  const ParametricEstimate est = estimate_parametric(h, grid_around(1.0), NoiseMatrix(0.0, 255));
  EXPECT_NEAR(est.best_param[0], 1.0, 0.05);
}

TEST(Parametric, SingleValueGrid) {
  ParamGrid g;
  g.values = {{1.7, 0.0}};
  const PixelHistogram h = observe(1.2, 33);
  const ParametricEstimate est = estimate_parametric(h, g, NoiseMatrix(0.0, 255));
  EXPECT_DOUBLE_EQ(est.best_param[0], 1.7);
  EXPECT_DOUBLE_EQ(est.best_objective, recover_histogram(h, gamma_curve(1.7, 255), NoiseMatrix(0.0, 255)).objective);
  EXPECT_THROW(estimate_parametric(h, ParamGrid{}, NoiseMatrix(0.0, 255)), InputError);
}

TEST(Parametric, LandscapeShapeAndMinimum) {
  const ParamGrid g = grid_around(0.9);
  const ParametricEstimate est = estimate_parametric(observe(0.9, 34), g, NoiseMatrix(0.01, 255));
  ASSERT_EQ(est.landscape.size(), g.values.size());
  double lowest = est.landscape.front().objective;
  for (std::size_t k = 0; k < g.values.size(); ++k) {
    EXPECT_EQ(est.landscape[k].param, g.values[k]);
    lowest = std::min(lowest, est.landscape[k].objective);
  }
  EXPECT_EQ(est.best_objective, lowest);
}

TEST(Parametric, TrueGammaIsGlobalMinimumNoiseFree) {
  for (std::uint64_t seed = 40; seed < 60; ++seed) {
    const double truth = 0.4 + 0.1 * static_cast<double>(seed - 40);
    const ParamGrid g = grid_around(truth);
    const ParametricEstimate est = estimate_parametric(observe(truth, seed), g, NoiseMatrix(0.0, 255));
    double at_truth = 0.0;
    for (const LandscapePoint& p : est.landscape) {
      if (std::abs(p.param[0] - truth) < 1e-9) at_truth = p.objective;
    }
    EXPECT_LE(at_truth, est.best_objective + 1e-9) << "gamma " << truth;
  }
}

TEST(Parametric, TiesGoToEarliestGridEntry) {
  ParamGrid g;
  g.values = {{1.3, 0.0}, {1.0, 0.0}, {1.3, 0.0}, {1.0, 0.0}};
  const ParametricEstimate est = estimate_parametric(observe(1.0, 35), g, NoiseMatrix(0.0, 255));
  EXPECT_DOUBLE_EQ(est.best_param[0], 1.0);
  EXPECT_EQ(est.landscape[1].objective, est.landscape[3].objective);
}

TEST(Parametric, SerialAndParallelAgreeBitwise) {
  const PixelHistogram h = observe(1.7, 36);
  const ParamGrid g = grid_around(1.7);
  const ParametricEstimate a = estimate_parametric(h, g, NoiseMatrix(0.5, 255), {}, Execution::kSerial);
  const ParametricEstimate b = estimate_parametric(h, g, NoiseMatrix(0.5, 255), {}, Execution::kParallel);
  EXPECT_EQ(a.best_param, b.best_param);
  for (std::size_t k = 0; k < g.values.size(); ++k) EXPECT_EQ(a.landscape[k].objective, b.landscape[k].objective);
}

TEST(Dedupe, CollapsesFineGrid) {
  const ParamGrid fine = ParamGrid::gamma_range(0.9999, 1e-6, 1.0001);
  const DedupedGrid d = dedupe_grid_by_curve(fine, 255);
  EXPECT_LT(d.grid.values.size(), 5u);
  std::size_t covered = 0;
  for (const auto& group : d.duplicates) covered += group.size();
  EXPECT_EQ(covered, fine.values.size());
  for (std::size_t k = 0; k < d.grid.values.size(); ++k) {
    for (std::size_t idx : d.duplicates[k]) {
      EXPECT_EQ(gamma_curve(fine.values[idx][0], 255), gamma_curve(d.grid.values[k][0], 255));
    }
  }
}

TEST(Dedupe, KeepsDistinguishableValuesAndBound) {
  const ParamGrid coarse = ParamGrid::gamma_range(0.5, 0.25, 2.5);
  EXPECT_EQ(dedupe_grid_by_curve(coarse, 255).grid.values.size(), coarse.values.size());
  const DedupedGrid d = dedupe_grid_by_curve(ParamGrid::gamma_range(0.1, 0.001, 2.5), 255);
  EXPECT_LE(d.grid.values.size(), 254u * 254u);
}

TEST(Dedupe, DoesNotChangeSelectedCurve) {
  const PixelHistogram h = observe(1.25, 37);
  const ParamGrid raw = ParamGrid::gamma_range(1.0, 0.001, 1.5);
  const DedupedGrid d = dedupe_grid_by_curve(raw, 255);
  const ParametricEstimate est = estimate_parametric(h, d.grid, NoiseMatrix(0.0, 255));
  const ParametricEstimate full = estimate_parametric(h, raw, NoiseMatrix(0.0, 255));
  EXPECT_EQ(gamma_curve(est.best_param[0], 255), gamma_curve(full.best_param[0], 255));
}
