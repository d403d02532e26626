#include <gtest/gtest.h>

#include <random>

#include "cetrace/error.hpp"
#include "cetrace/noise.hpp"
#include "cetrace/transforms.hpp"
#include "oracles.hpp"

using namespace cetrace;

TEST(Noise, ZeroSigmaIsIdentity) {
  const NoiseMatrix r(0.0, 255);
  EXPECT_EQ(r.reach(), 0);
  std::mt19937_64 rng(1);
  const auto h = oracle::random_simplex(rng, 256);
  EXPECT_EQ(r.apply(h), h);
}

TEST(Noise, CentralMassAtUnitSigma) {
  const NoiseMatrix r(1.0, 255);
  EXPECT_NEAR(r.band(0), 0.3829249225480262, 1e-12);
  EXPECT_EQ(r.reach(), 7);
  EXPECT_DOUBLE_EQ(r.band(3), r.band(-3));
}

TEST(Noise, RejectsNegativeSigma) { EXPECT_THROW(NoiseMatrix(-0.1, 255), InputError); }

TEST(Noise, BandMatchesTruncatedGaussian) {
  for (double sigma : {0.3, 1.0, 2.5}) {
    const NoiseMatrix r(sigma, 63);
    double sum = 0.0;
    for (int d = -r.reach(); d <= r.reach(); ++d) {
      sum += r.band(d);
      if (std::abs(d) < r.reach()) {
        EXPECT_NEAR(r.band(d), oracle::normal_cdf((d + 0.5) / sigma) - oracle::normal_cdf((d - 0.5) / sigma), 1e-15);
      }
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_LT(r.band(r.reach()), 1e-8);
  }
}

TEST(Noise, DenseOperatorAgreesWithOracle) {
  for (double sigma : {0.0, 0.5, 1.7}) {
    const int top = 31;
    const NoiseMatrix r(sigma, top);
    const auto dense = r.dense();
    const auto ref = oracle::noise(sigma, top);
    for (int i = 0; i <= top; ++i) {
      double column = 0.0;
      for (int j = 0; j <= top; ++j) {
        EXPECT_NEAR(dense[static_cast<std::size_t>(i) * (top + 1) + j], ref[i][j], 1e-14);
        column += dense[static_cast<std::size_t>(j) * (top + 1) + i];
      }
      EXPECT_NEAR(column, 1.0, 1e-12);
    }
  }
}

TEST(Noise, ApplyAndTransposeAreAdjoint) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal;
  const NoiseMatrix r(1.3, 40);
  std::vector<double> x(41), y(41);
  for (double& v : x) v = normal(rng);
  for (double& v : y) v = normal(rng);
  const auto rx = r.apply(x);
  const auto rty = r.apply_transpose(y);
  double lhs = 0.0, rhs = 0.0;
  for (int i = 0; i <= 40; ++i) {
    lhs += rx[i] * y[i];
    rhs += x[i] * rty[i];
  }
  EXPECT_NEAR(lhs, rhs, 1e-12);
}

TEST(Noise, ConservesMass) {
  std::mt19937_64 rng(3);
  for (double sigma : {0.1, 0.5, 1.0, 2.0, 5.0}) {
    const NoiseMatrix r(sigma, 255);
    const auto h = oracle::random_simplex(rng, 256, 0.3);
    const PixelHistogram out = apply_noise(r, PixelHistogram(8, h));
    double sum = 0.0;
    for (double v : out.values()) {
      EXPECT_GE(v, 0.0);
      sum += v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(Noise, PointMassBecomesGaussianBump) {
  std::vector<double> h(256, 0.0);
  h[128] = 1.0;
  const auto out = NoiseMatrix(1.0, 255).apply(h);
  for (int d = -6; d <= 6; ++d) {
    EXPECT_NEAR(out[128 + d], oracle::normal_cdf((d + 0.5)) - oracle::normal_cdf(d - 0.5), 1e-12);
  }
}

TEST(Noise, BlurDoesNotAddEmptyBins) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto h = oracle::random_simplex(rng, 256, 0.5);
    const auto out = NoiseMatrix(0.8, 255).apply(h);
    EXPECT_LE(empty_bin_count(out), empty_bin_count(h));
  }
}

TEST(Noise, SampledPixelsConvergeToForwardModel) {
  std::mt19937_64 rng(5);
  const auto h = oracle::random_simplex(rng, 256);
  const PixelHistogram base(8, h);
  const TransformCurve curve = gamma_curve(1.3, 255);
  const NoiseMatrix r(1.0, 255);
  const PixelHistogram model = apply_noise(r, apply_to_histogram(TransferMatrix(curve), base));
  std::discrete_distribution<int> draw(h.begin(), h.end());
  auto distance = [&](std::size_t samples, std::uint64_t seed) {
    std::mt19937_64 local(seed);
    std::vector<std::uint16_t> px(samples);
    for (auto& p : px) p = static_cast<std::uint16_t>(draw(local));
    const auto out = apply_to_pixels(curve, px, NoiseSpec{1.0}, seed + 1);
    return w1_distance(from_pixels(out, 8), model);
  };
  EXPECT_LT(distance(1'000'000, 9), distance(10'000, 9));
  EXPECT_LT(distance(1'000'000, 9), 0.05);
}
