#include <gtest/gtest.h>

#include <random>

#include "cetrace/error.hpp"
#include "cetrace/histogram.hpp"
#include "oracles.hpp"

using namespace cetrace;

namespace {

std::vector<double> vec(std::span<const double> s) { return {s.begin(), s.end()}; }

}  // namespace

TEST(FromPixels, CountsLevels) {
  const std::vector<std::uint16_t> a{0, 0, 1, 1};
  EXPECT_EQ(vec(from_pixels(a, 1).values()), (std::vector<double>{0.5, 0.5}));
  const std::vector<std::uint16_t> b{3, 3, 3, 3};
  EXPECT_EQ(vec(from_pixels(b, 2).values()), (std::vector<double>{0, 0, 0, 1}));
  const std::vector<std::uint16_t> c{0, 1, 1, 2};
  EXPECT_EQ(vec(from_pixels(c, 2).values()), (std::vector<double>{0.25, 0.5, 0.25, 0}));
}

TEST(FromPixels, RejectsBadInput) {
  const std::vector<std::uint16_t> out_of_range{0, 4};
  EXPECT_THROW(from_pixels(out_of_range, 2), InputError);
  EXPECT_THROW(from_pixels({}, 8), InputError);
}

TEST(PixelHistogram, EnforcesInvariants) {
  EXPECT_THROW(PixelHistogram(2, {0.5, 0.5}), InputError);
  EXPECT_THROW(PixelHistogram(1, {0.7, 0.7}), InputError);
  EXPECT_THROW(PixelHistogram(1, {1.5, -0.5}), InputError);
  EXPECT_NO_THROW(PixelHistogram(1, {0.5, 0.5 + 1e-10}));
}

TEST(Cumulative, RunningSums) {
  EXPECT_EQ(cumulative(std::vector<double>{0.5, 0.5}), (std::vector<double>{0.5, 1.0}));
  EXPECT_EQ(cumulative(std::vector<double>{1, 0, 0, 0}), (std::vector<double>{1, 1, 1, 1}));
  EXPECT_EQ(cumulative(std::vector<double>{0.25, 0.5, 0.25, 0}), (std::vector<double>{0.25, 0.75, 1.0, 1.0}));
}

TEST(Cumulative, MatchesDenseOperator) {
  std::mt19937_64 rng(7);
  const auto h = oracle::random_simplex(rng, 64);
  const auto dense = oracle::mul(oracle::lower_ones(64), h);
  const auto fast = cumulative(h);
  for (std::size_t i = 0; i < h.size(); ++i) EXPECT_NEAR(fast[i], dense[i], 1e-14);
  for (std::size_t i = 1; i < h.size(); ++i) EXPECT_GE(fast[i], fast[i - 1]);
  EXPECT_NEAR(fast.back(), 1.0, 1e-12);
}

TEST(W1, Examples) {
  const std::vector<double> a{1, 0}, b{0, 1};
  EXPECT_DOUBLE_EQ(w1_distance(a, a), 0.0);
  EXPECT_DOUBLE_EQ(w1_distance(a, b), 1.0);
  EXPECT_DOUBLE_EQ(w1_distance(std::vector<double>{1, 0, 0}, std::vector<double>{0, 0, 1}), 2.0);
  EXPECT_THROW(w1_distance(a, std::vector<double>{1, 0, 0}), InputError);
}

TEST(W1, MetricPropertiesAndTransportOracle) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = oracle::random_simplex(rng, 32, 0.3);
    const auto b = oracle::random_simplex(rng, 32, 0.3);
    const auto c = oracle::random_simplex(rng, 32, 0.3);
    const double ab = w1_distance(a, b);
    EXPECT_NEAR(ab, oracle::transport_cost(a, b), 1e-12);
    EXPECT_GE(ab, 0.0);
    EXPECT_DOUBLE_EQ(ab, w1_distance(b, a));
    EXPECT_LE(w1_distance(a, c), ab + w1_distance(b, c) + 1e-12);
  }
}

TEST(EmptyBins, Examples) {
  EXPECT_EQ(empty_bin_count(std::vector<double>{0.5, 0, 0.5, 0}), 2);
  EXPECT_EQ(empty_bin_count(PixelHistogram::uniform(8)), 0);
  EXPECT_EQ(empty_bin_count(std::vector<double>{1, 0, 0, 0}), 3);
  EXPECT_EQ(empty_bin_count(std::vector<double>{0.5, 5e-9, 0.5 - 5e-9}), 1);
  EXPECT_EQ(empty_bin_count(std::vector<double>{0.5, 5e-9, 0.5 - 5e-9}, 0.0), 0);
}

TEST(Projection, Examples) {
  auto near = [](const std::vector<double>& got, const std::vector<double>& want) {
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-15);
  };
  near(project_to_simplex(std::vector<double>{0.5, 0.5}), {0.5, 0.5});
  near(project_to_simplex(std::vector<double>{2, 0}), {1, 0});
  near(project_to_simplex(std::vector<double>{0.6, 0.6}), {0.5, 0.5});
  EXPECT_THROW(project_to_simplex(std::vector<double>{NAN, 0}), InputError);
  EXPECT_THROW(project_to_simplex(std::vector<double>{INFINITY, 0}), InputError);
}

TEST(Projection, MatchesSupportEnumeration) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> dim(1, 5);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> x(static_cast<std::size_t>(dim(rng)));
    for (double& v : x) v = normal(rng);
    const auto got = project_to_simplex(x);
    const auto want = oracle::brute_projection(x);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-9);
  }
}

TEST(Projection, IdempotentOnFeasiblePoints) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto h = oracle::random_simplex(rng, 256, 0.2);
    const auto p = project_to_simplex(h);
    for (std::size_t i = 0; i < h.size(); ++i) EXPECT_NEAR(p[i], h[i], 1e-12);
    EXPECT_NO_THROW(PixelHistogram(8, p));
  }
}
