#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "cetrace/error.hpp"
#include "cetrace/experiments.hpp"
#include "cetrace/json_io.hpp"
#include "cetrace/synth.hpp"

using namespace cetrace;

TEST(CurveSpecText, ParsesAndPrints) {
  EXPECT_EQ(CurveSpec::parse("gamma:1.4").gamma, 1.4);
  const CurveSpec s = CurveSpec::parse("sigmoid:0.2,0.6");
  EXPECT_EQ(s.kind, CurveSpec::Kind::kSigmoid);
  EXPECT_DOUBLE_EQ(s.alpha, 0.2);
  EXPECT_DOUBLE_EQ(s.mu, 0.6);
  const CurveSpec sp = CurveSpec::parse("spline:64,40;128,110");
  ASSERT_EQ(sp.controls.size(), 2u);
  EXPECT_EQ(sp.controls[1].output, 110);
  EXPECT_EQ(CurveSpec::parse(sp.to_string()).controls.size(), 2u);
  EXPECT_EQ(CurveSpec::parse("identity").kind, CurveSpec::Kind::kIdentity);
  EXPECT_THROW(CurveSpec::parse("gamma:abc"), InputError);
  EXPECT_THROW(CurveSpec::parse("wavelet:3"), InputError);
}

TEST(Synth, IdentityNoiseFreeKeepsPixels) {
  SynthSpec s;
  s.width = 64;
  s.height = 32;
  s.seed = 1;
  const SynthResult r = synth_image(s);
  EXPECT_EQ(r.pre, r.transformed);
}

TEST(Synth, Reproducible) {
  SynthSpec s;
  s.width = s.height = 100;
  s.seed = 2;
  s.sigma = 1.0;
  s.curve = CurveSpec::parse("gamma:0.8");
  EXPECT_EQ(synth_image(s).transformed, synth_image(s).transformed);
  SynthSpec t = s;
  t.seed = 3;
  EXPECT_NE(synth_image(s).transformed, synth_image(t).transformed);
}

TEST(Synth, MatchesForwardModel) {
  SynthSpec s;
  s.seed = 4;
  s.sigma = 0.7;
  s.curve = CurveSpec::parse("gamma:1.3");
  const SynthResult r = synth_image(s);
  const PixelHistogram model =
      apply_noise(NoiseMatrix(0.7, 255), apply_to_histogram(TransferMatrix(r.truth), r.base));
  EXPECT_LT(w1_distance(from_pixels(r.transformed.pixels(), 8), model), 0.05);
}

TEST(Synth, SmoothHistogramsAreMostlyOccupied) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const PixelHistogram h = smooth_random_histogram(8, 8.0, seed);
    EXPECT_EQ(empty_bin_count(h), 0);
    EXPECT_EQ(h, smooth_random_histogram(8, 8.0, seed));
  }
}

TEST(Composite, RegionsAndMasks) {
  SynthSpec s0;
  s0.width = s0.height = 100;
  s0.seed = 5;
  s0.curve = CurveSpec::parse("gamma:0.6");
  SynthSpec s1 = s0;
  s1.curve = CurveSpec::parse("gamma:1.4");
  const CompositeResult empty = synth_composite(s0, s1, Rect{0, 0, 0, 0});
  EXPECT_EQ(std::count(empty.truth_mask.begin(), empty.truth_mask.end(), 1), 0);
  EXPECT_EQ(empty.image, synth_image(s0).transformed);
  const CompositeResult full = synth_composite(s0, s1, Rect{0, 0, 100, 100});
  EXPECT_EQ(std::count(full.truth_mask.begin(), full.truth_mask.end(), 0), 0);
  const CompositeResult quarter = synth_composite(s0, s1, Rect{50, 50, 50, 50});
  EXPECT_EQ(std::count(quarter.truth_mask.begin(), quarter.truth_mask.end(), 1), 2500);
  EXPECT_THROW(synth_composite(s0, s1, Rect{60, 0, 50, 10}), InputError);
}

TEST(Accuracy, RateExamples) {
  EXPECT_DOUBLE_EQ(accuracy_rate(std::vector<double>{1.4, 1.4}, 1.4, 0.05), 1.0);
  EXPECT_DOUBLE_EQ(accuracy_rate(std::vector<double>{2.0, 0.5}, 1.4, 0.05), 0.0);
  EXPECT_DOUBLE_EQ(accuracy_rate(std::vector<double>{1.40, 1.46}, 1.4, 0.05), 0.5);
  EXPECT_DOUBLE_EQ(accuracy_rate(std::vector<double>{1.45}, 1.4, 0.05), 1.0);
  EXPECT_THROW(accuracy_rate(std::vector<double>{}, 1.4, 0.05), InputError);
}

TEST(Accuracy, CurveRateExamples) {
  const TransformCurve g2 = gamma_curve(2.0, 255);
  const std::vector<TransformCurve> same{g2, g2};
  EXPECT_DOUBLE_EQ(curve_accuracy_rate(same, g2, 0.0), 1.0);
  const std::vector<TransformCurve> ident{TransformCurve::identity(255)};
  double diff = 0.0, norm = 0.0;
  for (int i = 0; i <= 255; ++i) {
    diff += (i - g2(i)) * static_cast<double>(i - g2(i));
    norm += g2(i) * static_cast<double>(g2(i));
  }
  const double ratio = std::sqrt(diff / norm);
  EXPECT_NEAR(curve_relative_error(ident[0], g2), ratio, 1e-15);
  EXPECT_DOUBLE_EQ(curve_accuracy_rate(ident, g2, ratio + 1e-12), 1.0);
  EXPECT_DOUBLE_EQ(curve_accuracy_rate(ident, g2, ratio - 1e-6), 0.0);
  EXPECT_DOUBLE_EQ(curve_accuracy_rate(ident, g2, std::numeric_limits<double>::infinity()), 1.0);
  EXPECT_THROW(curve_accuracy_rate(ident, TransformCurve(255, std::vector<int>(256, 0)), 0.1), InputError);
}

TEST(Experiments, RegionAreaAndSplines) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Rect r = random_region(512, 512, 0.2, 0.4, seed);
    const double area = static_cast<double>(r.width) * r.height / (512.0 * 512.0);
    EXPECT_GE(area, 0.195);
    EXPECT_LE(area, 0.405);
    EXPECT_LE(r.x + r.width, 512);
    EXPECT_LE(r.y + r.height, 512);
    const CurveSpec sp = random_spline_spec(255, seed);
    EXPECT_NO_THROW(sp.build(PixelHistogram::uniform(8)));
  }
}

TEST(Experiments, SmallGammaSweepIsOrderedAndDeterministic) {
  GammaEvalSpec spec;
  spec.images = 2;
  spec.side = 200;
  spec.gammas = {0.7, 1.8};
  spec.sigmas = {0.0, 1.0};
  spec.grid = ParamGrid::gamma_range(0.5, 0.05, 2.0);
  const GammaEvalResult a = run_gamma_eval(spec, Execution::kSerial);
  const GammaEvalResult b = run_gamma_eval(spec, Execution::kParallel);
  ASSERT_EQ(a.cases.size(), 8u);
  EXPECT_DOUBLE_EQ(a.cases[0].sigma, 0.0);
  EXPECT_DOUBLE_EQ(a.cases[1].truth, 1.8);
  EXPECT_DOUBLE_EQ(a.cases[4].sigma, 1.0);
  for (std::size_t k = 0; k < a.cases.size(); ++k) EXPECT_EQ(a.cases[k].estimate, b.cases[k].estimate);
  EXPECT_EQ(a.accuracy, b.accuracy);
}

TEST(Json, HistogramAndCurveRoundTrip) {
  const PixelHistogram h = smooth_random_histogram(8, 8.0, 6);
  EXPECT_EQ(histogram_from_json(histogram_to_json(h)), h);
  const TransformCurve c = gamma_curve(1.7, 255);
  EXPECT_EQ(curve_from_json(curve_to_json(c)), c);
  EXPECT_THROW(histogram_from_json(Json{{"bits", 8}}), FormatError);
  EXPECT_THROW(curve_from_json(Json{{"n", 2}, {"phi", {0, 2, 1}}}), InputError);

  const auto p = std::filesystem::temp_directory_path() / "cetrace_json_roundtrip.json";
  write_json(curve_to_json(c), p);
  EXPECT_EQ(curve_from_json(read_json(p)), c);
  std::filesystem::remove(p);
}

TEST(Json, ReportCarriesTrace) {
  const PixelHistogram h = smooth_random_histogram(8, 8.0, 7);
  const SolverReport rep = recover_histogram(h, gamma_curve(1.2, 255), NoiseMatrix(0.0, 255));
  const Json j = report_to_json(rep);
  EXPECT_EQ(j.at("trace").size(), rep.trace.size());
  EXPECT_EQ(j.at("objective").get<double>(), rep.objective);
  EXPECT_EQ(histogram_from_json(j.at("h_star")), rep.h_star);
}
