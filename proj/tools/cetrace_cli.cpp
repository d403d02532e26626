// Command-line front end: synthetic data, estimators, localization, evaluations.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cetrace/error.hpp"
#include "cetrace/experiments.hpp"
#include "cetrace/json_io.hpp"
#include "cetrace/local_detector.hpp"
#include "cetrace/parametric.hpp"
#include "cetrace/synth.hpp"
#include "cetrace/version.hpp"

namespace fs = std::filesystem;
using namespace cetrace;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

struct Common {
  std::string json_path;
  bool timing = false;
};

Json envelope(const std::string& command) {
  Json j;
  j["tool"] = {{"name", "cetrace"}, {"version", kVersion}};
  j["command"] = command;
  return j;
}

void finish(Json report, const Common& common, std::chrono::steady_clock::time_point start) {
  if (common.timing) {
    report["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  if (!common.json_path.empty()) write_json(report, common.json_path);
}

Json solver_json(const SolverConfig& cfg) {
  return {{"lambda", cfg.lambda},  {"rho", cfg.rho},       {"outer_max", cfg.outer_max},
          {"tol", cfg.tol},        {"u_floor", cfg.u_floor},
          {"inner", cfg.inner == InnerSolver::kNewton ? "newton" : "projected-gradient"}};
}

Json rect_json(const Rect& r) { return {{"x", r.x}, {"y", r.y}, {"width", r.width}, {"height", r.height}}; }

Rect parse_rect(const std::string& text) {
  Rect r;
  char c1 = 0, c2 = 0, c3 = 0;
  std::istringstream in(text);
  if (!(in >> r.x >> c1 >> r.y >> c2 >> r.width >> c3 >> r.height) || c1 != ',' || c2 != ',' || c3 != ',' ||
      !in.eof()) {
    throw InputError("region must be x,y,width,height: " + text);
  }
  return r;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw InputError("bad number: " + item);
    } catch (const std::logic_error&) {
      throw InputError("bad number list: " + text);
    }
  }
  if (out.empty()) throw InputError("empty number list");
  return out;
}

TransformCurve load_curve(const std::string& arg, int top) {
  if (fs::exists(arg)) return curve_from_json(read_json(arg));
  const CurveSpec spec = CurveSpec::parse(arg);
  if (spec.kind == CurveSpec::Kind::kHistEq) throw InputError("histeq needs a pre-image; pass a curve JSON instead");
  int bits = 1;
  while ((1 << bits) - 1 < top) ++bits;
  return spec.build(PixelHistogram::uniform(bits));
}

void add_solver_options(CLI::App* cmd, SolverConfig& cfg) {
  cmd->add_option("--lambda", cfg.lambda, "Empty-bin weight")->capture_default_str();
  cmd->add_option("--rho", cfg.rho, "Empty-bin surrogate sharpness")->capture_default_str();
  cmd->add_option("--outer-max", cfg.outer_max, "Reweighting iterations")->capture_default_str();
}

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("--json", common.json_path, "Write the JSON report here");
  cmd->add_flag("--timing", common.timing, "Include wall time in the report");
}

int run(int argc, char** argv) {
  CLI::App app{"Contrast-enhancement trace estimation and localization"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Common common;
  const auto start = std::chrono::steady_clock::now();
  std::function<void()> action;

  // synth
  SynthSpec synth;
  std::string synth_curve = "gamma:1.5", synth_out, synth_pre, synth_truth;
  {
    CLI::App* cmd = app.add_subcommand("synth", "Generate a synthetic enhanced image");
    cmd->add_option("--out", synth_out, "Transformed image (.pgm or .png)")->required();
    cmd->add_option("--pre", synth_pre, "Also write the pre-transform image");
    cmd->add_option("--truth", synth_truth, "Write the true curve as JSON");
    cmd->add_option("--curve", synth_curve, "identity | gamma:g | sigmoid:a,mu | histeq | spline:i,j;...")
        ->capture_default_str();
    cmd->add_option("--bits", synth.bits)->capture_default_str();
    cmd->add_option("--width", synth.width)->capture_default_str();
    cmd->add_option("--height", synth.height)->capture_default_str();
    cmd->add_option("--sigma", synth.sigma, "Additive Gaussian noise std")->capture_default_str();
    cmd->add_option("--smoothness", synth.base.smoothness)->capture_default_str();
    cmd->add_option("--base-image", synth.base.path, "Draw pixels from this image's histogram");
    cmd->add_option("--seed", synth.seed)->capture_default_str();
    add_common(cmd, common);
    cmd->callback([&] {
      action = [&] {
        synth.curve = CurveSpec::parse(synth_curve);
        if (!synth.base.path.empty()) synth.base.kind = BaseHistogramSpec::Kind::kFromImage;
        const SynthResult res = synth_image(synth);
        write_image(res.transformed, synth_out);
        if (!synth_pre.empty()) write_image(res.pre, synth_pre);
        if (!synth_truth.empty()) write_json(curve_to_json(res.truth), synth_truth);
        Json j = envelope("synth");
        j["spec"] = {{"bits", synth.bits},         {"width", synth.width}, {"height", synth.height},
                     {"curve", synth.curve.to_string()}, {"sigma", synth.sigma}, {"seed", synth.seed},
                     {"smoothness", synth.base.smoothness}, {"base_image", synth.base.path}};
        j["output"] = synth_out;
        j["truth_curve"] = curve_to_json(res.truth);
        j["base_histogram"] = histogram_to_json(res.base);
        std::printf("wrote %s (%dx%d, %d-bit, curve %s, sigma %g)\n", synth_out.c_str(), synth.width, synth.height,
                    synth.bits, synth.curve.to_string().c_str(), synth.sigma);
        finish(std::move(j), common, start);
      };
    });
  }

  // synth-composite
  SynthSpec comp0;
  comp0.width = comp0.height = 512;
  std::string comp_curve0 = "gamma:0.6", comp_curve1 = "gamma:1.4", comp_region, comp_out, comp_mask;
  double comp_sigma1 = -1.0;
  {
    CLI::App* cmd = app.add_subcommand("synth-composite", "Generate an image with a differently enhanced region");
    cmd->add_option("--out", comp_out)->required();
    cmd->add_option("--mask", comp_mask, "Ground-truth region mask (PGM)");
    cmd->add_option("--curve0", comp_curve0, "Curve outside the region")->capture_default_str();
    cmd->add_option("--curve1", comp_curve1, "Curve inside the region")->capture_default_str();
    cmd->add_option("--region", comp_region, "x,y,width,height (default: centered, 30% of the area)");
    cmd->add_option("--bits", comp0.bits)->capture_default_str();
    cmd->add_option("--width", comp0.width)->capture_default_str();
    cmd->add_option("--height", comp0.height)->capture_default_str();
    cmd->add_option("--sigma", comp0.sigma)->capture_default_str();
    cmd->add_option("--sigma1", comp_sigma1, "Noise inside the region (default: --sigma)");
    cmd->add_option("--smoothness", comp0.base.smoothness)->capture_default_str();
    cmd->add_option("--seed", comp0.seed)->capture_default_str();
    add_common(cmd, common);
    cmd->callback([&] {
      action = [&] {
        comp0.curve = CurveSpec::parse(comp_curve0);
        SynthSpec comp1 = comp0;
        comp1.curve = CurveSpec::parse(comp_curve1);
        if (comp_sigma1 >= 0.0) comp1.sigma = comp_sigma1;
        Rect region;
        if (comp_region.empty()) {
          region.width = static_cast<int>(std::lround(comp0.width * std::sqrt(0.3)));
          region.height = static_cast<int>(std::lround(comp0.height * std::sqrt(0.3)));
          region.x = (comp0.width - region.width) / 2;
          region.y = (comp0.height - region.height) / 2;
        } else {
          region = parse_rect(comp_region);
        }
        const CompositeResult res = synth_composite(comp0, comp1, region);
        write_image(res.image, comp_out);
        if (!comp_mask.empty()) write_mask(res.truth_mask, res.image.width(), res.image.height(), comp_mask);
        Json j = envelope("synth-composite");
        j["spec"] = {{"bits", comp0.bits},   {"width", comp0.width},
                     {"height", comp0.height}, {"curve0", comp0.curve.to_string()},
                     {"curve1", comp1.curve.to_string()}, {"sigma0", comp0.sigma},
                     {"sigma1", comp1.sigma}, {"seed", comp0.seed},
                     {"region", rect_json(region)}};
        j["output"] = comp_out;
        j["curve0"] = curve_to_json(res.curve0);
        j["curve1"] = curve_to_json(res.curve1);
        std::printf("wrote %s with region %d,%d %dx%d\n", comp_out.c_str(), region.x, region.y, region.width,
                    region.height);
        finish(std::move(j), common, start);
      };
    });
  }

  // estimate-gamma
  std::string eg_input, eg_grid = "0.1:0.01:2.5", eg_family = "gamma", eg_landscape;
  double eg_sigma = 0.0;
  SolverConfig eg_solver;
  {
    CLI::App* cmd = app.add_subcommand("estimate-gamma", "Grid search for a parametric curve");
    cmd->add_option("--input", eg_input)->required();
    cmd->add_option("--family", eg_family, "gamma | sigmoid")->capture_default_str();
    cmd->add_option("--grid", eg_grid, "Gamma grid lo:step:hi")->capture_default_str();
    cmd->add_option("--sigma", eg_sigma, "Probing noise std")->capture_default_str();
    cmd->add_option("--landscape", eg_landscape, "Write param,objective CSV");
    add_solver_options(cmd, eg_solver);
    add_common(cmd, common);
    cmd->callback([&] {
      action = [&] {
        const GrayImage img = read_image(eg_input);
        const PixelHistogram h = from_pixels(img.pixels(), img.bits());
        ParamGrid grid;
        if (eg_family == "gamma") {
          grid = ParamGrid::parse_gamma(eg_grid);
        } else if (eg_family == "sigmoid") {
          grid = ParamGrid::sigmoid_default();
        } else {
          throw InputError("unknown family: " + eg_family);
        }
        const ParametricEstimate est = estimate_parametric(h, grid, NoiseMatrix(eg_sigma, h.top()), eg_solver);
        Json j = envelope("estimate-gamma");
        j["spec"] = {{"input", eg_input}, {"family", eg_family}, {"grid", eg_family == "gamma" ? eg_grid : "default"},
                     {"sigma", eg_sigma}, {"solver", solver_json(eg_solver)}};
        j["estimate"] = format_param(grid.family, est.best_param);
        j["param"] = est.best_param;
        j["objective"] = est.best_objective;
        Json land = Json::array();
        for (const LandscapePoint& p : est.landscape) land.push_back({{"param", p.param}, {"objective", p.objective}});
        j["landscape"] = std::move(land);
        if (!eg_landscape.empty()) {
          std::ofstream csv(eg_landscape);
          if (!csv) throw IoError("cannot write " + eg_landscape);
          csv << "param,objective\n";
          char buf[96];
          for (const LandscapePoint& p : est.landscape) {
            std::snprintf(buf, sizeof buf, "%s,%.17g\n", format_param(grid.family, p.param).c_str(), p.objective);
            csv << buf;
          }
        }
        std::printf("estimate %s  objective %.6g\n", format_param(grid.family, est.best_param).c_str(),
                    est.best_objective);
        finish(std::move(j), common, start);
      };
    });
  }

  // estimate-curve
  std::string ec_input, ec_out, ec_trace;
  double ec_sigma = 0.0;
  NonparamConfig ec_cfg;
  {
    CLI::App* cmd = app.add_subcommand("estimate-curve", "Free-form monotone curve estimate");
    cmd->add_option("--input", ec_input)->required();
    cmd->add_option("--out", ec_out, "Write the curve as JSON");
    cmd->add_option("--sigma", ec_sigma)->capture_default_str();
    cmd->add_option("--xi", ec_cfg.xi, "Coupling weight")->capture_default_str();
    cmd->add_option("--alt-max", ec_cfg.alt_max, "Alternations")->capture_default_str();
    cmd->add_option("--trace", ec_trace, "Write alternation,objective CSV");
    add_solver_options(cmd, ec_cfg.solver);
    add_common(cmd, common);
    cmd->callback([&] {
      action = [&] {
        const GrayImage img = read_image(ec_input);
        const PixelHistogram h = from_pixels(img.pixels(), img.bits());
        const NonparamEstimate est = estimate_nonparametric(h, NoiseMatrix(ec_sigma, h.top()), ec_cfg);
        if (!ec_out.empty()) write_json(curve_to_json(est.curve), ec_out);
        if (!ec_trace.empty()) {
          std::ofstream csv(ec_trace);
          if (!csv) throw IoError("cannot write " + ec_trace);
          csv << "alternation,objective\n";
          char buf[64];
          for (std::size_t k = 0; k < est.objective_trace.size(); ++k) {
            std::snprintf(buf, sizeof buf, "%zu,%.17g\n", k, est.objective_trace[k]);
            csv << buf;
          }
        }
        Json j = envelope("estimate-curve");
        j["spec"] = {{"input", ec_input}, {"sigma", ec_sigma}, {"xi", ec_cfg.xi}, {"alt_max", ec_cfg.alt_max},
                     {"solver", solver_json(ec_cfg.solver)}};
        j["curve"] = curve_to_json(est.curve);
        j["h_star"] = histogram_to_json(est.h_star);
        j["objective_trace"] = est.objective_trace;
        j["alternations"] = est.alternations;
        std::printf("curve estimated in %d alternations, final objective %.6g\n", est.alternations,
                    est.objective_trace.back());
        finish(std::move(j), common, start);
      };
    });
  }

  // recover-hist
  std::string rh_input, rh_curve, rh_out;
  double rh_sigma = 0.0;
  SolverConfig rh_solver;
  {
    CLI::App* cmd = app.add_subcommand("recover-hist", "Recover the pre-enhancement histogram for a known curve");
    cmd->add_option("--input", rh_input)->required();
    cmd->add_option("--curve", rh_curve, "Curve JSON file or spec such as gamma:1.4")->required();
    cmd->add_option("--sigma", rh_sigma)->capture_default_str();
    cmd->add_option("--out", rh_out, "Write the recovered histogram as JSON");
    add_solver_options(cmd, rh_solver);
    add_common(cmd, common);
    cmd->callback([&] {
      action = [&] {
        const GrayImage img = read_image(rh_input);
        const PixelHistogram h = from_pixels(img.pixels(), img.bits());
        const TransformCurve curve = load_curve(rh_curve, h.top());
        const SolverReport rep = recover_histogram(h, curve, NoiseMatrix(rh_sigma, h.top()), rh_solver);
        if (!rh_out.empty()) write_json(histogram_to_json(rep.h_star), rh_out);
        Json j = envelope("recover-hist");
        j["spec"] = {{"input", rh_input}, {"curve", rh_curve}, {"sigma", rh_sigma}, {"solver", solver_json(rh_solver)}};
        j["report"] = report_to_json(rep);
        std::printf("objective %.6g  W1 %.6g  empty bins %d  iterations %d\n", rep.objective, rep.w1_term,
                    rep.empty_bins, rep.iterations);
        finish(std::move(j), common, start);
      };
    });
  }

  // localize
  std::string lo_input, lo_mask, lo_truth;
  EnergyParams lo_params;
  {
    CLI::App* cmd = app.add_subcommand("localize", "Locate regions enhanced with a different curve");
    cmd->add_option("--input", lo_input)->required();
    cmd->add_option("--block", lo_params.block_size)->capture_default_str();
    cmd->add_option("--stride", lo_params.stride)->capture_default_str();
    cmd->add_option("--beta", lo_params.beta, "Pairwise weight")->capture_default_str();
    cmd->add_option("--sigma", lo_params.sigma)->capture_default_str();
    cmd->add_option("--lambda", lo_params.lambda)->capture_default_str();
    cmd->add_option("--em-max", lo_params.em_max, "Alternations")->capture_default_str();
    cmd->add_option("--mask", lo_mask, "Write the pixel mask (PGM, 0/255)");
    cmd->add_option("--truth", lo_truth, "Ground-truth mask for DE/FP");
    cmd->add_option("--report,--json", common.json_path, "Write the JSON report here");
    cmd->add_flag("--timing", common.timing, "Include wall time in the report");
    cmd->callback([&] {
      action = [&] {
        const GrayImage img = read_image(lo_input);
        const Detection det = detect_regions(img, lo_params);
        if (!lo_mask.empty()) write_mask(det.field.pixel_mask, img.width(), img.height(), lo_mask);
        Json j = envelope("localize");
        j["spec"] = {{"input", lo_input},         {"block", lo_params.block_size}, {"stride", lo_params.stride},
                     {"beta", lo_params.beta},     {"sigma", lo_params.sigma},      {"lambda", lo_params.lambda},
                     {"em_max", lo_params.em_max}};
        j["blocks"] = {{"cols", det.field.cols}, {"rows", det.field.rows}};
        j["labels"] = det.field.labels;
        j["energy_trace"] = det.diagnostics.energy_trace;
        j["alternations"] = det.diagnostics.alternations;
        j["degenerate"] = det.diagnostics.degenerate;
        j["curve0"] = curve_to_json(det.curve0);
        j["curve1"] = curve_to_json(det.curve1);
        std::printf("%zu blocks, %d alternations%s\n", det.diagnostics.blocks, det.diagnostics.alternations,
                    det.diagnostics.degenerate ? ", degenerate (single label)" : "");
        if (!lo_truth.empty()) {
          int w = 0, h = 0;
          const std::vector<std::uint8_t> truth = read_mask(lo_truth, w, h);
          if (w != img.width() || h != img.height()) throw InputError("truth mask size differs from the image");
          const DetectionScore s = de_fp_metrics(det.field.pixel_mask, truth);
          j["de"] = s.de;
          j["fp"] = s.fp;
          j["flipped"] = s.flipped;
          std::printf("DE %.4f  FP %.4f%s\n", s.de, s.fp, s.flipped ? " (labels flipped)" : "");
        }
        finish(std::move(j), common, start);
      };
    });
  }

  // eval-gamma
  GammaEvalSpec eg_spec;
  std::string eg_gammas = "0.4,0.7,1.3,1.8,2.2", eg_sigmas = "0.01", eg_eval_grid = "0.1:0.01:2.5";
  {
    CLI::App* cmd = app.add_subcommand("eval-gamma", "Gamma-recovery accuracy on synthetic images");
    cmd->add_option("--images", eg_spec.images)->capture_default_str();
    cmd->add_option("--side", eg_spec.side, "Image side length")->capture_default_str();
    cmd->add_option("--bits", eg_spec.bits)->capture_default_str();
    cmd->add_option("--gammas", eg_gammas)->capture_default_str();
    cmd->add_option("--sigmas", eg_sigmas, "Noise levels, also used for probing")->capture_default_str();
    cmd->add_option("--grid", eg_eval_grid)->capture_default_str();
    cmd->add_option("--eps", eg_spec.eps)->capture_default_str();
    cmd->add_option("--seed", eg_spec.seed)->capture_default_str();
    add_solver_options(cmd, eg_spec.solver);
    add_common(cmd, common);
    cmd->callback([&] {
      action = [&] {
        eg_spec.gammas = parse_list(eg_gammas);
        eg_spec.sigmas = parse_list(eg_sigmas);
        eg_spec.grid = ParamGrid::parse_gamma(eg_eval_grid);
        const GammaEvalResult res = run_gamma_eval(eg_spec);
        Json j = envelope("eval-gamma");
        j["spec"] = {{"images", eg_spec.images}, {"side", eg_spec.side}, {"bits", eg_spec.bits},
                     {"gammas", eg_spec.gammas}, {"sigmas", eg_spec.sigmas}, {"grid", eg_eval_grid},
                     {"eps", eg_spec.eps},       {"seed", eg_spec.seed},     {"solver", solver_json(eg_spec.solver)}};
        Json cases = Json::array();
        for (const GammaCase& c : res.cases) {
          cases.push_back({{"image", c.image}, {"sigma", c.sigma}, {"truth", c.truth}, {"estimate", c.estimate},
                           {"objective", c.objective}});
        }
        j["cases"] = std::move(cases);
        Json acc = Json::array();
        for (std::size_t s = 0; s < eg_spec.sigmas.size(); ++s) {
          acc.push_back({{"sigma", eg_spec.sigmas[s]}, {"accuracy", res.accuracy[s]}});
          std::printf("sigma %g: A_%g = %.3f\n", eg_spec.sigmas[s], eg_spec.eps, res.accuracy[s]);
        }
        j["accuracy"] = std::move(acc);
        finish(std::move(j), common, start);
      };
    });
  }

  // eval-curve
  CurveEvalSpec ec_spec;
  std::string ec_kind = "spline";
  {
    CLI::App* cmd = app.add_subcommand("eval-curve", "Free-form curve accuracy on synthetic images");
    cmd->add_option("--images", ec_spec.images)->capture_default_str();
    cmd->add_option("--side", ec_spec.side)->capture_default_str();
    cmd->add_option("--bits", ec_spec.bits)->capture_default_str();
    cmd->add_option("--kind", ec_kind, "spline | histeq")->capture_default_str();
    cmd->add_option("--sigma", ec_spec.sigma)->capture_default_str();
    cmd->add_option("--eps", ec_spec.eps)->capture_default_str();
    cmd->add_option("--alt-max", ec_spec.config.alt_max)->capture_default_str();
    cmd->add_option("--seed", ec_spec.seed)->capture_default_str();
    add_common(cmd, common);
    cmd->callback([&] {
      action = [&] {
        if (ec_kind == "spline") {
          ec_spec.kind = CurveCaseKind::kSpline;
        } else if (ec_kind == "histeq") {
          ec_spec.kind = CurveCaseKind::kHistEq;
        } else {
          throw InputError("unknown kind: " + ec_kind);
        }
        const CurveEvalResult res = run_curve_eval(ec_spec);
        Json j = envelope("eval-curve");
        j["spec"] = {{"images", ec_spec.images}, {"side", ec_spec.side}, {"bits", ec_spec.bits}, {"kind", ec_kind},
                     {"sigma", ec_spec.sigma},   {"eps", ec_spec.eps},   {"alt_max", ec_spec.config.alt_max},
                     {"seed", ec_spec.seed}};
        Json cases = Json::array();
        for (const CurveCase& c : res.cases) {
          cases.push_back({{"image", c.image}, {"curve", c.curve.to_string()}, {"relative_error", c.relative_error},
                           {"alternations", c.alternations}});
        }
        j["cases"] = std::move(cases);
        j["accuracy"] = res.accuracy;
        std::printf("%s: A_hat_%g = %.3f over %d images\n", ec_kind.c_str(), ec_spec.eps, res.accuracy,
                    ec_spec.images);
        finish(std::move(j), common, start);
      };
    });
  }

  // eval-localize
  LocalizeEvalSpec el_spec;
  {
    CLI::App* cmd = app.add_subcommand("eval-localize", "Localization DE/FP on synthetic composites");
    cmd->add_option("--images", el_spec.images)->capture_default_str();
    cmd->add_option("--side", el_spec.side)->capture_default_str();
    cmd->add_option("--gamma0", el_spec.gamma0)->capture_default_str();
    cmd->add_option("--gamma1", el_spec.gamma1)->capture_default_str();
    cmd->add_option("--min-area", el_spec.min_area)->capture_default_str();
    cmd->add_option("--max-area", el_spec.max_area)->capture_default_str();
    cmd->add_option("--noise", el_spec.sigma, "Noise added to the composites")->capture_default_str();
    cmd->add_option("--block", el_spec.params.block_size)->capture_default_str();
    cmd->add_option("--stride", el_spec.params.stride)->capture_default_str();
    cmd->add_option("--beta", el_spec.params.beta)->capture_default_str();
    cmd->add_option("--sigma", el_spec.params.sigma, "Probing noise std")->capture_default_str();
    cmd->add_option("--em-max", el_spec.params.em_max)->capture_default_str();
    cmd->add_option("--seed", el_spec.seed)->capture_default_str();
    add_common(cmd, common);
    cmd->callback([&] {
      action = [&] {
        const LocalizeEvalResult res = run_localize_eval(el_spec);
        Json j = envelope("eval-localize");
        j["spec"] = {{"images", el_spec.images},
                     {"side", el_spec.side},
                     {"gamma0", el_spec.gamma0},
                     {"gamma1", el_spec.gamma1},
                     {"area", {el_spec.min_area, el_spec.max_area}},
                     {"noise", el_spec.sigma},
                     {"block", el_spec.params.block_size},
                     {"stride", el_spec.params.stride},
                     {"beta", el_spec.params.beta},
                     {"sigma", el_spec.params.sigma},
                     {"em_max", el_spec.params.em_max},
                     {"seed", el_spec.seed}};
        Json cases = Json::array();
        for (const LocalizeCase& c : res.cases) {
          cases.push_back({{"image", c.image},
                           {"region", rect_json(c.region)},
                           {"de", c.score.de},
                           {"fp", c.score.fp},
                           {"flipped", c.score.flipped},
                           {"alternations", c.diagnostics.alternations},
                           {"degenerate", c.diagnostics.degenerate},
                           {"energy_trace", c.diagnostics.energy_trace}});
        }
        j["cases"] = std::move(cases);
        j["mean_de"] = res.mean_de;
        j["mean_fp"] = res.mean_fp;
        std::printf("mean DE %.4f  mean FP %.4f over %d composites\n", res.mean_de, res.mean_fp, el_spec.images);
        finish(std::move(j), common, start);
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }
  action();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return kExitInput;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
