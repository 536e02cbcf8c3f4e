// bevkit command line: mask extraction, fusion, rasterization, evaluation,
// synthetic scenes and the pooling benchmark.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bevkit/bezier.hpp"
#include "bevkit/error.hpp"
#include "bevkit/mask_decoder.hpp"
#include "bevkit/metrics.hpp"
#include "bevkit/rasterizer.hpp"
#include "bevkit/scene_io.hpp"
#include "bevkit/synthetic.hpp"
#include "bevkit/tensor_io.hpp"
#include "bevkit/voxel_pool.hpp"

namespace fs = std::filesystem;
using namespace bevkit;

namespace {

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text << "\n";
  } else {
    write_file_atomic(out_path, text + "\n");
  }
}

struct ExtractArgs {
  std::string mask;
  std::string direction;
  double threshold = 0.95;
  int degree = 3;
  std::size_t points = 11;
  double confidence = 1.0;
  std::string out;
};

int run_extract(const ExtractArgs& a) {
  const auto dir = parse_quad_direction(a.direction);
  if (!dir) raise(ErrorKind::kConfiguration, "unknown direction '" + a.direction + "' (up, down, left, right)");
  if (!(a.confidence >= 0.0 && a.confidence <= 1.0)) raise(ErrorKind::kConfiguration, "--confidence outside [0, 1]");
  FlowAwareMask mask{prob_map_from_tensor(load_tensor(a.mask)), *dir, a.confidence};
  DecoderConfig cfg;
  cfg.threshold = a.threshold;
  cfg.poly_degree = a.degree;
  cfg.n_out = a.points;
  emit(centerline_to_json(decode_mask(mask, cfg)), a.out);
  return 0;
}

struct FuseArgs {
  std::string mask_line;
  std::string bezier;
  std::size_t points = kDefaultFusionPoints;
  std::string policy = "mask";
  std::string out;
};

int run_fuse(const FuseArgs& a) {
  static const std::map<std::string, FusedConfidence> policies{
      {"mask", FusedConfidence::kMask}, {"max", FusedConfidence::kMax}, {"mean", FusedConfidence::kMean}};
  const Centerline mask_line = centerline_from_json(read_text_file(a.mask_line));
  const BezierCurve curve = bezier_from_json(read_text_file(a.bezier));
  const Centerline bez = bezier_sample(curve, a.points);
  emit(centerline_to_json(fuse_instance(mask_line, bez, a.points, policies.at(a.policy))), a.out);
  return 0;
}

struct RasterizeArgs {
  std::string line;
  std::string out;
  int width = kDefaultMaskWidth;
};

int run_rasterize(const RasterizeArgs& a) {
  const Centerline line = centerline_from_json(read_text_file(a.line));
  const BevGridSpec grid;
  const FlowAwareMask mask = make_flow_aware_mask(line.polyline, grid, a.width);
  save_tensor(a.out, to_tensor(mask.prob));
  nlohmann::ordered_json info;
  info["direction"] = std::string(to_string(mask.direction));
  info["rows"] = grid.rows;
  info["cols"] = grid.cols;
  info["nonzero_cells"] = mask.prob.nonzero_count();
  std::cout << info.dump(2) << "\n";
  if (mask.prob.nonzero_count() == 0) std::cerr << "bevkit: warning: centerline lies outside the grid\n";
  return 0;
}

struct EvaluateArgs {
  std::string gt;
  std::string pred;
  std::optional<double> score_threshold;
  bool manipulate = false;
  std::string report;
};

int run_evaluate(const EvaluateArgs& a) {
  const auto gt_files = list_scene_files(a.gt);
  if (gt_files.empty()) raise(ErrorKind::kSchemaViolation, "no scene files in " + a.gt);
  std::vector<SceneAnnotation> scenes;
  scenes.reserve(gt_files.size());
  for (const auto& gt_path : gt_files) {
    const fs::path pred_path = fs::path(a.pred) / gt_path.filename();
    if (!fs::exists(pred_path)) raise(ErrorKind::kIo, "no prediction file " + pred_path.string());
    SceneAnnotation scene = load_scene(gt_path);
    if (fs::equivalent(gt_path, pred_path)) {
      scenes.push_back(std::move(scene));
      continue;
    }
    const SceneAnnotation pred = load_scene(pred_path);
    if (pred.frame_id != scene.frame_id) {
      raise(ErrorKind::kSchemaViolation, pred_path.string() + ": frame_id '" + pred.frame_id + "' does not match '" +
                                             scene.frame_id + "'");
    }
    scene.pred_centerlines = pred.pred_centerlines;
    scene.pred_topology_ll = pred.pred_topology_ll;
    scene.pred_traffic_elements = pred.pred_traffic_elements;
    scene.pred_topology_lt = pred.pred_topology_lt;
    scenes.push_back(std::move(scene));
  }
  EvalOptions opts;
  opts.score_threshold = a.score_threshold;
  opts.manipulate = a.manipulate;
  const EvalReport report = evaluate(scenes, opts);
  std::cout << report.to_json() << "\n";
  std::cerr << report.to_table();
  if (!a.report.empty()) write_file_atomic(a.report, report.to_json() + "\n");
  return 0;
}

struct SimulateArgs {
  std::uint64_t seed = 0;
  int lanes = 8;
  int frames = 1;
  double density = 0.5;
  std::string out;
  std::string perturb;
};

int run_simulate(const SimulateArgs& a) {
  if (a.lanes < 1) raise(ErrorKind::kConfiguration, "--lanes must be >= 1");
  if (a.frames < 1) raise(ErrorKind::kConfiguration, "--frames must be >= 1");
  if (!(a.density >= 0.0 && a.density <= 1.0)) raise(ErrorKind::kConfiguration, "--density outside [0, 1]");
  std::optional<PerturbConfig> cfg;
  if (!a.perturb.empty()) cfg = perturb_config_from_json(read_text_file(a.perturb));
  fs::create_directories(a.out);
  for (int k = 0; k < a.frames; ++k) {
    SceneAnnotation scene = generate_synthetic_scene(a.seed + static_cast<std::uint64_t>(k), a.lanes, a.density);
    if (cfg) scene = perturb_predictions(scene, *cfg);
    save_scene(fs::path(a.out) / (scene.frame_id + ".json"), scene);
  }
  std::cerr << "bevkit: wrote " << a.frames << " scene file(s) to " << a.out << "\n";
  return 0;
}

struct PoolBenchArgs {
  std::vector<std::string> configs;
  std::size_t points = 1'000'000;
  int channels = 16;
  int repeats = 3;
  std::uint64_t seed = 7;
};

int run_pool_bench(const PoolBenchArgs& a) {
  std::vector<HeightBinConfig> configs;
  for (const auto& c : a.configs) configs.push_back(parse_height_bin_config(c));
  if (configs.empty()) configs = ablation_height_bin_configs();
  BenchOptions opts;
  opts.points = a.points;
  opts.channels = a.channels;
  opts.repeats = a.repeats;
  opts.seed = a.seed;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : bench_pool(configs, opts)) {
    nlohmann::ordered_json row;
    row["config"] = r.config;
    row["impl"] = r.impl;
    row["points"] = r.points;
    row["seconds"] = r.seconds;
    row["points_per_sec"] = r.points_per_sec;
    row["hash"] = r.hash;
    rows.push_back(row);
  }
  std::cout << rows.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BEV lane topology toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "bevkit 0.1.0");
  int (*runner)() = nullptr;
  static ExtractArgs extract;
  static FuseArgs fuse;
  static RasterizeArgs rasterize;
  static EvaluateArgs evaluate_args;
  static SimulateArgs simulate;
  static PoolBenchArgs bench;

  auto* ex = app.add_subcommand("extract", "Decode a flow-aware mask tensor into a centerline");
  ex->add_option("--mask", extract.mask, "Mask tensor file [rows, cols]")->required()->check(CLI::ExistingFile);
  ex->add_option("--direction", extract.direction, "Quad-direction label: up, down, left, right")->required();
  ex->add_option("--threshold", extract.threshold, "Decoder probability threshold")->capture_default_str();
  ex->add_option("--degree", extract.degree, "Refinement polynomial degree")->capture_default_str();
  ex->add_option("--points", extract.points, "Output point count")->capture_default_str();
  ex->add_option("--confidence", extract.confidence, "Confidence attached to the centerline")->capture_default_str();
  ex->add_option("-o,--out", extract.out, "Write JSON here instead of stdout");
  ex->callback([&] { runner = [] { return run_extract(extract); }; });

  auto* fu = app.add_subcommand("fuse", "Fuse a mask centerline with a Bezier head output");
  fu->add_option("--mask-line", fuse.mask_line, "Centerline JSON")->required()->check(CLI::ExistingFile);
  fu->add_option("--bezier", fuse.bezier, "Bezier JSON with four control points")->required()->check(CLI::ExistingFile);
  fu->add_option("--points", fuse.points, "Resampling point count")->capture_default_str();
  fu->add_option("--confidence-policy", fuse.policy, "Fused confidence: mask, max, mean")
      ->capture_default_str()
      ->check(CLI::IsMember({"mask", "max", "mean"}));
  fu->add_option("-o,--out", fuse.out, "Write JSON here instead of stdout");
  fu->callback([&] { runner = [] { return run_fuse(fuse); }; });

  auto* ra = app.add_subcommand("rasterize", "Rasterize a centerline into a mask tensor on the default grid");
  ra->add_option("--line", rasterize.line, "Centerline JSON")->required()->check(CLI::ExistingFile);
  ra->add_option("--out", rasterize.out, "Output tensor file")->required();
  ra->add_option("--width", rasterize.width, "Mask width in cells")->capture_default_str();
  ra->callback([&] { runner = [] { return run_rasterize(rasterize); }; });

  auto* ev = app.add_subcommand("evaluate", "Score predictions against ground truth scene files");
  ev->add_option("--gt", evaluate_args.gt, "Directory with ground truth scene files")->required()->check(CLI::ExistingDirectory);
  ev->add_option("--pred", evaluate_args.pred, "Directory with prediction scene files of the same names")
      ->required()
      ->check(CLI::ExistingDirectory);
  ev->add_option("--score-threshold", evaluate_args.score_threshold, "Drop relations with score <= this value");
  ev->add_flag("--manipulate", evaluate_args.manipulate, "Add 1 to every relation score above 0.05 first");
  ev->add_option("--report", evaluate_args.report, "Also write the JSON report to this file");
  ev->callback([&] { runner = [] { return run_evaluate(evaluate_args); }; });

  auto* si = app.add_subcommand("simulate", "Write synthetic scene files");
  si->add_option("--seed", simulate.seed, "Seed of the first frame")->required();
  si->add_option("--lanes", simulate.lanes, "Lanes per frame")->required();
  si->add_option("--out", simulate.out, "Output directory")->required();
  si->add_option("--frames", simulate.frames, "Frame count; frame k uses seed + k")->capture_default_str();
  si->add_option("--density", simulate.density, "Topology density in [0, 1]")->capture_default_str();
  si->add_option("--perturb", simulate.perturb, "Perturbation config JSON")->check(CLI::ExistingFile);
  si->callback([&] { runner = [] { return run_simulate(simulate); }; });

  auto* pb = app.add_subcommand("pool-bench", "Time naive and sort-based voxel pooling");
  pb->add_option("--config", bench.configs, "Height-bin config such as \"(-10,10,1)\"; repeatable, default all five");
  pb->add_option("--points", bench.points, "Lifted point count")->capture_default_str();
  pb->add_option("--channels", bench.channels, "Feature channels per point")->capture_default_str();
  pb->add_option("--repeats", bench.repeats, "Timing repeats (best of)")->capture_default_str();
  pb->add_option("--seed", bench.seed, "Point generator seed")->capture_default_str();
  pb->callback([&] { runner = [] { return run_pool_bench(bench); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    return runner ? runner() : 2;
  } catch (const Error& e) {
    std::cerr << "bevkit: error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "bevkit: error: " << e.what() << "\n";
    return 1;
  }
}
