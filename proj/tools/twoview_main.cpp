#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "twoview/bench.hpp"
#include "twoview/rng.hpp"
#include "twoview/synth.hpp"

namespace {

using namespace twoview;

ImageDims parse_dims(const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos)
    throw CLI::ValidationError("dims", "expected HxW, e.g. 480x640");
  try {
    return {std::stoi(text.substr(0, x)), std::stoi(text.substr(x + 1))};
  } catch (const std::logic_error&) {
    throw CLI::ValidationError("dims", "expected HxW, e.g. 480x640");
  }
}

RigKind parse_rig(const std::string& name) {
  if (name == "random") return RigKind::Random;
  if (name == "forward") return RigKind::ShortBaselineForward;
  if (name == "wide") return RigKind::WideBaseline;
  throw CLI::ValidationError("rig", "expected random|forward|wide");
}

int run_synth(const std::string& out_dir, int pairs, int points, double noise,
              double outlier_rate, const std::string& rig,
              const std::string& dims_text, std::uint64_t seed,
              bool with_descriptors) {
  const ImageDims dims = parse_dims(dims_text);
  const RigKind rig_kind = parse_rig(rig);
  std::filesystem::create_directories(out_dir + "/pairs");

  std::vector<ManifestEntry> manifest;
  for (int id = 0; id < pairs; ++id) {
    SceneConfig cfg;
    cfg.rig = rig_kind;
    cfg.n_points = points;
    cfg.noise_sigma = noise;
    cfg.outlier_rate = outlier_rate;
    cfg.dims = dims;
    cfg.seed = Rng::derive(seed, static_cast<std::uint64_t>(id));
    const SyntheticPair pair = generate_pair(cfg);

    const std::string stem = "pairs/pair_" + std::to_string(id);
    ManifestEntry entry;
    entry.pair_id = static_cast<std::uint64_t>(id);
    entry.dims1 = pair.dims1;
    entry.dims2 = pair.dims2;
    entry.fgt_file = stem + ".f.txt";
    save_fmatrix(out_dir + "/" + entry.fgt_file, pair.f_gt);

    if (with_descriptors) {
      PlantConfig plant;
      plant.seed = Rng::derive(cfg.seed, 0xDE5C);
      const PlantedKeypoints planted = plant_descriptors(pair, plant);
      entry.kp1_file = stem + ".kp1.txt";
      entry.desc1_file = stem + ".desc1.bin";
      entry.kp2_file = stem + ".kp2.txt";
      entry.desc2_file = stem + ".desc2.bin";
      save_keypoints(out_dir + "/" + entry.kp1_file,
                     out_dir + "/" + entry.desc1_file, planted.image1);
      save_keypoints(out_dir + "/" + entry.kp2_file,
                     out_dir + "/" + entry.desc2_file, planted.image2);
    } else {
      entry.corr_file = stem + ".corr.txt";
      save_correspondences(out_dir + "/" + entry.corr_file, pair.corrs);
    }
    manifest.push_back(std::move(entry));
  }
  save_manifest(out_dir, manifest);
  std::cout << "wrote " << pairs << " pairs to " << out_dir << "\n";
  return 0;
}

int run_select_pairs(const std::string& poses_path, const std::string& format,
                     const std::vector<double>& intrinsics,
                     const std::string& matches_dir, bool wide,
                     const PairSelectionConfig& cfg,
                     const std::string& out_path) {
  std::vector<PoseRecord> poses;
  if (format == "tum")
    poses = load_tum_trajectory(poses_path);
  else if (format == "kitti")
    poses = load_kitti_poses(poses_path);
  else
    throw CLI::ValidationError("pose-format", "expected tum|kitti");

  CameraIntrinsics k;
  k.fx = intrinsics[0];
  k.fy = intrinsics[1];
  k.cx = intrinsics[2];
  k.cy = intrinsics[3];
  if (intrinsics.size() > 4) k.skew = intrinsics[4];

  const MatchProvider provider =
      [&](std::size_t i, std::size_t j) -> std::optional<MatchSet> {
    const std::string path = matches_dir + "/pair_" + std::to_string(i) +
                             "_" + std::to_string(j) + ".txt";
    if (!std::filesystem::exists(path)) return std::nullopt;
    return load_correspondences(path);
  };

  PairSelectionConfig selection = cfg;
  selection.short_baseline = !wide;
  const std::vector<PairId> selected =
      select_pairs(poses, k, provider, selection);

  std::ofstream out(out_path);
  if (!out) {
    std::cerr << "cannot write " << out_path << "\n";
    return 1;
  }
  for (const PairId& p : selected) out << p.i << ' ' << p.j << '\n';
  std::cout << "selected " << selected.size() << " pairs\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-view matching and fundamental-matrix benchmark"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  std::string synth_out;
  int synth_pairs = 20, synth_points = 100;
  double synth_noise = 0.0, synth_outliers = 0.0;
  std::string synth_rig = "random", synth_dims = "480x640";
  std::uint64_t synth_seed = 0;
  bool synth_desc = false;
  synth->add_option("--out", synth_out, "output dataset directory")
      ->required();
  synth->add_option("--pairs", synth_pairs, "number of pairs");
  synth->add_option("--points", synth_points, "correspondences per pair");
  synth->add_option("--noise", synth_noise, "pixel noise sigma");
  synth->add_option("--outlier-rate", synth_outliers, "outlier fraction");
  synth->add_option("--rig", synth_rig, "random|forward|wide");
  synth->add_option("--dims", synth_dims, "image size HxW");
  synth->add_option("--seed", synth_seed, "random seed");
  synth->add_flag("--descriptors", synth_desc,
                  "emit keypoints+descriptors instead of matches");

  // select-pairs
  auto* sel = app.add_subcommand("select-pairs", "matchable-pair search");
  std::string sel_poses, sel_format = "tum", sel_matches, sel_out;
  std::vector<double> sel_intrinsics;
  bool sel_wide = false;
  PairSelectionConfig sel_cfg;
  std::uint64_t sel_seed = 0;
  sel->add_option("--poses", sel_poses, "pose file")->required();
  sel->add_option("--pose-format", sel_format, "tum|kitti");
  sel->add_option("--intrinsics", sel_intrinsics,
                  "fx fy cx cy [skew]")
      ->expected(4, 5)
      ->required();
  sel->add_option("--matches-dir", sel_matches,
                  "directory of pair_<i>_<j>.txt match files")
      ->required();
  sel->add_flag("--wide", sel_wide, "consider all pairs (wide baseline)");
  sel->add_option("--max-gap", sel_cfg.max_time_gap,
                  "max frame time gap, seconds");
  sel->add_option("--min-inliers", sel_cfg.min_inliers,
                  "keep pairs with more inliers than this");
  sel->add_option("--inlier-px", sel_cfg.inlier_px,
                  "ground-truth inlier distance");
  sel->add_option("--sample-count", sel_cfg.sample_count,
                  "pairs to sample");
  sel->add_option("--seed", sel_seed, "sampling seed");
  sel->add_option("--out", sel_out, "output pair list")->required();

  // run
  auto* run = app.add_subcommand("run", "run the benchmark pipeline");
  std::string run_config, run_out, run_estimator;
  std::uint64_t run_seed = 0;
  double run_ratio = -1.0;
  bool run_seed_set = false;
  run->add_option("--config", run_config, "pipeline config file")
      ->required();
  run->add_option("--out", run_out, "output directory (overrides config)");
  run->add_option("--estimator", run_estimator,
                  "single estimator (overrides config)");
  run->add_option("--ratio", run_ratio, "ratio threshold (overrides config)");
  run->add_option("--seed", run_seed, "seed (overrides config)")
      ->each([&](const std::string&) { run_seed_set = true; });

  // sgd
  auto* sgd_cmd = app.add_subcommand("sgd", "compare two F-matrix files");
  std::string sgd_f1, sgd_f2, sgd_dims1 = "480x640", sgd_dims2;
  int sgd_samples = 1000;
  std::uint64_t sgd_seed = 0;
  sgd_cmd->add_option("--f1", sgd_f1, "first matrix file")->required();
  sgd_cmd->add_option("--f2", sgd_f2, "second matrix file")->required();
  sgd_cmd->add_option("--dims1", sgd_dims1, "image 1 size HxW");
  sgd_cmd->add_option("--dims2", sgd_dims2, "image 2 size HxW (default dims1)");
  sgd_cmd->add_option("--samples", sgd_samples, "samples per half");
  sgd_cmd->add_option("--seed", sgd_seed, "sampling seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth)
      return run_synth(synth_out, synth_pairs, synth_points, synth_noise,
                       synth_outliers, synth_rig, synth_dims, synth_seed,
                       synth_desc);
    if (*sel) {
      sel_cfg.seed = sel_seed;
      return run_select_pairs(sel_poses, sel_format, sel_intrinsics,
                              sel_matches, sel_wide, sel_cfg, sel_out);
    }
    if (*run) {
      PipelineConfig cfg = load_pipeline_config(run_config);
      if (!run_out.empty()) cfg.out_dir = run_out;
      if (!run_estimator.empty())
        cfg.estimators = {parse_estimator(run_estimator)};
      if (run_ratio >= 0.0) cfg.ratio_threshold = run_ratio;
      if (run_seed_set) cfg.seed = run_seed;
      const BenchmarkReport report = run_benchmark(cfg);
      std::cout << report.summary_csv;
      if (!cfg.out_dir.empty())
        std::cout << "reports written to " << cfg.out_dir << "\n";
      return 0;
    }
    if (*sgd_cmd) {
      const FundamentalMatrix f1 = load_fmatrix(sgd_f1);
      const FundamentalMatrix f2 = load_fmatrix(sgd_f2);
      SgdConfig cfg;
      cfg.n_samples = sgd_samples;
      cfg.seed = sgd_seed;
      cfg.dims1 = parse_dims(sgd_dims1);
      cfg.dims2 = sgd_dims2.empty() ? cfg.dims1 : parse_dims(sgd_dims2);
      std::printf("sgd_px %.17g\n", compute_sgd(f1, f2, cfg));
      std::printf("nsgd %.17g\n", compute_nsgd(f1, f2, cfg));
      return 0;
    }
  } catch (const twoview::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
