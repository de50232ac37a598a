// Acceptance suite: one pass/fail line per criterion, nonzero exit on
// any failure. Heavier sweeps run through the same work pool as the
// benchmark harness (TWOVIEW_THREADS).
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "twoview/bench.hpp"
#include "twoview/metrics.hpp"
#include "twoview/rng.hpp"
#include "twoview/robust.hpp"
#include "twoview/solvers.hpp"
#include "twoview/synth.hpp"

using namespace twoview;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void report(int id, const std::string& name, bool passed,
            const std::string& detail) {
  std::printf("[%s] criterion %2d: %s (%s)\n", passed ? "PASS" : "FAIL", id,
              name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!passed) ++g_failures;
}

SyntheticPair make_scene(double outlier_rate, double sigma,
                         std::uint64_t seed, int n = 100) {
  SceneConfig cfg;
  cfg.rig = RigKind::ShortBaselineForward;
  cfg.n_points = n;
  cfg.noise_sigma = sigma;
  cfg.outlier_rate = outlier_rate;
  cfg.seed = seed;
  return generate_pair(cfg);
}

double nsgd_to_truth(const SyntheticPair& pair, const FundamentalMatrix& f) {
  SgdConfig cfg;
  cfg.dims1 = pair.dims1;
  cfg.dims2 = pair.dims2;
  cfg.seed = 0;
  return compute_nsgd(pair.f_gt, f, cfg);
}

/// %Recall of one estimator over a seeded synthetic sweep; failed
/// estimations score NSGD = 1.
double sweep_recall(EstimatorKind kind, double outlier_rate, double sigma,
                    int pairs, std::uint64_t seed_base) {
  std::vector<double> nsgds(pairs, 1.0);
  parallel_for(pairs, 0, [&](std::size_t p) {
    try {
      const SyntheticPair pair =
          make_scene(outlier_rate, sigma, seed_base + p);
      EstimatorConfig cfg;
      cfg.kind = kind;
      cfg.seed = Rng::derive(seed_base, p);
      const EstimationResult result = estimate(pair.corrs.correspondences, cfg);
      nsgds[p] = nsgd_to_truth(pair, result.f);
    } catch (const Error&) {
      nsgds[p] = 1.0;
    }
  });
  return recall(nsgds, 0.05);
}

std::string fmt(const char* spec, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), spec, a, b, c);
  return buf;
}

std::string temp_dir(const std::string& name) {
  const std::string dir =
      (std::filesystem::temp_directory_path() / name).string();
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// --- criteria -------------------------------------------------------------

void criterion_1_exact_recovery() {
  const auto start = Clock::now();
  const int pairs = 200;
  constexpr EstimatorKind kinds[] = {
      EstimatorKind::Ransac, EstimatorKind::Msac, EstimatorKind::LMedS,
      EstimatorKind::CoarseToFine};
  std::vector<double> worst(pairs, 0.0);
  parallel_for(pairs, 0, [&](std::size_t p) {
    try {
      const SyntheticPair pair = make_scene(0.0, 0.0, 100000 + p);
      for (std::size_t e = 0; e < 4; ++e) {
        EstimatorConfig cfg;
        cfg.kind = kinds[e];
        cfg.seed = Rng::derive(31337, p * 4 + e);
        const EstimationResult result =
            estimate(pair.corrs.correspondences, cfg);
        worst[p] = std::max(worst[p], nsgd_to_truth(pair, result.f));
      }
    } catch (const Error&) {
      worst[p] = 1.0;
    }
  });
  int good = 0;
  double overall = 0.0;
  for (double w : worst) {
    if (w < 1e-6) ++good;
    overall = std::max(overall, w);
  }
  const double elapsed = seconds_since(start);
  report(1, "exact recovery across all estimators",
         good == pairs && elapsed < 10.0,
         fmt("%.0f/200 pairs < 1e-6 NSGD, worst %.2e, %.1f s",
             static_cast<double>(good), overall, elapsed));
}

void criterion_2_sgd_correctness() {
  Rng rng(424242);
  bool zero_ok = true;
  for (int i = 0; i < 100; ++i) {
    Mat3 m{};
    for (double& x : m) x = rng.uniform(-1.0, 1.0);
    const FundamentalMatrix f = canonicalize(m);
    SgdConfig cfg;
    cfg.seed = i;
    if (compute_sgd(f, f, cfg) != 0.0) zero_ok = false;
  }

  bool oracle_ok = true;
  double worst_rel = 0.0;
  for (int i = 0; i < 20; ++i) {
    SceneConfig scfg;
    scfg.rig = RigKind::ShortBaselineForward;
    scfg.seed = 55000 + i;
    const SyntheticPair pair = generate_pair(scfg);
    Rng prng(880 + i);
    Mat3 other = pair.f_gt.m;
    for (double& x : other) x += 0.04 * prng.uniform(-1.0, 1.0);
    const FundamentalMatrix f_est = canonicalize(other);

    SgdConfig cfg;
    cfg.n_samples = 4000;
    cfg.seed = 77 + i;
    const double mc = compute_sgd(pair.f_gt, f_est, cfg);
    const double grid =
        oracles::sgd_dense_grid(pair.f_gt, f_est, cfg.dims1, cfg.dims2);
    const double rel = std::abs(mc - grid) / std::max(grid, 1e-12);
    worst_rel = std::max(worst_rel, rel);
    if (rel > 0.05) oracle_ok = false;
  }

  // Byte-exact determinism across runs and announced thread counts
  // (compute_sgd is single-threaded by contract: the env must not matter).
  const SyntheticPair pair = make_scene(0.0, 0.0, 3);
  Rng prng(5);
  Mat3 other = pair.f_gt.m;
  for (double& x : other) x += 0.02 * prng.uniform(-1.0, 1.0);
  const FundamentalMatrix f_est = canonicalize(other);
  SgdConfig cfg;
  cfg.seed = 12345;
  setenv("TWOVIEW_THREADS", "1", 1);
  const double run1 = compute_sgd(pair.f_gt, f_est, cfg);
  setenv("TWOVIEW_THREADS", "4", 1);
  const double run2 = compute_sgd(pair.f_gt, f_est, cfg);
  unsetenv("TWOVIEW_THREADS");
  const double run3 = compute_sgd(pair.f_gt, f_est, cfg);
  const bool det_ok = std::memcmp(&run1, &run2, sizeof run1) == 0 &&
                      std::memcmp(&run1, &run3, sizeof run1) == 0;

  report(2, "SGD zero identity, dense-grid oracle, determinism",
         zero_ok && oracle_ok && det_ok,
         fmt("exact zeros: %.0f, worst oracle gap %.1f%%, byte-stable: %.0f",
             zero_ok ? 1.0 : 0.0, 100.0 * worst_rel, det_ok ? 1.0 : 0.0));
}

void criterion_3_metric_constants() {
  const ImageDims tum{480, 640};
  const bool factor_ok = tum.diagonal_factor() == 1.0 / 800.0;
  const bool threshold_ok = 0.003 * tum.diagonal() == 2.4;
  const bool boundary_px_ok = nsgd(40.0, tum, tum) == 0.05;

  const std::vector<double> below{std::nextafter(0.05, 0.0)};
  const std::vector<double> above{std::nextafter(0.05, 1.0)};
  const std::vector<double> at{0.05};
  const bool recall_ok = recall(below, 0.05) == 100.0 &&
                         recall(above, 0.05) == 0.0 && recall(at, 0.05) == 0.0;

  report(3, "metric constants and strict recall boundary",
         factor_ok && threshold_ok && boundary_px_ok && recall_ok,
         fmt("f=1/800: %.0f, threshold 2.4 px: %.0f, boundary: %.0f",
             factor_ok ? 1.0 : 0.0, threshold_ok ? 1.0 : 0.0,
             recall_ok ? 1.0 : 0.0));
}

void criterion_4_estimator_ordering() {
  const auto start_hard = Clock::now();
  const double cf =
      sweep_recall(EstimatorKind::CoarseToFine, 0.7, 0.25, 500, 900000);
  const double lmeds_hard =
      sweep_recall(EstimatorKind::LMedS, 0.7, 0.25, 500, 900000);
  const double ransac_hard =
      sweep_recall(EstimatorKind::Ransac, 0.7, 0.25, 500, 900000);
  const double hard_elapsed = seconds_since(start_hard);

  const auto start_easy = Clock::now();
  const double lmeds_easy =
      sweep_recall(EstimatorKind::LMedS, 0.1, 0.25, 500, 910000);
  const double msac_easy =
      sweep_recall(EstimatorKind::Msac, 0.1, 0.25, 500, 910000);
  const double easy_elapsed = seconds_since(start_easy);

  const bool ordering_ok =
      cf > lmeds_hard + 10.0 && cf > ransac_hard && lmeds_easy >= msac_easy;
  const bool time_ok = hard_elapsed < 120.0 && easy_elapsed < 120.0;
  report(4, "estimator ordering at 70% and 10% outliers",
         ordering_ok && time_ok,
         fmt("70%%: cfrsc %.1f lmeds %.1f ransac %.1f; ", cf, lmeds_hard,
             ransac_hard) +
             fmt("10%%: lmeds %.1f msac %.1f; %.0f s / %.0f s", lmeds_easy,
                 msac_easy, hard_elapsed) +
             fmt("%.0f", easy_elapsed));
}

void criterion_5_breakdown() {
  const int pairs = 200;
  const double lmeds_40 =
      sweep_recall(EstimatorKind::LMedS, 0.4, 0.25, pairs, 920000);
  const double lmeds_60 =
      sweep_recall(EstimatorKind::LMedS, 0.6, 0.25, pairs, 921000);
  const double cf_40 =
      sweep_recall(EstimatorKind::CoarseToFine, 0.4, 0.25, pairs, 920000);
  const double cf_60 =
      sweep_recall(EstimatorKind::CoarseToFine, 0.6, 0.25, pairs, 921000);
  const bool ok = (lmeds_40 - lmeds_60 >= 30.0) && (cf_40 - cf_60 <= 10.0);
  report(5, "LMedS breakdown vs coarse-to-fine stability", ok,
         fmt("lmeds %.1f->%.1f, ", lmeds_40, lmeds_60) +
             fmt("cfrsc %.1f->%.1f", cf_40, cf_60));
}

void criterion_6_seven_point() {
  int produced = 0;
  int attempts = 0;
  bool constraints_ok = true;
  bool counts_ok = true;
  bool recovery_ok = true;
  while (produced < 1000 && attempts < 1500) {
    ++attempts;
    const SyntheticPair pair = make_scene(0.0, 0.0, 700000 + attempts, 12);
    const std::vector<Correspondence> tuple(
        pair.corrs.correspondences.begin(),
        pair.corrs.correspondences.begin() + 7);
    std::vector<FundamentalMatrix> solutions;
    try {
      solutions = solve_seven_point(tuple);
    } catch (const Error&) {
      continue;  // degenerate draw, not part of the 1000
    }
    ++produced;
    if (solutions.empty() || solutions.size() > 3) counts_ok = false;
    double best = 1e300;
    for (const FundamentalMatrix& f : solutions) {
      for (const Correspondence& c : tuple) {
        const Vec3 l = mat3_mul_vec(f.m, {c.p1.u, c.p1.v, 1.0});
        const double r = std::abs(c.p2.u * l[0] + c.p2.v * l[1] + l[2]);
        if (r > 1e-8) constraints_ok = false;
      }
      best = std::min(best, nsgd_to_truth(pair, f));
    }
    if (best >= 1e-6) recovery_ok = false;
  }
  report(6, "7-point solver constraints and recovery",
         produced == 1000 && constraints_ok && counts_ok && recovery_ok,
         fmt("%.0f tuples, constraints: %.0f, counts: %.0f, recovery: ",
             static_cast<double>(produced), constraints_ok ? 1.0 : 0.0,
             counts_ok ? 1.0 : 0.0) +
             (recovery_ok ? "1" : "0"));
}

void criterion_7_matching_oracle() {
  Rng rng(707070);
  bool equal_ok = true;
  std::size_t largest = 0;
  for (int trial = 0; trial < 50; ++trial) {
    // Mostly small instances plus a few at the full 2000x2000 size.
    const bool big = trial % 10 == 0;
    const std::size_t n1 =
        big ? 1500 + rng.uniform_index(501) : 2 + rng.uniform_index(400);
    const std::size_t n2 =
        big ? 1500 + rng.uniform_index(501) : 2 + rng.uniform_index(400);
    const int dim = big ? 16 : 2 + static_cast<int>(rng.uniform_index(64));
    largest = std::max({largest, n1, n2});

    std::vector<Keypoint> k1(n1), k2(n2);
    for (Keypoint& k : k1) {
      k.location = {rng.uniform(0, 640), rng.uniform(0, 480)};
      k.descriptor.resize(dim);
      for (float& x : k.descriptor) x = static_cast<float>(rng.uniform(-1, 1));
    }
    for (Keypoint& k : k2) {
      k.location = {rng.uniform(0, 640), rng.uniform(0, 480)};
      k.descriptor.resize(dim);
      for (float& x : k.descriptor) x = static_cast<float>(rng.uniform(-1, 1));
    }
    const MatchSet ours = match_nearest_neighbor(k1, k2);
    const MatchSet oracle = oracles::nn_exhaustive(k1, k2);
    if (ours.correspondences.size() != oracle.correspondences.size()) {
      equal_ok = false;
      continue;
    }
    for (std::size_t i = 0; i < ours.correspondences.size(); ++i) {
      const Correspondence& a = ours.correspondences[i];
      const Correspondence& b = oracle.correspondences[i];
      if (a.p2.u != b.p2.u || a.p2.v != b.p2.v || a.nn_ratio != b.nn_ratio)
        equal_ok = false;
    }
  }

  // Ratio-test monotonicity over a threshold grid.
  MatchSet ms;
  for (int i = 0; i < 5000; ++i)
    ms.correspondences.push_back({{0, 0}, {1, 1}, rng.uniform(0.001, 1.0)});
  ms.keypoints1 = ms.keypoints2 = ms.correspondences.size();
  bool monotone_ok = true;
  std::size_t prev = 0;
  for (double t : {0.05, 0.2, 0.4, 0.6, 0.8, 0.95, 1.0}) {
    const std::size_t n = ratio_test(ms, t).correspondences.size();
    if (n < prev) monotone_ok = false;
    prev = n;
  }
  report(7, "matching equals the exhaustive oracle", equal_ok && monotone_ok,
         fmt("50 instances (largest %.0f), monotone: %.0f",
             static_cast<double>(largest), monotone_ok ? 1.0 : 0.0));
}

void criterion_8_pair_selection() {
  // Forward trajectory over a shared cloud: overlap decays with the gap.
  std::vector<PoseRecord> poses;
  std::vector<Vec3> points;
  Rng rng(808080);
  for (int i = 0; i < 16; ++i) {
    PoseRecord p;
    p.time = 0.25 * i;
    p.quaternion = {0, 0, 0, 1};
    p.rotation = quaternion_to_rotation(p.quaternion);
    p.translation = {0.02 * rng.uniform(-1, 1), 0.02 * rng.uniform(-1, 1),
                     0.55 * i};
    poses.push_back(p);
  }
  for (int i = 0; i < 220; ++i)
    points.push_back({rng.uniform(-6.0, 6.0), rng.uniform(-4.5, 4.5),
                      rng.uniform(6.0, 24.0)});
  CameraIntrinsics k;
  k.fx = k.fy = 512.0;
  k.cx = 320.0;
  k.cy = 240.0;

  const MatchProvider provider =
      [&](std::size_t i, std::size_t j) -> std::optional<MatchSet> {
    const ProjectionMatrix pi = pose_projection(poses[i], k);
    const ProjectionMatrix pj = pose_projection(poses[j], k);
    MatchSet ms;
    for (const Vec3& x : points) {
      Point2 a, b;
      try {
        a = project(pi, x);
        b = project(pj, x);
      } catch (const Error&) {
        continue;
      }
      if (a.u < 0 || a.u >= 640 || a.v < 0 || a.v >= 480) continue;
      if (b.u < 0 || b.u >= 640 || b.v < 0 || b.v >= 480) continue;
      ms.correspondences.push_back({a, b, 0.5});
    }
    ms.keypoints1 = ms.keypoints2 = ms.correspondences.size();
    return ms;
  };

  PairSelectionConfig cfg;
  cfg.short_baseline = true;
  cfg.max_time_gap = 1.0;
  cfg.sample_count = 20;
  cfg.seed = 1234;
  const std::vector<PairId> ours = select_pairs(poses, k, provider, cfg);
  const std::vector<PairId> oracle =
      oracles::select_pairs_brute_force(poses, k, provider, cfg);
  report(8, "pair selection equals the brute-force oracle", ours == oracle,
         fmt("%.0f selected pairs", static_cast<double>(ours.size())));
}

void criterion_9_format_round_trips() {
  const std::string dir = temp_dir("twoview_accept_fmt");
  Rng rng(909090);
  bool ok = true;
  for (int fixture = 0; fixture < 20; ++fixture) {
    // Poses (both formats).
    std::vector<PoseRecord> poses;
    for (int i = 0; i < 6; ++i) {
      PoseRecord p;
      p.time = 0.1 * i + 0.001 * rng.uniform(0, 1);
      std::array<double, 4> q{rng.gaussian(), rng.gaussian(), rng.gaussian(),
                              rng.gaussian()};
      double n = 0.0;
      for (double c : q) n += c * c;
      n = std::sqrt(n);
      for (double& c : q) c /= n;
      if (q[3] < 0.0)
        for (double& c : q) c = -c;
      p.quaternion = q;
      p.rotation = quaternion_to_rotation(q);
      p.translation = {rng.uniform(-5, 5), rng.uniform(-5, 5),
                       rng.uniform(-5, 5)};
      poses.push_back(p);
    }
    const std::string tum = dir + "/t" + std::to_string(fixture) + ".txt";
    save_tum_trajectory(tum, poses);
    const std::string tum2 = tum + ".again";
    save_tum_trajectory(tum2, load_tum_trajectory(tum));
    if (read_file(tum) != read_file(tum2)) ok = false;

    const std::string kitti = dir + "/k" + std::to_string(fixture) + ".txt";
    save_kitti_poses(kitti, poses);
    const std::string kitti2 = kitti + ".again";
    save_kitti_poses(kitti2, load_kitti_poses(kitti));
    if (read_file(kitti) != read_file(kitti2)) ok = false;

    // Correspondences and the ground-truth matrix from a synthetic pair.
    const SyntheticPair pair = make_scene(0.25, 0.7, 950000 + fixture, 40);
    const std::string corr = dir + "/c" + std::to_string(fixture) + ".txt";
    save_correspondences(corr, pair.corrs);
    const std::string corr2 = corr + ".again";
    save_correspondences(corr2, load_correspondences(corr));
    if (read_file(corr) != read_file(corr2)) ok = false;

    const std::string fmat = dir + "/f" + std::to_string(fixture) + ".txt";
    save_fmatrix(fmat, pair.f_gt);
    const std::string fmat2 = fmat + ".again";
    save_fmatrix(fmat2, load_fmatrix(fmat));
    if (read_file(fmat) != read_file(fmat2)) ok = false;

    // Descriptors.
    std::vector<Descriptor> descs;
    for (int i = 0; i < 10; ++i) {
      Descriptor d(32);
      for (float& x : d) x = static_cast<float>(rng.uniform(-1, 1));
      descs.push_back(std::move(d));
    }
    const std::string bin = dir + "/d" + std::to_string(fixture) + ".bin";
    save_descriptors(bin, descs);
    const std::string bin2 = bin + ".again";
    save_descriptors(bin2, load_descriptors(bin));
    if (read_file(bin) != read_file(bin2)) ok = false;
  }
  report(9, "serialize-parse-serialize byte identity", ok,
         "20 fixtures x 5 formats");
}

void criterion_10_cli_determinism() {
  const std::string cli = TWOVIEW_CLI_PATH;
  const std::string base = temp_dir("twoview_accept_cli");
  const std::string dataset = base + "/dataset";

  const auto run = [&](const std::string& cmd) {
    return std::system(cmd.c_str()) == 0;
  };

  bool ok = run(cli + " synth --out " + dataset +
                " --pairs 12 --points 80 --noise 0.5 --outlier-rate 0.3" +
                " --rig forward --seed 7 > /dev/null");

  const std::string cfg_path = base + "/bench.cfg";
  std::ofstream(cfg_path) << "dataset_dir = " << dataset << "\n"
                          << "ratio = 1.0\n"
                          << "estimators = ransac, lmeds, cfrsc\n"
                          << "max_iterations = 600\n"
                          << "seed = 99\n";

  const auto run_bench = [&](const std::string& out, int threads) {
    return run("TWOVIEW_THREADS=" + std::to_string(threads) + " " + cli +
               " run --config " + cfg_path + " --out " + out + " > /dev/null");
  };
  ok = ok && run_bench(base + "/out1", 1);
  ok = ok && run_bench(base + "/out2", 1);
  ok = ok && run_bench(base + "/out4", 4);

  const std::string s1 = read_file(base + "/out1/summary.csv");
  const std::string p1 = read_file(base + "/out1/pairs.csv");
  const bool identical = !s1.empty() &&
                         s1 == read_file(base + "/out2/summary.csv") &&
                         s1 == read_file(base + "/out4/summary.csv") &&
                         p1 == read_file(base + "/out2/pairs.csv") &&
                         p1 == read_file(base + "/out4/pairs.csv");
  report(10, "end-to-end CLI determinism", ok && identical,
         fmt("csv bytes identical across 3 runs / 2 thread counts: %.0f",
             identical ? 1.0 : 0.0));
}

}  // namespace

int main() {
  const auto start = Clock::now();
  criterion_1_exact_recovery();
  criterion_2_sgd_correctness();
  criterion_3_metric_constants();
  criterion_4_estimator_ordering();
  criterion_5_breakdown();
  criterion_6_seven_point();
  criterion_7_matching_oracle();
  criterion_8_pair_selection();
  criterion_9_format_round_trips();
  criterion_10_cli_determinism();
  std::printf("%d of 10 criteria passed in %.1f s\n", 10 - g_failures,
              seconds_since(start));
  return g_failures == 0 ? 0 : 1;
}
