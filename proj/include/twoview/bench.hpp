#ifndef TWOVIEW_BENCH_HPP_
#define TWOVIEW_BENCH_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "twoview/formats.hpp"
#include "twoview/metrics.hpp"
#include "twoview/robust.hpp"

namespace twoview {

struct PairSelectionConfig {
  int min_inliers = 20;     // keep pairs with strictly more inliers
  double inlier_px = 1.0;   // ground-truth epipolar distance bound
  double max_time_gap = 1.0;  // seconds; short-baseline mode only
  int sample_count = 1000;
  std::uint64_t seed = 0;
  bool short_baseline = true;
};

struct PairId {
  std::size_t i = 0;
  std::size_t j = 0;
  bool operator==(const PairId&) const = default;
};

/// Candidate matches for a frame pair; nullopt when none are available.
using MatchProvider =
    std::function<std::optional<MatchSet>(std::size_t, std::size_t)>;

/// Matchable-pair search: derives the ground-truth F for every candidate
/// pair (all pairs, or frames within max_time_gap in short-baseline
/// mode), counts matches within inlier_px, keeps pairs with more than
/// min_inliers, and seeded-samples sample_count of them. Output is sorted
/// by (i, j) and independent of provider evaluation order.
std::vector<PairId> select_pairs(std::span<const PoseRecord> poses,
                                 const CameraIntrinsics& k,
                                 const MatchProvider& provider,
                                 const PairSelectionConfig& cfg);

struct PipelineConfig {
  std::string dataset_dir;
  std::string out_dir;
  double ratio_threshold = 0.8;  // >= 1 disables the ratio test
  std::string pruner = "none";   // none | oracle
  std::vector<EstimatorKind> estimators = {
      EstimatorKind::Ransac, EstimatorKind::Msac, EstimatorKind::LMedS,
      EstimatorKind::CoarseToFine};
  int max_iterations = 2000;
  double confidence = 0.99;
  double inlier_threshold = 1.0;
  int sgd_samples = 1000;
  double recall_threshold = 0.05;
  double inlier_alpha = 0.003;
  std::uint64_t seed = 0;
};

/// Flat "key = value" config file mirroring PipelineConfig ('#' comments).
PipelineConfig load_pipeline_config(const std::string& path);

const char* estimator_name(EstimatorKind kind);
EstimatorKind parse_estimator(const std::string& name);

struct MethodSummary {
  EstimatorKind kind = EstimatorKind::Ransac;
  double recall_pct = 0.0;
  double inlier_pct = 0.0;     // mean %Inlier over successful pairs
  double inlier_m_pct = 0.0;   // mean %Inlier-m over successful pairs
  double mean_corrs = 0.0;     // mean #Corrs
  double mean_corrs_m = 0.0;   // mean #Corrs-m
  double nsgd_mean = 0.0;      // failures counted as 1.0
  double nsgd_median = 0.0;
  int failures = 0;
  double wall_ms = 0.0;  // reported separately; never in deterministic CSV
};

struct PairRow {
  std::uint64_t pair_id = 0;
  EstimatorKind kind = EstimatorKind::Ransac;
  double nsgd = 1.0;
  double sgd_px = 0.0;
  double inlier_pct = 0.0;
  double inlier_m_pct = 0.0;
  std::size_t corrs = 0;
  std::size_t corrs_m = 0;
  int iterations = 0;
  bool failed = true;
};

struct BenchmarkReport {
  std::vector<MethodSummary> methods;
  std::vector<PairRow> rows;
  std::string summary_csv;  // deterministic given the seed
  std::string pairs_csv;    // deterministic long format, one row per
                            // (pair, estimator) for recall curves
  std::string timing_text;  // wall clock; intentionally a separate,
                            // non-deterministic artifact
};

/// Full pipeline over a dataset directory (manifest.txt):
///   match or load matches -> ratio test -> pruner -> estimator -> metrics.
/// Pair-level failures are recorded as rows with nsgd = 1, never aborting
/// the run. Pairs are processed by a work pool (TWOVIEW_THREADS); per-pair
/// seeds derive from (seed, pair_id) so the thread count never changes
/// results. Writes summary.csv, pairs.csv and timing.txt into out_dir
/// when it is non-empty.
BenchmarkReport run_benchmark(const PipelineConfig& cfg);

/// Dataset manifest row: "id h1 w1 h2 w2 corrs fgt" for precomputed
/// matches or "id h1 w1 h2 w2 kp1 desc1 kp2 desc2 fgt" for the
/// descriptor-matching path; paths are relative to the dataset directory.
struct ManifestEntry {
  std::uint64_t pair_id = 0;
  ImageDims dims1;
  ImageDims dims2;
  std::string corr_file;  // empty for the descriptor path
  std::string kp1_file, desc1_file, kp2_file, desc2_file;
  std::string fgt_file;
};

std::vector<ManifestEntry> load_manifest(const std::string& dataset_dir);
void save_manifest(const std::string& dataset_dir,
                   std::span<const ManifestEntry> entries);

/// Worker-pool helper: runs fn(0..n-1) on `threads` threads (0 = use
/// TWOVIEW_THREADS or the hardware count). Results must be stored by
/// index by the caller.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace twoview

#endif  // TWOVIEW_BENCH_HPP_
