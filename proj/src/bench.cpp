#include "twoview/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "twoview/rng.hpp"

namespace twoview {

namespace {

constexpr std::uint64_t kPairStream = 0xbe7cf00d01u;
constexpr std::uint64_t kSgdStream = 0x5d02u;

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

}  // namespace

std::vector<PairId> select_pairs(std::span<const PoseRecord> poses,
                                 const CameraIntrinsics& k,
                                 const MatchProvider& provider,
                                 const PairSelectionConfig& cfg) {
  if (cfg.min_inliers <= 0 || cfg.inlier_px <= 0.0 ||
      cfg.max_time_gap <= 0.0 || cfg.sample_count <= 0)
    fail(Errc::InvalidInput, "select_pairs: config fields must be positive");

  std::vector<PairId> candidates;
  for (std::size_t i = 0; i + 1 < poses.size(); ++i) {
    for (std::size_t j = i + 1; j < poses.size(); ++j) {
      if (cfg.short_baseline &&
          std::abs(poses[j].time - poses[i].time) > cfg.max_time_gap)
        continue;
      const std::optional<MatchSet> matches = provider(i, j);
      if (!matches) continue;

      FundamentalMatrix f_gt;
      try {
        f_gt = fm_from_projections(pose_projection(poses[i], k),
                                   pose_projection(poses[j], k));
      } catch (const Error&) {
        continue;  // no baseline: not a usable pair
      }
      int inliers = 0;
      for (const Correspondence& c : matches->correspondences)
        if (symmetric_residual_unchecked(f_gt.m, c) <= cfg.inlier_px)
          ++inliers;
      if (inliers > cfg.min_inliers) candidates.push_back({i, j});
    }
  }

  if (candidates.size() <= static_cast<std::size_t>(cfg.sample_count)) {
    if (candidates.empty())
      std::cerr << "select_pairs: warning: no candidate pairs\n";
    return candidates;
  }
  Rng rng(cfg.seed);
  for (int s = 0; s < cfg.sample_count; ++s) {
    const std::size_t pick =
        s + rng.uniform_index(candidates.size() - static_cast<std::size_t>(s));
    std::swap(candidates[s], candidates[pick]);
  }
  candidates.resize(static_cast<std::size_t>(cfg.sample_count));
  std::sort(candidates.begin(), candidates.end(),
            [](const PairId& a, const PairId& b) {
              return a.i != b.i ? a.i < b.i : a.j < b.j;
            });
  return candidates;
}

const char* estimator_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::Ransac:
      return "ransac";
    case EstimatorKind::Msac:
      return "msac";
    case EstimatorKind::LMedS:
      return "lmeds";
    case EstimatorKind::CoarseToFine:
      return "cfrsc";
  }
  return "unknown";
}

EstimatorKind parse_estimator(const std::string& name) {
  if (name == "ransac") return EstimatorKind::Ransac;
  if (name == "msac") return EstimatorKind::Msac;
  if (name == "lmeds") return EstimatorKind::LMedS;
  if (name == "cfrsc" || name == "coarse-to-fine")
    return EstimatorKind::CoarseToFine;
  fail(Errc::InvalidInput, "unknown estimator '" + name + "'");
}

PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::IoError, "cannot open config " + path);

  PipelineConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    std::string key, eq;
    if (!(ls >> key)) continue;
    if (!(ls >> eq) || eq != "=")
      fail(Errc::ParseError, path + ":" + std::to_string(line_no) +
                                 ": expected 'key = value'");
    std::string value;
    std::getline(ls, value);
    const auto from = value.find_first_not_of(" \t");
    const auto to = value.find_last_not_of(" \t");
    value = (from == std::string::npos) ? ""
                                        : value.substr(from, to - from + 1);
    if (value.empty())
      fail(Errc::ParseError,
           path + ":" + std::to_string(line_no) + ": missing value");

    try {
      if (key == "dataset_dir") {
        cfg.dataset_dir = value;
      } else if (key == "out_dir") {
        cfg.out_dir = value;
      } else if (key == "ratio") {
        cfg.ratio_threshold = std::stod(value);
      } else if (key == "pruner") {
        cfg.pruner = value;
      } else if (key == "estimators") {
        cfg.estimators.clear();
        std::istringstream es(value);
        std::string name;
        while (std::getline(es, name, ',')) {
          const auto f = name.find_first_not_of(" \t");
          const auto t = name.find_last_not_of(" \t");
          if (f == std::string::npos) continue;
          cfg.estimators.push_back(
              parse_estimator(name.substr(f, t - f + 1)));
        }
      } else if (key == "max_iterations") {
        cfg.max_iterations = std::stoi(value);
      } else if (key == "confidence") {
        cfg.confidence = std::stod(value);
      } else if (key == "inlier_threshold") {
        cfg.inlier_threshold = std::stod(value);
      } else if (key == "sgd_samples") {
        cfg.sgd_samples = std::stoi(value);
      } else if (key == "recall_threshold") {
        cfg.recall_threshold = std::stod(value);
      } else if (key == "inlier_alpha") {
        cfg.inlier_alpha = std::stod(value);
      } else if (key == "seed") {
        cfg.seed = std::stoull(value);
      } else {
        fail(Errc::ParseError, path + ":" + std::to_string(line_no) +
                                   ": unknown key '" + key + "'");
      }
    } catch (const std::logic_error&) {
      fail(Errc::ParseError, path + ":" + std::to_string(line_no) +
                                 ": bad value '" + value + "'");
    }
  }
  return cfg;
}

std::vector<ManifestEntry> load_manifest(const std::string& dataset_dir) {
  const std::string path = dataset_dir + "/manifest.txt";
  std::ifstream in(path);
  if (!in) fail(Errc::IoError, "cannot open manifest " + path);

  std::vector<ManifestEntry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::vector<std::string> tokens;
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
    if (tokens.empty() || tokens[0][0] == '#') continue;
    if (tokens.size() != 7 && tokens.size() != 10)
      fail(Errc::ParseError, path + ":" + std::to_string(line_no) +
                                 ": expected 7 or 10 fields");
    ManifestEntry e;
    try {
      e.pair_id = std::stoull(tokens[0]);
      e.dims1 = {std::stoi(tokens[1]), std::stoi(tokens[2])};
      e.dims2 = {std::stoi(tokens[3]), std::stoi(tokens[4])};
    } catch (const std::logic_error&) {
      fail(Errc::ParseError,
           path + ":" + std::to_string(line_no) + ": bad numeric field");
    }
    if (tokens.size() == 7) {
      e.corr_file = tokens[5];
      e.fgt_file = tokens[6];
    } else {
      e.kp1_file = tokens[5];
      e.desc1_file = tokens[6];
      e.kp2_file = tokens[7];
      e.desc2_file = tokens[8];
      e.fgt_file = tokens[9];
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

void save_manifest(const std::string& dataset_dir,
                   std::span<const ManifestEntry> entries) {
  std::ofstream out(dataset_dir + "/manifest.txt");
  if (!out) fail(Errc::IoError, "cannot write manifest in " + dataset_dir);
  for (const ManifestEntry& e : entries) {
    out << e.pair_id << ' ' << e.dims1.h << ' ' << e.dims1.w << ' '
        << e.dims2.h << ' ' << e.dims2.w;
    if (!e.corr_file.empty())
      out << ' ' << e.corr_file;
    else
      out << ' ' << e.kp1_file << ' ' << e.desc1_file << ' ' << e.kp2_file
          << ' ' << e.desc2_file;
    out << ' ' << e.fgt_file << '\n';
  }
}

void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t)>& fn) {
  if (threads == 0) {
    if (const char* env = std::getenv("TWOVIEW_THREADS"))
      threads = static_cast<unsigned>(std::max(1, std::atoi(env)));
    else
      threads = std::max(1u, std::thread::hardware_concurrency());
  }
  threads = static_cast<unsigned>(
      std::min<std::size_t>(threads, std::max<std::size_t>(1, n)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  }
  for (std::thread& t : pool) t.join();
}

namespace {

struct LoadedPair {
  ManifestEntry entry;
  MatchSet matches;
  FundamentalMatrix f_gt;
  bool load_failed = false;
};

LoadedPair load_pair(const std::string& dir, const ManifestEntry& entry,
                     double ratio_threshold) {
  LoadedPair out;
  out.entry = entry;
  try {
    out.f_gt = load_fmatrix(dir + "/" + entry.fgt_file);
    if (!entry.corr_file.empty()) {
      out.matches = load_correspondences(dir + "/" + entry.corr_file,
                                         entry.dims1, entry.dims2);
    } else {
      const std::vector<Keypoint> k1 = load_keypoints(
          dir + "/" + entry.kp1_file, dir + "/" + entry.desc1_file);
      const std::vector<Keypoint> k2 = load_keypoints(
          dir + "/" + entry.kp2_file, dir + "/" + entry.desc2_file);
      out.matches = match_nearest_neighbor(k1, k2);
    }
    const bool all_rated = std::all_of(
        out.matches.correspondences.begin(),
        out.matches.correspondences.end(),
        [](const Correspondence& c) { return c.nn_ratio.has_value(); });
    if (ratio_threshold < 1.0 && all_rated)
      out.matches = ratio_test(out.matches, ratio_threshold);
  } catch (const Error& e) {
    std::cerr << "pair " << entry.pair_id << ": " << e.what() << '\n';
    out.load_failed = true;
  }
  return out;
}

MatchSet masked_matches(const MatchSet& ms, const std::vector<bool>& mask) {
  MatchSet out;
  out.keypoints1 = ms.keypoints1;
  out.keypoints2 = ms.keypoints2;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) out.correspondences.push_back(ms.correspondences[i]);
  return out;
}

}  // namespace

BenchmarkReport run_benchmark(const PipelineConfig& cfg) {
  const std::vector<ManifestEntry> manifest = load_manifest(cfg.dataset_dir);
  if (manifest.empty())
    fail(Errc::InvalidInput, "run_benchmark: empty manifest");
  if (cfg.estimators.empty())
    fail(Errc::InvalidInput, "run_benchmark: no estimators configured");
  if (cfg.pruner != "none" && cfg.pruner != "oracle")
    fail(Errc::InvalidInput, "run_benchmark: unknown pruner " + cfg.pruner);

  const std::size_t n_pairs = manifest.size();
  const std::size_t n_est = cfg.estimators.size();
  std::vector<PairRow> rows(n_pairs * n_est);
  std::vector<double> wall_ms(n_pairs * n_est, 0.0);

  parallel_for(n_pairs, 0, [&](std::size_t p) {
    const LoadedPair loaded =
        load_pair(cfg.dataset_dir, manifest[p], cfg.ratio_threshold);
    const ManifestEntry& entry = loaded.entry;
    const std::uint64_t pair_seed =
        Rng::derive(Rng::derive(cfg.seed, kPairStream), entry.pair_id);

    MatchSet input = loaded.matches;
    bool pair_ok = !loaded.load_failed;
    if (pair_ok && cfg.pruner == "oracle") {
      const FundamentalMatrix f_gt = loaded.f_gt;
      const double bound = cfg.inlier_threshold;
      try {
        input = apply_pruner(input, [&](const MatchSet& ms) {
          MatchSet kept;
          for (const Correspondence& c : ms.correspondences)
            if (symmetric_residual_unchecked(f_gt.m, c) <= bound)
              kept.correspondences.push_back(c);
          return kept;
        });
      } catch (const Error& e) {
        std::cerr << "pair " << entry.pair_id << ": " << e.what() << '\n';
        pair_ok = false;
      }
    }

    for (std::size_t e = 0; e < n_est; ++e) {
      const auto started = std::chrono::steady_clock::now();
      PairRow row;
      row.pair_id = entry.pair_id;
      row.kind = cfg.estimators[e];
      row.corrs_m = input.correspondences.size();

      if (pair_ok) {
        EstimatorConfig est;
        est.kind = cfg.estimators[e];
        est.max_iterations = cfg.max_iterations;
        est.confidence = cfg.confidence;
        est.inlier_threshold = cfg.inlier_threshold;
        est.seed = Rng::derive(pair_seed, e);
        try {
          const EstimationResult result =
              estimate(input.correspondences, est);
          const MatchSet post = masked_matches(input, result.inlier_mask);

          SgdConfig sgd_cfg;
          sgd_cfg.n_samples = cfg.sgd_samples;
          sgd_cfg.seed = Rng::derive(pair_seed, kSgdStream);
          sgd_cfg.dims1 = entry.dims1;
          sgd_cfg.dims2 = entry.dims2;
          const MetricReport report = pair_report(input, post, result.f,
                                                  loaded.f_gt, sgd_cfg);
          row.failed = false;
          row.nsgd = report.nsgd;
          row.sgd_px = compute_sgd(loaded.f_gt, result.f, sgd_cfg);
          row.inlier_pct = report.inlier_rate_post;
          row.inlier_m_pct = report.inlier_rate_pre;
          row.corrs = report.corrs_post;
          row.iterations = result.iterations_used;
        } catch (const Error&) {
          row.failed = true;  // estimation failures score NSGD = 1
          row.nsgd = 1.0;
        }
      }
      rows[p * n_est + e] = std::move(row);
      wall_ms[p * n_est + e] =
          std::chrono::duration<double, std::milli>(
              std::chrono::steady_clock::now() - started)
              .count();
    }
  });

  std::vector<std::size_t> order(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (rows[a].pair_id != rows[b].pair_id)
      return rows[a].pair_id < rows[b].pair_id;
    if (a % n_est != b % n_est) return a % n_est < b % n_est;
    return a < b;
  });

  BenchmarkReport report;
  std::ostringstream pairs_csv;
  pairs_csv << "pair_id,method,nsgd,sgd_px,inlier_pct,inlier_m_pct,corrs,"
               "corrs_m,iterations,failed\n";
  for (std::size_t idx : order) {
    const PairRow& r = rows[idx];
    pairs_csv << r.pair_id << ',' << estimator_name(r.kind) << ','
              << fmt("%.6f", r.nsgd) << ',' << fmt("%.6f", r.sgd_px) << ','
              << fmt("%.2f", r.inlier_pct) << ','
              << fmt("%.2f", r.inlier_m_pct) << ',' << r.corrs << ','
              << r.corrs_m << ',' << r.iterations << ',' << (r.failed ? 1 : 0)
              << '\n';
    report.rows.push_back(r);
  }

  std::ostringstream summary_csv;
  summary_csv << "method,recall_pct,inlier_pct,inlier_m_pct,mean_corrs,"
                 "mean_corrs_m,nsgd_mean,nsgd_median,failures\n";
  std::ostringstream timing;
  for (std::size_t e = 0; e < n_est; ++e) {
    MethodSummary s;
    s.kind = cfg.estimators[e];
    std::vector<double> nsgds;
    double inlier_sum = 0.0, inlier_m_sum = 0.0;
    double corr_sum = 0.0, corr_m_sum = 0.0;
    std::size_t ok = 0;
    for (std::size_t p = 0; p < n_pairs; ++p) {
      const PairRow& r = rows[p * n_est + e];
      nsgds.push_back(r.failed ? 1.0 : r.nsgd);
      s.wall_ms += wall_ms[p * n_est + e];
      if (r.failed) {
        ++s.failures;
        continue;
      }
      ++ok;
      inlier_sum += r.inlier_pct;
      inlier_m_sum += r.inlier_m_pct;
      corr_sum += static_cast<double>(r.corrs);
      corr_m_sum += static_cast<double>(r.corrs_m);
    }
    s.recall_pct = recall(nsgds, cfg.recall_threshold);
    if (ok > 0) {
      s.inlier_pct = inlier_sum / static_cast<double>(ok);
      s.inlier_m_pct = inlier_m_sum / static_cast<double>(ok);
      s.mean_corrs = corr_sum / static_cast<double>(ok);
      s.mean_corrs_m = corr_m_sum / static_cast<double>(ok);
    }
    double mean = 0.0;
    for (double v : nsgds) mean += v;
    s.nsgd_mean = mean / static_cast<double>(nsgds.size());
    std::vector<double> sorted = nsgds;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2,
                     sorted.end());
    s.nsgd_median = sorted[sorted.size() / 2];

    summary_csv << estimator_name(s.kind) << ','
                << fmt("%.2f", s.recall_pct) << ','
                << fmt("%.2f", s.inlier_pct) << ','
                << fmt("%.2f", s.inlier_m_pct) << ','
                << fmt("%.2f", s.mean_corrs) << ','
                << fmt("%.2f", s.mean_corrs_m) << ','
                << fmt("%.6f", s.nsgd_mean) << ','
                << fmt("%.6f", s.nsgd_median) << ',' << s.failures << '\n';
    timing << estimator_name(s.kind) << " " << fmt("%.1f", s.wall_ms)
           << " ms\n";
    report.methods.push_back(std::move(s));
  }

  report.summary_csv = summary_csv.str();
  report.pairs_csv = pairs_csv.str();
  report.timing_text = timing.str();

  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    std::ofstream(cfg.out_dir + "/summary.csv") << report.summary_csv;
    std::ofstream(cfg.out_dir + "/pairs.csv") << report.pairs_csv;
    std::ofstream(cfg.out_dir + "/timing.txt") << report.timing_text;
  }
  return report;
}

}  // namespace twoview
