#include "ncse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ncse/error.hpp"
#include "ncse/io.hpp"

namespace ncse {

namespace {

void check_cfg(const SimilarityConfig& cfg) {
  if (cfg.alpha_jp <= 0.0 || cfg.alpha_v <= 0.0) {
    throw Error(ErrorCode::BadArgument, "kernel sharpness must be positive");
  }
}

double kernel_sum(const Frame& reference, const Frame& generated,
                  const SimilarityConfig& cfg) {
  if (reference.joint_positions.size() != generated.joint_positions.size()) {
    throw Error(ErrorCode::JointCountMismatch, "frames differ in joint count");
  }
  double jp_sq = 0.0;
  for (size_t j = 0; j < reference.joint_positions.size(); ++j) {
    jp_sq += (reference.joint_positions[j] - generated.joint_positions[j]).squaredNorm();
  }
  const double v_sq = (reference.root_velocity - generated.root_velocity).squaredNorm();
  return 0.5 * std::exp(-cfg.alpha_jp * jp_sq) + 0.5 * std::exp(-cfg.alpha_v * v_sq);
}

}  // namespace

FrameSimilarity frame_similarity(const Frame& reference, const Frame& generated,
                                 const SimilarityConfig& cfg) {
  check_cfg(cfg);
  if (reference.joint_positions.size() != generated.joint_positions.size()) {
    throw Error(ErrorCode::JointCountMismatch, "frames differ in joint count");
  }
  double jp_sq = 0.0;
  for (size_t j = 0; j < reference.joint_positions.size(); ++j) {
    jp_sq += (reference.joint_positions[j] - generated.joint_positions[j]).squaredNorm();
  }
  const double v_sq = (reference.root_velocity - generated.root_velocity).squaredNorm();
  return {std::exp(-cfg.alpha_jp * jp_sq), std::exp(-cfg.alpha_v * v_sq)};
}

double reconstruction_score(const Frame& reference, const std::vector<Frame>& generated,
                            const SimilarityConfig& cfg) {
  check_cfg(cfg);
  if (generated.empty()) {
    throw Error(ErrorCode::EmptyGeneratedSet, "no generated frames to score against");
  }
  double best = 0.0;
  for (const Frame& g : generated) best = std::max(best, kernel_sum(reference, g, cfg));
  return best;
}

ScoreHistogram make_score_histogram(const std::vector<double>& scores, Index bins) {
  if (bins < 1) throw Error(ErrorCode::BadArgument, "need at least one bin");
  ScoreHistogram h;
  h.bin_edges.resize(static_cast<size_t>(bins) + 1);
  for (Index b = 0; b <= bins; ++b) {
    h.bin_edges[static_cast<size_t>(b)] =
        static_cast<double>(b) / static_cast<double>(bins);
  }
  h.counts.assign(static_cast<size_t>(bins), 0);
  for (double s : scores) {
    Index b = static_cast<Index>(std::floor(s * static_cast<double>(bins)));
    b = std::clamp<Index>(b, 0, bins - 1);  // score 1.0 lands in the top bin
    h.counts[static_cast<size_t>(b)] += 1;
  }
  return h;
}

CoverageReport dataset_coverage(const MotionDataset& dataset,
                                const std::vector<Frame>& generated,
                                const SimilarityConfig& cfg, double threshold) {
  check_cfg(cfg);
  if (generated.empty()) {
    throw Error(ErrorCode::EmptyGeneratedSet, "no generated frames to score against");
  }
  if (dataset.size() == 0) throw Error(ErrorCode::EmptyDataset, "dataset has no clips");
  CoverageReport report;
  report.threshold = threshold;
  Index covered = 0;
  for (const MotionClip& clip : dataset.clips) {
    Index clip_covered = 0;
    for (const Frame& ref : clip.frames) {
      const double score = reconstruction_score(ref, generated, cfg);
      report.per_frame_scores.push_back(score);
      if (score > threshold) {
        ++covered;
        ++clip_covered;
      }
    }
    report.per_clip[clip.name] =
        static_cast<double>(clip_covered) / static_cast<double>(clip.frame_count());
  }
  report.covered_fraction = static_cast<double>(covered) /
                            static_cast<double>(report.per_frame_scores.size());
  report.histogram = make_score_histogram(report.per_frame_scores);
  return report;
}

double motion_completeness(const MotionClip& reference, const std::vector<Frame>& generated,
                           const SimilarityConfig& cfg) {
  check_cfg(cfg);
  if (generated.empty()) {
    throw Error(ErrorCode::EmptyGeneratedSet, "no generated frames");
  }
  if (reference.frames.empty()) {
    throw Error(ErrorCode::BadArgument, "reference clip has no frames");
  }
  std::vector<bool> covered(reference.frames.size(), false);
  for (const Frame& g : generated) {
    size_t best_idx = 0;
    double best = -1.0;
    for (size_t i = 0; i < reference.frames.size(); ++i) {
      const double s = kernel_sum(reference.frames[i], g, cfg);
      if (s > best) {  // strict comparison keeps the lowest index on ties
        best = s;
        best_idx = i;
      }
    }
    covered[best_idx] = true;
  }
  const auto covered_count =
      static_cast<double>(std::count(covered.begin(), covered.end(), true));
  return covered_count / static_cast<double>(reference.frames.size());
}

std::string histogram_to_csv(const ScoreHistogram& histogram) {
  std::ostringstream out;
  out << "bin_lo,bin_hi,count\n";
  for (size_t b = 0; b < histogram.counts.size(); ++b) {
    out << fmt_double(histogram.bin_edges[b]) << ',' << fmt_double(histogram.bin_edges[b + 1])
        << ',' << histogram.counts[b] << '\n';
  }
  return out.str();
}

std::string coverage_report_json(const CoverageReport& report) {
  nlohmann::json j;
  j["covered_fraction"] = report.covered_fraction;
  j["threshold"] = report.threshold;
  nlohmann::json per_clip = nlohmann::json::object();
  for (const auto& [name, fraction] : report.per_clip) per_clip[name] = fraction;
  j["per_clip"] = per_clip;
  return j.dump(2) + "\n";
}

}  // namespace ncse
