#pragma once

#include <map>
#include <string>
#include <vector>

#include "ncse/motion.hpp"
#include "ncse/types.hpp"

namespace ncse {

struct SimilarityConfig {
  double alpha_jp = 2.0;  // 1/m^2, joint-position kernel sharpness
  double alpha_v = 0.1;   // s^2/m^2, root-velocity kernel sharpness
};

struct FrameSimilarity {
  double r_jp;  // exp(-alpha_jp * sum_j ||p_j - p_j*||^2)
  double r_v;   // exp(-alpha_v * ||v - v*||^2)
};

FrameSimilarity frame_similarity(const Frame& reference, const Frame& generated,
                                 const SimilarityConfig& cfg);

// max over generated frames of 0.5 r_jp + 0.5 r_v; in (0, 1].
double reconstruction_score(const Frame& reference, const std::vector<Frame>& generated,
                            const SimilarityConfig& cfg);

struct ScoreHistogram {
  std::vector<double> bin_edges;  // bins + 1 ascending edges over [0,1]
  std::vector<Index> counts;
};

ScoreHistogram make_score_histogram(const std::vector<double>& scores, Index bins = 20);

struct CoverageReport {
  std::vector<double> per_frame_scores;  // all reference frames, clip order
  double covered_fraction;
  double threshold;
  std::map<std::string, double> per_clip;
  ScoreHistogram histogram;
};

// Scores every reference frame of every clip against the generated set.
CoverageReport dataset_coverage(const MotionDataset& dataset,
                                const std::vector<Frame>& generated,
                                const SimilarityConfig& cfg, double threshold = 0.5);

// Fraction of reference frames that are the best match of at least one
// generated frame (ties to the lowest frame index).
double motion_completeness(const MotionClip& reference, const std::vector<Frame>& generated,
                           const SimilarityConfig& cfg);

std::string histogram_to_csv(const ScoreHistogram& histogram);
std::string coverage_report_json(const CoverageReport& report);

}  // namespace ncse
