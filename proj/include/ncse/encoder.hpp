#pragma once

#include <string>
#include <vector>

#include "ncse/dense_net.hpp"
#include "ncse/motion.hpp"
#include "ncse/sphere.hpp"
#include "ncse/types.hpp"

namespace ncse {

// Classifier-style encoder: a trunk ending in an l2_normalize layer of
// dimension p (the latent sphere), followed by a linear head to n logits.
struct EncoderModel {
  DenseNet net;
  Index latent_dim = 0;
  Index class_count = 0;
  double window_s = 2.0;
  double stride_s = 0.5;
  std::vector<std::string> class_names;

  // Layers up to and including the l2_normalize layer.
  Index trunk_layer_count() const;

  Mat features(const Mat& inputs) const;  // rows on S^{p-1}
  Mat logits(const Mat& inputs) const;
};

// Trunk input -> 256 relu -> 128 relu -> p l2_normalize, head p -> n.
EncoderModel make_encoder_model(Index feature_dim, Index latent_dim, Index class_count,
                                double window_s, double stride_s,
                                std::vector<std::string> class_names, RngSeed seed);

struct ClassMeans {
  std::vector<UnitVector> means;  // one per class, unit norm
  std::vector<Index> counts;      // windows contributing to each mean
};

struct TraceRow {
  double loss;
  double nc1;
  double nc2_gap;
  double uniformity_variance;
};
using TrainingTrace = std::vector<TraceRow>;

// All windows of all clips with clip indices as labels.
struct WindowedFeatures {
  Mat inputs;               // windows x feature_dim
  std::vector<int> labels;  // class per window
};
WindowedFeatures collect_window_features(const MotionDataset& dataset, double window_s,
                                         double stride_s);

struct EncoderTrainResult {
  EncoderModel model;
  TrainingTrace trace;
};

// Cross-entropy training over shuffled minibatches of 64; one trace row per
// epoch. Deterministic per seed.
EncoderTrainResult train_encoder(const MotionDataset& dataset, Index latent_dim,
                                 int epochs, double learning_rate, RngSeed seed,
                                 double window_s = 2.0, double stride_s = 0.5);

// Normalized per-class mean of trunk features over all windows.
ClassMeans compute_class_means(const EncoderModel& model, const MotionDataset& dataset);

// Average over classes of the mean squared distance to the class mean.
double nc1_variability(const EncoderModel& model, const MotionDataset& dataset,
                       const ClassMeans& means);

struct EtfDeviation {
  double mean_cosine;
  double cosine_std;
  double etf_gap;     // |mean_cosine - (-1/(n-1))|
  bool etf_feasible;  // p >= n - 1
};
EtfDeviation nc2_etf_deviation(const std::vector<UnitVector>& means);

struct UniformityReport {
  std::vector<Index> counts;  // nearest-center hits per mean
  double variance;            // population variance of the counts
};

// Samples samples_per_center * n uniform sphere points and assigns each to
// its nearest mean by cosine distance (ties to the lowest index).
UniformityReport uniformity_variance(const std::vector<UnitVector>& means,
                                     int samples_per_center, RngSeed seed);

Index nearest_center(const UnitVector& z, const std::vector<UnitVector>& means);

// Sidecar JSON { p, n, window_s, stride_s, class_names } stored next to the
// binary net; together they round-trip the model.
std::string encoder_sidecar_json(const EncoderModel& model);
EncoderModel load_encoder(std::string_view net_bytes, const std::string& sidecar_json);

std::string trace_to_csv(const TrainingTrace& trace);

}  // namespace ncse
