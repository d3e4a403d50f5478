#include "ncse/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ncse/error.hpp"
#include "ncse/io.hpp"

namespace ncse {

Index EncoderModel::trunk_layer_count() const {
  for (Index l = 0; l < net.layer_count(); ++l) {
    if (net.layers()[static_cast<size_t>(l)].activation == Activation::kL2Normalize) {
      return l + 1;
    }
  }
  throw Error(ErrorCode::BadArgument, "encoder net has no l2_normalize layer");
}

Mat EncoderModel::features(const Mat& inputs) const {
  return forward_prefix(net, inputs, trunk_layer_count());
}

Mat EncoderModel::logits(const Mat& inputs) const { return forward(net, inputs); }

EncoderModel make_encoder_model(Index feature_dim, Index latent_dim, Index class_count,
                                double window_s, double stride_s,
                                std::vector<std::string> class_names, RngSeed seed) {
  if (latent_dim < 2) throw Error(ErrorCode::DimensionTooSmall, "latent dim must be >= 2");
  if (class_count < 1) throw Error(ErrorCode::EmptyDataset, "need at least one class");
  EncoderModel model;
  model.net = make_mlp(feature_dim, {256, 128, latent_dim, class_count},
                       {Activation::kRelu, Activation::kRelu, Activation::kL2Normalize,
                        Activation::kIdentity},
                       seed);
  model.latent_dim = latent_dim;
  model.class_count = class_count;
  model.window_s = window_s;
  model.stride_s = stride_s;
  model.class_names = std::move(class_names);
  return model;
}

WindowedFeatures collect_window_features(const MotionDataset& dataset, double window_s,
                                         double stride_s) {
  if (dataset.size() == 0) throw Error(ErrorCode::EmptyDataset, "dataset has no clips");
  std::vector<Vec> rows;
  std::vector<int> labels;
  for (Index c = 0; c < dataset.size(); ++c) {
    const MotionClip& clip = dataset.clips[static_cast<size_t>(c)];
    for (Window w : window_clip(clip, window_s, stride_s)) {
      w.clip_index = c;
      rows.push_back(featurize_window(dataset, w));
      labels.push_back(static_cast<int>(c));
    }
  }
  WindowedFeatures out;
  out.inputs.resize(static_cast<Index>(rows.size()), rows.front().size());
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != out.inputs.cols()) {
      throw Error(ErrorCode::DimensionMismatch,
                  "clips produce differing feature dimensions (joint counts differ?)");
    }
    out.inputs.row(static_cast<Index>(i)) = rows[i].transpose();
  }
  out.labels = std::move(labels);
  return out;
}

namespace {

ClassMeans means_from_features(const Mat& features, const std::vector<int>& labels,
                               Index class_count) {
  std::vector<Vec> sums(static_cast<size_t>(class_count));
  std::vector<Index> counts(static_cast<size_t>(class_count), 0);
  for (auto& s : sums) s = Vec::Zero(features.cols());
  for (Index i = 0; i < features.rows(); ++i) {
    const auto c = static_cast<size_t>(labels[static_cast<size_t>(i)]);
    sums[c] += features.row(i).transpose();
    counts[c] += 1;
  }
  ClassMeans out;
  for (size_t c = 0; c < sums.size(); ++c) {
    if (counts[c] == 0) {
      throw Error(ErrorCode::EmptyClass, "class produced no windows");
    }
    out.means.push_back(normalize(Vec(sums[c] / static_cast<double>(counts[c]))));
  }
  out.counts = std::move(counts);
  return out;
}

double nc1_from_features(const Mat& features, const std::vector<int>& labels,
                         const ClassMeans& means) {
  const auto n = means.means.size();
  std::vector<double> sq_sum(n, 0.0);
  std::vector<Index> counts(n, 0);
  for (Index i = 0; i < features.rows(); ++i) {
    const auto c = static_cast<size_t>(labels[static_cast<size_t>(i)]);
    sq_sum[c] += (features.row(i).transpose() - means.means[c].vec()).squaredNorm();
    counts[c] += 1;
  }
  double total = 0.0;
  for (size_t c = 0; c < n; ++c) {
    total += counts[c] > 0 ? sq_sum[c] / static_cast<double>(counts[c]) : 0.0;
  }
  return total / static_cast<double>(n);
}

}  // namespace

EncoderTrainResult train_encoder(const MotionDataset& dataset, Index latent_dim,
                                 int epochs, double learning_rate, RngSeed seed,
                                 double window_s, double stride_s) {
  if (dataset.size() == 0) throw Error(ErrorCode::EmptyDataset, "dataset has no clips");
  if (dataset.size() < 2) {
    throw Error(ErrorCode::SingleClassDataset, "encoder training needs n >= 2 clips");
  }
  const WindowedFeatures data = collect_window_features(dataset, window_s, stride_s);
  std::vector<std::string> names;
  for (const MotionClip& clip : dataset.clips) names.push_back(clip.name);

  EncoderTrainResult result;
  result.model = make_encoder_model(data.inputs.cols(), latent_dim, dataset.size(),
                                    window_s, stride_s, std::move(names),
                                    Rng::derive(seed, 0));
  AdamState adam = AdamState::for_net(result.model.net, learning_rate);
  Rng shuffle_rng(Rng::derive(seed, 1));

  const Index sample_count = data.inputs.rows();
  constexpr Index kBatch = 64;
  std::vector<Index> order(static_cast<size_t>(sample_count));
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < epochs; ++epoch) {
    // Fisher-Yates with our own rng keeps the permutation seed-stable.
    for (size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng.uniform_int(i)]);
    }
    double epoch_loss = 0.0;
    for (Index begin = 0; begin < sample_count; begin += kBatch) {
      const Index size = std::min(kBatch, sample_count - begin);
      Mat batch(size, data.inputs.cols());
      std::vector<int> labels(static_cast<size_t>(size));
      for (Index i = 0; i < size; ++i) {
        const Index src = order[static_cast<size_t>(begin + i)];
        batch.row(i) = data.inputs.row(src);
        labels[static_cast<size_t>(i)] = data.labels[static_cast<size_t>(src)];
      }
      ForwardCache cache;
      const Mat logits = forward(result.model.net, batch, &cache);
      const SoftmaxCrossEntropy ce = softmax_cross_entropy(logits, labels);
      const Gradients grads = backward(result.model.net, cache, ce.dlogits);
      adam_step(result.model.net, grads, adam);
      epoch_loss += ce.loss * static_cast<double>(size);
    }
    epoch_loss /= static_cast<double>(sample_count);

    const Mat feats = result.model.features(data.inputs);
    const ClassMeans means = means_from_features(feats, data.labels, dataset.size());
    const EtfDeviation etf = nc2_etf_deviation(means.means);
    const UniformityReport uni =
        uniformity_variance(means.means, 1000, Rng::derive(seed, 2000 + static_cast<std::uint64_t>(epoch)));
    result.trace.push_back(
        {epoch_loss, nc1_from_features(feats, data.labels, means), etf.etf_gap, uni.variance});
  }
  return result;
}

ClassMeans compute_class_means(const EncoderModel& model, const MotionDataset& dataset) {
  const WindowedFeatures data =
      collect_window_features(dataset, model.window_s, model.stride_s);
  return means_from_features(model.features(data.inputs), data.labels, dataset.size());
}

double nc1_variability(const EncoderModel& model, const MotionDataset& dataset,
                       const ClassMeans& means) {
  const WindowedFeatures data =
      collect_window_features(dataset, model.window_s, model.stride_s);
  return nc1_from_features(model.features(data.inputs), data.labels, means);
}

EtfDeviation nc2_etf_deviation(const std::vector<UnitVector>& means) {
  const auto n = static_cast<Index>(means.size());
  if (n < 2) throw Error(ErrorCode::BadArgument, "need at least two means");
  double sum = 0.0, sq_sum = 0.0;
  Index pairs = 0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double d = means[static_cast<size_t>(i)].dot(means[static_cast<size_t>(j)]);
      sum += d;
      sq_sum += d * d;
      ++pairs;
    }
  }
  EtfDeviation out;
  out.mean_cosine = sum / static_cast<double>(pairs);
  out.cosine_std =
      std::sqrt(std::max(0.0, sq_sum / static_cast<double>(pairs) -
                                  out.mean_cosine * out.mean_cosine));
  const double target = -1.0 / (static_cast<double>(n) - 1.0);
  out.etf_gap = std::fabs(out.mean_cosine - target);
  out.etf_feasible = means.front().dim() >= n - 1;
  return out;
}

UniformityReport uniformity_variance(const std::vector<UnitVector>& means,
                                     int samples_per_center, RngSeed seed) {
  const auto n = static_cast<Index>(means.size());
  if (n < 2) throw Error(ErrorCode::BadArgument, "need at least two means");
  if (samples_per_center < 1) {
    throw Error(ErrorCode::BadArgument, "samples_per_center must be >= 1");
  }
  const Index p = means.front().dim();
  UniformityReport out;
  out.counts.assign(static_cast<size_t>(n), 0);
  Rng rng(seed);
  const Index total = static_cast<Index>(samples_per_center) * n;
  for (Index i = 0; i < total; ++i) {
    Vec g = rng.normal_vec(p);
    while (g.norm() < 1e-12) g = rng.normal_vec(p);
    const UnitVector z = normalize(g);
    out.counts[static_cast<size_t>(nearest_center(z, means))] += 1;
  }
  const double mean_count = static_cast<double>(total) / static_cast<double>(n);
  double var = 0.0;
  for (Index c : out.counts) {
    const double d = static_cast<double>(c) - mean_count;
    var += d * d;
  }
  out.variance = var / static_cast<double>(n);
  return out;
}

Index nearest_center(const UnitVector& z, const std::vector<UnitVector>& means) {
  if (means.empty()) throw Error(ErrorCode::BadArgument, "no centers given");
  Index best = 0;
  double best_dot = z.dot(means.front());
  for (size_t i = 1; i < means.size(); ++i) {
    const double d = z.dot(means[i]);
    if (d > best_dot) {  // strict: ties keep the lowest index
      best_dot = d;
      best = static_cast<Index>(i);
    }
  }
  return best;
}

std::string encoder_sidecar_json(const EncoderModel& model) {
  nlohmann::json j;
  j["p"] = model.latent_dim;
  j["n"] = model.class_count;
  j["window_s"] = model.window_s;
  j["stride_s"] = model.stride_s;
  j["class_names"] = model.class_names;
  return j.dump(2) + "\n";
}

EncoderModel load_encoder(std::string_view net_bytes, const std::string& sidecar_json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(sidecar_json);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedModel, std::string("bad sidecar JSON: ") + e.what());
  }
  EncoderModel model;
  model.net = deserialize_dense_net(net_bytes);
  try {
    model.latent_dim = j.at("p").get<Index>();
    model.class_count = j.at("n").get<Index>();
    model.window_s = j.at("window_s").get<double>();
    model.stride_s = j.at("stride_s").get<double>();
    model.class_names = j.at("class_names").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedModel, std::string("sidecar missing fields: ") + e.what());
  }
  if (model.net.output_dim() != model.class_count ||
      static_cast<Index>(model.class_names.size()) != model.class_count) {
    throw Error(ErrorCode::MalformedModel, "sidecar inconsistent with net shape");
  }
  model.trunk_layer_count();  // validates the l2_normalize layer exists
  return model;
}

std::string trace_to_csv(const TrainingTrace& trace) {
  std::ostringstream out;
  out << "epoch,loss,nc1,nc2_gap,uniformity_variance\n";
  for (size_t e = 0; e < trace.size(); ++e) {
    out << (e + 1) << ',' << fmt_double(trace[e].loss) << ',' << fmt_double(trace[e].nc1)
        << ',' << fmt_double(trace[e].nc2_gap) << ','
        << fmt_double(trace[e].uniformity_variance) << '\n';
  }
  return out.str();
}

}  // namespace ncse
