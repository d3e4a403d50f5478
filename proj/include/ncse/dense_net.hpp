#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ncse/rng.hpp"
#include "ncse/types.hpp"

namespace ncse {

enum class Activation : std::uint8_t {
  kIdentity = 0,
  kRelu = 1,
  kTanh = 2,
  kL2Normalize = 3,  // row-wise normalization of the linear output
  kSigmoid = 4,
};

struct Layer {
  Mat weights;  // fan_in x fan_out
  Vec bias;     // fan_out
  Activation activation = Activation::kIdentity;
};

class DenseNet {
 public:
  DenseNet() = default;
  explicit DenseNet(std::vector<Layer> layers);

  Index input_dim() const { return layers_.empty() ? 0 : layers_.front().weights.rows(); }
  Index output_dim() const { return layers_.empty() ? 0 : layers_.back().weights.cols(); }
  Index layer_count() const { return static_cast<Index>(layers_.size()); }

  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }

 private:
  std::vector<Layer> layers_;
};

struct ForwardCache {
  std::vector<Mat> activations;      // layer_count + 1; [0] is the input batch
  std::vector<Mat> pre_activations;  // layer_count
};

// Row-wise batch forward. Pass a cache to enable backward().
Mat forward(const DenseNet& net, const Mat& inputs, ForwardCache* cache = nullptr);

// Forward through the first `layer_count` layers only.
Mat forward_prefix(const DenseNet& net, const Mat& inputs, Index layer_count);

struct Gradients {
  std::vector<Mat> weights;
  std::vector<Vec> bias;

  static Gradients zeros_like(const DenseNet& net);
  void add_scaled(const Gradients& other, double scale);
};

// Exact gradients for all parameters given d(loss)/d(outputs); optionally
// also fills the gradient w.r.t. the input batch.
Gradients backward(const DenseNet& net, const ForwardCache& cache,
                   const Mat& output_gradient, Mat* input_gradient = nullptr);

struct SoftmaxCrossEntropy {
  double loss;  // mean negative log-likelihood
  Mat dlogits;  // (softmax - onehot) / batch
};

SoftmaxCrossEntropy softmax_cross_entropy(const Mat& logits, const std::vector<int>& labels);

struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step_count = 0;
  std::vector<Mat> first_moment_w, second_moment_w;
  std::vector<Vec> first_moment_b, second_moment_b;

  static AdamState for_net(const DenseNet& net, double learning_rate);
};

// Standard bias-corrected Adam update, in place.
void adam_step(DenseNet& net, const Gradients& grads, AdamState& state);

// Seeded He initialization for relu layers, Xavier otherwise; zero biases.
// widths/activations describe each layer's fan_out and activation in order.
DenseNet make_mlp(Index input_dim, const std::vector<Index>& widths,
                  const std::vector<Activation>& activations, RngSeed seed);

// For a scalar-output net: mean over batch rows of the squared norm of the
// output's gradient w.r.t. the first `penalty_cols` input columns. When
// `accumulate` is non-null, `weight` times the gradient of that penalty
// w.r.t. every parameter is added into it (forward-over-reverse second
// pass). Element-wise activations only.
double input_gradient_penalty(const DenseNet& net, const ForwardCache& cache,
                              Index penalty_cols, double weight, Gradients* accumulate);

// Flat binary model format: magic "NCSE", u16 version, u32 layer count,
// per-layer (u32 rows, u32 cols, u8 activation), then row-major weights and
// bias per layer as little-endian 64-bit floats. Round-trips bit-exactly.
std::string serialize_dense_net(const DenseNet& net);
DenseNet deserialize_dense_net(std::string_view bytes);

}  // namespace ncse
