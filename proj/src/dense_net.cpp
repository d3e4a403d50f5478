#include "ncse/dense_net.hpp"

#include <cmath>
#include <cstring>

#include "ncse/error.hpp"

namespace ncse {

namespace {

bool is_elementwise(Activation a) { return a != Activation::kL2Normalize; }

double stable_sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Mat apply_activation(Activation act, const Mat& z) {
  switch (act) {
    case Activation::kIdentity:
      return z;
    case Activation::kRelu:
      return z.cwiseMax(0.0);
    case Activation::kTanh:
      return z.array().tanh().matrix();
    case Activation::kSigmoid:
      return z.unaryExpr([](double v) { return stable_sigmoid(v); });
    case Activation::kL2Normalize: {
      Mat out = z;
      for (Index i = 0; i < out.rows(); ++i) {
        const double n = out.row(i).norm();
        if (n < 1e-12) {
          throw Error(ErrorCode::ZeroVector, "l2_normalize saw a zero row");
        }
        out.row(i) /= n;
      }
      return out;
    }
  }
  throw Error(ErrorCode::BadArgument, "unknown activation");
}

// First derivative from pre-activation z and activation a (element-wise only).
Mat activation_derivative(Activation act, const Mat& z, const Mat& a) {
  switch (act) {
    case Activation::kIdentity:
      return Mat::Ones(z.rows(), z.cols());
    case Activation::kRelu:
      return (z.array() > 0.0).cast<double>().matrix();
    case Activation::kTanh:
      return (1.0 - a.array().square()).matrix();
    case Activation::kSigmoid:
      return (a.array() * (1.0 - a.array())).matrix();
    case Activation::kL2Normalize:
      break;
  }
  throw Error(ErrorCode::BadArgument, "activation has no element-wise derivative");
}

Mat activation_second_derivative(Activation act, const Mat& z, const Mat& a) {
  switch (act) {
    case Activation::kIdentity:
    case Activation::kRelu:
      return Mat::Zero(z.rows(), z.cols());
    case Activation::kTanh:
      return (-2.0 * a.array() * (1.0 - a.array().square())).matrix();
    case Activation::kSigmoid:
      return (a.array() * (1.0 - a.array()) * (1.0 - 2.0 * a.array())).matrix();
    case Activation::kL2Normalize:
      break;
  }
  throw Error(ErrorCode::BadArgument, "activation has no second derivative");
}

void check_cache(const DenseNet& net, const ForwardCache& cache) {
  const size_t layer_count = net.layers().size();
  if (cache.activations.size() != layer_count + 1 ||
      cache.pre_activations.size() != layer_count) {
    throw Error(ErrorCode::StaleCache, "cache layer count does not match net");
  }
  const Index batch = cache.activations[0].rows();
  for (size_t l = 0; l < layer_count; ++l) {
    const Layer& layer = net.layers()[l];
    if (cache.activations[l].cols() != layer.weights.rows() ||
        cache.pre_activations[l].cols() != layer.weights.cols() ||
        cache.activations[l].rows() != batch ||
        cache.pre_activations[l].rows() != batch) {
      throw Error(ErrorCode::StaleCache, "cache shapes do not match net");
    }
  }
}

}  // namespace

DenseNet::DenseNet(std::vector<Layer> layers) : layers_(std::move(layers)) {
  int l2_count = 0;
  for (size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    if (layer.weights.rows() < 1 || layer.weights.cols() < 1 ||
        layer.bias.size() != layer.weights.cols()) {
      throw Error(ErrorCode::ShapeMismatch, "layer weight/bias shapes inconsistent");
    }
    if (l > 0 && layers_[l - 1].weights.cols() != layer.weights.rows()) {
      throw Error(ErrorCode::ShapeMismatch, "adjacent layer dimensions do not chain");
    }
    if (layer.activation == Activation::kL2Normalize) ++l2_count;
  }
  if (l2_count > 1) {
    throw Error(ErrorCode::BadArgument, "at most one l2_normalize layer allowed");
  }
}

Mat forward(const DenseNet& net, const Mat& inputs, ForwardCache* cache) {
  if (inputs.cols() != net.input_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "forward input width != net input_dim");
  }
  if (cache) {
    cache->activations.clear();
    cache->pre_activations.clear();
    cache->activations.push_back(inputs);
  }
  Mat a = inputs;
  for (const Layer& layer : net.layers()) {
    Mat z = a * layer.weights;
    z.rowwise() += layer.bias.transpose();
    a = apply_activation(layer.activation, z);
    if (cache) {
      cache->pre_activations.push_back(std::move(z));
      cache->activations.push_back(a);
    }
  }
  return a;
}

Mat forward_prefix(const DenseNet& net, const Mat& inputs, Index layer_count) {
  if (layer_count < 0 || layer_count > net.layer_count()) {
    throw Error(ErrorCode::BadArgument, "forward_prefix layer count out of range");
  }
  if (inputs.cols() != net.input_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "forward input width != net input_dim");
  }
  Mat a = inputs;
  for (Index l = 0; l < layer_count; ++l) {
    const Layer& layer = net.layers()[static_cast<size_t>(l)];
    Mat z = a * layer.weights;
    z.rowwise() += layer.bias.transpose();
    a = apply_activation(layer.activation, z);
  }
  return a;
}

Gradients Gradients::zeros_like(const DenseNet& net) {
  Gradients g;
  g.weights.reserve(net.layers().size());
  g.bias.reserve(net.layers().size());
  for (const Layer& layer : net.layers()) {
    g.weights.emplace_back(Mat::Zero(layer.weights.rows(), layer.weights.cols()));
    g.bias.emplace_back(Vec::Zero(layer.bias.size()));
  }
  return g;
}

void Gradients::add_scaled(const Gradients& other, double scale) {
  if (other.weights.size() != weights.size()) {
    throw Error(ErrorCode::ShapeMismatch, "gradient layer counts differ");
  }
  for (size_t l = 0; l < weights.size(); ++l) {
    weights[l] += scale * other.weights[l];
    bias[l] += scale * other.bias[l];
  }
}

Gradients backward(const DenseNet& net, const ForwardCache& cache,
                   const Mat& output_gradient, Mat* input_gradient) {
  check_cache(net, cache);
  const Index layer_count = net.layer_count();
  if (output_gradient.rows() != cache.activations[0].rows() ||
      output_gradient.cols() != net.output_dim()) {
    throw Error(ErrorCode::StaleCache, "output gradient shape mismatch");
  }

  Gradients grads = Gradients::zeros_like(net);
  Mat da = output_gradient;
  for (Index l = layer_count - 1; l >= 0; --l) {
    const Layer& layer = net.layers()[static_cast<size_t>(l)];
    const Mat& z = cache.pre_activations[static_cast<size_t>(l)];
    const Mat& a = cache.activations[static_cast<size_t>(l) + 1];
    const Mat& a_prev = cache.activations[static_cast<size_t>(l)];

    Mat dz;
    if (layer.activation == Activation::kL2Normalize) {
      // Jacobian of y = x/||x|| is (I - y y^T)/||x||, applied per row.
      dz.resize(z.rows(), z.cols());
      for (Index i = 0; i < z.rows(); ++i) {
        const double norm = z.row(i).norm();
        const RowVec y = a.row(i);
        dz.row(i) = (da.row(i) - da.row(i).dot(y) * y) / norm;
      }
    } else {
      dz = da.cwiseProduct(activation_derivative(layer.activation, z, a));
    }

    grads.weights[static_cast<size_t>(l)] = a_prev.transpose() * dz;
    grads.bias[static_cast<size_t>(l)] = dz.colwise().sum().transpose();
    if (l > 0 || input_gradient) da = dz * layer.weights.transpose();
  }
  if (input_gradient) *input_gradient = da;
  return grads;
}

SoftmaxCrossEntropy softmax_cross_entropy(const Mat& logits, const std::vector<int>& labels) {
  const Index batch = logits.rows();
  const Index classes = logits.cols();
  if (static_cast<Index>(labels.size()) != batch) {
    throw Error(ErrorCode::ShapeMismatch, "label count != logit rows");
  }
  SoftmaxCrossEntropy out;
  out.dlogits.resize(batch, classes);
  double loss = 0.0;
  for (Index i = 0; i < batch; ++i) {
    const int label = labels[static_cast<size_t>(i)];
    if (label < 0 || label >= classes) {
      throw Error(ErrorCode::LabelOutOfRange, "label index exceeds logit columns");
    }
    const double row_max = logits.row(i).maxCoeff();
    const RowVec shifted = logits.row(i).array() - row_max;
    const RowVec exps = shifted.array().exp();
    const double denom = exps.sum();
    loss -= shifted[label] - std::log(denom);
    out.dlogits.row(i) = exps / denom;
    out.dlogits(i, label) -= 1.0;
  }
  out.loss = loss / static_cast<double>(batch);
  out.dlogits /= static_cast<double>(batch);
  return out;
}

AdamState AdamState::for_net(const DenseNet& net, double learning_rate) {
  AdamState state;
  state.learning_rate = learning_rate;
  for (const Layer& layer : net.layers()) {
    state.first_moment_w.emplace_back(Mat::Zero(layer.weights.rows(), layer.weights.cols()));
    state.second_moment_w.emplace_back(Mat::Zero(layer.weights.rows(), layer.weights.cols()));
    state.first_moment_b.emplace_back(Vec::Zero(layer.bias.size()));
    state.second_moment_b.emplace_back(Vec::Zero(layer.bias.size()));
  }
  return state;
}

namespace {

template <typename Param>
void adam_update(Param& param, const Param& grad, Param& m, Param& v,
                 double lr_t, double beta1, double beta2, double epsilon) {
  if (param.rows() != grad.rows() || param.cols() != grad.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "adam gradient shape mismatch");
  }
  m = beta1 * m + (1.0 - beta1) * grad;
  v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad);
  param.array() -= lr_t * m.array() / (v.array().sqrt() + epsilon);
}

}  // namespace

void adam_step(DenseNet& net, const Gradients& grads, AdamState& state) {
  if (grads.weights.size() != net.layers().size() ||
      state.first_moment_w.size() != net.layers().size()) {
    throw Error(ErrorCode::ShapeMismatch, "adam state/gradient layer counts differ");
  }
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double lr_t = state.learning_rate *
                      std::sqrt(1.0 - std::pow(state.beta2, t)) /
                      (1.0 - std::pow(state.beta1, t));
  for (size_t l = 0; l < net.layers().size(); ++l) {
    adam_update(net.layers()[l].weights, grads.weights[l], state.first_moment_w[l],
                state.second_moment_w[l], lr_t, state.beta1, state.beta2, state.epsilon);
    adam_update(net.layers()[l].bias, grads.bias[l], state.first_moment_b[l],
                state.second_moment_b[l], lr_t, state.beta1, state.beta2, state.epsilon);
  }
}

DenseNet make_mlp(Index input_dim, const std::vector<Index>& widths,
                  const std::vector<Activation>& activations, RngSeed seed) {
  if (widths.empty() || widths.size() != activations.size()) {
    throw Error(ErrorCode::BadArgument, "make_mlp widths/activations mismatch");
  }
  Rng rng(seed);
  std::vector<Layer> layers;
  Index fan_in = input_dim;
  for (size_t l = 0; l < widths.size(); ++l) {
    const Index fan_out = widths[l];
    const double std_dev = activations[l] == Activation::kRelu
                               ? std::sqrt(2.0 / static_cast<double>(fan_in))
                               : std::sqrt(1.0 / static_cast<double>(fan_in));
    Layer layer;
    layer.weights.resize(fan_in, fan_out);
    for (Index i = 0; i < fan_in; ++i) {
      for (Index j = 0; j < fan_out; ++j) layer.weights(i, j) = std_dev * rng.normal();
    }
    layer.bias = Vec::Zero(fan_out);
    layer.activation = activations[l];
    layers.push_back(std::move(layer));
    fan_in = fan_out;
  }
  return DenseNet(std::move(layers));
}

double input_gradient_penalty(const DenseNet& net, const ForwardCache& cache,
                              Index penalty_cols, double weight, Gradients* accumulate) {
  check_cache(net, cache);
  if (net.output_dim() != 1) {
    throw Error(ErrorCode::ShapeMismatch, "gradient penalty needs a scalar output");
  }
  for (const Layer& layer : net.layers()) {
    if (!is_elementwise(layer.activation)) {
      throw Error(ErrorCode::BadArgument,
                  "gradient penalty supports element-wise activations only");
    }
  }
  const Index layer_count = net.layer_count();
  const Index batch = cache.activations[0].rows();
  if (penalty_cols < 1 || penalty_cols > net.input_dim()) {
    throw Error(ErrorCode::BadArgument, "penalty column range out of bounds");
  }

  std::vector<Mat> deriv(static_cast<size_t>(layer_count));
  for (Index l = 0; l < layer_count; ++l) {
    const Layer& layer = net.layers()[static_cast<size_t>(l)];
    deriv[static_cast<size_t>(l)] = activation_derivative(
        layer.activation, cache.pre_activations[static_cast<size_t>(l)],
        cache.activations[static_cast<size_t>(l) + 1]);
  }

  // Input gradient of the scalar output, per batch row.
  Mat da = Mat::Ones(batch, 1);
  for (Index l = layer_count - 1; l >= 0; --l) {
    const Mat dz = da.cwiseProduct(deriv[static_cast<size_t>(l)]);
    da = dz * net.layers()[static_cast<size_t>(l)].weights.transpose();
  }
  const Mat masked = da.leftCols(penalty_cols);
  const double penalty = masked.squaredNorm() / static_cast<double>(batch);
  if (!accumulate) return penalty;

  // Tangent direction v = d(penalty)/d(input gradient); propagating it
  // forward gives h = v . grad_x f, whose parameter gradient (with v held
  // fixed) is exactly d(penalty)/d(params).
  Mat v = Mat::Zero(batch, net.input_dim());
  v.leftCols(penalty_cols) = (2.0 / static_cast<double>(batch)) * masked;

  std::vector<Mat> tangent_pre(static_cast<size_t>(layer_count));
  std::vector<Mat> tangent_act(static_cast<size_t>(layer_count) + 1);
  tangent_act[0] = v;
  for (Index l = 0; l < layer_count; ++l) {
    tangent_pre[static_cast<size_t>(l)] =
        tangent_act[static_cast<size_t>(l)] * net.layers()[static_cast<size_t>(l)].weights;
    tangent_act[static_cast<size_t>(l) + 1] =
        deriv[static_cast<size_t>(l)].cwiseProduct(tangent_pre[static_cast<size_t>(l)]);
  }

  // Reverse pass over the tangent computation; second derivatives enter
  // through the activation curvature.
  Mat bar_tangent_act = Mat::Ones(batch, 1);
  Mat bar_act = Mat::Zero(batch, 1);
  for (Index l = layer_count - 1; l >= 0; --l) {
    const Layer& layer = net.layers()[static_cast<size_t>(l)];
    const Mat& z = cache.pre_activations[static_cast<size_t>(l)];
    const Mat& a = cache.activations[static_cast<size_t>(l) + 1];
    const Mat& a_prev = cache.activations[static_cast<size_t>(l)];
    const Mat second = activation_second_derivative(layer.activation, z, a);

    const Mat bar_tangent_pre = deriv[static_cast<size_t>(l)].cwiseProduct(bar_tangent_act);
    const Mat bar_pre =
        second.cwiseProduct(tangent_pre[static_cast<size_t>(l)]).cwiseProduct(bar_tangent_act) +
        deriv[static_cast<size_t>(l)].cwiseProduct(bar_act);

    accumulate->weights[static_cast<size_t>(l)] +=
        weight * (a_prev.transpose() * bar_pre +
                  tangent_act[static_cast<size_t>(l)].transpose() * bar_tangent_pre);
    accumulate->bias[static_cast<size_t>(l)] +=
        weight * bar_pre.colwise().sum().transpose();

    if (l > 0) {
      bar_tangent_act = bar_tangent_pre * layer.weights.transpose();
      bar_act = bar_pre * layer.weights.transpose();
    }
  }
  return penalty;
}

namespace {

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, sizeof(bits));
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  std::uint64_t take(size_t n) {
    if (pos_ + n > data_.size()) {
      throw Error(ErrorCode::MalformedModel, "model file truncated");
    }
    std::uint64_t v = 0;
    for (size_t i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += n;
    return v;
  }

  double take_f64() {
    const std::uint64_t bits = take(8);
    double d;
    std::memcpy(&d, &bits, sizeof(d));
    return d;
  }

  bool exhausted() const { return pos_ == data_.size(); }

 private:
  std::string_view data_;
  size_t pos_ = 0;
};

constexpr char kMagic[4] = {'N', 'C', 'S', 'E'};
constexpr std::uint16_t kFormatVersion = 1;

}  // namespace

std::string serialize_dense_net(const DenseNet& net) {
  std::string out;
  out.append(kMagic, 4);
  put_u16(out, kFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(net.layer_count()));
  for (const Layer& layer : net.layers()) {
    put_u32(out, static_cast<std::uint32_t>(layer.weights.rows()));
    put_u32(out, static_cast<std::uint32_t>(layer.weights.cols()));
    out.push_back(static_cast<char>(layer.activation));
  }
  for (const Layer& layer : net.layers()) {
    for (Index i = 0; i < layer.weights.rows(); ++i) {
      for (Index j = 0; j < layer.weights.cols(); ++j) put_f64(out, layer.weights(i, j));
    }
    for (Index j = 0; j < layer.bias.size(); ++j) put_f64(out, layer.bias[j]);
  }
  return out;
}

DenseNet deserialize_dense_net(std::string_view bytes) {
  ByteReader reader(bytes);
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorCode::MalformedModel, "bad magic bytes");
  }
  reader.take(4);
  const auto version = static_cast<std::uint16_t>(reader.take(2));
  if (version != kFormatVersion) {
    throw Error(ErrorCode::MalformedModel, "unsupported model format version");
  }
  const auto layer_count = static_cast<std::uint32_t>(reader.take(4));
  if (layer_count == 0 || layer_count > 1024) {
    throw Error(ErrorCode::MalformedModel, "implausible layer count");
  }
  struct Shape {
    Index rows, cols;
    Activation act;
  };
  std::vector<Shape> shapes;
  for (std::uint32_t l = 0; l < layer_count; ++l) {
    const auto rows = static_cast<Index>(reader.take(4));
    const auto cols = static_cast<Index>(reader.take(4));
    const auto tag = static_cast<std::uint8_t>(reader.take(1));
    if (rows < 1 || cols < 1 || tag > 4) {
      throw Error(ErrorCode::MalformedModel, "bad layer header");
    }
    shapes.push_back({rows, cols, static_cast<Activation>(tag)});
  }
  std::vector<Layer> layers;
  for (const Shape& s : shapes) {
    Layer layer;
    layer.weights.resize(s.rows, s.cols);
    for (Index i = 0; i < s.rows; ++i) {
      for (Index j = 0; j < s.cols; ++j) layer.weights(i, j) = reader.take_f64();
    }
    layer.bias.resize(s.cols);
    for (Index j = 0; j < s.cols; ++j) layer.bias[j] = reader.take_f64();
    layer.activation = s.act;
    layers.push_back(std::move(layer));
  }
  if (!reader.exhausted()) {
    throw Error(ErrorCode::MalformedModel, "trailing bytes after parameters");
  }
  return DenseNet(std::move(layers));
}

}  // namespace ncse
