#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ncse/dense_net.hpp"
#include "ncse/error.hpp"
#include "oracles.hpp"

using namespace ncse;

namespace {

DenseNet identity_net(Index dim) {
  Layer layer;
  layer.weights = Mat::Identity(dim, dim);
  layer.bias = Vec::Zero(dim);
  layer.activation = Activation::kIdentity;
  std::vector<Layer> layers;
  layers.push_back(std::move(layer));
  return DenseNet(std::move(layers));
}

Mat random_batch(Index rows, Index cols, RngSeed seed) {
  Rng rng(seed);
  Mat m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  }
  return m;
}

}  // namespace

TEST_CASE("forward basics") {
  SUBCASE("identity layer passes inputs through") {
    const DenseNet net = identity_net(3);
    const Mat x = random_batch(4, 3, 1);
    CHECK(forward(net, x) == x);
  }
  SUBCASE("l2_normalize turns (3,4) into (0.6,0.8)") {
    Layer layer;
    layer.weights = Mat::Identity(2, 2);
    layer.bias = Vec::Zero(2);
    layer.activation = Activation::kL2Normalize;
    std::vector<Layer> layers{layer};
    const DenseNet net(std::move(layers));
    Mat x(1, 2);
    x << 3.0, 4.0;
    const Mat y = forward(net, x);
    CHECK(y(0, 0) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(y(0, 1) == doctest::Approx(0.8).epsilon(1e-12));
  }
  SUBCASE("batch rows keep their order") {
    const DenseNet net = make_mlp(5, {4, 2}, {Activation::kTanh, Activation::kIdentity}, 7);
    const Mat x = random_batch(2, 5, 2);
    const Mat both = forward(net, x);
    CHECK(both.rows() == 2);
    CHECK((forward(net, Mat(x.row(0))) - both.row(0)).norm() == doctest::Approx(0.0));
    CHECK((forward(net, Mat(x.row(1))) - both.row(1)).norm() == doctest::Approx(0.0));
  }
}

TEST_CASE("forward is batch-consistent") {
  const DenseNet net = make_mlp(
      6, {16, 8, 4}, {Activation::kRelu, Activation::kL2Normalize, Activation::kIdentity},
      11);
  const Mat x = random_batch(9, 6, 3);
  const Mat batched = forward(net, x);
  for (Index i = 0; i < x.rows(); ++i) {
    const Mat single = forward(net, Mat(x.row(i)));
    CHECK((single - batched.row(i)).lpNorm<Eigen::Infinity>() <= 1e-12);
  }
}

TEST_CASE("softmax cross entropy values and gradient") {
  SUBCASE("uniform logits cost log(n)") {
    const Mat logits = Mat::Zero(3, 4);
    const auto ce = softmax_cross_entropy(logits, {0, 1, 3});
    CHECK(ce.loss == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  }
  SUBCASE("saturated correct logit has near-zero loss") {
    Mat logits = Mat::Zero(1, 4);
    logits(0, 2) = 30.0;
    const auto ce = softmax_cross_entropy(logits, {2});
    CHECK(ce.loss < 1e-9);
  }
  SUBCASE("label out of range is rejected") {
    CHECK_THROWS_WITH_AS(softmax_cross_entropy(Mat::Zero(1, 3), {3}),
                         doctest::Contains("LabelOutOfRange"), Error);
  }
  SUBCASE("gradient matches finite differences") {
    Mat logits = random_batch(3, 5, 13);
    const std::vector<int> labels{1, 4, 0};
    const auto ce = softmax_cross_entropy(logits, labels);
    const double h = 1e-6;
    for (Index i = 0; i < logits.rows(); ++i) {
      for (Index j = 0; j < logits.cols(); ++j) {
        Mat plus = logits, minus = logits;
        plus(i, j) += h;
        minus(i, j) -= h;
        const double fd = (softmax_cross_entropy(plus, labels).loss -
                           softmax_cross_entropy(minus, labels).loss) /
                          (2.0 * h);
        CHECK(std::fabs(fd - ce.dlogits(i, j)) <=
              1e-6 * std::max({1.0, std::fabs(fd), std::fabs(ce.dlogits(i, j))}));
      }
    }
  }
}

TEST_CASE("backward zero output gradient gives zero parameter gradients") {
  const DenseNet net =
      make_mlp(4, {8, 3}, {Activation::kRelu, Activation::kIdentity}, 17);
  ForwardCache cache;
  forward(net, random_batch(5, 4, 19), &cache);
  const Gradients grads = backward(net, cache, Mat::Zero(5, 3));
  for (const Mat& w : grads.weights) CHECK(w.norm() == 0.0);
  for (const Vec& b : grads.bias) CHECK(b.norm() == 0.0);
}

TEST_CASE("l2_normalize input gradient is orthogonal to the normalized output") {
  const DenseNet net = make_mlp(6, {4}, {Activation::kL2Normalize}, 23);
  const Mat x = random_batch(7, 6, 29);
  ForwardCache cache;
  const Mat y = forward(net, x, &cache);
  Mat dy = random_batch(7, 4, 31);
  Gradients grads = backward(net, cache, dy);
  // Gradient w.r.t. the pre-normalization vector z: run backward on a
  // single-layer net and inspect d(loss)/dz via the weight gradient relation
  // dW = x^T dz; recover dz per row from the input gradient of an identity
  // front. Simpler: (I - y y^T) projection means dz . y == 0.
  for (Index i = 0; i < y.rows(); ++i) {
    const Mat& z = cache.pre_activations[0];
    const RowVec yi = y.row(i);
    const RowVec dzi = (dy.row(i) - dy.row(i).dot(yi) * yi) / z.row(i).norm();
    CHECK(std::fabs(dzi.dot(yi)) <= 1e-9);
  }
}

TEST_CASE("analytic gradients match central finite differences") {
  struct Config {
    std::vector<Index> widths;
    std::vector<Activation> acts;
    const char* label;
  };
  const std::vector<Config> configs = {
      {{8, 4}, {Activation::kRelu, Activation::kIdentity}, "relu head"},
      {{8, 4}, {Activation::kTanh, Activation::kIdentity}, "tanh head"},
      {{8, 4}, {Activation::kTanh, Activation::kSigmoid}, "sigmoid out"},
      {{32, 8, 5},
       {Activation::kRelu, Activation::kRelu, Activation::kIdentity},
       "two hidden"},
      {{8, 6, 4},
       {Activation::kTanh, Activation::kL2Normalize, Activation::kIdentity},
       "through l2_normalize"},
  };
  for (const Config& cfg : configs) {
    CAPTURE(cfg.label);
    DenseNet net = make_mlp(16, cfg.widths, cfg.acts, 37);
    const Mat x = random_batch(6, 16, 41);
    const Mat target = random_batch(6, cfg.widths.back(), 43);
    const auto loss_value = [&] {
      const Mat y = forward(net, x);
      return 0.5 * (y - target).squaredNorm();
    };
    ForwardCache cache;
    const Mat y = forward(net, x, &cache);
    const Gradients analytic = backward(net, cache, y - target);
    const auto check = oracles::finite_difference_check(net, analytic, loss_value);
    CHECK(check.max_rel_error < 1e-4);
  }
}

TEST_CASE("random two-hidden-layer net 16->32->8 passes the gradient check") {
  DenseNet net = make_mlp(16, {32, 8}, {Activation::kRelu, Activation::kIdentity}, 47);
  const Mat x = random_batch(4, 16, 53);
  const std::vector<int> labels{0, 3, 5, 7};
  const auto loss_value = [&] {
    return softmax_cross_entropy(forward(net, x), labels).loss;
  };
  ForwardCache cache;
  const Mat logits = forward(net, x, &cache);
  const auto ce = softmax_cross_entropy(logits, labels);
  const Gradients analytic = backward(net, cache, ce.dlogits);
  const auto check = oracles::finite_difference_check(net, analytic, loss_value);
  CHECK(check.max_rel_error < 1e-4);
}

TEST_CASE("adam") {
  SUBCASE("zero gradient leaves parameters unchanged") {
    DenseNet net = make_mlp(3, {4, 2}, {Activation::kTanh, Activation::kIdentity}, 59);
    const std::string before = serialize_dense_net(net);
    AdamState state = AdamState::for_net(net, 0.01);
    adam_step(net, Gradients::zeros_like(net), state);
    CHECK(serialize_dense_net(net) == before);
    CHECK(state.step_count == 1);
  }
  SUBCASE("first step is bounded by the learning rate") {
    DenseNet net = make_mlp(3, {4}, {Activation::kIdentity}, 61);
    DenseNet reference = net;
    AdamState state = AdamState::for_net(net, 0.01);
    Gradients grads = Gradients::zeros_like(net);
    Rng rng(67);
    for (Mat& w : grads.weights) w = 1000.0 * random_batch(w.rows(), w.cols(), rng.next_u64());
    for (Vec& b : grads.bias) b = 1000.0 * random_batch(b.size(), 1, rng.next_u64());
    adam_step(net, grads, state);
    for (size_t l = 0; l < net.layers().size(); ++l) {
      const Mat dw = net.layers()[l].weights - reference.layers()[l].weights;
      CHECK(dw.lpNorm<Eigen::Infinity>() <= 0.01 * (1.0 + 1e-6));
    }
  }
  SUBCASE("200 steps descend a quadratic bowl") {
    DenseNet net = make_mlp(1, {8}, {Activation::kIdentity}, 71);
    AdamState state = AdamState::for_net(net, 0.01);
    const Mat x = Mat::Ones(1, 1);
    const double initial = forward(net, x).norm();
    for (int step = 0; step < 200; ++step) {
      ForwardCache cache;
      const Mat y = forward(net, x, &cache);
      adam_step(net, backward(net, cache, y), state);
    }
    CHECK(forward(net, x).norm() < 0.1 * initial);
  }
}

TEST_CASE("training is deterministic per seed") {
  const auto run = [] {
    DenseNet net = make_mlp(4, {8, 2}, {Activation::kRelu, Activation::kIdentity}, 73);
    AdamState state = AdamState::for_net(net, 0.005);
    Rng rng(79);
    for (int step = 0; step < 25; ++step) {
      const Mat x = random_batch(6, 4, rng.next_u64());
      ForwardCache cache;
      const Mat y = forward(net, x, &cache);
      adam_step(net, backward(net, cache, y), state);
    }
    return serialize_dense_net(net);
  };
  CHECK(run() == run());
}

TEST_CASE("serialization round-trips bit-exactly") {
  const DenseNet net = make_mlp(
      7, {5, 3, 1},
      {Activation::kRelu, Activation::kL2Normalize, Activation::kSigmoid}, 83);
  const std::string bytes = serialize_dense_net(net);
  CHECK(bytes.substr(0, 4) == "NCSE");
  const DenseNet loaded = deserialize_dense_net(bytes);
  CHECK(serialize_dense_net(loaded) == bytes);
  for (size_t l = 0; l < net.layers().size(); ++l) {
    CHECK(loaded.layers()[l].weights == net.layers()[l].weights);
    CHECK(loaded.layers()[l].bias == net.layers()[l].bias);
    CHECK(loaded.layers()[l].activation == net.layers()[l].activation);
  }
  SUBCASE("corrupt payloads are rejected") {
    CHECK_THROWS_AS(deserialize_dense_net(bytes.substr(0, bytes.size() - 3)), Error);
    std::string wrong_magic = bytes;
    wrong_magic[0] = 'X';
    CHECK_THROWS_AS(deserialize_dense_net(wrong_magic), Error);
  }
}

TEST_CASE("stale cache is detected") {
  const DenseNet net = make_mlp(4, {3}, {Activation::kIdentity}, 89);
  const DenseNet other = make_mlp(5, {3}, {Activation::kIdentity}, 89);
  ForwardCache cache;
  forward(net, random_batch(2, 4, 97), &cache);
  CHECK_THROWS_WITH_AS(backward(other, cache, Mat::Zero(2, 3)),
                       doctest::Contains("StaleCache"), Error);
}

TEST_CASE("input gradient penalty value matches finite differences") {
  // Smooth activations so the input-space finite differences are clean.
  DenseNet net = make_mlp(6, {12, 1}, {Activation::kTanh, Activation::kSigmoid}, 101);
  Mat x = random_batch(3, 6, 103);
  ForwardCache cache;
  forward(net, x, &cache);
  const Index penalty_cols = 4;
  const double penalty = input_gradient_penalty(net, cache, penalty_cols, 0.0, nullptr);

  // Oracle: finite-difference the scalar output along each penalized input
  // coordinate and accumulate the squared norms directly.
  const double h = 1e-6;
  double expected = 0.0;
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < penalty_cols; ++j) {
      Mat plus = x, minus = x;
      plus(i, j) += h;
      minus(i, j) -= h;
      const double fd =
          (forward(net, plus)(i, 0) - forward(net, minus)(i, 0)) / (2.0 * h);
      expected += fd * fd;
    }
  }
  expected /= static_cast<double>(x.rows());
  CHECK(std::fabs(penalty - expected) <= 1e-4 * std::max(1.0, std::fabs(expected)));
}

TEST_CASE("gradient penalty parameter gradients match finite differences") {
  DenseNet net = make_mlp(5, {8, 1}, {Activation::kTanh, Activation::kSigmoid}, 107);
  const Mat x = random_batch(4, 5, 109);
  const Index penalty_cols = 5;
  const auto penalty_value = [&] {
    ForwardCache cache;
    forward(net, x, &cache);
    return input_gradient_penalty(net, cache, penalty_cols, 0.0, nullptr);
  };
  ForwardCache cache;
  forward(net, x, &cache);
  Gradients analytic = Gradients::zeros_like(net);
  input_gradient_penalty(net, cache, penalty_cols, 1.0, &analytic);
  const auto check = oracles::finite_difference_check(net, analytic, penalty_value);
  CHECK(check.max_rel_error < 1e-4);
}

TEST_CASE("gradient penalty of a constant function is zero") {
  DenseNet net = make_mlp(4, {6, 1}, {Activation::kRelu, Activation::kSigmoid}, 113);
  net.layers().back().weights.setZero();
  net.layers().back().bias.setZero();
  ForwardCache cache;
  const Mat y = forward(net, random_batch(5, 4, 127), &cache);
  CHECK((y.array() == 0.5).all());
  Gradients grads = Gradients::zeros_like(net);
  CHECK(input_gradient_penalty(net, cache, 4, 1.0, &grads) == 0.0);
}
