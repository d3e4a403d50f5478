#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ncse/encoder.hpp"
#include "ncse/error.hpp"
#include "ncse/motion.hpp"

using namespace ncse;

namespace {

// One trained run shared by the slower checks (n=8, J=4, p=16, 400 epochs).
struct PinnedRun {
  MotionDataset dataset;
  EncoderTrainResult trained;
  EncoderModel untrained;
  ClassMeans trained_means;
  ClassMeans untrained_means;
};

const PinnedRun& pinned_run() {
  static const PinnedRun run = [] {
    PinnedRun r;
    r.dataset = synth_dataset(8, 4, 30.0, {1.0, 6.0}, RngSeed(3));
    const auto data = collect_window_features(r.dataset, 2.0, 0.5);
    r.untrained = make_encoder_model(data.inputs.cols(), 16, 8, 2.0, 0.5,
                                     std::vector<std::string>(8), Rng::derive(2024, 0));
    r.untrained_means = compute_class_means(r.untrained, r.dataset);
    r.trained = train_encoder(r.dataset, 16, 400, 0.01, RngSeed(2024));
    r.trained_means = compute_class_means(r.trained.model, r.dataset);
    return r;
  }();
  return run;
}

std::vector<UnitVector> axis_means(Index count, Index dim) {
  std::vector<UnitVector> means;
  for (Index i = 0; i < count; ++i) {
    Vec v = Vec::Zero(dim);
    v[i % dim] = (i / dim) % 2 == 0 ? 1.0 : -1.0;
    means.push_back(UnitVector(v));
  }
  return means;
}

}  // namespace

TEST_CASE("training collapses the synthetic dataset") {
  const PinnedRun& run = pinned_run();
  const TrainingTrace& trace = run.trained.trace;
  REQUIRE(trace.size() == 400);

  SUBCASE("loss drops below 0.05 and improves on the first epoch") {
    CHECK(trace.back().loss < 0.05);
    CHECK(trace.back().loss < trace.front().loss);
  }
  SUBCASE("trace values are finite and losses non-negative") {
    for (const TraceRow& row : trace) {
      CHECK(std::isfinite(row.loss));
      CHECK(row.loss >= 0.0);
      CHECK(std::isfinite(row.nc1));
      CHECK(std::isfinite(row.nc2_gap));
      CHECK(std::isfinite(row.uniformity_variance));
    }
  }
  SUBCASE("within-class variability keeps shrinking") {
    CHECK(trace.back().nc1 < trace[trace.size() / 4].nc1);
  }
  SUBCASE("trained variability is far below the untrained model") {
    const double untrained =
        nc1_variability(run.untrained, run.dataset, run.untrained_means);
    const double trained =
        nc1_variability(run.trained.model, run.dataset, run.trained_means);
    CHECK(trained < 0.2 * untrained);
    CHECK(trained >= 0.0);
  }
  SUBCASE("class means approach the simplex configuration") {
    const EtfDeviation etf = nc2_etf_deviation(run.trained_means.means);
    CHECK(std::fabs(etf.mean_cosine - (-1.0 / 7.0)) < 0.05);
    CHECK(etf.cosine_std < 0.05);
    CHECK(etf.etf_feasible);
  }
  SUBCASE("nearest-center classification recovers nearly all windows") {
    const auto data = collect_window_features(run.dataset, 2.0, 0.5);
    const Mat feats = run.trained.model.features(data.inputs);
    Index correct = 0;
    for (Index i = 0; i < feats.rows(); ++i) {
      const UnitVector z = normalize(Vec(feats.row(i).transpose()));
      if (nearest_center(z, run.trained_means.means) ==
          data.labels[static_cast<size_t>(i)]) {
        ++correct;
      }
    }
    CHECK(static_cast<double>(correct) / static_cast<double>(feats.rows()) >= 0.99);
  }
  SUBCASE("training is deterministic per seed") {
    const auto again = train_encoder(run.dataset, 16, 3, 0.01, RngSeed(2024));
    const auto reference = train_encoder(run.dataset, 16, 3, 0.01, RngSeed(2024));
    CHECK(serialize_dense_net(again.model.net) ==
          serialize_dense_net(reference.model.net));
    CHECK(again.trace.back().loss == reference.trace.back().loss);
  }
}

TEST_CASE("train_encoder rejects unusable datasets") {
  CHECK_THROWS_WITH_AS(train_encoder(MotionDataset{}, 8, 1, 0.01, 1),
                       doctest::Contains("EmptyDataset"), Error);
  const MotionDataset one = synth_dataset(1, 4, 30.0, {2.0, 3.0}, RngSeed(5));
  CHECK_THROWS_WITH_AS(train_encoder(one, 8, 1, 0.01, 1),
                       doctest::Contains("SingleClassDataset"), Error);
}

TEST_CASE("class means") {
  SUBCASE("all means are unit norm") {
    for (const UnitVector& u : pinned_run().trained_means.means) {
      CHECK(std::fabs(u.vec().norm() - 1.0) <= 1e-9);
    }
  }
  SUBCASE("a single-window class mean equals that window's feature") {
    // 2.0 s clips produce exactly one window each.
    const MotionDataset ds = synth_dataset(2, 4, 30.0, {2.0, 2.0}, RngSeed(7));
    const auto data = collect_window_features(ds, 2.0, 0.5);
    REQUIRE(data.inputs.rows() == 2);
    EncoderModel model = make_encoder_model(data.inputs.cols(), 8, 2, 2.0, 0.5,
                                            {"a", "b"}, RngSeed(11));
    const ClassMeans means = compute_class_means(model, ds);
    const Mat feats = model.features(data.inputs);
    for (Index c = 0; c < 2; ++c) {
      CHECK((means.means[static_cast<size_t>(c)].vec() - feats.row(c).transpose())
                .lpNorm<Eigen::Infinity>() <= 1e-12);
      CHECK(means.counts[static_cast<size_t>(c)] == 1);
    }
  }
  SUBCASE("mean of features is order independent") {
    const PinnedRun& run = pinned_run();
    const auto data = collect_window_features(run.dataset, 2.0, 0.5);
    const Mat feats = run.trained.model.features(data.inputs);
    std::vector<Vec> sums(8, Vec::Zero(16));
    std::vector<double> counts(8, 0.0);
    for (Index i = feats.rows() - 1; i >= 0; --i) {  // reversed accumulation
      sums[static_cast<size_t>(data.labels[static_cast<size_t>(i)])] +=
          feats.row(i).transpose();
      counts[static_cast<size_t>(data.labels[static_cast<size_t>(i)])] += 1.0;
    }
    for (size_t c = 0; c < 8; ++c) {
      const Vec mean = normalize(Vec(sums[c] / counts[c])).vec();
      CHECK((mean - run.trained_means.means[c].vec()).lpNorm<Eigen::Infinity>() <= 1e-12);
    }
  }
}

TEST_CASE("nc1 of a one-window-per-class dataset is zero") {
  const MotionDataset ds = synth_dataset(3, 4, 30.0, {2.0, 2.0}, RngSeed(13));
  EncoderModel model = make_encoder_model(
      collect_window_features(ds, 2.0, 0.5).inputs.cols(), 8, 3, 2.0, 0.5,
      {"a", "b", "c"}, RngSeed(17));
  const ClassMeans means = compute_class_means(model, ds);
  CHECK(nc1_variability(model, ds, means) <= 1e-18);
}

TEST_CASE("nc2 deviation statistics") {
  SUBCASE("exact simplex scores zero gap") {
    const SimplexEtf etf = make_simplex_etf(4, 8, RngSeed(19));
    const EtfDeviation dev = nc2_etf_deviation(etf.centers);
    CHECK(dev.mean_cosine == doctest::Approx(-1.0 / 3.0).epsilon(1e-9));
    CHECK(dev.cosine_std <= 1e-9);
    CHECK(dev.etf_gap <= 1e-9);
    CHECK(dev.etf_feasible);
  }
  SUBCASE("antipodal pair") {
    const SimplexEtf etf = make_simplex_etf(2, 4, RngSeed(23));
    CHECK(nc2_etf_deviation(etf.centers).mean_cosine == doctest::Approx(-1.0).epsilon(1e-9));
  }
  SUBCASE("infeasible configurations are flagged, not rejected") {
    const EtfDeviation dev = nc2_etf_deviation(axis_means(4, 2));
    CHECK_FALSE(dev.etf_feasible);
    CHECK(std::isfinite(dev.etf_gap));
  }
}

TEST_CASE("uniformity variance diagnostic") {
  SUBCASE("simplex centers beat random centers over 20 seeds") {
    std::vector<double> etf_vars, random_vars;
    const SimplexEtf etf = make_simplex_etf(16, 64, RngSeed(29));
    for (int s = 0; s < 20; ++s) {
      etf_vars.push_back(uniformity_variance(etf.centers, 1000, RngSeed(1000 + s)).variance);
      const auto centers = sample_uniform_sphere(64, 16, RngSeed(5000 + s));
      random_vars.push_back(uniformity_variance(centers, 1000, RngSeed(1000 + s)).variance);
    }
    std::sort(etf_vars.begin(), etf_vars.end());
    std::sort(random_vars.begin(), random_vars.end());
    const double etf_median = 0.5 * (etf_vars[9] + etf_vars[10]);
    const double random_median = 0.5 * (random_vars[9] + random_vars[10]);
    CHECK(etf_median < random_median);
  }
  SUBCASE("antipodal pair splits evenly") {
    const SimplexEtf etf = make_simplex_etf(2, 8, RngSeed(31));
    const UniformityReport report = uniformity_variance(etf.centers, 1000, RngSeed(39));
    CHECK(report.counts[0] + report.counts[1] == 2000);
    CHECK(report.variance < 200.0);  // binomial concentration, pinned seed
  }
  SUBCASE("counts sum to samples_per_center * n") {
    const auto means = axis_means(5, 8);
    const UniformityReport report = uniformity_variance(means, 200, RngSeed(41));
    Index total = 0;
    for (Index c : report.counts) total += c;
    CHECK(total == 1000);
  }
  SUBCASE("permuting the means permutes the counts") {
    auto means = axis_means(6, 16);
    const UniformityReport before = uniformity_variance(means, 500, RngSeed(43));
    std::rotate(means.begin(), means.begin() + 2, means.end());
    const UniformityReport after = uniformity_variance(means, 500, RngSeed(43));
    for (size_t i = 0; i < means.size(); ++i) {
      CHECK(after.counts[i] == before.counts[(i + 2) % means.size()]);
    }
    CHECK(after.variance == doctest::Approx(before.variance).epsilon(1e-12));
  }
}

TEST_CASE("nearest_center selection") {
  const auto means = axis_means(4, 4);
  SUBCASE("exact hit") {
    CHECK(nearest_center(means[3], means) == 3);
  }
  SUBCASE("equidistant candidates resolve to the lowest index") {
    Vec v = Vec::Zero(4);
    v[0] = 1.0;
    v[1] = 1.0;
    CHECK(nearest_center(normalize(v), means) == 0);
  }
  SUBCASE("repeated calls are stable") {
    const auto z = sample_uniform_sphere(4, 1, RngSeed(47)).front();
    const Index first = nearest_center(z, means);
    for (int i = 0; i < 10; ++i) CHECK(nearest_center(z, means) == first);
  }
  SUBCASE("dimension mismatch is rejected") {
    Vec v = Vec::Zero(6);
    v[0] = 1.0;
    CHECK_THROWS_AS(nearest_center(UnitVector(v), means), Error);
  }
}

TEST_CASE("encoder serialization round trip") {
  const PinnedRun& run = pinned_run();
  const std::string bytes = serialize_dense_net(run.trained.model.net);
  const std::string sidecar = encoder_sidecar_json(run.trained.model);
  const EncoderModel loaded = load_encoder(bytes, sidecar);
  CHECK(loaded.latent_dim == 16);
  CHECK(loaded.class_count == 8);
  CHECK(loaded.class_names == run.trained.model.class_names);
  const auto data = collect_window_features(run.dataset, loaded.window_s, loaded.stride_s);
  CHECK((loaded.features(data.inputs) - run.trained.model.features(data.inputs)).norm() ==
        0.0);
}

TEST_CASE("trace CSV shape") {
  const std::string csv = trace_to_csv({{1.0, 0.5, 0.125, 42.0}, {0.5, 0.25, 0.0625, 21.0}});
  CHECK(csv.substr(0, csv.find('\n')) == "epoch,loss,nc1,nc2_gap,uniformity_variance");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(csv.find("2,0.5,0.25,0.0625,21") != std::string::npos);
}
