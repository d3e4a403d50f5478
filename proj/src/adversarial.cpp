#include "ncse/adversarial.hpp"

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ncse/error.hpp"
#include "ncse/io.hpp"

namespace ncse {

UnitVector expansion_sample(const UnitVector& center, const ExpansionConfig& cfg,
                            Rng& rng, bool* used_center) {
  if (cfg.p_center < 0.0 || cfg.p_center > 1.0) {
    throw Error(ErrorCode::BadArgument, "p_center must lie in [0,1]");
  }
  if (rng.uniform() < cfg.p_center) {
    if (used_center) *used_center = true;
    return center;
  }
  if (used_center) *used_center = false;
  return vmf_sample(VonMisesFisher(center, cfg.kappa), 1, rng).front();
}

UnitVector expansion_sample(const UnitVector& center, const ExpansionConfig& cfg,
                            RngSeed seed, bool* used_center) {
  Rng rng(seed);
  return expansion_sample(center, cfg, rng, used_center);
}

namespace {

void check_dataset_means(const MotionDataset& dataset, const ClassMeans& means) {
  if (dataset.size() == 0) throw Error(ErrorCode::EmptyDataset, "dataset has no clips");
  if (static_cast<Index>(means.means.size()) != dataset.size()) {
    throw Error(ErrorCode::DimensionMismatch, "means do not match dataset classes");
  }
}

bool has_transitions(const MotionDataset& dataset) {
  for (const MotionClip& clip : dataset.clips) {
    if (clip.frame_count() >= 2) return true;
  }
  return false;
}

// Uniformly picks a clip with at least one transition, then a consecutive
// frame pair; states canonicalized against the earlier frame.
Transition draw_transition(const MotionDataset& dataset, Rng& rng) {
  for (;;) {
    const Index clip_idx = static_cast<Index>(rng.uniform_int(
        static_cast<std::uint64_t>(dataset.size())));
    const MotionClip& clip = dataset.clips[static_cast<size_t>(clip_idx)];
    if (clip.frame_count() < 2) continue;
    const Index t = static_cast<Index>(
        rng.uniform_int(static_cast<std::uint64_t>(clip.frame_count() - 1)));
    auto [s_t, s_next] = featurize_frame_pair(clip, t);
    Transition tr;
    tr.state_t = std::move(s_t);
    tr.state_next = std::move(s_next);
    tr.source_clip = clip_idx;
    tr.time_s = static_cast<double>(t) / clip.fps;
    return tr;
  }
}

void embed_progress(Transition& tr, const MotionClip& clip, const ProgressConfig& progress) {
  const double dt = 1.0 / clip.fps;
  tr.state_t = progress_embed(tr.state_t, tr.time_s, progress.interval_s,
                              clip.duration_s(), progress.pe_base);
  tr.state_next = progress_embed(tr.state_next, tr.time_s + dt, progress.interval_s,
                                 clip.duration_s(), progress.pe_base);
}

ConditionedSample draw_sample(const MotionDataset& dataset, const ClassMeans& means,
                              const ExpansionConfig& cfg, const ProgressConfig& progress,
                              SampleKind kind, Rng& rng) {
  Transition tr = draw_transition(dataset, rng);
  Index center_clip = tr.source_clip;
  if (kind == SampleKind::kMismatched) {
    // Uniform over the other n-1 clips.
    Index other = static_cast<Index>(rng.uniform_int(
        static_cast<std::uint64_t>(dataset.size() - 1)));
    if (other >= tr.source_clip) ++other;
    center_clip = other;
  }
  bool used_center = false;
  UnitVector z = expansion_sample(means.means[static_cast<size_t>(center_clip)], cfg, rng,
                                  &used_center);
  if (used_center) {
    embed_progress(tr, dataset.clips[static_cast<size_t>(tr.source_clip)], progress);
  }
  return {std::move(tr), std::move(z), kind, used_center};
}

std::vector<ConditionedSample> make_batch(const MotionDataset& dataset,
                                          const ClassMeans& means,
                                          const ExpansionConfig& cfg,
                                          const ProgressConfig& progress, SampleKind kind,
                                          int count, RngSeed seed) {
  check_dataset_means(dataset, means);
  if (count < 0) throw Error(ErrorCode::BadArgument, "batch count must be >= 0");
  if (count > 0 && !has_transitions(dataset)) {
    throw Error(ErrorCode::EmptyBatch, "no clip has two or more frames");
  }
  Rng rng(seed);
  std::vector<ConditionedSample> out;
  out.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    out.push_back(draw_sample(dataset, means, cfg, progress, kind, rng));
  }
  return out;
}

}  // namespace

std::vector<ConditionedSample> make_matched_batch(const MotionDataset& dataset,
                                                  const ClassMeans& means,
                                                  const ExpansionConfig& cfg,
                                                  const ProgressConfig& progress,
                                                  int count, RngSeed seed) {
  return make_batch(dataset, means, cfg, progress, SampleKind::kMatched, count, seed);
}

std::vector<ConditionedSample> make_mismatched_batch(const MotionDataset& dataset,
                                                     const ClassMeans& means,
                                                     const ExpansionConfig& cfg,
                                                     const ProgressConfig& progress,
                                                     int count, RngSeed seed) {
  if (dataset.size() < 2) {
    throw Error(ErrorCode::SingleClassDataset, "mismatched batches need n >= 2 clips");
  }
  return make_batch(dataset, means, cfg, progress, SampleKind::kMismatched, count, seed);
}

std::vector<ConditionedSample> make_policy_stand_in_batch(
    const MotionDataset& dataset, const ClassMeans& means, const ExpansionConfig& cfg,
    const ProgressConfig& progress, int count, double noise_sigma, RngSeed seed) {
  if (noise_sigma < 0.0) throw Error(ErrorCode::BadArgument, "noise_sigma must be >= 0");
  auto batch =
      make_batch(dataset, means, cfg, progress, SampleKind::kPolicyStandIn, count, seed);
  if (noise_sigma > 0.0) {
    Rng rng(Rng::derive(seed, 0x70657274ULL));  // independent perturbation stream
    for (ConditionedSample& sample : batch) {
      sample.transition.state_t += noise_sigma * rng.normal_vec(sample.transition.state_t.size());
      sample.transition.state_next +=
          noise_sigma * rng.normal_vec(sample.transition.state_next.size());
    }
  }
  return batch;
}

DiscriminatorModel make_discriminator(Index state_dim, Index latent_dim, RngSeed seed) {
  if (state_dim < 1 || latent_dim < 2) {
    throw Error(ErrorCode::BadArgument, "bad discriminator dimensions");
  }
  DiscriminatorModel model;
  model.net = make_mlp(2 * state_dim + latent_dim, {256, 128, 1},
                       {Activation::kRelu, Activation::kRelu, Activation::kSigmoid}, seed);
  model.state_dim = state_dim;
  model.latent_dim = latent_dim;
  return model;
}

Mat batch_inputs(const std::vector<ConditionedSample>& samples) {
  if (samples.empty()) throw Error(ErrorCode::EmptyBatch, "batch is empty");
  const Index d = samples.front().transition.state_t.size();
  const Index p = samples.front().embedding.dim();
  Mat inputs(static_cast<Index>(samples.size()), 2 * d + p);
  for (size_t i = 0; i < samples.size(); ++i) {
    const ConditionedSample& s = samples[i];
    if (s.transition.state_t.size() != d || s.transition.state_next.size() != d ||
        s.embedding.dim() != p) {
      throw Error(ErrorCode::DimensionMismatch, "batch samples differ in dimension");
    }
    inputs.row(static_cast<Index>(i)).segment(0, d) = s.transition.state_t.transpose();
    inputs.row(static_cast<Index>(i)).segment(d, d) = s.transition.state_next.transpose();
    inputs.row(static_cast<Index>(i)).segment(2 * d, p) = s.embedding.vec().transpose();
  }
  return inputs;
}

Vec disc_outputs(const DiscriminatorModel& model,
                 const std::vector<ConditionedSample>& samples) {
  return forward(model.net, batch_inputs(samples)).col(0);
}

namespace {

double clamp_output(double d, double eps) { return std::min(std::max(d, eps), 1.0 - eps); }

}  // namespace

DiscLossResult disc_loss(const DiscriminatorModel& model,
                         const std::vector<ConditionedSample>& matched,
                         const std::vector<ConditionedSample>& mismatched,
                         const std::vector<ConditionedSample>& policy_batch, double w_gp) {
  if (matched.empty() || mismatched.empty() || policy_batch.empty()) {
    throw Error(ErrorCode::EmptyBatch, "disc_loss needs all three batches non-empty");
  }
  const double eps = model.clamp_eps;

  DiscLossResult result;
  result.grads = Gradients::zeros_like(model.net);
  result.loss = 0.0;

  // order: matched uses -log D, the other two -log(1 - D).
  const std::vector<ConditionedSample>* batches[3] = {&matched, &mismatched, &policy_batch};
  ForwardCache matched_cache;
  for (int b = 0; b < 3; ++b) {
    ForwardCache cache;
    const Mat inputs = batch_inputs(*batches[b]);
    const Vec d = forward(model.net, inputs, &cache).col(0);
    const auto count = static_cast<double>(d.size());
    Mat dloss_dout(d.size(), 1);
    double term = 0.0;
    for (Index i = 0; i < d.size(); ++i) {
      const double dc = clamp_output(d[i], eps);
      const bool interior = d[i] > eps && d[i] < 1.0 - eps;
      if (b == 0) {
        term -= std::log(dc);
        dloss_dout(i, 0) = interior ? -1.0 / (count * dc) : 0.0;
      } else {
        term -= std::log1p(-dc);
        dloss_dout(i, 0) = interior ? 1.0 / (count * (1.0 - dc)) : 0.0;
      }
    }
    term /= count;
    result.loss += term;
    result.grads.add_scaled(backward(model.net, cache, dloss_dout), 1.0);
    if (b == 0) {
      result.d_matched = d;
      matched_cache = std::move(cache);
    } else if (b == 1) {
      result.d_mismatched = d;
    } else {
      result.d_policy = d;
    }
  }

  // Penalty on the state part of matched inputs only; z columns excluded.
  result.gradient_penalty = input_gradient_penalty(
      model.net, matched_cache, 2 * model.state_dim, w_gp, w_gp != 0.0 ? &result.grads : nullptr);
  result.loss += w_gp * result.gradient_penalty;
  return result;
}

double imitation_reward(const DiscriminatorModel& model, const Vec& state_t,
                        const Vec& state_next, const UnitVector& z) {
  if (state_t.size() != model.state_dim || state_next.size() != model.state_dim ||
      z.dim() != model.latent_dim) {
    throw Error(ErrorCode::DimensionMismatch, "imitation_reward input dimensions");
  }
  Mat input(1, 2 * model.state_dim + model.latent_dim);
  input.row(0).segment(0, model.state_dim) = state_t.transpose();
  input.row(0).segment(model.state_dim, model.state_dim) = state_next.transpose();
  input.row(0).segment(2 * model.state_dim, model.latent_dim) = z.vec().transpose();
  const double d = forward(model.net, input)(0, 0);
  return -std::log1p(-clamp_output(d, model.clamp_eps));
}

double style_reward(const UnitVector& center, const UnitVector& z) { return center.dot(z); }

double combined_reward(double r_goal, double r_style, double w_goal, double w_style) {
  if (!std::isfinite(r_goal) || !std::isfinite(r_style)) {
    throw Error(ErrorCode::BadArgument, "rewards must be finite");
  }
  return w_goal * r_goal + w_style * r_style;
}

DiscTrainResult train_discriminator(const MotionDataset& dataset, const ClassMeans& means,
                                    const DiscTrainParams& params, RngSeed seed) {
  if (dataset.size() < 2) {
    throw Error(ErrorCode::SingleClassDataset, "discriminator training needs n >= 2 clips");
  }
  check_dataset_means(dataset, means);
  if (params.steps < 1 || params.batch_size < 1) {
    throw Error(ErrorCode::BadArgument, "steps and batch_size must be >= 1");
  }
  const Index state_dim = frame_feature_dim(dataset.clips.front().joint_count());
  const Index latent_dim = means.means.front().dim();

  DiscTrainResult result;
  result.model = make_discriminator(state_dim, latent_dim, Rng::derive(seed, 0));
  result.model.trained_w_gp = params.w_gp;
  AdamState adam = AdamState::for_net(result.model.net, params.learning_rate);

  for (int step = 1; step <= params.steps; ++step) {
    const auto base = static_cast<std::uint64_t>(step) * 8;
    const auto matched = make_matched_batch(dataset, means, params.expansion,
                                            params.progress, params.batch_size,
                                            Rng::derive(seed, base + 1));
    const auto mismatched = make_mismatched_batch(dataset, means, params.expansion,
                                                  params.progress, params.batch_size,
                                                  Rng::derive(seed, base + 2));
    const auto policy = make_policy_stand_in_batch(
        dataset, means, params.expansion, params.progress, params.batch_size,
        params.noise_sigma, Rng::derive(seed, base + 3));

    DiscLossResult loss = disc_loss(result.model, matched, mismatched, policy, params.w_gp);
    adam_step(result.model.net, loss.grads, adam);

    DiscTraceRow row;
    row.step = step;
    row.loss = loss.loss;
    row.acc_matched =
        (loss.d_matched.array() > 0.5).cast<double>().mean();
    row.acc_mismatched =
        (loss.d_mismatched.array() < 0.5).cast<double>().mean();
    result.trace.push_back(row);
  }
  return result;
}

std::string disc_sidecar_json(const DiscriminatorModel& model) {
  nlohmann::json j;
  j["d"] = model.state_dim;
  j["p"] = model.latent_dim;
  j["eps"] = model.clamp_eps;
  j["w_gp"] = model.trained_w_gp;
  return j.dump(2) + "\n";
}

DiscriminatorModel load_discriminator(std::string_view net_bytes,
                                      const std::string& sidecar_json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(sidecar_json);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedModel, std::string("bad sidecar JSON: ") + e.what());
  }
  DiscriminatorModel model;
  model.net = deserialize_dense_net(net_bytes);
  try {
    model.state_dim = j.at("d").get<Index>();
    model.latent_dim = j.at("p").get<Index>();
    model.clamp_eps = j.at("eps").get<double>();
    model.trained_w_gp = j.at("w_gp").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedModel, std::string("sidecar missing fields: ") + e.what());
  }
  if (model.net.input_dim() != 2 * model.state_dim + model.latent_dim ||
      model.net.output_dim() != 1) {
    throw Error(ErrorCode::MalformedModel, "sidecar inconsistent with net shape");
  }
  return model;
}

std::string disc_trace_to_csv(const DiscTrace& trace) {
  std::ostringstream out;
  out << "step,loss,acc_matched,acc_mismatched\n";
  for (const DiscTraceRow& row : trace) {
    out << row.step << ',' << fmt_double(row.loss) << ',' << fmt_double(row.acc_matched)
        << ',' << fmt_double(row.acc_mismatched) << '\n';
  }
  return out.str();
}

}  // namespace ncse
