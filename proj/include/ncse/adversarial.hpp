#pragma once

#include <string>
#include <vector>

#include "ncse/dense_net.hpp"
#include "ncse/encoder.hpp"
#include "ncse/motion.hpp"
#include "ncse/progress.hpp"
#include "ncse/sphere.hpp"
#include "ncse/types.hpp"

namespace ncse {

struct Transition {
  Vec state_t;
  Vec state_next;
  Index source_clip = 0;
  double time_s = 0.0;  // timestamp of state_t within its clip
};

enum class SampleKind { kMatched, kMismatched, kPolicyStandIn };

struct ConditionedSample {
  Transition transition;
  UnitVector embedding;
  SampleKind kind;
  bool center_conditioned;  // exact cluster center used; states carry
                            // progress encoding in that case
};

struct ExpansionConfig {
  double kappa = 50.0;    // cluster concentration
  double p_center = 0.5;  // probability of conditioning on the exact center
};

// With probability p_center the exact center; otherwise one vMF(u, kappa)
// draw. used_center reports which branch was taken.
UnitVector expansion_sample(const UnitVector& center, const ExpansionConfig& cfg,
                            Rng& rng, bool* used_center = nullptr);
UnitVector expansion_sample(const UnitVector& center, const ExpansionConfig& cfg,
                            RngSeed seed, bool* used_center = nullptr);

// Correctly aligned pairs: transition from clip m, embedding expanded around
// m's own mean. Center-conditioned samples get progress-embedded states.
std::vector<ConditionedSample> make_matched_batch(const MotionDataset& dataset,
                                                  const ClassMeans& means,
                                                  const ExpansionConfig& cfg,
                                                  const ProgressConfig& progress,
                                                  int count, RngSeed seed);

// Transitions as in matched, embedding expanded around a uniformly chosen
// different clip's mean. Throws SingleClassDataset for n < 2.
std::vector<ConditionedSample> make_mismatched_batch(const MotionDataset& dataset,
                                                     const ClassMeans& means,
                                                     const ExpansionConfig& cfg,
                                                     const ProgressConfig& progress,
                                                     int count, RngSeed seed);

// Stand-in for policy rollouts: matched-style samples with seeded Gaussian
// noise of scale noise_sigma added to both states.
std::vector<ConditionedSample> make_policy_stand_in_batch(
    const MotionDataset& dataset, const ClassMeans& means, const ExpansionConfig& cfg,
    const ProgressConfig& progress, int count, double noise_sigma, RngSeed seed);

struct DiscriminatorModel {
  DenseNet net;        // (2d + p) -> scalar in (0,1) via sigmoid
  Index state_dim = 0;
  Index latent_dim = 0;
  double clamp_eps = 1e-4;
  double trained_w_gp = 0.0;
};

// (2d+p) -> 256 relu -> 128 relu -> 1 sigmoid.
DiscriminatorModel make_discriminator(Index state_dim, Index latent_dim, RngSeed seed);

// Rows [s_t | s_next | z] for a batch of samples.
Mat batch_inputs(const std::vector<ConditionedSample>& samples);

// Raw (unclamped) discriminator outputs for a batch.
Vec disc_outputs(const DiscriminatorModel& model, const std::vector<ConditionedSample>& samples);

struct DiscLossResult {
  double loss;
  Gradients grads;
  double gradient_penalty;  // mean ||d D / d(s_t, s_next)||^2 over matched
  Vec d_matched, d_mismatched, d_policy;
};

// -E_matched[log D] - E_mismatched[log(1-D)] - E_policy[log(1-D)]
//   + w_gp * E_matched[ ||grad_{(s_t,s_next)} D||^2 ],
// with parameter gradients for every term.
DiscLossResult disc_loss(const DiscriminatorModel& model,
                         const std::vector<ConditionedSample>& matched,
                         const std::vector<ConditionedSample>& mismatched,
                         const std::vector<ConditionedSample>& policy_batch, double w_gp);

// -log(1 - clamp(D)); bounded in [-log(1-eps), -log eps].
double imitation_reward(const DiscriminatorModel& model, const Vec& state_t,
                        const Vec& state_next, const UnitVector& z);

double style_reward(const UnitVector& center, const UnitVector& z);  // u . z

double combined_reward(double r_goal, double r_style, double w_goal, double w_style);

struct DiscTraceRow {
  int step;
  double loss;
  double acc_matched;     // fraction of matched samples with D > 0.5
  double acc_mismatched;  // fraction of mismatched samples with D < 0.5
};
using DiscTrace = std::vector<DiscTraceRow>;

struct DiscTrainParams {
  int steps = 2000;
  double learning_rate = 1e-3;
  double w_gp = 5.0;
  double noise_sigma = 0.5;  // keeps the stand-in separable from real data
  int batch_size = 32;
  ExpansionConfig expansion;
  ProgressConfig progress;
};

struct DiscTrainResult {
  DiscriminatorModel model;
  DiscTrace trace;
};

// Adam on fresh per-step batches; deterministic per seed.
DiscTrainResult train_discriminator(const MotionDataset& dataset, const ClassMeans& means,
                                    const DiscTrainParams& params, RngSeed seed);

std::string disc_sidecar_json(const DiscriminatorModel& model);
DiscriminatorModel load_discriminator(std::string_view net_bytes,
                                      const std::string& sidecar_json);

std::string disc_trace_to_csv(const DiscTrace& trace);

}  // namespace ncse
