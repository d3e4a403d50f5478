// Command-line front end: dataset synthesis, encoder/discriminator training,
// latent-space diagnostics, and the metric suite. Every command takes a
// --seed and produces byte-identical outputs for identical invocations.
//
// Exit codes: 0 success, 2 argument error, 3 I/O or format error,
// 4 domain error.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ncse/adversarial.hpp"
#include "ncse/encoder.hpp"
#include "ncse/error.hpp"
#include "ncse/io.hpp"
#include "ncse/metrics.hpp"
#include "ncse/motion.hpp"
#include "ncse/progress.hpp"
#include "ncse/sphere.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ncse;

namespace {

// Named RNG streams per command, derived from the run seed, so a
// subcomputation can be reproduced in isolation.
enum Stream : std::uint64_t {
  kStreamDataset = 0,
  kStreamTraining = 1,
  kStreamSampling = 2,
  kStreamCenters = 3,
};

// JSON run config; command-line flags override file values.
class ConfigFile {
 public:
  void load(const fs::path& path) {
    json parsed;
    try {
      parsed = json::parse(read_file(path));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::BadArgument,
                  "config " + path.string() + " is not valid JSON: " + e.what());
    }
    if (!parsed.is_object()) {
      throw Error(ErrorCode::BadArgument, "config must be a JSON object");
    }
    static const std::vector<std::string> kKnownKeys = {
        "seed",     "latent_dim", "window_s", "stride_s", "kappa",
        "p_center", "epochs",     "lr",       "w_gp",     "interval_s",
        "alpha_jp", "alpha_v",    "manifest", "out_dir"};
    for (const auto& [key, value] : parsed.items()) {
      if (std::find(kKnownKeys.begin(), kKnownKeys.end(), key) == kKnownKeys.end()) {
        throw Error(ErrorCode::BadArgument, "unknown config key: " + key);
      }
    }
    values_ = parsed;
  }

  template <typename T>
  void apply(const CLI::Option* option, const char* key, T& target) const {
    if (option != nullptr && option->count() > 0) return;  // flags win
    if (!values_.contains(key)) return;
    try {
      target = values_.at(key).get<T>();
    } catch (const json::exception&) {
      throw Error(ErrorCode::BadArgument, std::string("config key has wrong type: ") + key);
    }
  }

 private:
  json values_ = json::object();
};

EncoderModel load_encoder_files(const fs::path& model_path) {
  fs::path sidecar = model_path;
  sidecar.replace_extension(".json");
  return load_encoder(read_file(model_path), read_file(sidecar));
}

std::string embeddings_csv(const std::vector<std::pair<bool, Vec>>& rows) {
  std::ostringstream out;
  out << "is_center";
  if (!rows.empty()) {
    for (Index i = 0; i < rows.front().second.size(); ++i) out << ",c" << i;
  }
  out << '\n';
  for (const auto& [is_center, v] : rows) {
    out << (is_center ? 1 : 0);
    for (Index i = 0; i < v.size(); ++i) out << ',' << fmt_double(v[i]);
    out << '\n';
  }
  return out.str();
}

int run_synth(int clips, int joints, double fps, double dur_min, double dur_max,
              RngSeed seed, const fs::path& out_dir) {
  const MotionDataset ds = synth_dataset(clips, joints, fps, {dur_min, dur_max},
                                         Rng::derive(seed, kStreamDataset));
  save_dataset(out_dir, ds);
  std::cout << "wrote " << ds.size() << " clips under " << out_dir.string() << "\n";
  return 0;
}

int run_train_encoder(const fs::path& manifest, Index latent_dim, int epochs, double lr,
                      double window_s, double stride_s, RngSeed seed,
                      const fs::path& out_dir) {
  const MotionDataset ds = load_dataset(manifest);
  const EncoderTrainResult result = train_encoder(
      ds, latent_dim, epochs, lr, Rng::derive(seed, kStreamTraining), window_s, stride_s);
  write_file_atomic(out_dir / "encoder.ncse", serialize_dense_net(result.model.net));
  write_file_atomic(out_dir / "encoder.json", encoder_sidecar_json(result.model));
  write_file_atomic(out_dir / "trace.csv", trace_to_csv(result.trace));
  std::cout << "final loss " << fmt_double(result.trace.back().loss) << ", wrote encoder to "
            << (out_dir / "encoder.ncse").string() << "\n";
  return 0;
}

int run_uniformity(const std::string& centers_mode, Index n, Index dim,
                   int samples_per_center, RngSeed seed, const fs::path& model_path,
                   const fs::path& manifest, const fs::path& out_path) {
  std::vector<UnitVector> centers;
  if (centers_mode == "etf") {
    centers = make_simplex_etf(n, dim, Rng::derive(seed, kStreamCenters)).centers;
  } else if (centers_mode == "random") {
    centers = sample_uniform_sphere(dim, static_cast<int>(n),
                                    Rng::derive(seed, kStreamCenters));
  } else if (centers_mode == "encoder") {
    if (model_path.empty() || manifest.empty()) {
      throw Error(ErrorCode::BadArgument, "--centers encoder needs --model and --manifest");
    }
    const EncoderModel model = load_encoder_files(model_path);
    centers = compute_class_means(model, load_dataset(manifest)).means;
  } else {
    throw Error(ErrorCode::BadArgument, "unknown centers mode: " + centers_mode);
  }
  const UniformityReport report =
      uniformity_variance(centers, samples_per_center, Rng::derive(seed, kStreamSampling));
  json out;
  out["mode"] = centers_mode;
  out["n"] = static_cast<Index>(centers.size());
  out["dim"] = centers.front().dim();
  out["samples_per_center"] = samples_per_center;
  out["counts"] = report.counts;
  out["variance"] = report.variance;
  write_file_atomic(out_path, out.dump(2) + "\n");
  std::cout << "variance " << fmt_double(report.variance) << "\n";
  return 0;
}

int run_expand(const fs::path& model_path, const fs::path& manifest,
               const std::string& clip_name, int count, double kappa, double p_center,
               RngSeed seed, const fs::path& out_path) {
  const EncoderModel model = load_encoder_files(model_path);
  const MotionDataset ds = load_dataset(manifest);
  const auto it = ds.class_index.find(clip_name);
  if (it == ds.class_index.end()) {
    throw Error(ErrorCode::UnknownClip, "no clip named " + clip_name);
  }
  const ClassMeans means = compute_class_means(model, ds);
  const UnitVector& center = means.means[static_cast<size_t>(it->second)];
  Rng rng(Rng::derive(seed, kStreamSampling));
  std::vector<std::pair<bool, Vec>> rows;
  const ExpansionConfig cfg{kappa, p_center};
  for (int i = 0; i < count; ++i) {
    bool used_center = false;
    const UnitVector z = expansion_sample(center, cfg, rng, &used_center);
    rows.emplace_back(used_center, z.vec());
  }
  write_file_atomic(out_path, embeddings_csv(rows));
  std::cout << "wrote " << count << " embeddings for " << clip_name << "\n";
  return 0;
}

int run_train_disc(const fs::path& manifest, const fs::path& encoder_path, int steps,
                   double lr, double w_gp, double kappa, double p_center,
                   double noise_sigma, double interval_s, int batch_size, RngSeed seed,
                   const fs::path& out_dir) {
  const MotionDataset ds = load_dataset(manifest);
  const EncoderModel encoder = load_encoder_files(encoder_path);
  const ClassMeans means = compute_class_means(encoder, ds);
  DiscTrainParams params;
  params.steps = steps;
  params.learning_rate = lr;
  params.w_gp = w_gp;
  params.noise_sigma = noise_sigma;
  params.batch_size = batch_size;
  params.expansion = {kappa, p_center};
  params.progress.interval_s = interval_s;
  const DiscTrainResult result =
      train_discriminator(ds, means, params, Rng::derive(seed, kStreamTraining));
  write_file_atomic(out_dir / "discriminator.ncse", serialize_dense_net(result.model.net));
  write_file_atomic(out_dir / "discriminator.json", disc_sidecar_json(result.model));
  write_file_atomic(out_dir / "trace.csv", disc_trace_to_csv(result.trace));
  std::cout << "final accuracies matched " << fmt_double(result.trace.back().acc_matched)
            << " mismatched " << fmt_double(result.trace.back().acc_mismatched) << "\n";
  return 0;
}

int run_score(const fs::path& manifest, const fs::path& generated_path, double threshold,
              double alpha_jp, double alpha_v, const fs::path& report_path,
              const fs::path& hist_path, const fs::path& completeness_path) {
  const MotionDataset ds = load_dataset(manifest);
  const std::vector<Frame> generated = load_frames_file(generated_path);
  const SimilarityConfig cfg{alpha_jp, alpha_v};
  const CoverageReport report = dataset_coverage(ds, generated, cfg, threshold);
  write_file_atomic(report_path, coverage_report_json(report));
  write_file_atomic(hist_path, histogram_to_csv(report.histogram));
  if (!completeness_path.empty()) {
    json completeness = json::object();
    for (const MotionClip& clip : ds.clips) {
      completeness[clip.name] = motion_completeness(clip, generated, cfg);
    }
    write_file_atomic(completeness_path, completeness.dump(2) + "\n");
  }
  std::cout << "covered_fraction " << fmt_double(report.covered_fraction) << "\n";
  return 0;
}

int run_pca(const fs::path& model_path, const fs::path& manifest, int samples_per_center,
            double kappa, RngSeed seed, const fs::path& csv_path,
            const fs::path& json_path) {
  const EncoderModel model = load_encoder_files(model_path);
  const MotionDataset ds = load_dataset(manifest);
  const ClassMeans means = compute_class_means(model, ds);
  Rng rng(Rng::derive(seed, kStreamSampling));
  std::vector<Vec> points;
  std::vector<std::pair<std::string, std::string>> labels;  // kind, clip
  for (Index c = 0; c < ds.size(); ++c) {
    points.push_back(means.means[static_cast<size_t>(c)].vec());
    labels.emplace_back("center", ds.clips[static_cast<size_t>(c)].name);
  }
  for (Index c = 0; c < ds.size(); ++c) {
    const VonMisesFisher dist(means.means[static_cast<size_t>(c)], kappa);
    for (const UnitVector& z : vmf_sample(dist, samples_per_center, rng)) {
      points.push_back(z.vec());
      labels.emplace_back("sample", ds.clips[static_cast<size_t>(c)].name);
    }
  }
  const PcaResult pca = pca_project(points, 2);
  std::ostringstream csv;
  csv << "kind,clip,x,y\n";
  for (size_t i = 0; i < points.size(); ++i) {
    csv << labels[i].first << ',' << labels[i].second << ','
        << fmt_double(pca.projected[i][0]) << ',' << fmt_double(pca.projected[i][1]) << '\n';
  }
  write_file_atomic(csv_path, csv.str());

  double ortho_error = 0.0;
  for (size_t i = 0; i < pca.basis.size(); ++i) {
    for (size_t j = 0; j < pca.basis.size(); ++j) {
      const double expected = i == j ? 1.0 : 0.0;
      ortho_error =
          std::max(ortho_error, std::fabs(pca.basis[i].dot(pca.basis[j]) - expected));
    }
  }
  json sidecar;
  sidecar["points"] = points.size();
  sidecar["explained_variance"] = pca.explained_variance;
  sidecar["orthonormality_error"] = ortho_error;
  write_file_atomic(json_path, sidecar.dump(2) + "\n");
  std::cout << "projected " << points.size() << " points\n";
  return 0;
}

int run_pe_dump(Index dim, Index stages, double base, const fs::path& out_path) {
  std::ostringstream csv;
  csv << "k";
  for (Index i = 0; i < dim; ++i) csv << ",c" << i;
  csv << '\n';
  for (Index k = 0; k < stages; ++k) {
    const Vec pe = positional_encoding(k, dim, base);
    csv << k;
    for (Index i = 0; i < dim; ++i) csv << ',' << fmt_double(pe[i]);
    csv << '\n';
  }
  write_file_atomic(out_path, csv.str());
  std::cout << "wrote " << stages << " encodings\n";
  return 0;
}

void require_path(const fs::path& value, const char* flag) {
  if (value.empty()) {
    throw Error(ErrorCode::BadArgument, std::string("missing required option ") + flag);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Skill-embedding toolkit: hypersphere latents, neural-collapse "
               "encoder, embedding expansion, conditional discriminator, and "
               "motion metrics"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  std::string config_path;
  app.add_option("--config", config_path, "JSON run config; flags override its values")
      ->expected(1);

  ConfigFile config;

  // Shared option storage. Each subcommand registers the subset it uses.
  RngSeed seed = 0;
  fs::path manifest, out_dir, out_file, model_path, encoder_path, generated_path;
  Index latent_dim = 64;
  double window_s = 2.0, stride_s = 0.5;
  double kappa = 50.0, p_center = 0.5;
  int epochs = 2000;
  double lr = 0.01;
  double w_gp = 5.0;
  double interval_s = 0.5;
  double alpha_jp = 2.0, alpha_v = 0.1;

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic gait dataset");
  int clips = 8, joints = 4;
  double fps = 30.0, dur_min = 1.0, dur_max = 6.0;
  synth->add_option("--clips", clips, "number of clips")->check(CLI::Range(1, 1000000));
  synth->add_option("--joints", joints, "joints per frame")->check(CLI::Range(1, 1024));
  synth->add_option("--fps", fps, "frames per second")->check(CLI::PositiveNumber);
  synth->add_option("--dur-min", dur_min, "min duration s")->check(CLI::PositiveNumber);
  synth->add_option("--dur-max", dur_max, "max duration s")->check(CLI::PositiveNumber);
  auto* synth_seed = synth->add_option("--seed", seed, "run seed");
  auto* synth_out = synth->add_option("--out", out_dir, "output directory");

  // train-encoder
  auto* tenc = app.add_subcommand("train-encoder",
                                  "Train the classification encoder (cross-entropy, "
                                  "l2-normalized latent)");
  auto* tenc_manifest = tenc->add_option("--manifest", manifest, "dataset manifest");
  auto* tenc_latent = tenc->add_option("--latent-dim", latent_dim, "latent dimension p")
                          ->check(CLI::Range(2, 1000000));
  auto* tenc_epochs = tenc->add_option("--epochs", epochs, "training epochs")
                          ->check(CLI::Range(1, 100000000));
  auto* tenc_lr =
      tenc->add_option("--lr", lr, "Adam learning rate")->check(CLI::PositiveNumber);
  auto* tenc_window = tenc->add_option("--window-s", window_s, "window length s")
                          ->check(CLI::PositiveNumber);
  auto* tenc_stride = tenc->add_option("--stride-s", stride_s, "window stride s")
                          ->check(CLI::PositiveNumber);
  auto* tenc_seed = tenc->add_option("--seed", seed, "run seed");
  auto* tenc_out = tenc->add_option("--out", out_dir, "output directory");

  // uniformity
  auto* uni =
      app.add_subcommand("uniformity", "Nearest-center counts of uniform sphere samples");
  std::string centers_mode = "etf";
  Index uni_n = 16, uni_dim = 64;
  int samples_per_center = 1000;
  uni->add_option("--centers", centers_mode, "etf | random | encoder");
  uni->add_option("--n", uni_n, "number of centers")->check(CLI::Range(2, 1000000));
  uni->add_option("--dim", uni_dim, "sphere dimension")->check(CLI::Range(2, 1000000));
  uni->add_option("--samples-per-center", samples_per_center, "samples per center")
      ->check(CLI::Range(1, 100000000));
  uni->add_option("--model", model_path, "encoder model (.ncse) for --centers encoder");
  auto* uni_manifest = uni->add_option("--manifest", manifest, "dataset manifest");
  auto* uni_seed = uni->add_option("--seed", seed, "run seed");
  uni->add_option("--out", out_file, "output JSON path");

  // expand
  auto* expand = app.add_subcommand("expand", "Sample embeddings around a clip's mean");
  std::string clip_name;
  int expand_count = 256;
  expand->add_option("--model", model_path, "encoder model (.ncse)");
  auto* expand_manifest = expand->add_option("--manifest", manifest, "dataset manifest");
  expand->add_option("--clip", clip_name, "clip name");
  expand->add_option("--count", expand_count, "samples")->check(CLI::Range(1, 100000000));
  auto* expand_kappa = expand->add_option("--kappa", kappa, "vMF concentration")
                           ->check(CLI::NonNegativeNumber);
  auto* expand_pc = expand->add_option("--p-center", p_center, "probability of the center")
                        ->check(CLI::Range(0.0, 1.0));
  auto* expand_seed = expand->add_option("--seed", seed, "run seed");
  expand->add_option("--out", out_file, "output CSV path");

  // train-disc
  auto* tdisc = app.add_subcommand("train-disc",
                                   "Train the conditional discriminator on data with the "
                                   "perturbed-transition stand-in");
  int steps = 2000, batch_size = 32;
  double disc_lr = 1e-3, noise_sigma = 0.5;
  auto* tdisc_manifest = tdisc->add_option("--manifest", manifest, "dataset manifest");
  tdisc->add_option("--encoder", encoder_path, "trained encoder model (.ncse)");
  tdisc->add_option("--steps", steps, "Adam steps")->check(CLI::Range(1, 100000000));
  tdisc->add_option("--lr", disc_lr, "Adam learning rate")->check(CLI::PositiveNumber);
  auto* tdisc_wgp = tdisc->add_option("--w-gp", w_gp, "gradient penalty weight")
                        ->check(CLI::NonNegativeNumber);
  auto* tdisc_kappa = tdisc->add_option("--kappa", kappa, "expansion concentration")
                          ->check(CLI::NonNegativeNumber);
  auto* tdisc_pc = tdisc->add_option("--p-center", p_center, "probability of the center")
                       ->check(CLI::Range(0.0, 1.0));
  tdisc->add_option("--noise-sigma", noise_sigma, "policy stand-in noise scale")
      ->check(CLI::NonNegativeNumber);
  auto* tdisc_interval =
      tdisc->add_option("--interval-s", interval_s, "progress stage length s")
          ->check(CLI::PositiveNumber);
  tdisc->add_option("--batch-size", batch_size, "per-term batch size")
      ->check(CLI::Range(1, 1000000));
  auto* tdisc_seed = tdisc->add_option("--seed", seed, "run seed");
  auto* tdisc_out = tdisc->add_option("--out", out_dir, "output directory");

  // score
  auto* score = app.add_subcommand(
      "score", "Coverage report and histogram for generated frames against a dataset");
  double threshold = 0.5;
  fs::path report_path, hist_path, completeness_path;
  auto* score_manifest = score->add_option("--manifest", manifest, "reference manifest");
  score->add_option("--generated", generated_path, "generated frames (clip JSON)");
  score->add_option("--threshold", threshold, "coverage threshold");
  auto* score_ajp = score->add_option("--alpha-jp", alpha_jp, "joint kernel sharpness")
                        ->check(CLI::PositiveNumber);
  auto* score_av = score->add_option("--alpha-v", alpha_v, "velocity kernel sharpness")
                       ->check(CLI::PositiveNumber);
  score->add_option("--out-report", report_path, "coverage JSON path");
  score->add_option("--out-hist", hist_path, "histogram CSV path");
  score->add_option("--out-completeness", completeness_path,
                    "optional per-clip completeness JSON");

  // pca
  auto* pca_cmd = app.add_subcommand("pca", "2-D PCA of class means and expansion samples");
  int pca_samples = 64;
  fs::path pca_csv, pca_json;
  pca_cmd->add_option("--model", model_path, "encoder model (.ncse)");
  auto* pca_manifest = pca_cmd->add_option("--manifest", manifest, "dataset manifest");
  pca_cmd->add_option("--samples-per-center", pca_samples, "samples around each mean")
      ->check(CLI::Range(0, 100000000));
  auto* pca_kappa = pca_cmd->add_option("--kappa", kappa, "expansion concentration")
                        ->check(CLI::NonNegativeNumber);
  auto* pca_seed = pca_cmd->add_option("--seed", seed, "run seed");
  pca_cmd->add_option("--out-csv", pca_csv, "projection CSV path");
  pca_cmd->add_option("--out-json", pca_json, "sidecar JSON path");

  // pe-dump
  auto* pe = app.add_subcommand("pe-dump", "Dump sinusoidal progress encodings as CSV");
  Index pe_dim = 20, pe_stages = 16;
  double pe_base = 10000.0;
  pe->add_option("--dim", pe_dim, "encoding dimension (even)");
  pe->add_option("--stages", pe_stages, "stage count")->check(CLI::Range(1, 10000000));
  pe->add_option("--base", pe_base, "frequency base")->check(CLI::PositiveNumber);
  pe->add_option("--out", out_file, "output CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (!config_path.empty()) config.load(config_path);

    if (synth->parsed()) {
      config.apply(synth_seed, "seed", seed);
      config.apply(synth_out, "out_dir", out_dir);
      require_path(out_dir, "--out");
      if (dur_max < dur_min) {
        throw Error(ErrorCode::BadArgument, "--dur-max must be >= --dur-min");
      }
      return run_synth(clips, joints, fps, dur_min, dur_max, seed, out_dir);
    }
    if (tenc->parsed()) {
      config.apply(tenc_manifest, "manifest", manifest);
      config.apply(tenc_out, "out_dir", out_dir);
      config.apply(tenc_seed, "seed", seed);
      config.apply(tenc_latent, "latent_dim", latent_dim);
      config.apply(tenc_epochs, "epochs", epochs);
      config.apply(tenc_lr, "lr", lr);
      config.apply(tenc_window, "window_s", window_s);
      config.apply(tenc_stride, "stride_s", stride_s);
      require_path(manifest, "--manifest");
      require_path(out_dir, "--out");
      return run_train_encoder(manifest, latent_dim, epochs, lr, window_s, stride_s, seed,
                               out_dir);
    }
    if (uni->parsed()) {
      config.apply(uni_seed, "seed", seed);
      config.apply(uni_manifest, "manifest", manifest);
      require_path(out_file, "--out");
      return run_uniformity(centers_mode, uni_n, uni_dim, samples_per_center, seed,
                            model_path, manifest, out_file);
    }
    if (expand->parsed()) {
      config.apply(expand_seed, "seed", seed);
      config.apply(expand_manifest, "manifest", manifest);
      config.apply(expand_kappa, "kappa", kappa);
      config.apply(expand_pc, "p_center", p_center);
      require_path(model_path, "--model");
      require_path(manifest, "--manifest");
      require_path(out_file, "--out");
      if (clip_name.empty()) {
        throw Error(ErrorCode::BadArgument, "missing required option --clip");
      }
      return run_expand(model_path, manifest, clip_name, expand_count, kappa, p_center,
                        seed, out_file);
    }
    if (tdisc->parsed()) {
      config.apply(tdisc_manifest, "manifest", manifest);
      config.apply(tdisc_out, "out_dir", out_dir);
      config.apply(tdisc_seed, "seed", seed);
      config.apply(tdisc_wgp, "w_gp", w_gp);
      config.apply(tdisc_kappa, "kappa", kappa);
      config.apply(tdisc_pc, "p_center", p_center);
      config.apply(tdisc_interval, "interval_s", interval_s);
      require_path(manifest, "--manifest");
      require_path(encoder_path, "--encoder");
      require_path(out_dir, "--out");
      return run_train_disc(manifest, encoder_path, steps, disc_lr, w_gp, kappa, p_center,
                            noise_sigma, interval_s, batch_size, seed, out_dir);
    }
    if (score->parsed()) {
      config.apply(score_manifest, "manifest", manifest);
      config.apply(score_ajp, "alpha_jp", alpha_jp);
      config.apply(score_av, "alpha_v", alpha_v);
      require_path(manifest, "--manifest");
      require_path(generated_path, "--generated");
      require_path(report_path, "--out-report");
      require_path(hist_path, "--out-hist");
      return run_score(manifest, generated_path, threshold, alpha_jp, alpha_v, report_path,
                       hist_path, completeness_path);
    }
    if (pca_cmd->parsed()) {
      config.apply(pca_seed, "seed", seed);
      config.apply(pca_manifest, "manifest", manifest);
      config.apply(pca_kappa, "kappa", kappa);
      require_path(model_path, "--model");
      require_path(manifest, "--manifest");
      require_path(pca_csv, "--out-csv");
      require_path(pca_json, "--out-json");
      return run_pca(model_path, manifest, pca_samples, kappa, seed, pca_csv, pca_json);
    }
    if (pe->parsed()) {
      require_path(out_file, "--out");
      return run_pe_dump(pe_dim, pe_stages, pe_base, out_file);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
