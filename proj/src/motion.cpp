#include "ncse/motion.hpp"

#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "ncse/error.hpp"
#include "ncse/io.hpp"
#include "ncse/rng.hpp"

namespace ncse {

namespace {

using nlohmann::json;

constexpr double kTwoPi = 6.28318530717958647692;

Eigen::Vector3d rotate_z(const Eigen::Vector3d& v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y(), v.z()};
}

}  // namespace

void compute_root_velocity(MotionClip& clip) {
  const size_t n = clip.frames.size();
  if (n == 0) return;
  if (n == 1) {
    clip.frames[0].root_velocity.setZero();
    return;
  }
  for (size_t t = 0; t + 1 < n; ++t) {
    clip.frames[t].root_velocity =
        (clip.frames[t + 1].root_position - clip.frames[t].root_position) * clip.fps;
  }
  clip.frames[n - 1].root_velocity = clip.frames[n - 2].root_velocity;
}

std::vector<Window> window_clip(const MotionClip& clip, double window_s, double stride_s) {
  if (window_s <= 0.0 || stride_s <= 0.0) {
    throw Error(ErrorCode::BadArgument, "window and stride must be positive");
  }
  if (clip.frames.empty()) {
    throw Error(ErrorCode::BadArgument, "cannot window an empty clip");
  }
  const Index span = std::max<Index>(1, static_cast<Index>(std::lround(window_s * clip.fps)));
  const double duration = clip.duration_s();
  std::vector<Window> windows;
  if (duration + 1e-9 < window_s) {
    windows.push_back({0, 0, span});  // loop-padded
    return windows;
  }
  for (Index k = 0;; ++k) {
    const double start_s = static_cast<double>(k) * stride_s;
    if (start_s + window_s > duration + 1e-9) break;
    windows.push_back({0, static_cast<Index>(std::lround(start_s * clip.fps)), span});
  }
  return windows;
}

Index frame_feature_dim(Index joint_count) { return 8 + 3 * joint_count; }

Vec frame_feature(const Frame& frame, const Frame& reference) {
  const Index joints = static_cast<Index>(frame.joint_positions.size());
  Vec out(frame_feature_dim(joints));
  const Eigen::Vector3d rel_pos =
      rotate_z(frame.root_position - reference.root_position, -reference.root_yaw);
  out.segment<3>(0) = rel_pos;
  out[3] = std::sin(frame.root_yaw - reference.root_yaw);
  out[4] = std::cos(frame.root_yaw - reference.root_yaw);
  for (Index j = 0; j < joints; ++j) {
    out.segment<3>(5 + 3 * j) = frame.joint_positions[static_cast<size_t>(j)];
  }
  out.segment<3>(5 + 3 * joints) = rotate_z(frame.root_velocity, -reference.root_yaw);
  return out;
}

Vec featurize_window(const MotionDataset& dataset, const Window& window) {
  if (window.clip_index < 0 || window.clip_index >= dataset.size()) {
    throw Error(ErrorCode::BadArgument, "window clip index out of range");
  }
  const MotionClip& clip = dataset.clips[static_cast<size_t>(window.clip_index)];
  const Index n = clip.frame_count();
  const Index block = frame_feature_dim(clip.joint_count());
  const Frame& ref = clip.frames[static_cast<size_t>(window.start_frame % n)];
  Vec out(window.span_frames * block);
  for (Index i = 0; i < window.span_frames; ++i) {
    const Frame& f = clip.frames[static_cast<size_t>((window.start_frame + i) % n)];
    out.segment(i * block, block) = frame_feature(f, ref);
  }
  return out;
}

std::pair<Vec, Vec> featurize_frame_pair(const MotionClip& clip, Index frame_t) {
  if (frame_t < 0 || frame_t + 1 >= clip.frame_count()) {
    throw Error(ErrorCode::BadArgument, "frame pair index out of range");
  }
  const Frame& ref = clip.frames[static_cast<size_t>(frame_t)];
  return {frame_feature(ref, ref),
          frame_feature(clip.frames[static_cast<size_t>(frame_t) + 1], ref)};
}

namespace {

Eigen::Vector3d parse_vec3(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(ErrorCode::MalformedClip, std::string(what) + " must be a 3-array");
  }
  Eigen::Vector3d v;
  for (int i = 0; i < 3; ++i) {
    if (!j[static_cast<size_t>(i)].is_number()) {
      throw Error(ErrorCode::MalformedClip, std::string(what) + " has a non-numeric entry");
    }
    v[i] = j[static_cast<size_t>(i)].get<double>();
  }
  if (!v.allFinite()) {
    throw Error(ErrorCode::MalformedClip, std::string(what) + " has a non-finite entry");
  }
  return v;
}

MotionClip parse_clip(const json& j, const std::string& name, const std::string& origin) {
  if (!j.is_object() || !j.contains("fps") || !j.contains("joint_names") ||
      !j.contains("frames")) {
    throw Error(ErrorCode::MalformedClip, origin + ": missing fps/joint_names/frames");
  }
  MotionClip clip;
  clip.name = name;
  if (!j["fps"].is_number() || (clip.fps = j["fps"].get<double>()) <= 0.0 ||
      !std::isfinite(clip.fps)) {
    throw Error(ErrorCode::MalformedClip, origin + ": fps must be a positive number");
  }
  if (!j["joint_names"].is_array()) {
    throw Error(ErrorCode::MalformedClip, origin + ": joint_names must be an array");
  }
  const size_t joint_count = j["joint_names"].size();
  if (!j["frames"].is_array() || j["frames"].empty()) {
    throw Error(ErrorCode::MalformedClip, origin + ": frames must be a non-empty array");
  }
  for (const json& jf : j["frames"]) {
    if (!jf.is_object() || !jf.contains("root_pos") || !jf.contains("root_yaw") ||
        !jf.contains("joints")) {
      throw Error(ErrorCode::MalformedClip, origin + ": frame missing fields");
    }
    Frame frame;
    frame.root_position = parse_vec3(jf["root_pos"], "root_pos");
    if (!jf["root_yaw"].is_number()) {
      throw Error(ErrorCode::MalformedClip, origin + ": root_yaw must be numeric");
    }
    frame.root_yaw = jf["root_yaw"].get<double>();
    if (!std::isfinite(frame.root_yaw)) {
      throw Error(ErrorCode::MalformedClip, origin + ": root_yaw non-finite");
    }
    if (!jf["joints"].is_array() || jf["joints"].size() != joint_count) {
      throw Error(ErrorCode::MalformedClip,
                  origin + ": joint count differs from joint_names");
    }
    for (const json& jj : jf["joints"]) {
      frame.joint_positions.push_back(parse_vec3(jj, "joint position"));
    }
    clip.frames.push_back(std::move(frame));
  }
  compute_root_velocity(clip);
  return clip;
}

json clip_to_json(const MotionClip& clip) {
  json j;
  j["fps"] = clip.fps;
  json names = json::array();
  for (Index i = 0; i < clip.joint_count(); ++i) names.push_back("joint_" + std::to_string(i));
  j["joint_names"] = names;
  json frames = json::array();
  for (const Frame& f : clip.frames) {
    json jf;
    jf["root_pos"] = {f.root_position.x(), f.root_position.y(), f.root_position.z()};
    jf["root_yaw"] = f.root_yaw;
    json joints = json::array();
    for (const auto& p : f.joint_positions) joints.push_back({p.x(), p.y(), p.z()});
    jf["joints"] = joints;
    frames.push_back(std::move(jf));
  }
  j["frames"] = std::move(frames);
  return j;
}

}  // namespace

MotionDataset load_dataset(const std::filesystem::path& manifest_path) {
  json manifest;
  try {
    manifest = json::parse(read_file(manifest_path));
  } catch (const Error&) {
    throw Error(ErrorCode::MalformedManifest, "cannot read " + manifest_path.string());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedManifest,
                manifest_path.string() + " is not valid JSON: " + e.what());
  }
  if (!manifest.is_object() || !manifest.contains("clips") || !manifest["clips"].is_array()) {
    throw Error(ErrorCode::MalformedManifest, "manifest needs a \"clips\" array");
  }
  const std::filesystem::path base = manifest_path.parent_path();
  MotionDataset dataset;
  for (const json& entry : manifest["clips"]) {
    if (!entry.is_object() || !entry.contains("name") || !entry.contains("path") ||
        !entry["name"].is_string() || !entry["path"].is_string()) {
      throw Error(ErrorCode::MalformedManifest, "clip entries need string name and path");
    }
    const std::string name = entry["name"].get<std::string>();
    if (dataset.class_index.count(name) != 0) {
      throw Error(ErrorCode::DuplicateName, "clip name repeated: " + name);
    }
    const std::filesystem::path clip_path = base / entry["path"].get<std::string>();
    json clip_json;
    try {
      clip_json = json::parse(read_file(clip_path));
    } catch (const Error&) {
      throw Error(ErrorCode::MalformedClip, "cannot read " + clip_path.string());
    } catch (const json::exception& e) {
      throw Error(ErrorCode::MalformedClip,
                  clip_path.string() + " is not valid JSON: " + e.what());
    }
    dataset.class_index[name] = dataset.size();
    dataset.clips.push_back(parse_clip(clip_json, name, clip_path.string()));
  }
  return dataset;
}

std::vector<Frame> load_frames_file(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const Error&) {
    throw Error(ErrorCode::MalformedClip, "cannot read " + path.string());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedClip, path.string() + " is not valid JSON: " + e.what());
  }
  return parse_clip(j, path.stem().string(), path.string()).frames;
}

void save_dataset(const std::filesystem::path& dir, const MotionDataset& dataset) {
  json manifest;
  json clips = json::array();
  for (const MotionClip& clip : dataset.clips) {
    const std::string rel = "clips/" + clip.name + ".json";
    clips.push_back({{"name", clip.name}, {"path", rel}});
    write_file_atomic(dir / rel, clip_to_json(clip).dump(2) + "\n");
  }
  manifest["clips"] = std::move(clips);
  write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

namespace {

struct GaitParams {
  double speed, freq, amplitude, drift, yaw0, bob_height;
  std::vector<Eigen::Vector3d> joint_base;
  std::vector<double> joint_phase;
};

GaitParams draw_gait_params(Index joints, Rng& rng) {
  GaitParams p;
  p.speed = rng.uniform(0.4, 1.8);
  p.freq = rng.uniform(0.5, 2.5);
  p.amplitude = rng.uniform(0.08, 0.35);
  p.drift = rng.uniform(-0.6, 0.6);
  p.yaw0 = rng.uniform(0.0, kTwoPi);
  p.bob_height = rng.uniform(0.8, 1.0);
  for (Index j = 0; j < joints; ++j) {
    p.joint_base.emplace_back(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5),
                              rng.uniform(0.2, 1.4));
    p.joint_phase.push_back(rng.uniform(0.0, kTwoPi));
  }
  return p;
}

MotionClip generate_gait(const std::string& name, Index frame_count, Index joints,
                         double fps, const GaitParams& p) {
  MotionClip clip;
  clip.name = name;
  clip.fps = fps;
  Eigen::Vector3d pos(0.0, 0.0, p.bob_height);
  for (Index f = 0; f < frame_count; ++f) {
    const double t = static_cast<double>(f) / fps;
    const double heading = p.yaw0 + p.drift * t;
    Frame frame;
    frame.root_position = pos;
    frame.root_position.z() = p.bob_height + 0.15 * p.amplitude * std::sin(kTwoPi * p.freq * t);
    frame.root_yaw = heading;
    for (Index j = 0; j < joints; ++j) {
      const double phase = kTwoPi * p.freq * t + p.joint_phase[static_cast<size_t>(j)];
      Eigen::Vector3d offset(std::sin(phase), std::cos(0.7 * phase),
                             0.5 * std::sin(2.0 * phase));
      frame.joint_positions.push_back(p.joint_base[static_cast<size_t>(j)] +
                                      p.amplitude * offset);
    }
    clip.frames.push_back(std::move(frame));
    pos += (p.speed / fps) * Eigen::Vector3d(std::cos(heading), std::sin(heading), 0.0);
  }
  compute_root_velocity(clip);
  return clip;
}

double mean_joint_distance(const MotionClip& a, const MotionClip& b) {
  const Index frames = std::min(a.frame_count(), b.frame_count());
  const Index joints = std::min(a.joint_count(), b.joint_count());
  if (frames == 0 || joints == 0) return std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (Index f = 0; f < frames; ++f) {
    for (Index j = 0; j < joints; ++j) {
      total += (a.frames[static_cast<size_t>(f)].joint_positions[static_cast<size_t>(j)] -
                b.frames[static_cast<size_t>(f)].joint_positions[static_cast<size_t>(j)])
                   .norm();
    }
  }
  return total / static_cast<double>(frames * joints);
}

std::string clip_name(Index i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "gait_%03d", static_cast<int>(i));
  return buf;
}

}  // namespace

MotionDataset synth_dataset(Index n_clips, Index joints, double fps,
                            std::pair<double, double> duration_range_s, RngSeed seed) {
  if (n_clips < 1) throw Error(ErrorCode::BadArgument, "need at least one clip");
  if (joints < 1) throw Error(ErrorCode::BadArgument, "need at least one joint");
  if (fps <= 0.0) throw Error(ErrorCode::BadArgument, "fps must be positive");
  if (duration_range_s.first <= 0.0 || duration_range_s.second < duration_range_s.first) {
    throw Error(ErrorCode::BadArgument, "bad duration range");
  }
  constexpr double kMinSeparation = 0.05;  // meters, mean joint distance
  MotionDataset dataset;
  for (Index i = 0; i < n_clips; ++i) {
    for (std::uint64_t attempt = 0;; ++attempt) {
      Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(i) * 4096 + attempt));
      const double duration = rng.uniform(duration_range_s.first, duration_range_s.second);
      const Index frame_count =
          std::max<Index>(2, static_cast<Index>(std::lround(duration * fps)));
      const GaitParams params = draw_gait_params(joints, rng);
      MotionClip clip = generate_gait(clip_name(i), frame_count, joints, fps, params);
      bool distinct = true;
      for (const MotionClip& other : dataset.clips) {
        if (mean_joint_distance(clip, other) <= kMinSeparation) {
          distinct = false;
          break;
        }
      }
      if (distinct || attempt > 256) {
        dataset.class_index[clip.name] = dataset.size();
        dataset.clips.push_back(std::move(clip));
        break;
      }
    }
  }
  return dataset;
}

}  // namespace ncse
