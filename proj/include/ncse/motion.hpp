#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ncse/types.hpp"

namespace ncse {

struct Frame {
  Eigen::Vector3d root_position = Eigen::Vector3d::Zero();  // meters, world
  double root_yaw = 0.0;                                    // radians about +z
  std::vector<Eigen::Vector3d> joint_positions;             // meters, root-relative
  Eigen::Vector3d root_velocity = Eigen::Vector3d::Zero();  // m/s, derived
};

struct MotionClip {
  std::string name;
  double fps = 30.0;
  std::vector<Frame> frames;

  Index frame_count() const { return static_cast<Index>(frames.size()); }
  double duration_s() const { return static_cast<double>(frames.size()) / fps; }
  Index joint_count() const {
    return frames.empty() ? 0 : static_cast<Index>(frames.front().joint_positions.size());
  }
};

struct MotionDataset {
  std::vector<MotionClip> clips;                // order defines class indices
  std::map<std::string, Index> class_index;

  Index size() const { return static_cast<Index>(clips.size()); }
};

struct Window {
  Index clip_index = 0;
  Index start_frame = 0;
  Index span_frames = 0;  // frame indices wrap modulo the clip length
};

// Forward differences v_t = (pos_{t+1} - pos_t) * fps; the last frame copies
// its predecessor, a single frame gets zero.
void compute_root_velocity(MotionClip& clip);

// Overlapping windows while start + window_s <= duration; clips shorter than
// window_s yield one loop-padded window.
std::vector<Window> window_clip(const MotionClip& clip, double window_s = 2.0,
                                double stride_s = 0.5);

// Per-frame feature block, canonicalized against a reference frame: root
// position and velocity rotated into the reference heading, yaw as
// (sin, cos) of the delta, joint positions as stored.
Index frame_feature_dim(Index joint_count);  // 3 + 2 + 3J + 3
Vec frame_feature(const Frame& frame, const Frame& reference);

// Window features: frame_feature of every (wrapped) frame against the
// window's first frame, concatenated. Dimension span_frames * (8 + 3J).
Vec featurize_window(const MotionDataset& dataset, const Window& window);

// Consecutive frame pair (t, t+1) canonicalized against frame t.
std::pair<Vec, Vec> featurize_frame_pair(const MotionClip& clip, Index frame_t);

// Manifest JSON { "clips": [ { "name", "path" } ] }; clip paths resolve
// relative to the manifest's directory.
MotionDataset load_dataset(const std::filesystem::path& manifest_path);

// Clip-format JSON file; returns the frames with derived velocities.
std::vector<Frame> load_frames_file(const std::filesystem::path& path);

// Writes manifest.json plus clips/<name>.json under `dir`.
void save_dataset(const std::filesystem::path& dir, const MotionDataset& dataset);

// Procedurally generated, mutually distinct parameterized gaits. Clip pairs
// closer than 0.05 m mean joint distance are regenerated.
MotionDataset synth_dataset(Index n_clips, Index joints, double fps,
                            std::pair<double, double> duration_range_s, RngSeed seed);

}  // namespace ncse
