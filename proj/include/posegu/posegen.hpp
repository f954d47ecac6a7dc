#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "posegu/kinematics.hpp"
#include "posegu/rng.hpp"

namespace posegu {

// Per-bone, per-axis [lower, upper] interval of direction angles, radians.
struct AngleRangeProfile {
  std::string action;
  Rows3 lower;
  Rows3 upper;
  int seed_count = 0;
};

struct LabeledPose {
  Pose3D pose;
  std::string action;
};

struct BoneLengthTemplate {
  BoneLengths lengths;
  std::string action;
};

using BoneLengthTemplateSet = std::vector<BoneLengthTemplate>;

// Axis-aligned box for sampling the root joint, camera coordinates, mm.
struct RootBox {
  Vec3 lower{-500.0, -500.0, 3000.0};
  Vec3 upper{500.0, 500.0, 6000.0};
};

struct GeneratorConfig {
  int keyframes = 5;       // T
  int inter_frames = 10;   // N
  int sequences_per_action = 4;
  // Row k: [min, max] radians of the whole-body rotation about axis k.
  Eigen::Matrix<double, 3, 2> global_rotation_range = Eigen::Matrix<double, 3, 2>::Zero();
  std::uint64_t rng_seed = 0;
  int seed_samples_per_action = 20;
  double range_padding = 0.05;
  RootBox root_box;
  IkFrame ik_frame = IkFrame::kParent;

  int frames_per_sequence() const { return keyframes * inter_frames; }  // K = N * T

  // Throws ConfigError naming the offending field.
  void validate() const;
};

struct GeneratedSequence {
  int sequence_id = 0;
  std::string action;
  int template_index = 0;
  BoneLengths lengths;
  Vec3 root = Vec3::Zero();
  Vec3 global_rotation = Vec3::Zero();
  std::vector<AngleMatrix> angles;  // one per frame, as fed to forward kinematics
  std::vector<Pose3D> poses;        // camera coordinates after global rotation
};

using GeneratedDataset = std::vector<GeneratedSequence>;

// Min/max of the inverse-kinematics angles per action, widened by
// `padding` and clamped to [0, pi]. Profiles are sorted by action label.
std::vector<AngleRangeProfile> extract_ranges(const std::vector<LabeledPose>& seeds,
                                              const SkeletonTopology& topo,
                                              double padding = 0.05,
                                              IkFrame frame = IkFrame::kParent);

// Bone lengths of every seed, in input order.
BoneLengthTemplateSet extract_templates(const std::vector<LabeledPose>& seeds,
                                        const SkeletonTopology& topo);

// T angle matrices, every entry uniform on its profile interval.
std::vector<AngleMatrix> sample_keyframes(const AngleRangeProfile& profile, int count,
                                          Rng& rng);

// Frames n = 1..N of prev + n * (next - prev) / N; frame N is `next`.
std::vector<AngleMatrix> interpolate(const AngleMatrix& prev, const AngleMatrix& next,
                                     int steps);

// K = N * T frames from T keyframes. Segment t runs from keyframe t-1 to
// keyframe t; the first segment starts at the last keyframe, so the
// sequence closes into a loop.
std::vector<AngleMatrix> fill_sequence(const std::vector<AngleMatrix>& keyframes,
                                       int inter_frames);

// Rigid rotation of every joint about the root joint by bone_rotation(angles).
Pose3D global_rotation(const Pose3D& pose, const Vec3& angles,
                       const SkeletonTopology& topo);

// sequences_per_action sequences for each profile. Sequence g draws from
// its own stream make_rng(rng_seed, g), so the result does not depend on
// the number of worker threads.
GeneratedDataset generate_dataset(const std::vector<AngleRangeProfile>& profiles,
                                  const BoneLengthTemplateSet& templates,
                                  const GeneratorConfig& cfg, const SkeletonTopology& topo);

std::size_t frame_count(const GeneratedDataset& data);

nlohmann::json to_json(const AngleRangeProfile& profile);
AngleRangeProfile profile_from_json(const nlohmann::json& doc, const SkeletonTopology& topo);

}  // namespace posegu
