#include "posegu/posegen.hpp"

#include <algorithm>
#include <map>
#include <numbers>

#include "posegu/error.hpp"
#include "posegu/json_util.hpp"
#include "posegu/parallel.hpp"

namespace posegu {

void GeneratorConfig::validate() const {
  if (keyframes < 2) throw ConfigError("generator.keyframes must be >= 2");
  if (inter_frames < 1) throw ConfigError("generator.inter_frames must be >= 1");
  if (sequences_per_action < 1) throw ConfigError("generator.sequences_per_action must be >= 1");
  if (seed_samples_per_action < 1) {
    throw ConfigError("generator.seed_samples_per_action must be >= 1");
  }
  if (!(range_padding >= 0.0)) throw ConfigError("generator.range_padding must be >= 0");
  if (!global_rotation_range.allFinite() ||
      (global_rotation_range.col(0).array() > global_rotation_range.col(1).array()).any()) {
    throw ConfigError("generator.global_rotation_range needs finite min <= max per axis");
  }
  if (!root_box.lower.allFinite() || !root_box.upper.allFinite() ||
      (root_box.lower.array() > root_box.upper.array()).any()) {
    throw ConfigError("generator.root_box needs finite lower <= upper");
  }
}

std::vector<AngleRangeProfile> extract_ranges(const std::vector<LabeledPose>& seeds,
                                              const SkeletonTopology& topo, double padding,
                                              IkFrame frame) {
  if (seeds.empty()) throw DataError("extract_ranges: no seed poses");
  std::map<std::string, AngleRangeProfile> by_action;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (seeds[i].action.empty()) {
      throw DataError("seed " + std::to_string(i) + " has an empty action label");
    }
    AngleMatrix a;
    try {
      a = inverse_kinematics(seeds[i].pose, topo, frame);
    } catch (const NumericalError& e) {
      throw NumericalError("seed " + std::to_string(i) + ": " + e.what());
    }
    auto [it, inserted] = by_action.try_emplace(seeds[i].action);
    AngleRangeProfile& p = it->second;
    if (inserted) {
      p.action = seeds[i].action;
      p.lower = a.angles;
      p.upper = a.angles;
    } else {
      p.lower = p.lower.cwiseMin(a.angles);
      p.upper = p.upper.cwiseMax(a.angles);
    }
    ++p.seed_count;
  }
  std::vector<AngleRangeProfile> out;
  out.reserve(by_action.size());
  for (auto& [action, p] : by_action) {
    p.lower = (p.lower.array() - padding).max(0.0).matrix();
    p.upper = (p.upper.array() + padding).min(std::numbers::pi).matrix();
    out.push_back(std::move(p));
  }
  return out;
}

BoneLengthTemplateSet extract_templates(const std::vector<LabeledPose>& seeds,
                                        const SkeletonTopology& topo) {
  BoneLengthTemplateSet out;
  out.reserve(seeds.size());
  for (const auto& s : seeds) {
    BoneLengths l = bone_lengths_of(s.pose, topo);
    validate(l, topo);
    out.push_back({std::move(l), s.action});
  }
  return out;
}

std::vector<AngleMatrix> sample_keyframes(const AngleRangeProfile& profile, int count,
                                          Rng& rng) {
  std::vector<AngleMatrix> out;
  out.reserve(count);
  const Eigen::Index M = profile.lower.rows();
  for (int t = 0; t < count; ++t) {
    AngleMatrix a{Rows3(M, 3)};
    for (Eigen::Index b = 0; b < M; ++b) {
      for (int k = 0; k < 3; ++k) {
        a.angles(b, k) = uniform(rng, profile.lower(b, k), profile.upper(b, k));
      }
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<AngleMatrix> interpolate(const AngleMatrix& prev, const AngleMatrix& next,
                                     int steps) {
  if (steps < 1) throw ConfigError("interpolate: step count must be >= 1");
  if (prev.angles.rows() != next.angles.rows()) {
    throw DimensionError("interpolate: angle matrices differ in bone count");
  }
  const Rows3 delta = (next.angles - prev.angles) / static_cast<double>(steps);
  std::vector<AngleMatrix> out;
  out.reserve(steps);
  for (int n = 1; n < steps; ++n) {
    out.push_back({prev.angles + static_cast<double>(n) * delta});
  }
  out.push_back(next);
  return out;
}

std::vector<AngleMatrix> fill_sequence(const std::vector<AngleMatrix>& keyframes,
                                       int inter_frames) {
  if (keyframes.empty()) throw DataError("fill_sequence: no keyframes");
  std::vector<AngleMatrix> frames;
  frames.reserve(keyframes.size() * inter_frames);
  for (std::size_t t = 0; t < keyframes.size(); ++t) {
    const AngleMatrix& prev = keyframes[t == 0 ? keyframes.size() - 1 : t - 1];
    for (auto& f : interpolate(prev, keyframes[t], inter_frames)) frames.push_back(std::move(f));
  }
  return frames;
}

Pose3D global_rotation(const Pose3D& pose, const Vec3& angles, const SkeletonTopology& topo) {
  if (pose.joint_count() != topo.joint_count()) {
    throw DimensionError("global_rotation: pose does not match topology");
  }
  const Mat3 r = bone_rotation(angles);
  const Eigen::RowVector3d root = pose.joints.row(topo.root());
  Pose3D out{Rows3(pose.joints.rows(), 3)};
  for (Eigen::Index j = 0; j < pose.joints.rows(); ++j) {
    out.joints.row(j) = root + (r * (pose.joints.row(j) - root).transpose()).transpose();
  }
  return out;
}

GeneratedDataset generate_dataset(const std::vector<AngleRangeProfile>& profiles,
                                  const BoneLengthTemplateSet& templates,
                                  const GeneratorConfig& cfg, const SkeletonTopology& topo) {
  cfg.validate();
  if (profiles.empty()) throw DataError("generate_dataset: no angle range profiles");
  if (templates.empty()) throw DataError("generate_dataset: no bone length templates");
  const int M = topo.bone_count();
  for (const auto& p : profiles) {
    if (p.lower.rows() != M || p.upper.rows() != M) {
      throw DimensionError("profile '" + p.action + "' does not match topology");
    }
  }
  for (const auto& t : templates) validate(t.lengths, topo);

  const std::size_t per_action = cfg.sequences_per_action;
  GeneratedDataset out(profiles.size() * per_action);
  parallel_for(out.size(), [&](std::size_t g) {
    const AngleRangeProfile& profile = profiles[g / per_action];
    Rng rng = make_rng(cfg.rng_seed, g, rng_tag::kSequence);

    GeneratedSequence seq;
    seq.sequence_id = static_cast<int>(g);
    seq.action = profile.action;
    const auto keyframes = sample_keyframes(profile, cfg.keyframes, rng);
    seq.angles = fill_sequence(keyframes, cfg.inter_frames);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(templates.size()) - 1);
    seq.template_index = pick(rng);
    seq.lengths = templates[seq.template_index].lengths;
    for (int k = 0; k < 3; ++k) {
      seq.global_rotation[k] =
          uniform(rng, cfg.global_rotation_range(k, 0), cfg.global_rotation_range(k, 1));
      seq.root[k] = uniform(rng, cfg.root_box.lower[k], cfg.root_box.upper[k]);
    }
    seq.poses.reserve(seq.angles.size());
    for (const auto& a : seq.angles) {
      seq.poses.push_back(
          global_rotation(forward_kinematics(a, seq.lengths, seq.root, topo), seq.global_rotation, topo));
    }
    out[g] = std::move(seq);
  });
  return out;
}

std::size_t frame_count(const GeneratedDataset& data) {
  std::size_t n = 0;
  for (const auto& s : data) n += s.poses.size();
  return n;
}

nlohmann::json to_json(const AngleRangeProfile& profile) {
  return {{"action", profile.action},
          {"seed_count", profile.seed_count},
          {"lower", rows_to_json(profile.lower)},
          {"upper", rows_to_json(profile.upper)}};
}

AngleRangeProfile profile_from_json(const nlohmann::json& doc, const SkeletonTopology& topo) {
  AngleRangeProfile p;
  try {
    p.action = doc.at("action").get<std::string>();
    p.seed_count = doc.at("seed_count").get<int>();
    p.lower = rows_from_json<Rows3>(doc.at("lower"), topo.bone_count(), "lower");
    p.upper = rows_from_json<Rows3>(doc.at("upper"), topo.bone_count(), "upper");
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed angle range profile: ") + e.what());
  }
  if ((p.lower.array() > p.upper.array()).any()) {
    throw DataError("profile '" + p.action + "' has lower > upper");
  }
  if ((p.lower.array() < 0.0).any() || (p.upper.array() > std::numbers::pi).any()) {
    throw DataError("profile '" + p.action + "' leaves [0, pi]");
  }
  return p;
}

}  // namespace posegu
