#include "posegu/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "posegu/error.hpp"

namespace posegu {

namespace {

struct JointRange {
  const char* joint;  // the bone ending at this joint
  int axis;
  double lo;
  double hi;
};

// Every bone wobbles by this much on every axis unless listed below.
constexpr double kJitter = 0.08;

// clang-format off
const std::map<std::string, std::vector<JointRange>>& action_table() {
  static const std::map<std::string, std::vector<JointRange>> table = {
      {"walk", {
          {"right_knee", 0, -0.5, 0.5}, {"left_knee", 0, -0.5, 0.5},
          {"right_ankle", 0, 0.0, 0.7}, {"left_ankle", 0, 0.0, 0.7},
          {"left_elbow", 0, -0.5, 0.5}, {"right_elbow", 0, -0.5, 0.5},
          {"left_wrist", 0, -0.6, 0.0}, {"right_wrist", 0, -0.6, 0.0}}},
      {"reach", {
          {"left_elbow", 2, -2.9, -2.0}, {"right_elbow", 2, 2.0, 2.9},
          {"left_elbow", 0, -0.6, 0.3}, {"right_elbow", 0, -0.6, 0.3},
          {"left_wrist", 2, -0.6, 0.2}, {"right_wrist", 2, -0.2, 0.6},
          {"thorax", 1, -0.4, 0.4}}},
      {"squat", {
          {"right_knee", 0, -1.7, -1.1}, {"left_knee", 0, -1.7, -1.1},
          {"right_ankle", 0, 1.2, 2.0}, {"left_ankle", 0, 1.2, 2.0},
          {"thorax", 0, -0.6, -0.2},
          {"left_elbow", 0, -1.7, -1.0}, {"right_elbow", 0, -1.7, -1.0},
          {"left_wrist", 0, -0.5, 0.1}, {"right_wrist", 0, -0.5, 0.1}}},
  };
  return table;
}

// Adult lengths, mm, by the joint a bone ends at.
const std::map<std::string, double>& base_lengths() {
  static const std::map<std::string, double> table = {
      {"right_hip", 130}, {"right_knee", 450}, {"right_ankle", 440},
      {"left_hip", 130},  {"left_knee", 450},  {"left_ankle", 440},
      {"spine", 230},     {"thorax", 250},     {"neck", 110},     {"head", 115},
      {"left_shoulder", 150}, {"left_elbow", 280}, {"left_wrist", 250},
      {"right_shoulder", 150}, {"right_elbow", 280}, {"right_wrist", 250}};
  return table;
}
// clang-format on

int joint_index(const SkeletonTopology& topo, const std::string& name) {
  const auto& names = topo.joint_names();
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) {
    throw ConfigError("synthetic benchmark needs a joint named '" + name + "'");
  }
  return static_cast<int>(it - names.begin());
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  return a * 0x9e3779b97f4a7c15ULL + b + 1;
}

}  // namespace

std::vector<std::string> synthetic_actions() {
  std::vector<std::string> out;
  for (const auto& [name, ranges] : action_table()) out.push_back(name);
  return out;
}

AngleRangeProfile synthetic_profile(const std::string& action, const SkeletonTopology& topo) {
  const auto it = action_table().find(action);
  if (it == action_table().end()) throw ConfigError("unknown synthetic action '" + action + "'");
  const int M = topo.bone_count();
  AngleRangeProfile p;
  p.action = action;
  p.lower = Rows3::Constant(M, 3, -kJitter);
  p.upper = Rows3::Constant(M, 3, kJitter);
  for (const auto& r : it->second) {
    const int bone = topo.bone_of_joint(joint_index(topo, r.joint));
    p.lower(bone, r.axis) = r.lo;
    p.upper(bone, r.axis) = r.hi;
  }
  return p;
}

BoneLengthTemplateSet synthetic_templates(int count, std::uint64_t seed,
                                          const SkeletonTopology& topo) {
  if (count < 1) throw ConfigError("template count must be >= 1");
  Eigen::VectorXd base(topo.bone_count());
  for (int b = 0; b < topo.bone_count(); ++b) {
    const auto& name = topo.joint_names()[topo.bone_child(b)];
    const auto it = base_lengths().find(name);
    if (it == base_lengths().end()) {
      throw ConfigError("synthetic benchmark has no length for bone '" + name + "'");
    }
    base[b] = it->second;
  }
  Rng rng = make_rng(seed, 0, rng_tag::kBenchmark);
  BoneLengthTemplateSet out;
  for (int t = 0; t < count; ++t) {
    const double scale = uniform(rng, 0.9, 1.1);
    BoneLengths l{base};
    for (int b = 0; b < l.bone_count(); ++b) l.lengths[b] *= scale * uniform(rng, 0.97, 1.03);
    out.push_back({l, ""});
  }
  return out;
}

GeneratedDataset generate_action(const AngleRangeProfile& profile,
                                 const BoneLengthTemplateSet& templates, int sequences,
                                 const GeneratorConfig& cfg, std::uint64_t stream,
                                 int first_id, const SkeletonTopology& topo) {
  if (sequences <= 0) return {};
  GeneratorConfig c = cfg;
  c.sequences_per_action = sequences;
  c.rng_seed = mix(cfg.rng_seed, stream);
  GeneratedDataset out = generate_dataset({profile}, templates, c, topo);
  for (auto& s : out) s.sequence_id += first_id;
  return out;
}

void SyntheticSpec::validate() const {
  if (actions.empty()) throw ConfigError("benchmark needs at least one action");
  if (generated_mix.size() != actions.size()) {
    throw ConfigError("benchmark generated_mix needs one share per action");
  }
  for (double w : generated_mix) {
    if (!(w >= 0.0)) throw ConfigError("benchmark generated_mix shares must be >= 0");
  }
  if (gt_sequences_per_action < 1 || test_sequences_per_action < 1 || generated_sequences < 1) {
    throw ConfigError("benchmark sequence counts must be >= 1");
  }
  generator.validate();
  camera.validate();
}

std::vector<DatasetRecord> make_synthetic_gt(const std::vector<std::string>& actions,
                                             int sequences_per_action,
                                             const GeneratorConfig& cfg,
                                             const CameraIntrinsics& cam, int template_count,
                                             std::uint64_t stream,
                                             const SkeletonTopology& topo) {
  const auto templates = synthetic_templates(template_count, mix(cfg.rng_seed, stream), topo);
  std::vector<DatasetRecord> out;
  int next_id = 0;
  for (std::size_t a = 0; a < actions.size(); ++a) {
    const auto seqs = generate_action(synthetic_profile(actions[a], topo), templates,
                                      sequences_per_action, cfg, mix(stream, a), next_id, topo);
    next_id += sequences_per_action;
    for (const auto& s : seqs) {
      for (const auto& pose : s.poses) {
        out.push_back(make_gt_record(static_cast<long>(out.size()), s.sequence_id, s.action, pose,
                                     cam, topo));
      }
    }
  }
  return out;
}

std::vector<LabeledPose> select_seeds(const std::vector<DatasetRecord>& records, int per_action,
                                      Rng& rng) {
  std::map<std::string, std::vector<std::size_t>> by_action;
  for (std::size_t i = 0; i < records.size(); ++i) by_action[records[i].action].push_back(i);
  std::vector<LabeledPose> out;
  for (auto& [action, idx] : by_action) {
    const std::size_t k = std::min<std::size_t>(idx.size(), static_cast<std::size_t>(per_action));
    for (std::size_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    std::sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
    for (std::size_t i = 0; i < k; ++i) out.push_back({records[idx[i]].joints3d, action});
  }
  return out;
}

SyntheticBenchmark build_benchmark(const SyntheticSpec& spec, const SkeletonTopology& topo) {
  spec.validate();
  GeneratorConfig gcfg = spec.generator;
  gcfg.rng_seed = spec.seed;

  SyntheticBenchmark b;
  b.gt = make_synthetic_gt(spec.actions, spec.gt_sequences_per_action, gcfg, spec.camera,
                           spec.template_count, 1, topo);
  b.test = make_synthetic_gt(spec.actions, spec.test_sequences_per_action, gcfg, spec.camera,
                             spec.template_count, 2, topo);

  Rng seed_rng = make_rng(spec.seed, 0, rng_tag::kSeedSelect);
  b.seeds = select_seeds(b.gt, gcfg.seed_samples_per_action, seed_rng);
  b.profiles = extract_ranges(b.seeds, topo, gcfg.range_padding, gcfg.ik_frame);
  b.templates = extract_templates(b.seeds, topo);

  double total_share = 0.0;
  for (double w : spec.generated_mix) total_share += w;
  if (!(total_share > 0.0)) throw ConfigError("benchmark generated_mix sums to zero");

  GeneratedDataset generated;
  int next_id = 0;
  for (std::size_t a = 0; a < spec.actions.size(); ++a) {
    const auto it = std::find_if(b.profiles.begin(), b.profiles.end(),
                                 [&](const auto& p) { return p.action == spec.actions[a]; });
    const int count = static_cast<int>(
        std::lround(spec.generated_sequences * spec.generated_mix[a] / total_share));
    auto seqs = generate_action(*it, b.templates, count, gcfg, mix(3, a), next_id, topo);
    next_id += count;
    for (auto& s : seqs) generated.push_back(std::move(s));
  }
  b.generated = records_from_generated(generated, spec.camera, topo);
  return b;
}

}  // namespace posegu
