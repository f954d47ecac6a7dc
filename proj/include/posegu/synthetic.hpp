#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "posegu/dataset.hpp"

namespace posegu {

// Built-in action profiles for the 17-joint skeleton, given directly as
// forward-kinematics angle intervals. They play the part of a real motion
// capture source: ground-truth sets are drawn from them and the pipeline
// only ever sees the resulting poses.
// Known actions: "walk", "reach", "squat".
std::vector<std::string> synthetic_actions();
AngleRangeProfile synthetic_profile(const std::string& action, const SkeletonTopology& topo);

// `count` bone-length templates around an adult body, each scaled by a
// common factor in [0.9, 1.1] with 3 % per-bone jitter.
BoneLengthTemplateSet synthetic_templates(int count, std::uint64_t seed,
                                          const SkeletonTopology& topo);

// Sequences for one action, ids starting at `first_id`. Uses the
// generator machinery with its own seed stream per (seed, action index).
GeneratedDataset generate_action(const AngleRangeProfile& profile,
                                 const BoneLengthTemplateSet& templates, int sequences,
                                 const GeneratorConfig& cfg, std::uint64_t stream,
                                 int first_id, const SkeletonTopology& topo);

struct SyntheticSpec {
  std::vector<std::string> actions{"reach", "squat"};
  int gt_sequences_per_action = 80;    // ground-truth pool, equal per action
  int test_sequences_per_action = 20;  // held-out balanced test set
  // Share of generated sequences per action, same order as `actions`.
  std::vector<double> generated_mix{0.9, 0.1};
  int generated_sequences = 400;
  int template_count = 8;
  GeneratorConfig generator;
  CameraIntrinsics camera;
  std::uint64_t seed = 0;

  void validate() const;
};

// The skewed benchmark: a balanced ground-truth pool, a balanced test set
// from fresh sequences, seed poses drawn from the pool, and a generated
// set grown from those seeds with the skewed action mix.
struct SyntheticBenchmark {
  std::vector<DatasetRecord> gt;
  std::vector<DatasetRecord> test;
  std::vector<LabeledPose> seeds;
  std::vector<AngleRangeProfile> profiles;  // extracted from `seeds`
  BoneLengthTemplateSet templates;          // extracted from `seeds`
  std::vector<DatasetRecord> generated;
};

// Ground-truth records, `sequences_per_action` sequences per action.
std::vector<DatasetRecord> make_synthetic_gt(const std::vector<std::string>& actions,
                                             int sequences_per_action,
                                             const GeneratorConfig& cfg,
                                             const CameraIntrinsics& cam, int template_count,
                                             std::uint64_t stream,
                                             const SkeletonTopology& topo);

// Up to `per_action` records per action label, chosen uniformly without
// replacement with `rng`; output grouped by action in sorted order.
std::vector<LabeledPose> select_seeds(const std::vector<DatasetRecord>& records, int per_action,
                                      Rng& rng);

SyntheticBenchmark build_benchmark(const SyntheticSpec& spec, const SkeletonTopology& topo);

}  // namespace posegu
