#pragma once

#include <cstdint>
#include <string>

#include "posegu/camera.hpp"
#include "posegu/crm.hpp"
#include "posegu/estimator.hpp"
#include "posegu/posegen.hpp"

namespace posegu {

struct HistogramSettings {
  int bin_count = 64;
  double epsilon = 1e-6;
  double fraction = 0.25;
  // Build the generated-set histogram on the ground-truth bin edges.
  bool shared_edges = false;

  void validate() const;
};

// Everything a command needs besides its input files. Unknown JSON fields
// are rejected with the dotted field name.
//
//   {"topology": "path.json" (optional, built-in 17-joint skeleton otherwise),
//    "seed": 0,
//    "generator": {"keyframes", "inter_frames", "sequences_per_action",
//                  "global_rotation_deg": [[min, max] x 3],
//                  "seed_samples_per_action", "range_padding",
//                  "root_box": {"lower": [x,y,z], "upper": [x,y,z]}, "ik_frame"},
//    "camera": {...}, "histogram": {...}, "crm": {...},
//    "train": {...}, "output_dir": "."}
struct PipelineConfig {
  std::string topology_path;
  std::uint64_t seed = 0;
  GeneratorConfig generator;
  CameraIntrinsics camera;
  HistogramSettings histogram;
  CrmConfig crm;
  TrainConfig train;
  std::string output_dir = ".";

  // Propagates `seed` into the nested configs.
  void set_seed(std::uint64_t s);
  void validate() const;
  SkeletonTopology topology() const;
};

// Applies the fields present in `doc` on top of `base`.
PipelineConfig apply_config_json(PipelineConfig base, const nlohmann::json& doc);
PipelineConfig config_from_json(const nlohmann::json& doc);
PipelineConfig load_config(const std::string& path);
nlohmann::json to_json(const PipelineConfig& cfg);

TrainConfig train_config_from_json(TrainConfig base, const nlohmann::json& doc);
nlohmann::json to_json(const TrainConfig& cfg);

}  // namespace posegu
