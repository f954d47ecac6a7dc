#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "posegu/config.hpp"
#include "posegu/dataset.hpp"
#include "posegu/metrics.hpp"
#include "posegu/propensity.hpp"

namespace posegu {

// One function per command-line verb. Each reads its inputs, checks that
// every artifact carries the configured topology digest before computing
// anything, writes its outputs atomically and prints a short summary to
// `log`. Failures are thrown as posegu::Error subclasses.

// Angle range profiles plus bone-length templates.
struct RangesArtifact {
  std::string topology;
  double padding = 0.0;
  IkFrame ik_frame = IkFrame::kParent;
  std::vector<AngleRangeProfile> profiles;
  BoneLengthTemplateSet templates;
};

nlohmann::json to_json(const RangesArtifact& r);
RangesArtifact ranges_from_json(const nlohmann::json& doc, const SkeletonTopology& topo);

// A histogram map with where it came from.
struct HistogramArtifact {
  std::string topology;
  std::string source_digest;  // SHA-256 of the dataset file
  std::string dataset_source; // "gt" or "generated"
  double fraction = 1.0;
  std::uint64_t seed = 0;
  HistogramMap histogram;
};

nlohmann::json to_json(const HistogramArtifact& h);
HistogramArtifact histogram_artifact_from_json(const nlohmann::json& doc,
                                               const SkeletonTopology& topo);

void cmd_extract_ranges(const std::string& seeds_path, const std::string& out_path,
                        const PipelineConfig& cfg, std::ostream& log);

void cmd_generate(const std::string& ranges_path, const std::string& out_path,
                  const PipelineConfig& cfg, std::ostream& log);

// `edges_path` names a histogram whose bin edges are reused (shared edges).
void cmd_histogram(const std::string& dataset_path, double fraction, const std::string& out_path,
                   const PipelineConfig& cfg, std::ostream& log,
                   const std::string& edges_path = "");

// Writes the checkpoint to `checkpoint_path` and the loss trace CSV to
// `trace_path`. The ground-truth subsample is the one the ground-truth
// histogram was built from.
void cmd_train(const std::string& gen_path, const std::string& gt_path,
               const std::string& gt_hist_path, const std::string& gen_hist_path,
               const std::string& checkpoint_path, const std::string& trace_path,
               const PipelineConfig& cfg, std::ostream& log);

EvalReport cmd_eval(const std::string& checkpoint_path, const std::string& test_path,
                    const std::string& report_path, const PipelineConfig& cfg, std::ostream& log);

// Writes points_a.csv, points_b.csv (u, v, x, y, z of the joint, root
// relative) and marginal_u.csv, marginal_v.csv (shared bins, one count
// column per dataset) into `out_dir`.
void cmd_plot_dist(const std::string& a_path, const std::string& b_path, int joint_index,
                   const std::string& out_dir, const PipelineConfig& cfg, std::ostream& log);

// Synthetic ground truth from the built-in action profiles, equal
// sequence counts per action.
void cmd_make_gt(const std::vector<std::string>& actions, int sequences_per_action,
                 const std::string& out_path, const PipelineConfig& cfg, std::ostream& log);

// CSV "epoch,L_P,L_co,L_A".
std::string trace_csv(const std::vector<EpochLoss>& trace);

}  // namespace posegu
