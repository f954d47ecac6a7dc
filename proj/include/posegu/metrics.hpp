#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "posegu/skeleton.hpp"

namespace posegu {

// Mean per-joint Euclidean distance, mm.
double mpjpe(const Pose3D& pred, const Pose3D& gt);

struct SimilarityTransform {
  double scale = 1.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Pose3D apply(const Pose3D& pose) const;
};

// Least-squares similarity transform taking `source` onto `target`:
// rotation from the SVD of the centred cross-covariance with the sign of
// the last singular direction flipped when needed to exclude reflections.
// Throws NumericalError for rank-deficient configurations.
SimilarityTransform procrustes_align(const Pose3D& source, const Pose3D& target);

// MPJPE after aligning pred onto gt with procrustes_align.
double p_mpjpe(const Pose3D& pred, const Pose3D& gt);

// Percentage of joints (over all poses) whose error is <= threshold mm.
double pck(std::span<const Pose3D> preds, std::span<const Pose3D> gts, double threshold = 150.0);

// 0, 5, ..., 150 mm.
std::vector<double> default_auc_thresholds();

// Mean of the PCK curve over the thresholds, percent.
double auc(std::span<const Pose3D> preds, std::span<const Pose3D> gts,
           std::span<const double> thresholds);
double auc(std::span<const Pose3D> preds, std::span<const Pose3D> gts);

struct MetricSummary {
  double mpjpe = 0.0;
  double p_mpjpe = 0.0;
  double pck = 0.0;
  double auc = 0.0;
  std::size_t sample_count = 0;
};

struct EvalReport {
  MetricSummary overall;
  std::map<std::string, MetricSummary> per_action;
};

// Root-centres both sets, then computes every metric overall and per action
// label. `actions` may be empty.
EvalReport evaluate(std::span<const Pose3D> preds, std::span<const Pose3D> gts,
                    std::span<const std::string> actions, const SkeletonTopology& topo);

nlohmann::json to_json(const EvalReport& report);
// Aligned-column text table, one row per action plus an "all" row.
std::string to_table(const EvalReport& report);

}  // namespace posegu
