#pragma once

#include <optional>
#include <span>
#include <vector>

#include "posegu/camera.hpp"
#include "posegu/propensity.hpp"

namespace posegu {

enum class RatioDirection { kGeneratedOverGt, kGtOverGenerated };

// Which 2D poses the importance weights are evaluated at.
//  kGtBatch: each ground-truth sample's own 2D pose.
//  kGeneratedBatch: the i-th generated sample of the paired batch, weighting
//    the loss of the i-th ground-truth sample.
enum class WeightSource { kGtBatch, kGeneratedBatch };

struct CrmConfig {
  double clip = 10.0;
  RatioDirection ratio_direction = RatioDirection::kGeneratedOverGt;
  WeightSource weight_source = WeightSource::kGtBatch;
  // Ablation switch: every weight is exactly 1.
  bool unit_weights = false;

  void validate() const;
};

RatioDirection ratio_direction_from_string(const std::string& s);
WeightSource weight_source_from_string(const std::string& s);
std::string to_string(RatioDirection d);
std::string to_string(WeightSource s);

nlohmann::json to_json(const CrmConfig& cfg);
CrmConfig crm_config_from_json(const nlohmann::json& doc);

// min(rho_gen(x) / rho_gt(x), clip) for kGeneratedOverGt, the inverse ratio
// for kGtOverGenerated.
double cips_weight(const Pose2D& x, const HistogramMap& gt_hist, const HistogramMap& gen_hist,
                   const CrmConfig& cfg);

std::vector<double> cips_weights(std::span<const Pose2D> points, const HistogramMap& gt_hist,
                                 const HistogramMap& gen_hist, const CrmConfig& cfg);

// Squared coordinate error averaged over the 3J coordinates, mm^2.
double pose_loss(const Pose3D& predicted, const Pose3D& target);

// Batch mean of weights[i] * pose_loss(predicted[i], targets[i]).
double weighted_loss(std::span<const double> weights, std::span<const Pose3D> predicted,
                     std::span<const Pose3D> targets);

// Counterfactual loss over a ground-truth batch. Weights come from the
// batch's own 2D poses, or from `generated_points` when the config asks
// for the generated batch.
double counterfactual_loss(std::span<const PosePair> gt_batch, std::span<const Pose3D> predicted,
                           const HistogramMap& gt_hist, const HistogramMap& gen_hist,
                           const CrmConfig& cfg,
                           std::span<const Pose2D> generated_points = {});

// L_P + lambda_co * L_co.
double total_loss(double generated_loss, double counterfactual, double lambda_co = 1.0);

}  // namespace posegu
