#include "posegu/crm.hpp"

#include <algorithm>
#include <cmath>

#include "posegu/error.hpp"

namespace posegu {

void CrmConfig::validate() const {
  if (!(clip > 0.0) || !std::isfinite(clip)) throw ConfigError("crm.clip must be > 0");
}

RatioDirection ratio_direction_from_string(const std::string& s) {
  if (s == "generated_over_gt") return RatioDirection::kGeneratedOverGt;
  if (s == "gt_over_generated") return RatioDirection::kGtOverGenerated;
  throw ConfigError("crm.ratio_direction must be generated_over_gt or gt_over_generated");
}

WeightSource weight_source_from_string(const std::string& s) {
  if (s == "gt_batch") return WeightSource::kGtBatch;
  if (s == "generated_batch") return WeightSource::kGeneratedBatch;
  throw ConfigError("crm.weight_source must be gt_batch or generated_batch");
}

std::string to_string(RatioDirection d) {
  return d == RatioDirection::kGeneratedOverGt ? "generated_over_gt" : "gt_over_generated";
}

std::string to_string(WeightSource s) {
  return s == WeightSource::kGtBatch ? "gt_batch" : "generated_batch";
}

nlohmann::json to_json(const CrmConfig& cfg) {
  return {{"clip", cfg.clip},
          {"ratio_direction", to_string(cfg.ratio_direction)},
          {"weight_source", to_string(cfg.weight_source)},
          {"unit_weights", cfg.unit_weights}};
}

CrmConfig crm_config_from_json(const nlohmann::json& doc) {
  CrmConfig cfg;
  for (const auto& [key, value] : doc.items()) {
    try {
      if (key == "clip") cfg.clip = value.get<double>();
      else if (key == "ratio_direction") cfg.ratio_direction = ratio_direction_from_string(value.get<std::string>());
      else if (key == "weight_source") cfg.weight_source = weight_source_from_string(value.get<std::string>());
      else if (key == "unit_weights") cfg.unit_weights = value.get<bool>();
      else throw ConfigError("unknown field crm." + key);
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("crm." + key + " has the wrong type");
    }
  }
  cfg.validate();
  return cfg;
}

double cips_weight(const Pose2D& x, const HistogramMap& gt_hist, const HistogramMap& gen_hist,
                   const CrmConfig& cfg) {
  if (cfg.unit_weights) return 1.0;
  const double rho_gt = propensity(x, gt_hist);
  const double rho_gen = propensity(x, gen_hist);
  const double ratio = cfg.ratio_direction == RatioDirection::kGeneratedOverGt ? rho_gen / rho_gt
                                                                               : rho_gt / rho_gen;
  if (!std::isfinite(ratio) || !(ratio > 0.0)) {
    throw NumericalError("propensity ratio is not positive and finite; is epsilon zero?");
  }
  return std::min(ratio, cfg.clip);
}

std::vector<double> cips_weights(std::span<const Pose2D> points, const HistogramMap& gt_hist,
                                 const HistogramMap& gen_hist, const CrmConfig& cfg) {
  std::vector<double> w;
  w.reserve(points.size());
  for (const auto& p : points) w.push_back(cips_weight(p, gt_hist, gen_hist, cfg));
  return w;
}

double pose_loss(const Pose3D& predicted, const Pose3D& target) {
  if (predicted.joints.rows() != target.joints.rows()) {
    throw DimensionError("pose_loss: joint counts differ");
  }
  return (predicted.joints - target.joints).squaredNorm() /
         static_cast<double>(predicted.joints.size());
}

double weighted_loss(std::span<const double> weights, std::span<const Pose3D> predicted,
                     std::span<const Pose3D> targets) {
  if (predicted.empty()) throw DataError("loss over an empty batch");
  if (weights.size() != predicted.size() || targets.size() != predicted.size()) {
    throw DimensionError("weighted_loss: batch sizes differ");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    sum += weights[i] * pose_loss(predicted[i], targets[i]);
  }
  return sum / static_cast<double>(predicted.size());
}

double counterfactual_loss(std::span<const PosePair> gt_batch, std::span<const Pose3D> predicted,
                           const HistogramMap& gt_hist, const HistogramMap& gen_hist,
                           const CrmConfig& cfg, std::span<const Pose2D> generated_points) {
  if (gt_batch.empty()) throw DataError("counterfactual_loss: empty batch");
  std::vector<Pose2D> points;
  if (cfg.weight_source == WeightSource::kGeneratedBatch) {
    if (generated_points.size() != gt_batch.size()) {
      throw DimensionError("counterfactual_loss: generated batch must pair with the GT batch");
    }
    points.assign(generated_points.begin(), generated_points.end());
  } else {
    for (const auto& p : gt_batch) points.push_back(p.input);
  }
  const auto w = cips_weights(points, gt_hist, gen_hist, cfg);
  std::vector<Pose3D> targets;
  targets.reserve(gt_batch.size());
  for (const auto& p : gt_batch) targets.push_back(p.target);
  return weighted_loss(w, predicted, targets);
}

double total_loss(double generated_loss, double counterfactual, double lambda_co) {
  if (!std::isfinite(generated_loss) || !std::isfinite(counterfactual)) {
    throw NumericalError("total_loss: non-finite term");
  }
  return generated_loss + lambda_co * counterfactual;
}

}  // namespace posegu
