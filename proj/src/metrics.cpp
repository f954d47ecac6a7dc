#include "posegu/metrics.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <cstdio>
#include <sstream>

#include "posegu/error.hpp"

namespace posegu {

namespace {

void check_pair(const Pose3D& a, const Pose3D& b) {
  if (a.joints.rows() != b.joints.rows()) {
    throw DimensionError("metric inputs have " + std::to_string(a.joints.rows()) + " and " +
                         std::to_string(b.joints.rows()) + " joints");
  }
  if (a.joints.rows() == 0) throw DimensionError("metric inputs have no joints");
}

void check_sets(std::span<const Pose3D> preds, std::span<const Pose3D> gts) {
  if (preds.empty()) throw DataError("metric over an empty set");
  if (preds.size() != gts.size()) throw DimensionError("prediction and ground-truth counts differ");
  for (std::size_t i = 0; i < preds.size(); ++i) check_pair(preds[i], gts[i]);
}

}  // namespace

double mpjpe(const Pose3D& pred, const Pose3D& gt) {
  check_pair(pred, gt);
  return (pred.joints - gt.joints).rowwise().norm().mean();
}

Pose3D SimilarityTransform::apply(const Pose3D& pose) const {
  Pose3D out = pose;
  out.joints = (scale * (pose.joints * rotation.transpose())).rowwise() + translation.transpose();
  return out;
}

SimilarityTransform procrustes_align(const Pose3D& source, const Pose3D& target) {
  check_pair(source, target);
  const Eigen::RowVector3d mu_s = source.joints.colwise().mean();
  const Eigen::RowVector3d mu_t = target.joints.colwise().mean();
  const Rows3 s = source.joints.rowwise() - mu_s;
  const Rows3 t = target.joints.rowwise() - mu_t;
  const double var_s = s.squaredNorm();
  const double var_t = t.squaredNorm();
  const Mat3 cov = t.transpose() * s;  // sum_j t_j s_j^T

  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sv = svd.singularValues();
  const double tol = 1e-12 * std::max(var_s, var_t);
  if (!(var_s > tol) || !(var_t > tol) || !(sv[1] > tol)) {
    throw NumericalError("procrustes alignment failed: point set is rank deficient");
  }
  Vec3 d = Vec3::Ones();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) d[2] = -1.0;

  SimilarityTransform x;
  x.rotation = svd.matrixU() * d.asDiagonal() * svd.matrixV().transpose();
  x.scale = sv.dot(d) / var_s;
  x.translation = mu_t.transpose() - x.scale * x.rotation * mu_s.transpose();
  return x;
}

double p_mpjpe(const Pose3D& pred, const Pose3D& gt) {
  return mpjpe(procrustes_align(pred, gt).apply(pred), gt);
}

double pck(std::span<const Pose3D> preds, std::span<const Pose3D> gts, double threshold) {
  check_sets(preds, gts);
  std::size_t hits = 0, total = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const Eigen::VectorXd err = (preds[i].joints - gts[i].joints).rowwise().norm();
    for (Eigen::Index j = 0; j < err.size(); ++j) hits += err[j] <= threshold ? 1 : 0;
    total += static_cast<std::size_t>(err.size());
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(total);
}

std::vector<double> default_auc_thresholds() {
  std::vector<double> t;
  for (int mm = 0; mm <= 150; mm += 5) t.push_back(mm);
  return t;
}

double auc(std::span<const Pose3D> preds, std::span<const Pose3D> gts,
           std::span<const double> thresholds) {
  if (thresholds.empty()) throw DataError("auc: empty threshold grid");
  double sum = 0.0;
  for (double t : thresholds) sum += pck(preds, gts, t);
  return sum / static_cast<double>(thresholds.size());
}

double auc(std::span<const Pose3D> preds, std::span<const Pose3D> gts) {
  const auto t = default_auc_thresholds();
  return auc(preds, gts, t);
}

namespace {

MetricSummary summarize(std::span<const Pose3D> preds, std::span<const Pose3D> gts) {
  MetricSummary m;
  m.sample_count = preds.size();
  for (std::size_t i = 0; i < preds.size(); ++i) {
    m.mpjpe += mpjpe(preds[i], gts[i]);
    m.p_mpjpe += p_mpjpe(preds[i], gts[i]);
  }
  m.mpjpe /= static_cast<double>(preds.size());
  m.p_mpjpe /= static_cast<double>(preds.size());
  m.pck = pck(preds, gts);
  m.auc = auc(preds, gts);
  return m;
}

nlohmann::json to_json(const MetricSummary& m) {
  return {{"mpjpe", m.mpjpe},
          {"p_mpjpe", m.p_mpjpe},
          {"pck", m.pck},
          {"auc", m.auc},
          {"sample_count", m.sample_count}};
}

}  // namespace

EvalReport evaluate(std::span<const Pose3D> preds, std::span<const Pose3D> gts,
                    std::span<const std::string> actions, const SkeletonTopology& topo) {
  check_sets(preds, gts);
  if (!actions.empty() && actions.size() != preds.size()) {
    throw DimensionError("evaluate: one action label per pose required");
  }
  std::vector<Pose3D> p, g;
  p.reserve(preds.size());
  g.reserve(gts.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    p.push_back(root_relative(preds[i], topo));
    g.push_back(root_relative(gts[i], topo));
  }
  EvalReport report;
  report.overall = summarize(p, g);
  if (!actions.empty()) {
    std::map<std::string, std::pair<std::vector<Pose3D>, std::vector<Pose3D>>> groups;
    for (std::size_t i = 0; i < p.size(); ++i) {
      groups[actions[i]].first.push_back(p[i]);
      groups[actions[i]].second.push_back(g[i]);
    }
    for (const auto& [action, pg] : groups) {
      report.per_action[action] = summarize(pg.first, pg.second);
    }
  }
  return report;
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json per_action = nlohmann::json::object();
  for (const auto& [action, m] : report.per_action) per_action[action] = to_json(m);
  nlohmann::json out = to_json(report.overall);
  out["per_action"] = std::move(per_action);
  return out;
}

std::string to_table(const EvalReport& report) {
  std::size_t width = 6;
  for (const auto& [action, m] : report.per_action) width = std::max(width, action.size());
  std::ostringstream os;
  char line[256];
  auto row = [&](const std::string& name, const MetricSummary& m) {
    std::snprintf(line, sizeof(line), "%-*s %10.2f %10.2f %8.2f %8.2f %8zu\n",
                  static_cast<int>(width), name.c_str(), m.mpjpe, m.p_mpjpe, m.pck, m.auc,
                  m.sample_count);
    os << line;
  };
  std::snprintf(line, sizeof(line), "%-*s %10s %10s %8s %8s %8s\n", static_cast<int>(width),
                "action", "MPJPE", "P-MPJPE", "PCK", "AUC", "samples");
  os << line;
  for (const auto& [action, m] : report.per_action) row(action, m);
  row("all", report.overall);
  return os.str();
}

}  // namespace posegu
