#include "posegu/propensity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "posegu/error.hpp"
#include "posegu/json_util.hpp"

namespace posegu {

int bin_index(const Eigen::VectorXd& edges, double x) {
  const int bins = static_cast<int>(edges.size()) - 1;
  const double* first = edges.data();
  const double* last = first + edges.size();
  const int i = static_cast<int>(std::upper_bound(first, last, x) - first) - 1;
  return std::clamp(i, 0, bins - 1);
}

double JointHistogram::lookup(double u, double v) const {
  return freqs(bin_index(edges_v, v), bin_index(edges_u, u));
}

namespace {

void check_inputs(std::span<const Pose2D> poses, int bin_count, double epsilon) {
  if (poses.empty()) throw DataError("histogram of an empty pose set");
  if (bin_count < 1) throw ConfigError("histogram.bin_count must be >= 1");
  const double floor_mass = static_cast<double>(bin_count) * bin_count * epsilon;
  if (!(epsilon >= 0.0) || !(floor_mass < 1.0)) {
    throw ConfigError("histogram.epsilon must satisfy 0 <= epsilon < 1 / bin_count^2");
  }
  const int J = poses.front().joint_count();
  for (const auto& p : poses) {
    if (p.joint_count() != J) throw DimensionError("histogram: poses differ in joint count");
    require_finite(p);
  }
}

Eigen::VectorXd span_edges(double lo, double hi, int bins) {
  if (hi - lo <= 0.0) {
    lo -= 0.5;
    hi += 0.5;
  }
  return Eigen::VectorXd::LinSpaced(bins + 1, lo, hi);
}

JointHistogram count_joint(std::span<const Pose2D> poses, int joint, Eigen::VectorXd edges_u,
                           Eigen::VectorXd edges_v, double epsilon) {
  const int bins = static_cast<int>(edges_u.size()) - 1;
  JointHistogram h{std::move(edges_u), std::move(edges_v), Eigen::MatrixXd::Zero(bins, bins)};
  for (const auto& p : poses) {
    h.freqs(bin_index(h.edges_v, p.joints(joint, 1)), bin_index(h.edges_u, p.joints(joint, 0))) +=
        1.0;
  }
  h.freqs /= static_cast<double>(poses.size());
  if (epsilon > 0.0) {
    const double spare = 1.0 - static_cast<double>(bins) * bins * epsilon;
    h.freqs = (h.freqs.array() * spare + epsilon).matrix();
  }
  return h;
}

}  // namespace

HistogramMap build_histogram(std::span<const Pose2D> poses, int bin_count, double epsilon) {
  check_inputs(poses, bin_count, epsilon);
  HistogramMap out;
  out.bin_count = bin_count;
  out.epsilon = epsilon;
  out.sample_count = poses.size();
  const int J = poses.front().joint_count();
  for (int j = 0; j < J; ++j) {
    double umin = poses.front().joints(j, 0), umax = umin;
    double vmin = poses.front().joints(j, 1), vmax = vmin;
    for (const auto& p : poses) {
      umin = std::min(umin, p.joints(j, 0));
      umax = std::max(umax, p.joints(j, 0));
      vmin = std::min(vmin, p.joints(j, 1));
      vmax = std::max(vmax, p.joints(j, 1));
    }
    out.joints.push_back(count_joint(poses, j, span_edges(umin, umax, bin_count),
                                     span_edges(vmin, vmax, bin_count), epsilon));
  }
  return out;
}

HistogramMap build_histogram_on_edges(std::span<const Pose2D> poses,
                                      const HistogramMap& reference, double epsilon) {
  check_inputs(poses, reference.bin_count, epsilon);
  if (poses.front().joint_count() != reference.joint_count()) {
    throw DimensionError("histogram: reference edges have a different joint count");
  }
  HistogramMap out;
  out.bin_count = reference.bin_count;
  out.epsilon = epsilon;
  out.sample_count = poses.size();
  for (int j = 0; j < reference.joint_count(); ++j) {
    out.joints.push_back(count_joint(poses, j, reference.joints[j].edges_u,
                                     reference.joints[j].edges_v, epsilon));
  }
  return out;
}

std::vector<std::size_t> subsample_indices(std::size_t n, double fraction, Rng& rng) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ConfigError("sampling fraction must lie in (0, 1]");
  }
  if (n == 0) throw DataError("cannot subsample an empty set");
  // The small slack keeps e.g. 0.03 * 8000 at 240 rather than 241.
  const auto k = std::min<std::size_t>(
      n, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9)));
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

HistogramMap build_gt_histogram(std::span<const Pose2D> poses, double fraction, Rng& rng,
                                int bin_count, double epsilon) {
  const auto idx = subsample_indices(poses.size(), fraction, rng);
  std::vector<Pose2D> chosen;
  chosen.reserve(idx.size());
  for (std::size_t i : idx) chosen.push_back(poses[i]);
  HistogramMap h = build_histogram(chosen, bin_count, epsilon);
  h.source = "gt";
  return h;
}

double propensity(const Pose2D& pose, const HistogramMap& hist) {
  if (pose.joint_count() != hist.joint_count()) {
    throw DimensionError("propensity: pose has " + std::to_string(pose.joint_count()) +
                         " joints, histogram has " + std::to_string(hist.joint_count()));
  }
  double sum = 0.0;
  for (int j = 0; j < hist.joint_count(); ++j) {
    sum += hist.joints[j].lookup(pose.joints(j, 0), pose.joints(j, 1));
  }
  return sum / static_cast<double>(hist.joint_count());
}

nlohmann::json to_json(const HistogramMap& hist) {
  nlohmann::json joints = nlohmann::json::array();
  for (const auto& h : hist.joints) {
    nlohmann::json freqs = nlohmann::json::array();
    for (Eigen::Index r = 0; r < h.freqs.rows(); ++r) {
      for (Eigen::Index c = 0; c < h.freqs.cols(); ++c) freqs.push_back(h.freqs(r, c));
    }
    joints.push_back({{"edges_u", vector_to_json(h.edges_u)},
                      {"edges_v", vector_to_json(h.edges_v)},
                      {"freqs", std::move(freqs)}});
  }
  return {{"bin_count", hist.bin_count},
          {"epsilon", hist.epsilon},
          {"source", hist.source},
          {"sample_count", hist.sample_count},
          {"joints", std::move(joints)}};
}

HistogramMap histogram_from_json(const nlohmann::json& doc) {
  HistogramMap hist;
  try {
    hist.bin_count = doc.at("bin_count").get<int>();
    hist.epsilon = doc.at("epsilon").get<double>();
    hist.source = doc.at("source").get<std::string>();
    hist.sample_count = doc.at("sample_count").get<std::size_t>();
    const int B = hist.bin_count;
    if (B < 1) throw DataError("histogram bin_count must be >= 1");
    for (const auto& j : doc.at("joints")) {
      JointHistogram h;
      h.edges_u = vector_from_json(j.at("edges_u"), B + 1, "edges_u");
      h.edges_v = vector_from_json(j.at("edges_v"), B + 1, "edges_v");
      for (const auto* e : {&h.edges_u, &h.edges_v}) {
        for (int i = 0; i < B; ++i) {
          if (!((*e)[i] < (*e)[i + 1])) throw DataError("histogram edges must increase");
        }
      }
      const Eigen::VectorXd flat = vector_from_json(j.at("freqs"), B * B, "freqs");
      h.freqs = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                               Eigen::RowMajor>>(flat.data(), B, B);
      hist.joints.push_back(std::move(h));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed histogram: ") + e.what());
  }
  return hist;
}

}  // namespace posegu
