#pragma once

#include <span>
#include <string>
#include <vector>

#include "posegu/rng.hpp"
#include "posegu/skeleton.hpp"

namespace posegu {

// 2D frequency grid of one joint. freqs(row, col) counts v-bin `row` and
// u-bin `col`, so the grid reads like an image.
struct JointHistogram {
  Eigen::VectorXd edges_u;  // bin_count + 1, strictly increasing, px
  Eigen::VectorXd edges_v;
  Eigen::MatrixXd freqs;    // bin_count x bin_count, sums to 1

  // Frequency of the bin holding (u, v); out-of-range points use the
  // nearest boundary bin.
  double lookup(double u, double v) const;
};

struct HistogramMap {
  int bin_count = 0;
  double epsilon = 0.0;
  std::string source;
  std::size_t sample_count = 0;
  std::vector<JointHistogram> joints;

  int joint_count() const { return static_cast<int>(joints.size()); }
};

// Bin index of x for edges e: i with e[i] <= x < e[i+1], clamped to the
// first/last bin.
int bin_index(const Eigen::VectorXd& edges, double x);

// Per-joint histograms whose edges span the observed [min, max] of each
// axis (a zero-width range is widened to 1 px). With epsilon > 0, every
// bin is floored at epsilon and the remaining 1 - bins * epsilon of mass
// is distributed proportionally to the counts.
HistogramMap build_histogram(std::span<const Pose2D> poses, int bin_count, double epsilon);

// Same counting on the bin edges of `reference`.
HistogramMap build_histogram_on_edges(std::span<const Pose2D> poses,
                                      const HistogramMap& reference, double epsilon);

// ceil(fraction * n) distinct indices drawn uniformly, returned ascending.
std::vector<std::size_t> subsample_indices(std::size_t n, double fraction, Rng& rng);

// build_histogram over a uniform subsample of ceil(fraction * |poses|).
HistogramMap build_gt_histogram(std::span<const Pose2D> poses, double fraction, Rng& rng,
                                int bin_count, double epsilon);

// (1 / J) * sum_j H_j(u_j, v_j).
double propensity(const Pose2D& pose, const HistogramMap& hist);

nlohmann::json to_json(const HistogramMap& hist);
HistogramMap histogram_from_json(const nlohmann::json& doc);

}  // namespace posegu
