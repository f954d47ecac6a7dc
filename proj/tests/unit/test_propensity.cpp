#include <set>

#include "posegu/error.hpp"
#include "posegu/propensity.hpp"
#include "test_util.hpp"

using namespace posegu;
using namespace posegu::testing;

namespace {

std::vector<Pose2D> random_points(Rng& rng, int n, int joints, double lo = 0, double hi = 1000) {
  std::vector<Pose2D> out;
  for (int i = 0; i < n; ++i) {
    Pose2D p{Rows2(joints, 2)};
    for (int j = 0; j < joints; ++j) p.joints.row(j) << uniform(rng, lo, hi), uniform(rng, lo, hi);
    out.push_back(p);
  }
  return out;
}

Pose2D point(double u, double v) {
  Pose2D p{Rows2(1, 2)};
  p.joints << u, v;
  return p;
}

}  // namespace

TEST(BinIndex, HalfOpenBinsClampedAtEnds) {
  const Eigen::VectorXd e = Eigen::VectorXd::LinSpaced(5, 0.0, 4.0);
  EXPECT_EQ(bin_index(e, 0.0), 0);
  EXPECT_EQ(bin_index(e, 0.999), 0);
  EXPECT_EQ(bin_index(e, 1.0), 1);
  EXPECT_EQ(bin_index(e, 3.5), 3);
  EXPECT_EQ(bin_index(e, 4.0), 3);   // upper edge closes the last bin
  EXPECT_EQ(bin_index(e, -7.0), 0);
  EXPECT_EQ(bin_index(e, 99.0), 3);
}

// Two points on a 2x2 grid, counted by hand.
TEST(Histogram, HandCountedTwoByTwo) {
  const std::vector<Pose2D> pts{point(0, 0), point(10, 10), point(10, 0), point(9, 1)};
  const auto h = build_histogram(pts, 2, 0.0);
  ASSERT_EQ(h.joint_count(), 1);
  const auto& g = h.joints[0];
  EXPECT_EQ(g.edges_u[0], 0.0);
  EXPECT_EQ(g.edges_u[2], 10.0);
  // freqs(row = v bin, col = u bin)
  EXPECT_DOUBLE_EQ(g.freqs(0, 0), 0.25);
  EXPECT_DOUBLE_EQ(g.freqs(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(g.freqs(1, 0), 0.0);
  EXPECT_DOUBLE_EQ(g.freqs(1, 1), 0.25);
  EXPECT_DOUBLE_EQ(g.lookup(9.5, 0.5), 0.5);
}

TEST(Histogram, SmoothingFloorAndMixture) {
  const std::vector<Pose2D> pts{point(0, 0), point(10, 10)};
  const double eps = 0.01;
  const auto h = build_histogram(pts, 2, eps);
  const double spare = 1.0 - 4 * eps;
  EXPECT_NEAR(h.joints[0].freqs(0, 0), eps + 0.5 * spare, 1e-15);
  EXPECT_NEAR(h.joints[0].freqs(1, 0), eps, 1e-15);
  EXPECT_NEAR(h.joints[0].freqs.sum(), 1.0, 1e-15);
}

TEST(Histogram, DegenerateAxisIsWidened) {
  const std::vector<Pose2D> pts{point(5, 5), point(5, 5)};
  const auto h = build_histogram(pts, 4, 0.0);
  EXPECT_DOUBLE_EQ(h.joints[0].edges_u[0], 4.5);
  EXPECT_DOUBLE_EQ(h.joints[0].edges_u[4], 5.5);
  EXPECT_NEAR(h.joints[0].freqs.sum(), 1.0, 1e-15);
}

TEST(Histogram, FrequenciesSumToOne) {
  Rng rng = make_rng(30);
  const auto pts = random_points(rng, 3000, 17);
  for (double eps : {0.0, 1e-6, 1e-4}) {
    const auto h = build_histogram(pts, 64, eps);
    for (const auto& j : h.joints) {
      EXPECT_NEAR(j.freqs.sum(), 1.0, 1e-12);
      EXPECT_GE(j.freqs.minCoeff(), eps);
    }
  }
}

// Oracle: brute-force bin search by linear scan over the edges.
TEST(Histogram, MatchesLinearScanOracle) {
  Rng rng = make_rng(31);
  const auto pts = random_points(rng, 500, 3, -50, 50);
  const int B = 7;
  const auto h = build_histogram(pts, B, 0.0);
  for (int j = 0; j < 3; ++j) {
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(B, B);
    const auto& g = h.joints[j];
    for (const auto& p : pts) {
      int bu = B - 1, bv = B - 1;
      for (int i = 0; i < B; ++i) {
        if (p.joints(j, 0) < g.edges_u[i + 1]) { bu = i; break; }
      }
      for (int i = 0; i < B; ++i) {
        if (p.joints(j, 1) < g.edges_v[i + 1]) { bv = i; break; }
      }
      counts(bv, bu) += 1;
    }
    EXPECT_LT(max_abs(counts / 500.0 - g.freqs), 1e-15);
  }
}

TEST(Histogram, SharedEdgesReuseReference) {
  Rng rng = make_rng(32);
  const auto a = random_points(rng, 200, 2, 0, 100);
  const auto b = random_points(rng, 200, 2, 50, 300);
  const auto ha = build_histogram(a, 8, 1e-6);
  const auto hb = build_histogram_on_edges(b, ha, 1e-6);
  EXPECT_EQ(hb.joints[1].edges_u, ha.joints[1].edges_u);
  EXPECT_NEAR(hb.joints[1].freqs.sum(), 1.0, 1e-12);
}

TEST(Histogram, Errors) {
  EXPECT_THROW(build_histogram({}, 4, 1e-6), DataError);
  const std::vector<Pose2D> pts{point(0, 0)};
  EXPECT_THROW(build_histogram(pts, 0, 1e-6), ConfigError);
  EXPECT_THROW(build_histogram(pts, 4, 1.0 / 16), ConfigError);
  EXPECT_THROW(build_histogram(pts, 4, -1.0), ConfigError);
  std::vector<Pose2D> mixed{point(0, 0), Pose2D{Rows2::Zero(2, 2)}};
  EXPECT_THROW(build_histogram(mixed, 4, 1e-6), DimensionError);
}

TEST(Subsample, CountDistinctSortedAndDeterministic) {
  Rng a = make_rng(33), b = make_rng(33);
  const auto ia = subsample_indices(400, 0.25, a);
  EXPECT_EQ(ia.size(), 100u);
  EXPECT_TRUE(std::is_sorted(ia.begin(), ia.end()));
  EXPECT_EQ(std::set<std::size_t>(ia.begin(), ia.end()).size(), 100u);
  EXPECT_EQ(ia, subsample_indices(400, 0.25, b));
  Rng c = make_rng(34);
  EXPECT_EQ(subsample_indices(8000, 0.03, c).size(), 240u);
  EXPECT_EQ(subsample_indices(7, 0.5, c).size(), 4u);  // ceil
  EXPECT_EQ(subsample_indices(7, 1.0, c).size(), 7u);
}

TEST(Subsample, Errors) {
  Rng rng = make_rng(35);
  EXPECT_THROW(subsample_indices(10, 0.0, rng), ConfigError);
  EXPECT_THROW(subsample_indices(10, 1.5, rng), ConfigError);
  EXPECT_THROW(subsample_indices(0, 0.5, rng), DataError);
}

TEST(Propensity, MeanOfPerJointLookups) {
  Rng rng = make_rng(36);
  const auto pts = random_points(rng, 100, 4);
  const auto h = build_histogram(pts, 5, 1e-4);
  const Pose2D& x = pts[3];
  double s = 0;
  for (int j = 0; j < 4; ++j) s += h.joints[j].lookup(x.joints(j, 0), x.joints(j, 1));
  EXPECT_DOUBLE_EQ(propensity(x, h), s / 4);
  EXPECT_THROW(propensity(point(1, 1), h), DimensionError);
}

TEST(Propensity, JsonRoundTrip) {
  Rng rng = make_rng(37);
  auto h = build_gt_histogram(random_points(rng, 300, 3), 0.5, rng, 6, 1e-5);
  EXPECT_EQ(h.sample_count, 150u);
  EXPECT_EQ(h.source, "gt");
  const auto back = histogram_from_json(nlohmann::json::parse(to_json(h).dump()));
  ASSERT_EQ(back.joint_count(), 3);
  for (int j = 0; j < 3; ++j) {
    EXPECT_EQ(back.joints[j].freqs, h.joints[j].freqs);
    EXPECT_EQ(back.joints[j].edges_v, h.joints[j].edges_v);
  }
  auto bad = to_json(h);
  bad["joints"][0]["edges_u"][2] = -1e9;
  EXPECT_THROW(histogram_from_json(bad), DataError);
}
