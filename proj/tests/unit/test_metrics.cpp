#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

#include "posegu/error.hpp"
#include "posegu/metrics.hpp"
#include "test_util.hpp"

using namespace posegu;
using namespace posegu::testing;

namespace {

Pose3D shifted(const Pose3D& p, const Vec3& d) {
  Pose3D q = p;
  q.joints.rowwise() += d.transpose();
  return q;
}

// Horn's closed-form quaternion for the rotation, then the scale by
// successive grid refinement of the squared-error objective.
double p_mpjpe_oracle(const Pose3D& pred, const Pose3D& gt) {
  const int J = pred.joint_count();
  const Vec3 mp = pred.joints.colwise().mean().transpose();
  const Vec3 mg = gt.joints.colwise().mean().transpose();
  Rows3 a = pred.joints.rowwise() - mp.transpose();
  Rows3 b = gt.joints.rowwise() - mg.transpose();
  Mat3 S = Mat3::Zero();
  for (int j = 0; j < J; ++j) S += Vec3(a.row(j)) * Vec3(b.row(j)).transpose();
  Eigen::Matrix4d N;
  N << S(0, 0) + S(1, 1) + S(2, 2), S(1, 2) - S(2, 1), S(2, 0) - S(0, 2), S(0, 1) - S(1, 0),
      S(1, 2) - S(2, 1), S(0, 0) - S(1, 1) - S(2, 2), S(0, 1) + S(1, 0), S(2, 0) + S(0, 2),
      S(2, 0) - S(0, 2), S(0, 1) + S(1, 0), -S(0, 0) + S(1, 1) - S(2, 2), S(1, 2) + S(2, 1),
      S(0, 1) - S(1, 0), S(2, 0) + S(0, 2), S(1, 2) + S(2, 1), -S(0, 0) - S(1, 1) + S(2, 2);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(N);
  const Eigen::Vector4d q = es.eigenvectors().col(3);
  const Mat3 R = Eigen::Quaterniond(q[0], q[1], q[2], q[3]).toRotationMatrix();
  Rows3 ra(J, 3);
  for (int j = 0; j < J; ++j) ra.row(j) = (R * Vec3(a.row(j))).transpose();
  auto sse = [&](double s) { return (s * ra - b).squaredNorm(); };
  double lo = 0.0, hi = 10.0;
  for (int round = 0; round < 12; ++round) {
    double best = lo, best_e = sse(lo);
    const double step = (hi - lo) / 100;
    for (int i = 1; i <= 100; ++i) {
      const double s = lo + i * step;
      if (sse(s) < best_e) best_e = sse(s), best = s;
    }
    lo = std::max(0.0, best - step);
    hi = best + step;
  }
  const double s = 0.5 * (lo + hi);
  double sum = 0;
  for (int j = 0; j < J; ++j) sum += (s * ra.row(j) - b.row(j)).norm();
  return sum / J;
}

Pose3D noisy(Rng& rng, const Pose3D& p, double mag) {
  Pose3D q = p;
  for (int j = 0; j < q.joint_count(); ++j) q.joints.row(j) += random_vec(rng, -mag, mag).transpose();
  return q;
}

}  // namespace

TEST(Mpjpe, IdenticalIsZero) {
  const auto topo = SkeletonTopology::human36m();
  Rng rng = make_rng(80);
  const auto p = random_pose(rng, topo);
  EXPECT_EQ(mpjpe(p, p), 0.0);
}

TEST(Mpjpe, ThreeFourFive) {
  const auto topo = SkeletonTopology::human36m();
  Rng rng = make_rng(81);
  const auto p = root_relative(random_pose(rng, topo), topo);
  EXPECT_EQ(mpjpe(shifted(p, Vec3(3, 4, 0)), p), 5.0);
}

TEST(Mpjpe, NormThenMeanOracle) {
  const auto topo = SkeletonTopology::human36m();
  Rng rng = make_rng(82);
  for (int t = 0; t < 50; ++t) {
    const auto a = random_pose(rng, topo), b = random_pose(rng, topo);
    double s = 0;
    for (int j = 0; j < 17; ++j) {
      const double dx = a.joints(j, 0) - b.joints(j, 0), dy = a.joints(j, 1) - b.joints(j, 1),
                   dz = a.joints(j, 2) - b.joints(j, 2);
      s += std::sqrt(dx * dx + dy * dy + dz * dz);
    }
    EXPECT_NEAR(mpjpe(a, b), s / 17, 1e-9);
  }
  EXPECT_THROW(mpjpe(Pose3D{Rows3::Zero(3, 3)}, random_pose(rng, topo)), DimensionError);
}

TEST(Procrustes, ExactSimilarityCopy) {
  const auto topo = SkeletonTopology::human36m();
  Rng rng = make_rng(83);
  for (int t = 0; t < 100; ++t) {
    const auto p = random_pose(rng, topo);
    const Mat3 R = bone_rotation(random_vec(rng, -M_PI, M_PI));
    const double s = uniform(rng, 0.5, 2.0);
    SimilarityTransform tf{s, R, random_vec(rng, -1000, 1000)};
    const Pose3D g = tf.apply(p);
    EXPECT_LT(p_mpjpe(p, g), 1e-6);
    const auto est = procrustes_align(p, g);
    EXPECT_NEAR(est.scale, s, 1e-9);
    EXPECT_LT(max_abs(est.rotation - R), 1e-9);
  }
}

TEST(Procrustes, IdenticalIsZero) {
  const auto topo = SkeletonTopology::human36m();
  Rng rng = make_rng(84);
  const auto p = random_pose(rng, topo);
  EXPECT_LT(p_mpjpe(p, p), 1e-9);
}

TEST(Procrustes, MatchesHornQuaternionOracle) {
  const auto topo = SkeletonTopology::human36m();
  Rng rng = make_rng(85);
  for (int t = 0; t < 100; ++t) {
    const auto g = root_relative(random_pose(rng, topo), topo);
    const auto p = t % 2 ? noisy(rng, g, 80) : root_relative(random_pose(rng, topo), topo);
    EXPECT_NEAR(p_mpjpe(p, g), p_mpjpe_oracle(p, g), 1e-6);
  }
}

TEST(Procrustes, NeverWorseThanMpjpeOnRandomPairs) {
  const auto topo = SkeletonTopology::human36m();
  Rng rng = make_rng(86);
  for (int t = 0; t < 200; ++t) {
    const auto g = root_relative(random_pose(rng, topo), topo);
    const auto p = root_relative(noisy(rng, g, 100), topo);
    EXPECT_LE(p_mpjpe(p, g), mpjpe(p, g));
  }
}

// Least squares minimises squared error, so an outlier joint can make the
// aligned mean distance larger than the unaligned one.
TEST(Procrustes, OutlierCanRaiseMeanDistance) {
  const auto topo = SkeletonTopology::human36m();
  Rng rng = make_rng(87);
  const auto g = root_relative(random_pose(rng, topo), topo);
  Pose3D p = g;
  p.joints(10, 0) += 100;
  EXPECT_NEAR(mpjpe(p, g), 100.0 / 17, 1e-12);
  EXPECT_GT(p_mpjpe(p, g), mpjpe(p, g));
}

TEST(Procrustes, RankDeficient) {
  Pose3D p{Rows3::Zero(4, 3)};
  EXPECT_THROW(procrustes_align(p, p), NumericalError);
}

TEST(Pck, EdgeCases) {
  const auto topo = SkeletonTopology::human36m();
  Rng rng = make_rng(88);
  const std::vector<Pose3D> g{random_pose(rng, topo), random_pose(rng, topo)};
  EXPECT_EQ(pck(g, g), 100.0);
  std::vector<Pose3D> far;
  for (const auto& p : g) far.push_back(shifted(p, Vec3(0, 300, 0)));
  EXPECT_EQ(pck(far, g), 0.0);
  EXPECT_THROW(pck({}, {}), DataError);
}

TEST(Pck, CountingOracle) {
  const auto topo = SkeletonTopology::human36m();
  Rng rng = make_rng(89);
  std::vector<Pose3D> g, p;
  for (int i = 0; i < 20; ++i) {
    g.push_back(random_pose(rng, topo));
    p.push_back(noisy(rng, g.back(), 150));
  }
  for (double th : {0.0, 50.0, 150.0, 220.0}) {
    int hit = 0;
    for (int i = 0; i < 20; ++i) {
      for (int j = 0; j < 17; ++j) hit += (p[i].joints.row(j) - g[i].joints.row(j)).norm() <= th;
    }
    EXPECT_NEAR(pck(p, g, th), 100.0 * hit / 340, 1e-12);
  }
}

TEST(Auc, EdgeCasesAndOracle) {
  const auto topo = SkeletonTopology::human36m();
  Rng rng = make_rng(90);
  std::vector<Pose3D> g, p, far;
  for (int i = 0; i < 10; ++i) {
    g.push_back(random_pose(rng, topo));
    p.push_back(noisy(rng, g.back(), 100));
    far.push_back(shifted(g.back(), Vec3(200, 0, 0)));
  }
  EXPECT_EQ(auc(g, g), 100.0);
  EXPECT_EQ(auc(far, g), 0.0);
  const auto th = default_auc_thresholds();
  ASSERT_EQ(th.size(), 31u);
  double sum = 0;
  for (double t : th) {
    int hit = 0;
    for (int i = 0; i < 10; ++i) {
      for (int j = 0; j < 17; ++j) hit += (p[i].joints.row(j) - g[i].joints.row(j)).norm() <= t;
    }
    sum += 100.0 * hit / 170;
  }
  EXPECT_NEAR(auc(p, g), sum / 31, 1e-12);
  EXPECT_THROW(auc(p, g, std::vector<double>{}), DataError);
}

TEST(Evaluate, PerActionAndRootCentring) {
  const auto topo = SkeletonTopology::human36m();
  Rng rng = make_rng(91);
  std::vector<Pose3D> g, p;
  std::vector<std::string> act;
  for (int i = 0; i < 6; ++i) {
    g.push_back(random_pose(rng, topo));
    // A global offset vanishes after root centring.
    p.push_back(shifted(g.back(), Vec3(i % 2 ? 10 : 0, 50, 0)));
    act.push_back(i % 2 ? "odd" : "even");
  }
  p[0].joints(5, 0) += 17;
  const auto r = evaluate(p, g, act, topo);
  EXPECT_EQ(r.overall.sample_count, 6u);
  EXPECT_NEAR(r.per_action.at("odd").mpjpe, 0.0, 1e-9);
  EXPECT_NEAR(r.per_action.at("even").mpjpe, 17.0 / 17 / 3, 1e-9);
  EXPECT_NE(to_table(r).find("odd"), std::string::npos);
  EXPECT_EQ(to_json(r)["per_action"]["odd"]["sample_count"], 3);
}
