#include "posegu/camera.hpp"
#include "posegu/error.hpp"
#include "test_util.hpp"

using namespace posegu;
using namespace posegu::testing;

TEST(Project, OpticalAxisHitsPrincipalPoint) {
  const CameraIntrinsics cam;
  for (double z : {1.0, 500.0, 9000.0}) {
    Pose3D p{Rows3(1, 3)};
    p.joints << 0, 0, z;
    const Pose2D q = project(p, cam);
    EXPECT_EQ(q.joints(0, 0), cam.cx);
    EXPECT_EQ(q.joints(0, 1), cam.cy);
  }
}

TEST(Project, SimilarTriangles) {
  CameraIntrinsics cam;
  cam.fx = cam.fy = 1000;
  Pose3D p{Rows3(1, 3)};
  p.joints << 100, 0, 1000;
  const Pose2D q = project(p, cam);
  EXPECT_DOUBLE_EQ(q.joints(0, 0), 600.0);
  EXPECT_DOUBLE_EQ(q.joints(0, 1), 500.0);
}

TEST(Project, ScaleInvariance) {
  const auto topo = SkeletonTopology::human36m();
  Rng rng = make_rng(100);
  for (int t = 0; t < 50; ++t) {
    const Pose3D p = random_pose(rng, topo, Vec3(0, 0, 5000));
    Pose3D d = p;
    d.joints *= 2;
    EXPECT_LT(max_abs(project(p, CameraIntrinsics{}).joints - project(d, CameraIntrinsics{}).joints),
              1e-9);
  }
}

TEST(Project, NonPositiveDepthNamesJoint) {
  Pose3D p{Rows3(3, 3)};
  p.joints << 0, 0, 100, 0, 0, 100, 0, 0, -1;
  try {
    project(p, CameraIntrinsics{});
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos);
  }
}

TEST(Intrinsics, Validation) {
  CameraIntrinsics cam;
  cam.fx = 0;
  EXPECT_THROW(cam.validate(), ConfigError);
  const auto back = camera_from_json(to_json(CameraIntrinsics{}));
  EXPECT_EQ(back.fx, 1150.0);
}

TEST(MakePairs, EmptySingleAndOracle) {
  const auto topo = SkeletonTopology::human36m();
  EXPECT_TRUE(make_pairs({}, CameraIntrinsics{}, topo).empty());
  Rng rng = make_rng(101);
  std::vector<Pose3D> frames;
  for (int i = 0; i < 100; ++i) frames.push_back(random_pose(rng, topo, Vec3(0, 0, 5000)));
  const auto one = make_pairs({frames[0]}, CameraIntrinsics{}, topo);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(Vec3(one[0].target.joints.row(0)), Vec3::Zero());
  const auto pairs = make_pairs(frames, CameraIntrinsics{}, topo);
  ASSERT_EQ(pairs.size(), 100u);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(pairs[i].input.joints, project(frames[i], CameraIntrinsics{}).joints);
    EXPECT_LT(max_abs(pairs[i].target.joints - root_relative(frames[i], topo).joints), 1e-12);
  }
}
