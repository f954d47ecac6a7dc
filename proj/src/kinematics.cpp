#include "posegu/kinematics.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>

#include "posegu/error.hpp"

namespace posegu {

IkFrame ik_frame_from_string(const std::string& name) {
  if (name == "parent") return IkFrame::kParent;
  if (name == "camera") return IkFrame::kCamera;
  throw ConfigError("ik_frame must be 'parent' or 'camera', got '" + name + "'");
}

std::string to_string(IkFrame frame) {
  return frame == IkFrame::kParent ? "parent" : "camera";
}

Mat3 axis_rotation(Axis axis, double angle) {
  if (!std::isfinite(angle)) throw NumericalError("rotation angle is not finite");
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat3 r;
  switch (axis) {
    case Axis::kX:
      r << 1, 0, 0,
           0, c, -s,
           0, s, c;
      break;
    case Axis::kY:
      r << c, 0, s,
           0, 1, 0,
           -s, 0, c;
      break;
    case Axis::kZ:
      r << c, -s, 0,
           s, c, 0,
           0, 0, 1;
      break;
  }
  return r;
}

Mat3 bone_rotation(const Vec3& angles) {
  return axis_rotation(Axis::kX, angles.x()) * axis_rotation(Axis::kY, angles.y()) *
         axis_rotation(Axis::kZ, angles.z());
}

Mat3 chain_transform(std::span<const Vec3> chain) {
  if (chain.empty()) throw DataError("chain_transform of an empty chain");
  Mat3 t = bone_rotation(chain.front());
  for (std::size_t i = 1; i < chain.size(); ++i) t = t * bone_rotation(chain[i]);
  return t;
}

Pose3D forward_kinematics(const AngleMatrix& angles, const BoneLengths& lengths,
                          const Vec3& root, const SkeletonTopology& topo) {
  const int M = topo.bone_count();
  if (angles.bone_count() != M || lengths.bone_count() != M) {
    throw DimensionError("forward_kinematics: expected " + std::to_string(M) +
                         " bones, got angles " + std::to_string(angles.bone_count()) +
                         " and lengths " + std::to_string(lengths.bone_count()));
  }
  if (!angles.angles.allFinite() || !lengths.lengths.allFinite() || !root.allFinite()) {
    throw NumericalError("forward_kinematics: non-finite input");
  }
  std::vector<Mat3> transforms(M);
  Rows3 bones(M, 3);
  for (int b : topo.bone_order()) {
    const Mat3 v = bone_rotation(angles.angles.row(b).transpose());
    const int p = topo.parent_bone(b);
    transforms[b] = p < 0 ? v : Mat3(transforms[p] * v);
    bones.row(b) = (transforms[b] * (lengths.lengths[b] * topo.rest_direction(b))).transpose();
  }
  return assemble_pose(bones, root, topo);
}

AngleMatrix inverse_kinematics(const Pose3D& pose, const SkeletonTopology& topo,
                               IkFrame frame) {
  const Rows3 bones = bones_of(pose, topo);
  const int M = topo.bone_count();
  std::vector<Mat3> frames(M, Mat3::Identity());
  AngleMatrix out{Rows3(M, 3)};
  for (int b : topo.bone_order()) {
    const Vec3 bone = bones.row(b).transpose();
    const double len = bone.norm();
    if (!(len > 0.0) || !std::isfinite(len)) {
      throw NumericalError("inverse_kinematics: bone " + std::to_string(b) +
                           " has zero or non-finite length");
    }
    Vec3 local = bone / len;
    if (frame == IkFrame::kParent) {
      const int p = topo.parent_bone(b);
      const Mat3 parent_frame = p < 0 ? Mat3::Identity() : frames[p];
      local = parent_frame.transpose() * local;
      const Mat3 swing =
          Eigen::Quaterniond::FromTwoVectors(topo.rest_direction(b), local).toRotationMatrix();
      frames[b] = parent_frame * swing;
    }
    for (int k = 0; k < 3; ++k) {
      out.angles(b, k) = std::acos(std::clamp(local[k], -1.0, 1.0));
    }
  }
  return out;
}

}  // namespace posegu
