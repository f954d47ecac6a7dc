#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

#include "json.hpp"

namespace posegu {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Row-major joint/bone tables: one row per joint (or bone).
using Rows3 = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using Rows2 = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;

// J x 3 joint positions in camera coordinates, millimetres.
struct Pose3D {
  Rows3 joints;

  int joint_count() const { return static_cast<int>(joints.rows()); }
};

// J x 2 joint positions on the image plane, pixels.
struct Pose2D {
  Rows2 joints;

  int joint_count() const { return static_cast<int>(joints.rows()); }
};

// One length per bone, millimetres.
struct BoneLengths {
  Eigen::VectorXd lengths;

  int bone_count() const { return static_cast<int>(lengths.size()); }
};

// M x 3 rotation angles in radians, one (x, y, z) triple per bone.
struct AngleMatrix {
  Rows3 angles;

  int bone_count() const { return static_cast<int>(angles.rows()); }
};

// Joint tree. Bone b connects joint bone_parent_joint(b) to joint
// bone_child(b); bones are numbered in joint order with the root skipped.
class SkeletonTopology {
 public:
  SkeletonTopology(std::vector<std::string> joint_names,
                   std::vector<int> parents,
                   std::vector<Vec3> rest_directions, int root);

  // 17-joint Human3.6M layout with an upright rest stance. The rest
  // direction table is versioned by kRestPoseVersion.
  static SkeletonTopology human36m();
  static constexpr int kRestPoseVersion = 1;

  int joint_count() const { return static_cast<int>(parents_.size()); }
  int bone_count() const { return joint_count() - 1; }
  int root() const { return root_; }

  int parent(int joint) const { return parents_[joint]; }
  const std::vector<int>& parents() const { return parents_; }
  const std::vector<std::string>& joint_names() const { return names_; }

  int bone_child(int bone) const { return bone_child_[bone]; }
  int bone_parent_joint(int bone) const { return parents_[bone_child_[bone]]; }
  // Bone ending at the given joint, -1 for the root.
  int bone_of_joint(int joint) const { return joint_bone_[joint]; }
  // Bone that precedes `bone` in its chain, -1 when it hangs off the root.
  int parent_bone(int bone) const { return joint_bone_[bone_parent_joint(bone)]; }

  const Vec3& rest_direction(int bone) const { return rest_[bone]; }
  const std::vector<Vec3>& rest_directions() const { return rest_; }

  // Bones ordered so that every bone comes after its parent bone.
  const std::vector<int>& bone_order() const { return order_; }

  // Bones from the root outward, ending with `bone`.
  std::vector<int> chain(int bone) const;

  // Hex SHA-256 of the canonical JSON form.
  std::string digest() const;

  friend bool operator==(const SkeletonTopology& a, const SkeletonTopology& b);

 private:
  std::vector<std::string> names_;
  std::vector<int> parents_;
  std::vector<Vec3> rest_;
  int root_;
  std::vector<int> bone_child_;
  std::vector<int> joint_bone_;
  std::vector<int> order_;
};

nlohmann::json to_json(const SkeletonTopology& topo);
SkeletonTopology topology_from_json(const nlohmann::json& doc);
SkeletonTopology load_topology(const std::string& path);

// M x 3 bone vectors: joints[child] - joints[parent].
Rows3 bones_of(const Pose3D& pose, const SkeletonTopology& topo);

// Inverse of bones_of given the root position.
Pose3D assemble_pose(const Rows3& bones, const Vec3& root,
                     const SkeletonTopology& topo);

BoneLengths bone_lengths_of(const Pose3D& pose, const SkeletonTopology& topo);

// Pose with every bone at its rest direction scaled by `lengths`.
Pose3D rest_pose(const BoneLengths& lengths, const Vec3& root,
                 const SkeletonTopology& topo);

// Throws DataError when a length is outside (0, 1000) mm.
void validate(const BoneLengths& lengths, const SkeletonTopology& topo);

// Throws NumericalError on non-finite coordinates.
void require_finite(const Pose3D& pose);
void require_finite(const Pose2D& pose);

// Subtracts the root joint from every joint.
Pose3D root_relative(const Pose3D& pose, const SkeletonTopology& topo);

}  // namespace posegu
