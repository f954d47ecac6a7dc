#include "posegu/skeleton.hpp"

#include <cmath>
#include <deque>

#include "posegu/error.hpp"
#include "posegu/io.hpp"

namespace posegu {

SkeletonTopology::SkeletonTopology(std::vector<std::string> joint_names,
                                   std::vector<int> parents,
                                   std::vector<Vec3> rest_directions,
                                   int root)
    : names_(std::move(joint_names)),
      parents_(std::move(parents)),
      rest_(std::move(rest_directions)),
      root_(root) {
  const int J = static_cast<int>(parents_.size());
  if (J < 2) throw DataError("topology needs at least two joints");
  if (static_cast<int>(names_.size()) != J) {
    throw DimensionError("topology has " + std::to_string(names_.size()) +
                         " names for " + std::to_string(J) + " joints");
  }
  if (root_ < 0 || root_ >= J) throw DataError("topology root out of range");
  if (parents_[root_] != -1) throw DataError("root joint must have parent -1");
  for (int j = 0; j < J; ++j) {
    if (j == root_) continue;
    if (parents_[j] < 0 || parents_[j] >= J || parents_[j] == j) {
      throw DataError("joint " + std::to_string(j) + " has invalid parent " +
                      std::to_string(parents_[j]));
    }
  }
  // Every walk toward the root must terminate within J steps.
  for (int j = 0; j < J; ++j) {
    int k = j;
    int steps = 0;
    while (k != root_) {
      k = parents_[k];
      if (++steps > J) throw DataError("topology parent links contain a cycle");
    }
  }

  joint_bone_.assign(J, -1);
  for (int j = 0; j < J; ++j) {
    if (j == root_) continue;
    joint_bone_[j] = static_cast<int>(bone_child_.size());
    bone_child_.push_back(j);
  }
  const int M = J - 1;
  if (static_cast<int>(rest_.size()) != M) {
    throw DimensionError("topology has " + std::to_string(rest_.size()) +
                         " rest directions for " + std::to_string(M) + " bones");
  }
  for (int b = 0; b < M; ++b) {
    const double n = rest_[b].norm();
    if (!std::isfinite(n) || std::abs(n - 1.0) > 1e-6) {
      throw DataError("rest direction of bone " + std::to_string(b) +
                      " is not a unit vector");
    }
    rest_[b] /= n;
  }

  // Breadth-first from the root so parents precede children.
  std::vector<std::vector<int>> children(J);
  for (int j = 0; j < J; ++j) {
    if (j != root_) children[parents_[j]].push_back(j);
  }
  std::deque<int> queue{root_};
  while (!queue.empty()) {
    const int j = queue.front();
    queue.pop_front();
    for (int c : children[j]) {
      order_.push_back(joint_bone_[c]);
      queue.push_back(c);
    }
  }
}

SkeletonTopology SkeletonTopology::human36m() {
  // Camera convention: x right, y down, z forward. Rest stance is upright
  // with the arms hanging at the sides.
  const Vec3 left(1, 0, 0), right(-1, 0, 0), up(0, -1, 0), down(0, 1, 0);
  std::vector<std::string> names = {
      "pelvis",     "right_hip",      "right_knee", "right_ankle",
      "left_hip",   "left_knee",      "left_ankle", "spine",
      "thorax",     "neck",           "head",       "left_shoulder",
      "left_elbow", "left_wrist",     "right_shoulder",
      "right_elbow", "right_wrist"};
  std::vector<int> parents = {-1, 0, 1, 2, 0, 4, 5, 0, 7, 8, 9, 8, 11, 12, 8, 14, 15};
  // Indexed by bone, i.e. by child joint 1..16.
  std::vector<Vec3> rest = {right, down, down,  left, down, down, up, up,
                            up,    up,   left,  down, down, right, down, down};
  return SkeletonTopology(std::move(names), std::move(parents), std::move(rest), 0);
}

std::vector<int> SkeletonTopology::chain(int bone) const {
  std::vector<int> out;
  for (int b = bone; b >= 0; b = parent_bone(b)) out.push_back(b);
  return {out.rbegin(), out.rend()};
}

std::string SkeletonTopology::digest() const { return sha256_hex(to_json(*this).dump()); }

bool operator==(const SkeletonTopology& a, const SkeletonTopology& b) {
  return a.names_ == b.names_ && a.parents_ == b.parents_ && a.rest_ == b.rest_ &&
         a.root_ == b.root_;
}

nlohmann::json to_json(const SkeletonTopology& topo) {
  nlohmann::json dirs = nlohmann::json::array();
  for (const Vec3& d : topo.rest_directions()) dirs.push_back({d.x(), d.y(), d.z()});
  return {{"joints", topo.joint_names()},
          {"parents", topo.parents()},
          {"rest_directions", std::move(dirs)},
          {"root", topo.root()}};
}

SkeletonTopology topology_from_json(const nlohmann::json& doc) {
  try {
    std::vector<Vec3> dirs;
    for (const auto& d : doc.at("rest_directions")) {
      if (d.size() != 3) throw DimensionError("rest direction must have 3 components");
      dirs.emplace_back(d[0].get<double>(), d[1].get<double>(), d[2].get<double>());
    }
    return SkeletonTopology(doc.at("joints").get<std::vector<std::string>>(),
                            doc.at("parents").get<std::vector<int>>(), std::move(dirs),
                            doc.at("root").get<int>());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed topology: ") + e.what());
  }
}

SkeletonTopology load_topology(const std::string& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("'" + path + "': " + e.what());
  }
  return topology_from_json(doc);
}

Rows3 bones_of(const Pose3D& pose, const SkeletonTopology& topo) {
  if (pose.joint_count() != topo.joint_count()) {
    throw DimensionError("pose has " + std::to_string(pose.joint_count()) +
                         " joints, topology has " + std::to_string(topo.joint_count()));
  }
  Rows3 bones(topo.bone_count(), 3);
  for (int b = 0; b < topo.bone_count(); ++b) {
    bones.row(b) = pose.joints.row(topo.bone_child(b)) -
                   pose.joints.row(topo.bone_parent_joint(b));
  }
  return bones;
}

Pose3D assemble_pose(const Rows3& bones, const Vec3& root,
                     const SkeletonTopology& topo) {
  if (bones.rows() != topo.bone_count()) {
    throw DimensionError("got " + std::to_string(bones.rows()) + " bones, topology has " +
                         std::to_string(topo.bone_count()));
  }
  Pose3D pose{Rows3(topo.joint_count(), 3)};
  pose.joints.row(topo.root()) = root.transpose();
  for (int b : topo.bone_order()) {
    pose.joints.row(topo.bone_child(b)) =
        pose.joints.row(topo.bone_parent_joint(b)) + bones.row(b);
  }
  return pose;
}

BoneLengths bone_lengths_of(const Pose3D& pose, const SkeletonTopology& topo) {
  return {bones_of(pose, topo).rowwise().norm()};
}

Pose3D rest_pose(const BoneLengths& lengths, const Vec3& root,
                 const SkeletonTopology& topo) {
  if (lengths.bone_count() != topo.bone_count()) {
    throw DimensionError("bone length count does not match topology");
  }
  Rows3 bones(topo.bone_count(), 3);
  for (int b = 0; b < topo.bone_count(); ++b) {
    bones.row(b) = lengths.lengths[b] * topo.rest_direction(b).transpose();
  }
  return assemble_pose(bones, root, topo);
}

void validate(const BoneLengths& lengths, const SkeletonTopology& topo) {
  if (lengths.bone_count() != topo.bone_count()) {
    throw DimensionError("bone length count does not match topology");
  }
  for (int b = 0; b < lengths.bone_count(); ++b) {
    const double l = lengths.lengths[b];
    if (!(l > 0.0 && l < 1000.0)) {
      throw DataError("bone " + std::to_string(b) + " length " + std::to_string(l) +
                      " mm outside (0, 1000)");
    }
  }
}

void require_finite(const Pose3D& pose) {
  if (!pose.joints.allFinite()) throw NumericalError("pose has non-finite coordinates");
}

void require_finite(const Pose2D& pose) {
  if (!pose.joints.allFinite()) throw NumericalError("2D pose has non-finite coordinates");
}

Pose3D root_relative(const Pose3D& pose, const SkeletonTopology& topo) {
  if (pose.joint_count() != topo.joint_count()) {
    throw DimensionError("pose does not match topology");
  }
  Pose3D out = pose;
  out.joints.rowwise() -= pose.joints.row(topo.root());
  return out;
}

}  // namespace posegu
