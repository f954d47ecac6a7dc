#pragma once

#include <span>

#include "posegu/skeleton.hpp"

namespace posegu {

enum class Axis { kX, kY, kZ };

// Frame in which inverse_kinematics measures each bone's direction.
//  kParent: the camera frame carried along the bone's parent chain.
//  kCamera: the camera frame itself for every bone.
enum class IkFrame { kParent, kCamera };

IkFrame ik_frame_from_string(const std::string& name);
std::string to_string(IkFrame frame);

// Right-handed rotation about a camera axis.
Mat3 axis_rotation(Axis axis, double angle);

// Rx(a.x) * Ry(a.y) * Rz(a.z), in that order.
Mat3 bone_rotation(const Vec3& angles);

// V_1 * V_2 * ... * V_n for a root-outward chain of angle triples.
Mat3 chain_transform(std::span<const Vec3> chain);

// Bone b is lengths[b] * rest_direction(b) rotated by the chain transform
// of every bone from the root down to and including b; joints are then
// accumulated from `root`.
Pose3D forward_kinematics(const AngleMatrix& angles, const BoneLengths& lengths,
                          const Vec3& root, const SkeletonTopology& topo);

// Per-bone direction angles: arccos of each local-frame component of the
// bone over its length. Each row lies in [0, pi]^3. In the parent frame
// the frame of a bone is its parent's frame followed by the shortest-arc
// rotation from its rest direction to its measured direction.
AngleMatrix inverse_kinematics(const Pose3D& pose, const SkeletonTopology& topo,
                               IkFrame frame = IkFrame::kParent);

}  // namespace posegu
