#pragma once

#include <utility>
#include <vector>

#include "posegu/skeleton.hpp"

namespace posegu {

// Pinhole camera, pixels. No distortion.
struct CameraIntrinsics {
  double fx = 1150.0;
  double fy = 1150.0;
  double cx = 500.0;
  double cy = 500.0;
  double width = 1000.0;
  double height = 1000.0;

  void validate() const;
};

// u = fx * x / z + cx, v = fy * y / z + cy. Throws NumericalError naming
// the first joint with z <= 0.
Pose2D project(const Pose3D& pose, const CameraIntrinsics& cam);

struct PosePair {
  Pose2D input;   // absolute image coordinates
  Pose3D target;  // root-relative, mm
};

std::vector<PosePair> make_pairs(const std::vector<Pose3D>& frames, const CameraIntrinsics& cam,
                                 const SkeletonTopology& topo);

// Maps pixels to roughly [-1, 1]: (u - cx) / (fx * k), (v - cy) / (fy * k).
// The default k is (width / 2) / fx, which sends the corners of a centred
// image to +-1.
struct InputNormalization {
  double cx = 500.0;
  double cy = 500.0;
  double scale_u = 500.0;  // fx * k
  double scale_v = 500.0;  // fy * k

  static InputNormalization from_camera(const CameraIntrinsics& cam, double k = 0.0);
};

Pose2D normalize_input(const Pose2D& pose, const InputNormalization& norm);
Pose2D denormalize_input(const Pose2D& pose, const InputNormalization& norm);

nlohmann::json to_json(const CameraIntrinsics& cam);
CameraIntrinsics camera_from_json(const nlohmann::json& doc);

}  // namespace posegu
