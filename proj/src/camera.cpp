#include "posegu/camera.hpp"

#include <cmath>

#include "posegu/error.hpp"

namespace posegu {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0)) throw ConfigError("camera.fx must be > 0");
  if (!(fy > 0.0)) throw ConfigError("camera.fy must be > 0");
  if (!(width > 0.0) || !(height > 0.0)) throw ConfigError("camera.width and camera.height must be > 0");
  if (!(cx > 0.0 && cx < width)) throw ConfigError("camera.cx must lie inside (0, width)");
  if (!(cy > 0.0 && cy < height)) throw ConfigError("camera.cy must lie inside (0, height)");
}

Pose2D project(const Pose3D& pose, const CameraIntrinsics& cam) {
  Pose2D out{Rows2(pose.joints.rows(), 2)};
  for (Eigen::Index j = 0; j < pose.joints.rows(); ++j) {
    const double z = pose.joints(j, 2);
    if (!(z > 0.0)) {
      throw NumericalError("degenerate projection: joint " + std::to_string(j) +
                           " has depth " + std::to_string(z) + " mm");
    }
    out.joints(j, 0) = cam.fx * pose.joints(j, 0) / z + cam.cx;
    out.joints(j, 1) = cam.fy * pose.joints(j, 1) / z + cam.cy;
  }
  return out;
}

std::vector<PosePair> make_pairs(const std::vector<Pose3D>& frames, const CameraIntrinsics& cam,
                                 const SkeletonTopology& topo) {
  std::vector<PosePair> out;
  out.reserve(frames.size());
  for (const auto& f : frames) out.push_back({project(f, cam), root_relative(f, topo)});
  return out;
}

InputNormalization InputNormalization::from_camera(const CameraIntrinsics& cam, double k) {
  if (k <= 0.0) k = 0.5 * cam.width / cam.fx;
  return {cam.cx, cam.cy, cam.fx * k, cam.fy * k};
}

Pose2D normalize_input(const Pose2D& pose, const InputNormalization& norm) {
  Pose2D out = pose;
  out.joints.col(0) = (pose.joints.col(0).array() - norm.cx) / norm.scale_u;
  out.joints.col(1) = (pose.joints.col(1).array() - norm.cy) / norm.scale_v;
  return out;
}

Pose2D denormalize_input(const Pose2D& pose, const InputNormalization& norm) {
  Pose2D out = pose;
  out.joints.col(0) = pose.joints.col(0).array() * norm.scale_u + norm.cx;
  out.joints.col(1) = pose.joints.col(1).array() * norm.scale_v + norm.cy;
  return out;
}

nlohmann::json to_json(const CameraIntrinsics& cam) {
  return {{"fx", cam.fx}, {"fy", cam.fy}, {"cx", cam.cx},
          {"cy", cam.cy}, {"width", cam.width}, {"height", cam.height}};
}

CameraIntrinsics camera_from_json(const nlohmann::json& doc) {
  CameraIntrinsics cam;
  for (const auto& [key, value] : doc.items()) {
    if (!value.is_number()) throw ConfigError("camera." + key + " must be a number");
    const double v = value.get<double>();
    if (key == "fx") cam.fx = v;
    else if (key == "fy") cam.fy = v;
    else if (key == "cx") cam.cx = v;
    else if (key == "cy") cam.cy = v;
    else if (key == "width") cam.width = v;
    else if (key == "height") cam.height = v;
    else throw ConfigError("unknown field camera." + key);
  }
  cam.validate();
  return cam;
}

}  // namespace posegu
