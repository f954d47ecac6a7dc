#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "posegu/camera.hpp"
#include "posegu/commands.hpp"
#include "posegu/config.hpp"
#include "posegu/crm.hpp"
#include "posegu/error.hpp"
#include "posegu/kinematics.hpp"
#include "posegu/metrics.hpp"
#include "posegu/posegen.hpp"
#include "posegu/propensity.hpp"

namespace py = pybind11;
using namespace posegu;

namespace {

Axis axis_from(const std::string& s) {
  if (s == "x") return Axis::kX;
  if (s == "y") return Axis::kY;
  if (s == "z") return Axis::kZ;
  throw ConfigError("axis must be one of x, y, z, got '" + s + "'");
}

std::vector<Pose2D> poses2d(const std::vector<Rows2>& arrays) {
  std::vector<Pose2D> out;
  out.reserve(arrays.size());
  for (const auto& a : arrays) out.push_back(Pose2D{a});
  return out;
}

PipelineConfig config_or_default(const std::string& path) {
  return path.empty() ? PipelineConfig{} : load_config(path);
}

// Runs a command with its log captured and returned as a string.
template <typename F>
std::string logged(F&& f) {
  std::ostringstream log;
  f(log);
  return log.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "posegu core bindings";
  m.attr("__version__") = "0.1.0";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  auto data = py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", data.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

  // Kinematics on the default 17-joint skeleton.
  m.def("axis_rotation", [](const std::string& axis, double angle) {
    return axis_rotation(axis_from(axis), angle);
  }, py::arg("axis"), py::arg("angle"));
  m.def("bone_rotation", &bone_rotation, py::arg("angles"));
  m.def("chain_transform", [](const Rows3& chain) {
    std::vector<Vec3> c;
    for (int i = 0; i < chain.rows(); ++i) c.push_back(chain.row(i).transpose());
    return chain_transform(c);
  }, py::arg("chain"));
  m.def("forward_kinematics", [](const Rows3& angles, const Eigen::VectorXd& lengths, const Vec3& root) {
    return forward_kinematics(AngleMatrix{angles}, BoneLengths{lengths}, root,
                              SkeletonTopology::human36m()).joints;
  }, py::arg("angles"), py::arg("lengths"), py::arg("root"));
  m.def("inverse_kinematics", [](const Rows3& pose, const std::string& frame) {
    return inverse_kinematics(Pose3D{pose}, SkeletonTopology::human36m(),
                              ik_frame_from_string(frame)).angles;
  }, py::arg("pose"), py::arg("frame") = "parent");
  m.def("bone_lengths", [](const Rows3& pose) {
    return bone_lengths_of(Pose3D{pose}, SkeletonTopology::human36m()).lengths;
  }, py::arg("pose"));
  m.def("interpolate", [](const Rows3& prev, const Rows3& next, int steps) {
    std::vector<Rows3> out;
    for (const auto& a : interpolate(AngleMatrix{prev}, AngleMatrix{next}, steps)) out.push_back(a.angles);
    return out;
  }, py::arg("prev"), py::arg("next"), py::arg("steps"));

  m.def("project", [](const Rows3& pose, double fx, double fy, double cx, double cy) {
    CameraIntrinsics cam;
    cam.fx = fx;
    cam.fy = fy;
    cam.cx = cx;
    cam.cy = cy;
    return project(Pose3D{pose}, cam).joints;
  }, py::arg("pose"), py::arg("fx") = 1150.0, py::arg("fy") = 1150.0, py::arg("cx") = 500.0,
     py::arg("cy") = 500.0);

  m.def("mpjpe", [](const Rows3& pred, const Rows3& gt) { return mpjpe(Pose3D{pred}, Pose3D{gt}); },
        py::arg("pred"), py::arg("gt"));
  m.def("p_mpjpe", [](const Rows3& pred, const Rows3& gt) { return p_mpjpe(Pose3D{pred}, Pose3D{gt}); },
        py::arg("pred"), py::arg("gt"));

  py::class_<HistogramMap>(m, "HistogramMap")
      .def_readonly("bin_count", &HistogramMap::bin_count)
      .def_readonly("epsilon", &HistogramMap::epsilon)
      .def_readonly("sample_count", &HistogramMap::sample_count)
      .def("freqs", [](const HistogramMap& h, int j) { return h.joints.at(j).freqs; }, py::arg("joint"))
      .def("edges", [](const HistogramMap& h, int j) {
        return std::make_pair(h.joints.at(j).edges_u, h.joints.at(j).edges_v);
      }, py::arg("joint"))
      .def("propensity", [](const HistogramMap& h, const Rows2& pose) { return propensity(Pose2D{pose}, h); },
           py::arg("pose"));
  m.def("build_histogram", [](const std::vector<Rows2>& poses, int bins, double epsilon) {
    return build_histogram(poses2d(poses), bins, epsilon);
  }, py::arg("poses"), py::arg("bins") = 64, py::arg("epsilon") = 1e-6);
  m.def("build_histogram_on_edges", [](const std::vector<Rows2>& poses, const HistogramMap& ref, double epsilon) {
    return build_histogram_on_edges(poses2d(poses), ref, epsilon);
  }, py::arg("poses"), py::arg("reference"), py::arg("epsilon") = 1e-6);
  m.def("cips_weights", [](const std::vector<Rows2>& poses, const HistogramMap& gt_hist,
                           const HistogramMap& gen_hist, double clip, const std::string& direction) {
    CrmConfig cfg;
    cfg.clip = clip;
    cfg.ratio_direction = ratio_direction_from_string(direction);
    return cips_weights(poses2d(poses), gt_hist, gen_hist, cfg);
  }, py::arg("poses"), py::arg("gt_hist"), py::arg("gen_hist"), py::arg("clip") = 10.0,
     py::arg("direction") = to_string(RatioDirection::kGeneratedOverGt));

  // Pipeline verbs. `config` is a JSON config path; empty means defaults.
  // Each returns the command's log text.
  m.def("make_gt", [](const std::vector<std::string>& actions, int sequences, const std::string& out,
                      const std::string& config) {
    return logged([&](std::ostream& log) { cmd_make_gt(actions, sequences, out, config_or_default(config), log); });
  }, py::arg("actions"), py::arg("sequences"), py::arg("out"), py::arg("config") = "");
  m.def("extract_ranges", [](const std::string& seeds, const std::string& out, const std::string& config) {
    return logged([&](std::ostream& log) { cmd_extract_ranges(seeds, out, config_or_default(config), log); });
  }, py::arg("seeds"), py::arg("out"), py::arg("config") = "");
  m.def("generate", [](const std::string& ranges, const std::string& out, const std::string& config) {
    return logged([&](std::ostream& log) { cmd_generate(ranges, out, config_or_default(config), log); });
  }, py::arg("ranges"), py::arg("out"), py::arg("config") = "");
  m.def("histogram", [](const std::string& dataset, double fraction, const std::string& out,
                        const std::string& edges, const std::string& config) {
    return logged([&](std::ostream& log) {
      cmd_histogram(dataset, fraction, out, config_or_default(config), log, edges);
    });
  }, py::arg("dataset"), py::arg("fraction"), py::arg("out"), py::arg("edges") = "", py::arg("config") = "");
  m.def("train", [](const std::string& gen, const std::string& gt, const std::string& gt_hist,
                    const std::string& gen_hist, const std::string& out, const std::string& trace,
                    const std::string& config) {
    return logged([&](std::ostream& log) {
      cmd_train(gen, gt, gt_hist, gen_hist, out, trace, config_or_default(config), log);
    });
  }, py::arg("generated"), py::arg("gt"), py::arg("gt_hist"), py::arg("gen_hist"), py::arg("out"),
     py::arg("trace"), py::arg("config") = "");
  m.def("evaluate", [](const std::string& checkpoint, const std::string& test, const std::string& out,
                       const std::string& config) {
    std::ostringstream log;
    const auto report = cmd_eval(checkpoint, test, out, config_or_default(config), log);
    // Round-trip through a Python dict.
    return py::module_::import("json").attr("loads")(to_json(report).dump());
  }, py::arg("checkpoint"), py::arg("test"), py::arg("out"), py::arg("config") = "");
}
