#include "posegu/dataset.hpp"

#include <cmath>
#include <sstream>

#include "posegu/error.hpp"
#include "posegu/io.hpp"
#include "posegu/json_util.hpp"

namespace posegu {

std::string to_string(RecordSource s) { return s == RecordSource::kGt ? "gt" : "generated"; }

nlohmann::json to_json(const DatasetRecord& r) {
  nlohmann::json doc = {{"frame_id", r.frame_id},
                        {"sequence_id", r.sequence_id},
                        {"action", r.action},
                        {"joints3d", rows_to_json(r.joints3d.joints)},
                        {"joints2d", rows_to_json(r.joints2d.joints)},
                        {"bone_lengths", vector_to_json(r.bone_lengths.lengths)},
                        {"source", to_string(r.source)},
                        {"topology", r.topology}};
  if (r.angles) doc["angles"] = rows_to_json(r.angles->angles);
  return doc;
}

DatasetRecord record_from_json(const nlohmann::json& doc, const SkeletonTopology& topo) {
  if (!doc.is_object()) throw DataError("record is not a JSON object");
  DatasetRecord r;
  try {
    r.frame_id = doc.at("frame_id").get<long>();
    r.sequence_id = doc.at("sequence_id").get<long>();
    r.action = doc.at("action").get<std::string>();
    const std::string source = doc.at("source").get<std::string>();
    if (source == "gt") r.source = RecordSource::kGt;
    else if (source == "generated") r.source = RecordSource::kGenerated;
    else throw DataError("unknown source '" + source + "'");
    r.joints3d.joints = rows_from_json<Rows3>(doc.at("joints3d"), topo.joint_count(), "joints3d");
    r.joints2d.joints = rows_from_json<Rows2>(doc.at("joints2d"), topo.joint_count(), "joints2d");
    r.bone_lengths.lengths =
        vector_from_json(doc.at("bone_lengths"), topo.bone_count(), "bone_lengths");
    if (doc.contains("angles")) {
      r.angles = AngleMatrix{rows_from_json<Rows3>(doc.at("angles"), topo.bone_count(), "angles")};
    }
    if (doc.contains("topology")) r.topology = doc.at("topology").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(e.what());
  }
  const std::string digest = topo.digest();
  if (r.source == RecordSource::kGenerated) {
    if (!r.angles) throw DataError("generated record lacks 'angles'");
    if (r.topology.empty()) throw DataError("generated record lacks 'topology'");
    const Eigen::VectorXd measured = bone_lengths_of(r.joints3d, topo).lengths;
    const double rel = ((measured - r.bone_lengths.lengths).array().abs() /
                        r.bone_lengths.lengths.array().abs())
                           .maxCoeff();
    if (!(rel <= 1e-6)) throw DataError("joints3d bone lengths disagree with bone_lengths");
  }
  if (!r.topology.empty() && r.topology != digest) {
    throw DataError("record topology digest " + r.topology.substr(0, 12) +
                    "... does not match the configured topology " + digest.substr(0, 12) + "...");
  }
  r.topology = digest;
  require_finite(r.joints3d);
  require_finite(r.joints2d);
  return r;
}

std::string serialize_dataset(const std::vector<DatasetRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += to_json(r).dump();
    out += '\n';
  }
  return out;
}

void write_dataset(const std::string& path, const std::vector<DatasetRecord>& records) {
  write_file_atomic(path, serialize_dataset(records));
}

std::vector<DatasetRecord> parse_dataset(const std::string& text, const SkeletonTopology& topo,
                                         const std::string& origin) {
  std::vector<DatasetRecord> out;
  std::istringstream in(text);
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(record_from_json(nlohmann::json::parse(line), topo));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(origin + ":" + std::to_string(lineno) + ": malformed record: " + e.what());
    } catch (const Error& e) {
      throw DataError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<DatasetRecord> read_dataset(const std::string& path, const SkeletonTopology& topo) {
  return parse_dataset(read_file(path), topo, path);
}

std::vector<DatasetRecord> records_from_generated(const GeneratedDataset& data,
                                                  const CameraIntrinsics& cam,
                                                  const SkeletonTopology& topo) {
  const std::string digest = topo.digest();
  std::vector<DatasetRecord> out;
  out.reserve(frame_count(data));
  for (const auto& seq : data) {
    for (std::size_t f = 0; f < seq.poses.size(); ++f) {
      DatasetRecord r;
      r.frame_id = static_cast<long>(out.size());
      r.sequence_id = seq.sequence_id;
      r.action = seq.action;
      r.joints3d = seq.poses[f];
      r.joints2d = project(seq.poses[f], cam);
      r.bone_lengths = seq.lengths;
      r.angles = seq.angles[f];
      r.source = RecordSource::kGenerated;
      r.topology = digest;
      out.push_back(std::move(r));
    }
  }
  return out;
}

DatasetRecord make_gt_record(long frame_id, long sequence_id, const std::string& action,
                             const Pose3D& pose, const CameraIntrinsics& cam,
                             const SkeletonTopology& topo) {
  DatasetRecord r;
  r.frame_id = frame_id;
  r.sequence_id = sequence_id;
  r.action = action;
  r.joints3d = pose;
  r.joints2d = project(pose, cam);
  r.bone_lengths = bone_lengths_of(pose, topo);
  r.source = RecordSource::kGt;
  r.topology = topo.digest();
  return r;
}

std::vector<PosePair> pairs_of(const std::vector<DatasetRecord>& records,
                               const SkeletonTopology& topo) {
  std::vector<PosePair> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back({r.joints2d, root_relative(r.joints3d, topo)});
  return out;
}

}  // namespace posegu
