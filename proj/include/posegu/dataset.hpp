#pragma once

#include <optional>
#include <string>
#include <vector>

#include "posegu/camera.hpp"
#include "posegu/posegen.hpp"

namespace posegu {

enum class RecordSource { kGt, kGenerated };

std::string to_string(RecordSource s);

// One frame of a JSON-Lines dataset file:
//   {"action": str, "angles": [[x,y,z]...] (generated only),
//    "bone_lengths": [...], "frame_id": int, "joints2d": [[u,v]...],
//    "joints3d": [[x,y,z]...], "sequence_id": int, "source": "gt"|"generated",
//    "topology": digest}
// Keys are written in sorted order. "topology" may be omitted on ground-truth
// records from external sources; when present it must match.
struct DatasetRecord {
  long frame_id = 0;
  long sequence_id = 0;
  std::string action;
  Pose3D joints3d;
  Pose2D joints2d;
  BoneLengths bone_lengths;
  std::optional<AngleMatrix> angles;
  RecordSource source = RecordSource::kGt;
  std::string topology;
};

nlohmann::json to_json(const DatasetRecord& r);
// Validates dimensions against `topo` and, for generated records, that the
// bone lengths of joints3d agree with bone_lengths to 1e-6 relative.
DatasetRecord record_from_json(const nlohmann::json& doc, const SkeletonTopology& topo);

std::string serialize_dataset(const std::vector<DatasetRecord>& records);
void write_dataset(const std::string& path, const std::vector<DatasetRecord>& records);
// Errors name the 1-based line number of the offending record.
std::vector<DatasetRecord> parse_dataset(const std::string& text, const SkeletonTopology& topo,
                                         const std::string& origin = "<memory>");
std::vector<DatasetRecord> read_dataset(const std::string& path, const SkeletonTopology& topo);

// Flattens generated sequences into records, projecting each frame.
std::vector<DatasetRecord> records_from_generated(const GeneratedDataset& data,
                                                  const CameraIntrinsics& cam,
                                                  const SkeletonTopology& topo);

// Records built from bare 3D poses (ground truth), projected with `cam`.
DatasetRecord make_gt_record(long frame_id, long sequence_id, const std::string& action,
                             const Pose3D& pose, const CameraIntrinsics& cam,
                             const SkeletonTopology& topo);

// (joints2d, root-relative joints3d) per record.
std::vector<PosePair> pairs_of(const std::vector<DatasetRecord>& records,
                               const SkeletonTopology& topo);

}  // namespace posegu
