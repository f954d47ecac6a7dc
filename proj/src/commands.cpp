#include "posegu/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>

#include "posegu/error.hpp"
#include "posegu/io.hpp"
#include "posegu/json_util.hpp"
#include "posegu/synthetic.hpp"

namespace posegu {

namespace {

nlohmann::json load_json(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": malformed JSON: " + e.what());
  }
}

void write_json(const std::string& path, const nlohmann::json& doc, int indent = 1) {
  write_file_atomic(path, doc.dump(indent) + "\n");
}

void check_topology(const std::string& found, const std::string& expected,
                    const std::string& what) {
  if (found != expected) {
    throw DataError(what + " was built for topology " + found.substr(0, 12) +
                    "..., the configuration uses " + expected.substr(0, 12) + "...");
  }
}

void check_format(const nlohmann::json& doc, const std::string& format, const std::string& path) {
  if (!doc.is_object() || doc.value("format", std::string()) != format) {
    throw DataError(path + " is not a " + format + " file");
  }
}

std::vector<Pose2D> inputs_of(const std::vector<DatasetRecord>& records) {
  std::vector<Pose2D> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.joints2d);
  return out;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

HistogramArtifact load_histogram(const std::string& path, const SkeletonTopology& topo) {
  const auto doc = load_json(path);
  try {
    return histogram_artifact_from_json(doc, topo);
  } catch (const Error& e) {
    throw DataError(path + ": " + e.what());
  }
}

}  // namespace

nlohmann::json to_json(const RangesArtifact& r) {
  nlohmann::json profiles = nlohmann::json::array();
  for (const auto& p : r.profiles) profiles.push_back(to_json(p));
  nlohmann::json templates = nlohmann::json::array();
  for (const auto& t : r.templates) {
    templates.push_back({{"action", t.action}, {"lengths", vector_to_json(t.lengths.lengths)}});
  }
  return {{"format", "posegu-ranges"},
          {"version", 1},
          {"topology", r.topology},
          {"padding", r.padding},
          {"ik_frame", to_string(r.ik_frame)},
          {"profiles", std::move(profiles)},
          {"templates", std::move(templates)}};
}

RangesArtifact ranges_from_json(const nlohmann::json& doc, const SkeletonTopology& topo) {
  RangesArtifact r;
  try {
    r.topology = doc.at("topology").get<std::string>();
    check_topology(r.topology, topo.digest(), "range file");
    r.padding = doc.at("padding").get<double>();
    r.ik_frame = ik_frame_from_string(doc.at("ik_frame").get<std::string>());
    for (const auto& p : doc.at("profiles")) r.profiles.push_back(profile_from_json(p, topo));
    for (const auto& t : doc.at("templates")) {
      BoneLengthTemplate bt;
      bt.action = t.at("action").get<std::string>();
      bt.lengths.lengths = vector_from_json(t.at("lengths"), topo.bone_count(), "lengths");
      validate(bt.lengths, topo);
      r.templates.push_back(std::move(bt));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed range file: ") + e.what());
  }
  if (r.profiles.empty()) throw DataError("range file holds no profiles");
  if (r.templates.empty()) throw DataError("range file holds no bone-length templates");
  return r;
}

nlohmann::json to_json(const HistogramArtifact& h) {
  return {{"format", "posegu-histogram"},
          {"version", 1},
          {"topology", h.topology},
          {"provenance",
           {{"source_digest", h.source_digest},
            {"dataset_source", h.dataset_source},
            {"fraction", h.fraction},
            {"seed", h.seed}}},
          {"histogram", to_json(h.histogram)}};
}

HistogramArtifact histogram_artifact_from_json(const nlohmann::json& doc,
                                               const SkeletonTopology& topo) {
  HistogramArtifact h;
  try {
    if (doc.value("format", std::string()) != "posegu-histogram") {
      throw DataError("not a posegu-histogram file");
    }
    h.topology = doc.at("topology").get<std::string>();
    check_topology(h.topology, topo.digest(), "histogram");
    const auto& prov = doc.at("provenance");
    h.source_digest = prov.at("source_digest").get<std::string>();
    h.dataset_source = prov.at("dataset_source").get<std::string>();
    h.fraction = prov.at("fraction").get<double>();
    h.seed = prov.at("seed").get<std::uint64_t>();
    h.histogram = histogram_from_json(doc.at("histogram"));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed histogram file: ") + e.what());
  }
  if (h.histogram.joint_count() != topo.joint_count()) {
    throw DimensionError("histogram has " + std::to_string(h.histogram.joint_count()) +
                         " joints, topology has " + std::to_string(topo.joint_count()));
  }
  return h;
}

void cmd_extract_ranges(const std::string& seeds_path, const std::string& out_path,
                        const PipelineConfig& cfg, std::ostream& log) {
  const SkeletonTopology topo = cfg.topology();
  const auto records = read_dataset(seeds_path, topo);
  if (records.empty()) throw DataError(seeds_path + ": no seed records");
  for (const auto& r : records) {
    if (r.action.empty()) {
      throw DataError(seeds_path + ": record " + std::to_string(r.frame_id) +
                      " has an empty action label");
    }
  }
  Rng rng = make_rng(cfg.seed, 0, rng_tag::kSeedSelect);
  const auto seeds = select_seeds(records, cfg.generator.seed_samples_per_action, rng);

  RangesArtifact out;
  out.topology = topo.digest();
  out.padding = cfg.generator.range_padding;
  out.ik_frame = cfg.generator.ik_frame;
  out.profiles = extract_ranges(seeds, topo, out.padding, out.ik_frame);
  out.templates = extract_templates(seeds, topo);
  write_json(out_path, to_json(out));

  for (const auto& p : out.profiles) log << p.action << ": " << p.seed_count << " seeds\n";
  log << out.profiles.size() << " profiles written to " << out_path << "\n";
}

void cmd_generate(const std::string& ranges_path, const std::string& out_path,
                  const PipelineConfig& cfg, std::ostream& log) {
  const SkeletonTopology topo = cfg.topology();
  RangesArtifact ranges;
  try {
    ranges = ranges_from_json(load_json(ranges_path), topo);
  } catch (const Error& e) {
    throw DataError(ranges_path + ": " + e.what());
  }
  const auto data = generate_dataset(ranges.profiles, ranges.templates, cfg.generator, topo);
  const auto records = records_from_generated(data, cfg.camera, topo);
  write_dataset(out_path, records);

  std::map<std::string, std::size_t> per_action;
  for (const auto& r : records) ++per_action[r.action];
  for (const auto& [action, n] : per_action) log << action << ": " << n << " frames\n";
  log << records.size() << " frames written to " << out_path << "\n";
}

void cmd_histogram(const std::string& dataset_path, double fraction, const std::string& out_path,
                   const PipelineConfig& cfg, std::ostream& log, const std::string& edges_path) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("fraction must lie in (0, 1]");
  const SkeletonTopology topo = cfg.topology();
  std::optional<HistogramArtifact> reference;
  if (!edges_path.empty()) reference = load_histogram(edges_path, topo);

  const std::string bytes = read_file(dataset_path);
  const auto records = parse_dataset(bytes, topo, dataset_path);
  if (records.empty()) throw DataError(dataset_path + ": dataset is empty");

  HistogramArtifact out;
  out.topology = topo.digest();
  out.source_digest = sha256_hex(bytes);
  out.dataset_source = to_string(records.front().source);
  out.fraction = fraction;
  out.seed = cfg.seed;

  Rng rng = make_rng(cfg.seed, 0, rng_tag::kGtSubsample);
  const auto idx = subsample_indices(records.size(), fraction, rng);
  std::vector<Pose2D> points;
  points.reserve(idx.size());
  for (auto i : idx) points.push_back(records[i].joints2d);
  if (reference) {
    out.histogram = build_histogram_on_edges(points, reference->histogram, cfg.histogram.epsilon);
  } else {
    out.histogram = build_histogram(points, cfg.histogram.bin_count, cfg.histogram.epsilon);
  }
  out.histogram.source = out.dataset_source;
  write_json(out_path, to_json(out), -1);
  log << "histogram over " << points.size() << " of " << records.size() << " records written to "
      << out_path << "\n";
}

std::string trace_csv(const std::vector<EpochLoss>& trace) {
  std::ostringstream os;
  os.precision(17);
  os << "epoch,L_P,L_co,L_A\n";
  for (const auto& e : trace) {
    os << e.epoch << ',' << e.loss.generated << ',' << e.loss.counterfactual << ','
       << e.loss.total << '\n';
  }
  return os.str();
}

void cmd_train(const std::string& gen_path, const std::string& gt_path,
               const std::string& gt_hist_path, const std::string& gen_hist_path,
               const std::string& checkpoint_path, const std::string& trace_path,
               const PipelineConfig& cfg, std::ostream& log) {
  const SkeletonTopology topo = cfg.topology();
  const HistogramArtifact h_gt = load_histogram(gt_hist_path, topo);
  const HistogramArtifact h_gen = load_histogram(gen_hist_path, topo);
  const auto generated = read_dataset(gen_path, topo);
  const std::string gt_bytes = read_file(gt_path);
  const auto gt_records = parse_dataset(gt_bytes, topo, gt_path);
  if (generated.empty()) throw DataError(gen_path + ": dataset is empty");

  // The ground-truth training sample is exactly the histogram's subsample.
  if (h_gt.source_digest != sha256_hex(gt_bytes)) {
    throw DataError(gt_hist_path + " was not built from " + gt_path);
  }
  if (h_gt.fraction != cfg.train.gt_fraction) {
    throw ConfigError("train.gt_fraction " + fmt("%g", cfg.train.gt_fraction) +
                      " differs from the ground-truth histogram fraction " +
                      fmt("%g", h_gt.fraction));
  }
  std::vector<PosePair> gt_sample;
  if (cfg.train.lambda_co != 0.0) {
    if (gt_records.empty()) throw DataError(gt_path + ": dataset is empty");
    Rng rng = make_rng(h_gt.seed, 0, rng_tag::kGtSubsample);
    const auto all = pairs_of(gt_records, topo);
    for (auto i : subsample_indices(all.size(), h_gt.fraction, rng)) gt_sample.push_back(all[i]);
  }
  const auto gen_pairs = pairs_of(generated, topo);

  const EstimatorModel initial =
      make_model(cfg.train, topo.joint_count(), InputNormalization::from_camera(cfg.camera));
  const TrainResult result =
      train(initial, gen_pairs, gt_sample, h_gt.histogram, h_gen.histogram, cfg.train, cfg.crm);

  write_file_atomic(checkpoint_path, checkpoint_to_json(result.model, topo.digest()).dump() + "\n");
  write_file_atomic(trace_path, trace_csv(result.trace));
  const auto& last = result.trace.back();
  log << "epoch " << last.epoch << ": L_P=" << fmt("%.4f", last.loss.generated)
      << " L_co=" << fmt("%.4f", last.loss.counterfactual)
      << " L_A=" << fmt("%.4f", last.loss.total) << "\n";
}

EvalReport cmd_eval(const std::string& checkpoint_path, const std::string& test_path,
                    const std::string& report_path, const PipelineConfig& cfg, std::ostream& log) {
  const SkeletonTopology topo = cfg.topology();
  std::string digest;
  EstimatorModel model;
  try {
    model = checkpoint_from_json(load_json(checkpoint_path), &digest);
  } catch (const Error& e) {
    throw DataError(checkpoint_path + ": " + e.what());
  }
  check_topology(digest, topo.digest(), "checkpoint");
  if (model.shape().joints != topo.joint_count()) {
    throw DimensionError("checkpoint joint count does not match the topology");
  }
  const auto records = read_dataset(test_path, topo);
  if (records.empty()) throw DataError(test_path + ": test set is empty");

  const auto pairs = pairs_of(records, topo);
  const auto preds = predict(model, pairs);
  std::vector<Pose3D> targets;
  std::vector<std::string> actions;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    targets.push_back(pairs[i].target);
    actions.push_back(records[i].action);
  }
  const EvalReport report = evaluate(preds, targets, actions, topo);
  nlohmann::json doc = to_json(report);
  doc["topology"] = topo.digest();
  write_json(report_path, doc);
  log << to_table(report);
  return report;
}

void cmd_plot_dist(const std::string& a_path, const std::string& b_path, int joint_index,
                   const std::string& out_dir, const PipelineConfig& cfg, std::ostream& log) {
  const SkeletonTopology topo = cfg.topology();
  if (joint_index < 0 || joint_index >= topo.joint_count()) {
    throw ConfigError("joint index " + std::to_string(joint_index) + " is outside [0, " +
                      std::to_string(topo.joint_count()) + ")");
  }
  const auto a = read_dataset(a_path, topo);
  const auto b = read_dataset(b_path, topo);
  if (a.empty() || b.empty()) throw DataError("plot-dist needs two non-empty datasets");

  auto points = [&](const std::vector<DatasetRecord>& records) {
    std::ostringstream os;
    os.precision(17);
    os << "u,v,x,y,z\n";
    for (const auto& r : records) {
      const Pose3D rel = root_relative(r.joints3d, topo);
      os << r.joints2d.joints(joint_index, 0) << ',' << r.joints2d.joints(joint_index, 1) << ','
         << rel.joints(joint_index, 0) << ',' << rel.joints(joint_index, 1) << ','
         << rel.joints(joint_index, 2) << '\n';
    }
    return os.str();
  };

  // Marginals on bins spanning both datasets.
  auto marginal = [&](int axis) {
    double lo = a.front().joints2d.joints(joint_index, axis), hi = lo;
    for (const auto* set : {&a, &b}) {
      for (const auto& r : *set) {
        lo = std::min(lo, r.joints2d.joints(joint_index, axis));
        hi = std::max(hi, r.joints2d.joints(joint_index, axis));
      }
    }
    if (!(hi > lo)) {
      lo -= 0.5;
      hi += 0.5;
    }
    const int B = cfg.histogram.bin_count;
    Eigen::VectorXd edges = Eigen::VectorXd::LinSpaced(B + 1, lo, hi);
    std::vector<long> ca(B, 0), cb(B, 0);
    for (const auto& r : a) ++ca[bin_index(edges, r.joints2d.joints(joint_index, axis))];
    for (const auto& r : b) ++cb[bin_index(edges, r.joints2d.joints(joint_index, axis))];
    std::ostringstream os;
    os.precision(17);
    os << "bin_lo,bin_hi,count_a,count_b\n";
    for (int i = 0; i < B; ++i) {
      os << edges[i] << ',' << edges[i + 1] << ',' << ca[i] << ',' << cb[i] << '\n';
    }
    return os.str();
  };

  const std::filesystem::path dir(out_dir);
  write_file_atomic((dir / "points_a.csv").string(), points(a));
  write_file_atomic((dir / "points_b.csv").string(), points(b));
  write_file_atomic((dir / "marginal_u.csv").string(), marginal(0));
  write_file_atomic((dir / "marginal_v.csv").string(), marginal(1));
  log << "joint " << topo.joint_names()[joint_index] << ": " << a.size() << " and " << b.size()
      << " points written to " << out_dir << "\n";
}

void cmd_make_gt(const std::vector<std::string>& actions, int sequences_per_action,
                 const std::string& out_path, const PipelineConfig& cfg, std::ostream& log) {
  if (actions.empty()) throw ConfigError("make-gt needs at least one action");
  if (sequences_per_action < 1) throw ConfigError("make-gt needs sequences >= 1");
  const SkeletonTopology topo = cfg.topology();
  GeneratorConfig g = cfg.generator;
  g.rng_seed = cfg.seed;
  const auto records = make_synthetic_gt(actions, sequences_per_action, g, cfg.camera, 8, 1, topo);
  write_dataset(out_path, records);
  log << records.size() << " ground-truth frames written to " << out_path << "\n";
}

}  // namespace posegu
