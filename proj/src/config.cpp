#include "posegu/config.hpp"

#include <cmath>
#include <numbers>

#include "posegu/error.hpp"
#include "posegu/io.hpp"
#include "posegu/json_util.hpp"

namespace posegu {

namespace {

// Typed access to one section of the config, naming fields as
// "section.key" in every error.
class Section {
 public:
  Section(const nlohmann::json& doc, std::string name) : doc_(doc), name_(std::move(name)) {
    if (!doc_.is_object()) throw ConfigError(name_ + " must be a JSON object");
  }

  template <typename F>
  void each(F&& fn) const {
    for (const auto& [key, value] : doc_.items()) {
      if (!fn(key, value)) throw ConfigError("unknown field " + field(key));
    }
  }

  std::string field(const std::string& key) const {
    return name_.empty() ? key : name_ + "." + key;
  }

  double number(const std::string& key, const nlohmann::json& v) const {
    if (!v.is_number()) throw ConfigError(field(key) + " must be a number");
    return v.get<double>();
  }

  int integer(const std::string& key, const nlohmann::json& v) const {
    if (!v.is_number_integer()) throw ConfigError(field(key) + " must be an integer");
    return v.get<int>();
  }

  std::uint64_t unsigned_integer(const std::string& key, const nlohmann::json& v) const {
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      throw ConfigError(field(key) + " must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  std::string string(const std::string& key, const nlohmann::json& v) const {
    if (!v.is_string()) throw ConfigError(field(key) + " must be a string");
    return v.get<std::string>();
  }

  bool boolean(const std::string& key, const nlohmann::json& v) const {
    if (!v.is_boolean()) throw ConfigError(field(key) + " must be true or false");
    return v.get<bool>();
  }

  Vec3 vec3(const std::string& key, const nlohmann::json& v) const {
    if (!v.is_array() || v.size() != 3) throw ConfigError(field(key) + " must hold 3 numbers");
    Vec3 out;
    for (int i = 0; i < 3; ++i) out[i] = number(key, v[i]);
    return out;
  }

 private:
  const nlohmann::json& doc_;
  std::string name_;
};

constexpr double kDegree = std::numbers::pi / 180.0;

GeneratorConfig generator_from_json(GeneratorConfig g, const nlohmann::json& doc) {
  Section s(doc, "generator");
  s.each([&](const std::string& key, const nlohmann::json& v) {
    if (key == "keyframes") g.keyframes = s.integer(key, v);
    else if (key == "inter_frames") g.inter_frames = s.integer(key, v);
    else if (key == "sequences_per_action") g.sequences_per_action = s.integer(key, v);
    else if (key == "seed_samples_per_action") g.seed_samples_per_action = s.integer(key, v);
    else if (key == "range_padding") g.range_padding = s.number(key, v);
    else if (key == "ik_frame") {
      try {
        g.ik_frame = ik_frame_from_string(s.string(key, v));
      } catch (const ConfigError& e) {
        throw ConfigError("generator." + std::string(e.what()));
      }
    } else if (key == "global_rotation_deg") {
      if (!v.is_array() || v.size() != 3) {
        throw ConfigError(s.field(key) + " must hold 3 [min, max] pairs");
      }
      for (int a = 0; a < 3; ++a) {
        if (!v[a].is_array() || v[a].size() != 2) {
          throw ConfigError(s.field(key) + " must hold 3 [min, max] pairs");
        }
        g.global_rotation_range(a, 0) = s.number(key, v[a][0]) * kDegree;
        g.global_rotation_range(a, 1) = s.number(key, v[a][1]) * kDegree;
      }
    } else if (key == "root_box") {
      Section box(v, "generator.root_box");
      box.each([&](const std::string& k, const nlohmann::json& b) {
        if (k == "lower") g.root_box.lower = box.vec3(k, b);
        else if (k == "upper") g.root_box.upper = box.vec3(k, b);
        else return false;
        return true;
      });
    } else return false;
    return true;
  });
  return g;
}

nlohmann::json to_json(const GeneratorConfig& g) {
  nlohmann::json rot = nlohmann::json::array();
  for (int a = 0; a < 3; ++a) {
    rot.push_back({g.global_rotation_range(a, 0) / kDegree, g.global_rotation_range(a, 1) / kDegree});
  }
  return {{"keyframes", g.keyframes},
          {"inter_frames", g.inter_frames},
          {"sequences_per_action", g.sequences_per_action},
          {"seed_samples_per_action", g.seed_samples_per_action},
          {"range_padding", g.range_padding},
          {"ik_frame", to_string(g.ik_frame)},
          {"global_rotation_deg", rot},
          {"root_box",
           {{"lower", vector_to_json(g.root_box.lower)},
            {"upper", vector_to_json(g.root_box.upper)}}}};
}

HistogramSettings histogram_from_json(HistogramSettings h, const nlohmann::json& doc) {
  Section s(doc, "histogram");
  s.each([&](const std::string& key, const nlohmann::json& v) {
    if (key == "bin_count") h.bin_count = s.integer(key, v);
    else if (key == "epsilon") h.epsilon = s.number(key, v);
    else if (key == "fraction") h.fraction = s.number(key, v);
    else if (key == "shared_edges") h.shared_edges = s.boolean(key, v);
    else return false;
    return true;
  });
  return h;
}

nlohmann::json to_json(const HistogramSettings& h) {
  return {{"bin_count", h.bin_count},
          {"epsilon", h.epsilon},
          {"fraction", h.fraction},
          {"shared_edges", h.shared_edges}};
}

}  // namespace

void HistogramSettings::validate() const {
  if (bin_count < 1) throw ConfigError("histogram.bin_count must be >= 1");
  if (!(epsilon > 0.0) || !(epsilon * bin_count * bin_count < 1.0)) {
    throw ConfigError("histogram.epsilon must be > 0 and below 1 / bin_count^2");
  }
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ConfigError("histogram.fraction must lie in (0, 1]");
  }
}

TrainConfig train_config_from_json(TrainConfig t, const nlohmann::json& doc) {
  Section s(doc, "train");
  s.each([&](const std::string& key, const nlohmann::json& v) {
    if (key == "learning_rate") t.learning_rate = s.number(key, v);
    else if (key == "batch_size") t.batch_size = s.integer(key, v);
    else if (key == "epochs") t.epochs = s.integer(key, v);
    else if (key == "optimizer") t.optimizer = optimizer_from_string(s.string(key, v));
    else if (key == "gt_fraction") t.gt_fraction = s.number(key, v);
    else if (key == "lambda_co") t.lambda_co = s.number(key, v);
    else if (key == "hidden") t.hidden = s.integer(key, v);
    else if (key == "blocks") t.blocks = s.integer(key, v);
    else if (key == "activation") t.activation = activation_from_string(s.string(key, v));
    else if (key == "precision") t.precision = precision_from_string(s.string(key, v));
    else if (key == "beta1") t.beta1 = s.number(key, v);
    else if (key == "beta2") t.beta2 = s.number(key, v);
    else if (key == "adam_epsilon") t.adam_epsilon = s.number(key, v);
    else return false;
    return true;
  });
  return t;
}

nlohmann::json to_json(const TrainConfig& t) {
  return {{"learning_rate", t.learning_rate},
          {"batch_size", t.batch_size},
          {"epochs", t.epochs},
          {"optimizer", to_string(t.optimizer)},
          {"gt_fraction", t.gt_fraction},
          {"lambda_co", t.lambda_co},
          {"hidden", t.hidden},
          {"blocks", t.blocks},
          {"activation", to_string(t.activation)},
          {"precision", to_string(t.precision)},
          {"beta1", t.beta1},
          {"beta2", t.beta2},
          {"adam_epsilon", t.adam_epsilon}};
}

void PipelineConfig::set_seed(std::uint64_t s) {
  seed = s;
  generator.rng_seed = s;
  train.rng_seed = s;
}

void PipelineConfig::validate() const {
  generator.validate();
  camera.validate();
  histogram.validate();
  crm.validate();
  train.validate();
}

SkeletonTopology PipelineConfig::topology() const {
  return topology_path.empty() ? SkeletonTopology::human36m() : load_topology(topology_path);
}

PipelineConfig apply_config_json(PipelineConfig cfg, const nlohmann::json& doc) {
  Section s(doc, "");
  bool seed_given = false;
  s.each([&](const std::string& key, const nlohmann::json& v) {
    if (key == "topology") cfg.topology_path = s.string(key, v);
    else if (key == "seed") {
      cfg.seed = s.unsigned_integer(key, v);
      seed_given = true;
    } else if (key == "generator") cfg.generator = generator_from_json(cfg.generator, v);
    else if (key == "camera") {
      nlohmann::json merged = to_json(cfg.camera);
      merged.merge_patch(v);
      Section(v, "camera");
      cfg.camera = camera_from_json(merged);
    } else if (key == "histogram") cfg.histogram = histogram_from_json(cfg.histogram, v);
    else if (key == "crm") {
      Section(v, "crm");
      nlohmann::json merged = to_json(cfg.crm);
      merged.merge_patch(v);
      cfg.crm = crm_config_from_json(merged);
    } else if (key == "train") cfg.train = train_config_from_json(cfg.train, v);
    else if (key == "output_dir") cfg.output_dir = s.string(key, v);
    else return false;
    return true;
  });
  if (seed_given) cfg.set_seed(cfg.seed);
  cfg.validate();
  return cfg;
}

PipelineConfig config_from_json(const nlohmann::json& doc) {
  return apply_config_json(PipelineConfig{}, doc);
}

PipelineConfig load_config(const std::string& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": malformed JSON: " + e.what());
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  return config_from_json(doc);
}

nlohmann::json to_json(const PipelineConfig& cfg) {
  nlohmann::json out = {{"seed", cfg.seed},
                        {"generator", to_json(cfg.generator)},
                        {"camera", to_json(cfg.camera)},
                        {"histogram", to_json(cfg.histogram)},
                        {"crm", to_json(cfg.crm)},
                        {"train", to_json(cfg.train)},
                        {"output_dir", cfg.output_dir}};
  if (!cfg.topology_path.empty()) out["topology"] = cfg.topology_path;
  return out;
}

}  // namespace posegu
