#include "posegu/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "posegu/error.hpp"
#include "posegu/io.hpp"
#include "posegu/parallel.hpp"

namespace posegu {

std::vector<std::uint64_t> ExperimentSpec::run_seeds() const {
  if (!seeds.empty()) return seeds;
  std::vector<std::uint64_t> out;
  for (int r = 0; r < repetitions; ++r) out.push_back(static_cast<std::uint64_t>(r));
  return out;
}

void ExperimentSpec::validate() const {
  if (gt_fractions.empty()) throw ConfigError("experiment needs at least one gt_fraction");
  for (double f : gt_fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw ConfigError("experiment gt_fractions must lie in (0, 1]");
  }
  if (repetitions < 1) throw ConfigError("experiment repetitions must be >= 1");
  if (!seeds.empty() && static_cast<int>(seeds.size()) != repetitions) {
    throw ConfigError("experiment needs one seed per repetition");
  }
  config.validate();
  benchmark.validate();
}

ExperimentSpec experiment_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("experiment spec must be a JSON object");
  ExperimentSpec spec;
  bool repetitions_given = false;
  try {
    for (const auto& [key, v] : doc.items()) {
      if (key == "name") spec.name = v.get<std::string>();
      else if (key == "overrides") spec.config = apply_config_json(spec.config, v);
      else if (key == "gt_fractions") spec.gt_fractions = v.get<std::vector<double>>();
      else if (key == "repetitions") {
        spec.repetitions = v.get<int>();
        repetitions_given = true;
      } else if (key == "seeds") spec.seeds = v.get<std::vector<std::uint64_t>>();
      else if (key == "benchmark") {
        auto& b = spec.benchmark;
        for (const auto& [k, w] : v.items()) {
          if (k == "actions") b.actions = w.get<std::vector<std::string>>();
          else if (k == "gt_sequences_per_action") b.gt_sequences_per_action = w.get<int>();
          else if (k == "test_sequences_per_action") b.test_sequences_per_action = w.get<int>();
          else if (k == "generated_mix") b.generated_mix = w.get<std::vector<double>>();
          else if (k == "generated_sequences") b.generated_sequences = w.get<int>();
          else if (k == "template_count") b.template_count = w.get<int>();
          else throw ConfigError("unknown field benchmark." + k);
        }
      } else throw ConfigError("unknown field " + key);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed experiment spec: ") + e.what());
  }
  if (!repetitions_given && !spec.seeds.empty()) {
    spec.repetitions = static_cast<int>(spec.seeds.size());
  }
  spec.benchmark.generator = spec.config.generator;
  spec.benchmark.camera = spec.config.camera;
  spec.validate();
  return spec;
}

ExperimentSpec load_experiment(const std::string& path) {
  try {
    return experiment_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": malformed JSON: " + e.what());
  }
}

RunData prepare_run(const SyntheticBenchmark& bench, double gt_fraction, std::uint64_t seed,
                    const PipelineConfig& cfg, const SkeletonTopology& topo) {
  RunData d;
  d.generated = pairs_of(bench.generated, topo);
  const auto gt_all = pairs_of(bench.gt, topo);
  Rng rng = make_rng(seed, 0, rng_tag::kGtSubsample);
  std::vector<Pose2D> gt_points;
  for (auto i : subsample_indices(gt_all.size(), gt_fraction, rng)) {
    d.gt_sample.push_back(gt_all[i]);
    gt_points.push_back(gt_all[i].input);
  }
  std::vector<Pose2D> gen_points;
  gen_points.reserve(d.generated.size());
  for (const auto& p : d.generated) gen_points.push_back(p.input);
  d.gt_hist = build_histogram(gt_points, cfg.histogram.bin_count, cfg.histogram.epsilon);
  d.gen_hist = cfg.histogram.shared_edges
                   ? build_histogram_on_edges(gen_points, d.gt_hist, cfg.histogram.epsilon)
                   : build_histogram(gen_points, cfg.histogram.bin_count, cfg.histogram.epsilon);
  d.test = pairs_of(bench.test, topo);
  for (const auto& r : bench.test) d.test_actions.push_back(r.action);
  return d;
}

EvalReport train_and_evaluate(const RunData& data, const PipelineConfig& cfg,
                              const CrmConfig& crm, std::uint64_t seed,
                              const SkeletonTopology& topo) {
  TrainConfig t = cfg.train;
  t.rng_seed = seed;
  const EstimatorModel initial =
      make_model(t, topo.joint_count(), InputNormalization::from_camera(cfg.camera));
  const TrainResult result =
      train(initial, data.generated, data.gt_sample, data.gt_hist, data.gen_hist, t, crm);
  const auto preds = predict(result.model, data.test);
  std::vector<Pose3D> targets;
  targets.reserve(data.test.size());
  for (const auto& p : data.test) targets.push_back(p.target);
  return evaluate(preds, targets, data.test_actions, topo);
}

namespace {

SyntheticBenchmark benchmark_for(const ExperimentSpec& spec, std::uint64_t seed,
                                 const SkeletonTopology& topo) {
  SyntheticSpec b = spec.benchmark;
  b.seed = seed;
  return build_benchmark(b, topo);
}

template <typename F>
auto annotated(const std::string& where, F&& fn) {
  // Rethrown as the same subclass so callers can still tell them apart.
  try {
    return fn();
  } catch (const DimensionError& e) {
    throw DimensionError(where + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(where + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(where + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(where + ": " + e.what());
  } catch (const Error& e) {
    throw Error(where + ": " + e.what(), e.code());
  }
}

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string label(double fraction, std::uint64_t seed) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "fraction %g, seed %llu", fraction,
                static_cast<unsigned long long>(seed));
  return buf;
}

}  // namespace

double kendall_tau_b(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DimensionError("kendall_tau_b: size mismatch");
  const std::size_t n = x.size();
  double concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = x[i] - x[j], dy = y[i] - y[j];
      if (dx == 0 && dy == 0) continue;
      if (dx == 0) ++ties_x;
      else if (dy == 0) ++ties_y;
      else if ((dx > 0) == (dy > 0)) ++concordant;
      else ++discordant;
    }
  }
  const double denom =
      std::sqrt((concordant + discordant + ties_x) * (concordant + discordant + ties_y));
  return denom > 0 ? (concordant - discordant) / denom : 0.0;
}

SweepResult run_fraction_sweep(const ExperimentSpec& spec, const std::string& out_dir) {
  spec.validate();
  const SkeletonTopology topo = spec.config.topology();
  const auto seeds = spec.run_seeds();
  std::vector<double> fractions = spec.gt_fractions;
  std::sort(fractions.begin(), fractions.end());

  std::vector<SyntheticBenchmark> benches(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t s) {
    benches[s] = annotated("seed " + std::to_string(seeds[s]),
                           [&] { return benchmark_for(spec, seeds[s], topo); });
  });

  SweepResult result;
  result.runs.resize(fractions.size() * seeds.size());
  parallel_for(result.runs.size(), [&](std::size_t k) {
    const double f = fractions[k / seeds.size()];
    const std::uint64_t seed = seeds[k % seeds.size()];
    result.runs[k] = annotated(label(f, seed), [&] {
      const RunData data = prepare_run(benches[k % seeds.size()], f, seed, spec.config, topo);
      return SweepRun{f, seed, train_and_evaluate(data, spec.config, spec.config.crm, seed, topo)};
    });
  });

  std::vector<double> xs, ys;
  for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
    SweepPoint p;
    p.fraction = fractions[fi];
    std::vector<double> v;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      v.push_back(result.runs[fi * seeds.size() + s].report.overall.mpjpe);
      xs.push_back(p.fraction);
      ys.push_back(v.back());
    }
    p.runs = static_cast<int>(v.size());
    for (double e : v) p.mean_mpjpe += e;
    p.mean_mpjpe /= static_cast<double>(v.size());
    if (v.size() > 1) {
      double ss = 0;
      for (double e : v) ss += (e - p.mean_mpjpe) * (e - p.mean_mpjpe);
      p.sd_mpjpe = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    result.points.push_back(p);
  }
  result.kendall_tau = kendall_tau_b(xs, ys);

  if (!out_dir.empty()) {
    const std::filesystem::path dir(out_dir);
    std::ostringstream sweep, runs;
    sweep << "gt_fraction,mean_mpjpe,sd_mpjpe,runs\n";
    for (const auto& p : result.points) {
      sweep << g17(p.fraction) << ',' << g17(p.mean_mpjpe) << ',' << g17(p.sd_mpjpe) << ','
            << p.runs << '\n';
    }
    runs << "gt_fraction,seed,mpjpe,p_mpjpe,pck,auc\n";
    for (const auto& r : result.runs) {
      const auto& m = r.report.overall;
      runs << g17(r.fraction) << ',' << r.seed << ',' << g17(m.mpjpe) << ',' << g17(m.p_mpjpe)
           << ',' << g17(m.pck) << ',' << g17(m.auc) << '\n';
    }
    nlohmann::json points = nlohmann::json::array();
    bool monotone = true;
    for (std::size_t i = 0; i < result.points.size(); ++i) {
      const auto& p = result.points[i];
      points.push_back({{"gt_fraction", p.fraction},
                        {"mean_mpjpe", p.mean_mpjpe},
                        {"sd_mpjpe", p.sd_mpjpe},
                        {"runs", p.runs}});
      if (i > 0 && !(p.mean_mpjpe < result.points[i - 1].mean_mpjpe)) monotone = false;
    }
    const nlohmann::json summary = {{"name", spec.name},
                                    {"kind", "fraction_sweep"},
                                    {"points", points},
                                    {"trend",
                                     {{"kendall_tau_b", result.kendall_tau},
                                      {"means_strictly_decreasing", monotone}}}};
    write_file_atomic((dir / "sweep.csv").string(), sweep.str());
    write_file_atomic((dir / "runs.csv").string(), runs.str());
    write_file_atomic((dir / "summary.json").string(), summary.dump(2) + "\n");
  }
  return result;
}

AblationResult run_crm_ablation(const ExperimentSpec& spec, const std::string& out_dir) {
  spec.validate();
  const SkeletonTopology topo = spec.config.topology();
  const auto seeds = spec.run_seeds();
  const double fraction = spec.gt_fractions.front();

  CrmConfig ablated = spec.config.crm;
  ablated.unit_weights = true;

  AblationResult result;
  result.pairs.resize(seeds.size());
  std::vector<RunData> data(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t s) {
    data[s] = annotated(label(fraction, seeds[s]), [&] {
      return prepare_run(benchmark_for(spec, seeds[s], topo), fraction, seeds[s], spec.config,
                         topo);
    });
  });
  parallel_for(2 * seeds.size(), [&](std::size_t k) {
    const std::size_t s = k / 2;
    const bool crm_arm = k % 2 == 0;
    const EvalReport report = annotated(label(fraction, seeds[s]), [&] {
      return train_and_evaluate(data[s], spec.config, crm_arm ? spec.config.crm : ablated,
                                seeds[s], topo);
    });
    result.pairs[s].seed = seeds[s];
    (crm_arm ? result.pairs[s].crm : result.pairs[s].ablated) = report;
  });
  for (const auto& p : result.pairs) result.crm_wins += p.crm.overall.mpjpe < p.ablated.overall.mpjpe;

  if (!out_dir.empty()) {
    const std::filesystem::path dir(out_dir);
    std::ostringstream csv;
    csv << "seed";
    for (const char* m : {"mpjpe", "p_mpjpe", "pck", "auc"}) {
      csv << ',' << m << "_crm," << m << "_ablated,delta_" << m;
    }
    csv << '\n';
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& p : result.pairs) {
      const auto& a = p.crm.overall;
      const auto& b = p.ablated.overall;
      const double va[] = {a.mpjpe, a.p_mpjpe, a.pck, a.auc};
      const double vb[] = {b.mpjpe, b.p_mpjpe, b.pck, b.auc};
      csv << p.seed;
      for (int i = 0; i < 4; ++i) csv << ',' << g17(va[i]) << ',' << g17(vb[i]) << ',' << g17(vb[i] - va[i]);
      csv << '\n';
      rows.push_back({{"seed", p.seed}, {"crm", to_json(p.crm)}, {"ablated", to_json(p.ablated)}});
    }
    const nlohmann::json summary = {{"name", spec.name},
                                    {"kind", "crm_ablation"},
                                    {"gt_fraction", fraction},
                                    {"crm_wins", result.crm_wins},
                                    {"seeds", result.pairs.size()},
                                    {"pairs", rows}};
    write_file_atomic((dir / "ablation.csv").string(), csv.str());
    write_file_atomic((dir / "summary.json").string(), summary.dump(2) + "\n");
  }
  return result;
}

}  // namespace posegu
