#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "posegu/config.hpp"
#include "posegu/metrics.hpp"
#include "posegu/synthetic.hpp"

namespace posegu {

// {"name": str, "overrides": {pipeline config fields},
//  "benchmark": {"actions", "gt_sequences_per_action",
//                "test_sequences_per_action", "generated_mix",
//                "generated_sequences", "template_count"},
//  "gt_fractions": [...], "repetitions": int, "seeds": [...]}
// Without "seeds" the seeds are 0 .. repetitions - 1.
struct ExperimentSpec {
  std::string name = "experiment";
  PipelineConfig config;
  SyntheticSpec benchmark;
  std::vector<double> gt_fractions{0.25};
  int repetitions = 1;
  std::vector<std::uint64_t> seeds;

  std::vector<std::uint64_t> run_seeds() const;
  void validate() const;
};

ExperimentSpec experiment_from_json(const nlohmann::json& doc);
ExperimentSpec load_experiment(const std::string& path);

// Everything one training run needs, built from the benchmark for one seed.
struct RunData {
  std::vector<PosePair> generated;
  std::vector<PosePair> gt_sample;
  std::vector<PosePair> test;
  std::vector<std::string> test_actions;
  HistogramMap gt_hist;
  HistogramMap gen_hist;
};

RunData prepare_run(const SyntheticBenchmark& bench, double gt_fraction, std::uint64_t seed,
                    const PipelineConfig& cfg, const SkeletonTopology& topo);

// Trains from the seeded initial model and evaluates on the test set.
EvalReport train_and_evaluate(const RunData& data, const PipelineConfig& cfg,
                              const CrmConfig& crm, std::uint64_t seed,
                              const SkeletonTopology& topo);

struct SweepRun {
  double fraction = 0.0;
  std::uint64_t seed = 0;
  EvalReport report;
};

struct SweepPoint {
  double fraction = 0.0;
  double mean_mpjpe = 0.0;
  double sd_mpjpe = 0.0;  // sample standard deviation, 0 for one run
  int runs = 0;
};

struct SweepResult {
  std::vector<SweepRun> runs;       // ordered by (fraction, seed)
  std::vector<SweepPoint> points;   // ordered by fraction
  // Kendall tau-b between fraction and MPJPE over all runs; negative means
  // error falls as more ground truth is used. Reported, never asserted.
  double kendall_tau = 0.0;
};

// One model per (fraction, seed). Writes sweep.csv (per-fraction mean and
// sd), runs.csv and summary.json into `out_dir` unless it is empty.
SweepResult run_fraction_sweep(const ExperimentSpec& spec, const std::string& out_dir = "");

struct AblationPair {
  std::uint64_t seed = 0;
  EvalReport crm;
  EvalReport ablated;  // cIPS weights forced to 1
};

struct AblationResult {
  std::vector<AblationPair> pairs;
  int crm_wins = 0;  // seeds where the CRM arm has strictly lower MPJPE
};

// Two runs per seed sharing data, initial weights and batch order, differing
// only in unit_weights. Uses the first gt_fraction. Writes ablation.csv
// (per-seed metrics and deltas, ablated minus CRM) and summary.json.
AblationResult run_crm_ablation(const ExperimentSpec& spec, const std::string& out_dir = "");

double kendall_tau_b(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace posegu
