// posegu command-line tool.
//
//   posegu [--config cfg.json] [--seed N] [--out PATH] <verb> ...
//
// Exit codes: 0 success, 2 usage or configuration error, 3 data error,
// 4 numerical failure.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "posegu/commands.hpp"
#include "posegu/error.hpp"
#include "posegu/experiments.hpp"

namespace {

using namespace posegu;

std::string default_out(const PipelineConfig& cfg, const std::string& out,
                        const std::string& name) {
  if (!out.empty()) return out;
  return (std::filesystem::path(cfg.output_dir) / name).string();
}

std::string sibling(const std::string& path, const std::string& suffix) {
  std::filesystem::path p(path);
  return (p.parent_path() / (p.stem().string() + suffix)).string();
}

int run(int argc, char** argv) {
  CLI::App app{"Seed-pose driven 3D pose generation and counterfactual training"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "pipeline configuration JSON");
  app.add_option("--seed", seed, "global random seed");
  app.add_option("--out", out, "output file or directory");

  std::string in_a, in_b, in_c, in_d;
  auto* extract = app.add_subcommand("extract-ranges", "angle ranges and templates from seeds");
  extract->add_option("seeds", in_a, "seed poses (JSON Lines)")->required();

  auto* generate = app.add_subcommand("generate", "generate a pose dataset from ranges");
  generate->add_option("ranges", in_a, "range file from extract-ranges")->required();

  std::optional<double> fraction;
  std::string edges;
  auto* histogram = app.add_subcommand("histogram", "per-joint 2D histograms of a dataset");
  histogram->add_option("dataset", in_a, "dataset (JSON Lines)")->required();
  histogram->add_option("--fraction", fraction, "share of records used, (0, 1]");
  histogram->add_option("--edges", edges, "reuse the bin edges of this histogram");

  std::string trace;
  auto* train = app.add_subcommand("train", "train the pose estimator");
  train->add_option("generated", in_a, "generated dataset")->required();
  train->add_option("gt", in_b, "ground-truth dataset")->required();
  train->add_option("gt_hist", in_c, "ground-truth histogram")->required();
  train->add_option("gen_hist", in_d, "generated-set histogram")->required();
  train->add_option("--trace", trace, "loss trace CSV (default: next to the checkpoint)");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a test set");
  eval->add_option("checkpoint", in_a, "model checkpoint")->required();
  eval->add_option("test", in_b, "test dataset")->required();

  int joint = 0;
  auto* plot = app.add_subcommand("plot-dist", "point clouds and marginals of one joint");
  plot->add_option("dataset_a", in_a)->required();
  plot->add_option("dataset_b", in_b)->required();
  plot->add_option("joint", joint, "joint index")->required();

  std::vector<std::string> actions{"reach", "squat"};
  int sequences = 10;
  auto* make_gt = app.add_subcommand("make-gt", "synthetic ground truth from built-in actions");
  make_gt->add_option("--actions", actions, "action labels")->delimiter(',');
  make_gt->add_option("--sequences", sequences, "sequences per action");

  std::string kind;
  auto* experiment = app.add_subcommand("experiment", "run an experiment spec");
  experiment->add_option("kind", kind, "sweep or ablation")
      ->required()
      ->check(CLI::IsMember({"sweep", "ablation"}));
  experiment->add_option("spec", in_a, "experiment spec JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::kUsage);
  }

  PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : load_config(config_path);
  if (seed) cfg.set_seed(*seed);
  std::ostream& log = std::cout;

  if (*extract) {
    cmd_extract_ranges(in_a, default_out(cfg, out, "ranges.json"), cfg, log);
  } else if (*generate) {
    cmd_generate(in_a, default_out(cfg, out, "generated.jsonl"), cfg, log);
  } else if (*histogram) {
    cmd_histogram(in_a, fraction.value_or(cfg.histogram.fraction),
                  default_out(cfg, out, "histogram.json"), cfg, log, edges);
  } else if (*train) {
    const std::string ckpt = default_out(cfg, out, "model.json");
    cmd_train(in_a, in_b, in_c, in_d, ckpt, trace.empty() ? sibling(ckpt, ".trace.csv") : trace,
              cfg, log);
  } else if (*eval) {
    cmd_eval(in_a, in_b, default_out(cfg, out, "report.json"), cfg, log);
  } else if (*plot) {
    cmd_plot_dist(in_a, in_b, joint, default_out(cfg, out, "plot"), cfg, log);
  } else if (*make_gt) {
    cmd_make_gt(actions, sequences, default_out(cfg, out, "gt.jsonl"), cfg, log);
  } else if (*experiment) {
    const ExperimentSpec spec = load_experiment(in_a);
    const std::string dir = default_out(cfg, out, spec.name);
    std::filesystem::create_directories(dir);
    if (kind == "sweep") {
      const auto r = run_fraction_sweep(spec, dir);
      for (const auto& p : r.points) {
        std::printf("gt_fraction %.3f: MPJPE %.2f +- %.2f mm (%d runs)\n", p.fraction,
                    p.mean_mpjpe, p.sd_mpjpe, p.runs);
      }
      std::printf("kendall tau-b %.3f\n", r.kendall_tau);
    } else {
      const auto r = run_crm_ablation(spec, dir);
      for (const auto& p : r.pairs) {
        std::printf("seed %llu: MPJPE crm %.2f, ablated %.2f\n",
                    static_cast<unsigned long long>(p.seed), p.crm.overall.mpjpe,
                    p.ablated.overall.mpjpe);
      }
      std::printf("crm wins %d of %zu\n", r.crm_wins, r.pairs.size());
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const posegu::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(posegu::ExitCode::kData);
  }
}
