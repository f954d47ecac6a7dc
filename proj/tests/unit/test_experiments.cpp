#include <filesystem>
#include <map>

#include "posegu/error.hpp"
#include "posegu/experiments.hpp"
#include "posegu/io.hpp"
#include "test_util.hpp"

using namespace posegu;
using namespace posegu::testing;
namespace fs = std::filesystem;

namespace {

// tau-b = (nc - nd) / sqrt((n0 - n1)(n0 - n2)) with tie-group corrections.
double tau_b_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double nc = 0, nd = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const double s = (x[i] - x[j]) * (y[i] - y[j]);
      nc += s > 0;
      nd += s < 0;
    }
  }
  auto tie_pairs = [](const std::vector<double>& v) {
    std::map<double, double> groups;
    for (double e : v) groups[e] += 1;
    double t = 0;
    for (const auto& [value, c] : groups) t += c * (c - 1) / 2;
    return t;
  };
  const double n0 = n * (n - 1) / 2.0;
  return (nc - nd) / std::sqrt((n0 - tie_pairs(x)) * (n0 - tie_pairs(y)));
}

ExperimentSpec tiny_spec() {
  return experiment_from_json(nlohmann::json::parse(R"({
    "name": "tiny",
    "overrides": {
      "generator": {"keyframes": 2, "inter_frames": 5, "seed_samples_per_action": 5},
      "histogram": {"bin_count": 8},
      "train": {"epochs": 2, "hidden": 16, "blocks": 1, "batch_size": 32}
    },
    "benchmark": {"gt_sequences_per_action": 6, "test_sequences_per_action": 2,
                  "generated_sequences": 10},
    "gt_fractions": [1.0],
    "seeds": [3]
  })"));
}

}  // namespace

TEST(Kendall, PerfectOrders) {
  EXPECT_DOUBLE_EQ(kendall_tau_b({1, 2, 3, 4}, {10, 20, 30, 40}), 1.0);
  EXPECT_DOUBLE_EQ(kendall_tau_b({1, 2, 3, 4}, {4, 3, 2, 1}), -1.0);
}

TEST(Kendall, TiesMatchOracleAndReference) {
  const std::vector<double> x{0.03, 0.03, 0.03, 0.25, 0.25, 0.25, 0.5, 0.5, 0.5};
  const std::vector<double> y{60, 55, 58, 48, 50, 47, 46, 49, 44};
  EXPECT_NEAR(kendall_tau_b(x, y), tau_b_oracle(x, y), 1e-15);
  // scipy.stats.kendalltau on the same data.
  EXPECT_NEAR(kendall_tau_b(x, y), -0.7377253439645218, 1e-12);
  EXPECT_NEAR(kendall_tau_b({1, 2, 3, 4, 5, 6}, {3, 1, 2, 2, 6, 5}), 0.41403933560541256, 1e-12);
  Rng rng = make_rng(130);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> a, b;
    for (int i = 0; i < 15; ++i) {
      a.push_back(std::floor(uniform(rng, 0, 4)));
      b.push_back(std::floor(uniform(rng, 0, 6)));
    }
    EXPECT_NEAR(kendall_tau_b(a, b), tau_b_oracle(a, b), 1e-12);
  }
  EXPECT_THROW(kendall_tau_b({1}, {1, 2}), DimensionError);
}

TEST(ExperimentSpec, ParsingAndValidation) {
  const auto s = tiny_spec();
  EXPECT_EQ(s.repetitions, 1);
  EXPECT_EQ(s.run_seeds(), std::vector<std::uint64_t>{3});
  EXPECT_EQ(s.benchmark.generator.keyframes, 2);
  const auto d = experiment_from_json({{"repetitions", 3}});
  EXPECT_EQ(d.run_seeds(), (std::vector<std::uint64_t>{0, 1, 2}));
  EXPECT_THROW(experiment_from_json({{"gt_fractions", {0.0}}}), ConfigError);
  EXPECT_THROW(experiment_from_json({{"repetitions", 0}}), ConfigError);
  EXPECT_THROW(experiment_from_json({{"benchmark", {{"sizes", 1}}}}), ConfigError);
  EXPECT_THROW(experiment_from_json({{"overrides", {{"train", {{"lr", 1}}}}}}), ConfigError);
}

TEST(Experiments, SingleFractionSweepIsOneRowAndReproducible) {
  const auto spec = tiny_spec();
  const fs::path dir = fs::temp_directory_path() / "posegu_sweep_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto a = run_fraction_sweep(spec, dir.string());
  ASSERT_EQ(a.points.size(), 1u);
  EXPECT_EQ(a.points[0].runs, 1);
  EXPECT_EQ(a.points[0].sd_mpjpe, 0.0);
  const std::string csv = read_file((dir / "sweep.csv").string());
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
  const auto b = run_fraction_sweep(spec, "");
  EXPECT_EQ(a.points[0].mean_mpjpe, b.points[0].mean_mpjpe);
  fs::remove_all(dir);
}

TEST(Experiments, AblationControlHasZeroDeltas) {
  auto spec = tiny_spec();
  spec.config.crm.unit_weights = true;
  const auto r = run_crm_ablation(spec, "");
  ASSERT_EQ(r.pairs.size(), 1u);
  EXPECT_EQ(r.pairs[0].crm.overall.mpjpe, r.pairs[0].ablated.overall.mpjpe);
  EXPECT_EQ(r.pairs[0].crm.overall.auc, r.pairs[0].ablated.overall.auc);
  EXPECT_EQ(r.crm_wins, 0);
}

TEST(Experiments, AblationIsDeterministic) {
  const auto spec = tiny_spec();
  const auto a = run_crm_ablation(spec, "");
  const auto b = run_crm_ablation(spec, "");
  EXPECT_EQ(a.pairs[0].crm.overall.mpjpe, b.pairs[0].crm.overall.mpjpe);
  EXPECT_EQ(a.pairs[0].ablated.overall.mpjpe, b.pairs[0].ablated.overall.mpjpe);
}

TEST(Experiments, ErrorsNameFractionAndSeed) {
  auto spec = tiny_spec();
  spec.config.train.learning_rate = 1e12;
  spec.config.train.optimizer = OptimizerKind::kSgd;
  try {
    run_fraction_sweep(spec, "");
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("seed 3"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("fraction 1"), std::string::npos) << e.what();
  }
}
