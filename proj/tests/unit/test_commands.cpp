#include <filesystem>
#include <fstream>
#include <sstream>

#include "posegu/commands.hpp"
#include "posegu/error.hpp"
#include "posegu/io.hpp"
#include "test_util.hpp"

using namespace posegu;
using namespace posegu::testing;
namespace fs = std::filesystem;

namespace {

class Commands : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("posegu_cmd_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    cfg_.generator.seed_samples_per_action = 20;
    cfg_.generator.sequences_per_action = 4;
    cfg_.train.epochs = 1;
    cfg_.train.hidden = 16;
    cfg_.train.blocks = 1;
    cfg_.train.batch_size = 64;
    cfg_.histogram.bin_count = 16;
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  static int lines(const std::string& p) {
    const std::string s = read_file(p);
    return static_cast<int>(std::count(s.begin(), s.end(), '\n'));
  }

  fs::path dir_;
  PipelineConfig cfg_;
  std::ostringstream log_;
};

}  // namespace

TEST_F(Commands, ExtractRangesThreeActions) {
  cmd_make_gt({"walk", "reach", "squat"}, 1, path("gt.jsonl"), cfg_, log_);
  EXPECT_EQ(lines(path("gt.jsonl")), 150);
  cmd_extract_ranges(path("gt.jsonl"), path("ranges.json"), cfg_, log_);
  const auto r = ranges_from_json(nlohmann::json::parse(read_file(path("ranges.json"))),
                                  cfg_.topology());
  ASSERT_EQ(r.profiles.size(), 3u);
  for (const auto& p : r.profiles) EXPECT_EQ(p.seed_count, 20);
  EXPECT_EQ(r.templates.size(), 60u);
  const std::string first = read_file(path("ranges.json"));
  cmd_extract_ranges(path("gt.jsonl"), path("ranges.json"), cfg_, log_);
  EXPECT_EQ(read_file(path("ranges.json")), first);
}

TEST_F(Commands, MalformedLineIsNamed) {
  cmd_make_gt({"walk"}, 1, path("gt.jsonl"), cfg_, log_);
  std::istringstream in(read_file(path("gt.jsonl")));
  std::string line, out;
  for (int n = 1; std::getline(in, line); ++n) out += (n == 7 ? std::string("{\"broken\": ") : line) + "\n";
  write_file_atomic(path("bad.jsonl"), out);
  try {
    cmd_extract_ranges(path("bad.jsonl"), path("ranges.json"), cfg_, log_);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.jsonl:7"), std::string::npos) << e.what();
  }
  EXPECT_FALSE(fs::exists(path("ranges.json")));
  EXPECT_THROW(cmd_extract_ranges(path("missing.jsonl"), path("r.json"), cfg_, log_), DataError);
}

TEST_F(Commands, GenerateCountsAndDeterminism) {
  cmd_make_gt({"walk", "reach", "squat"}, 1, path("gt.jsonl"), cfg_, log_);
  cmd_extract_ranges(path("gt.jsonl"), path("ranges.json"), cfg_, log_);
  cmd_generate(path("ranges.json"), path("gen.jsonl"), cfg_, log_);
  EXPECT_EQ(lines(path("gen.jsonl")), 3 * 4 * 50);
  cmd_generate(path("ranges.json"), path("gen2.jsonl"), cfg_, log_);
  EXPECT_EQ(read_file(path("gen.jsonl")), read_file(path("gen2.jsonl")));

  PipelineConfig tiny = cfg_;
  tiny.generator.keyframes = 2;
  tiny.generator.inter_frames = 1;
  tiny.generator.sequences_per_action = 1;
  cmd_make_gt({"walk"}, 1, path("gt1.jsonl"), tiny, log_);
  cmd_extract_ranges(path("gt1.jsonl"), path("r1.json"), tiny, log_);
  cmd_generate(path("r1.json"), path("g1.jsonl"), tiny, log_);
  EXPECT_EQ(lines(path("g1.jsonl")), 2);
}

TEST_F(Commands, TopologyMismatchDetectedBeforeCompute) {
  cmd_make_gt({"walk"}, 1, path("gt.jsonl"), cfg_, log_);
  cmd_extract_ranges(path("gt.jsonl"), path("ranges.json"), cfg_, log_);
  auto doc = nlohmann::json::parse(read_file(path("ranges.json")));
  doc["topology"] = std::string(64, 'a');
  write_file_atomic(path("ranges.json"), doc.dump());
  EXPECT_THROW(cmd_generate(path("ranges.json"), path("gen.jsonl"), cfg_, log_), DataError);
  EXPECT_FALSE(fs::exists(path("gen.jsonl")));
}

TEST_F(Commands, HistogramTrainEval) {
  cmd_make_gt({"walk", "squat"}, 2, path("gt.jsonl"), cfg_, log_);
  cmd_extract_ranges(path("gt.jsonl"), path("ranges.json"), cfg_, log_);
  cmd_generate(path("ranges.json"), path("gen.jsonl"), cfg_, log_);
  cmd_histogram(path("gt.jsonl"), 0.25, path("gt_hist.json"), cfg_, log_);
  cmd_histogram(path("gen.jsonl"), 1.0, path("gen_hist.json"), cfg_, log_, path("gt_hist.json"));
  const auto h = histogram_artifact_from_json(
      nlohmann::json::parse(read_file(path("gt_hist.json"))), cfg_.topology());
  EXPECT_EQ(h.histogram.sample_count, 50u);
  EXPECT_EQ(h.source_digest, sha256_hex(read_file(path("gt.jsonl"))));
  const auto g = histogram_artifact_from_json(
      nlohmann::json::parse(read_file(path("gen_hist.json"))), cfg_.topology());
  EXPECT_EQ(g.histogram.joints[3].edges_u, h.histogram.joints[3].edges_u);

  cmd_train(path("gen.jsonl"), path("gt.jsonl"), path("gt_hist.json"), path("gen_hist.json"),
            path("model.json"), path("trace.csv"), cfg_, log_);
  EXPECT_EQ(lines(path("trace.csv")), 3);
  EXPECT_EQ(read_file(path("trace.csv")).rfind("epoch,L_P,L_co,L_A\n", 0), 0u);
  const auto report = cmd_eval(path("model.json"), path("gt.jsonl"), path("report.json"), cfg_, log_);
  EXPECT_EQ(report.overall.sample_count, 200u);
  EXPECT_EQ(report.per_action.size(), 2u);

  // A histogram built from another file is rejected.
  cmd_histogram(path("gen.jsonl"), 0.25, path("wrong.json"), cfg_, log_);
  EXPECT_THROW(cmd_train(path("gen.jsonl"), path("gt.jsonl"), path("wrong.json"),
                         path("gen_hist.json"), path("m2.json"), path("t2.csv"), cfg_, log_),
               DataError);
  PipelineConfig other = cfg_;
  other.train.gt_fraction = 0.5;
  EXPECT_THROW(cmd_train(path("gen.jsonl"), path("gt.jsonl"), path("gt_hist.json"),
                         path("gen_hist.json"), path("m2.json"), path("t2.csv"), other, log_),
               ConfigError);
}

// Output layer zero except the bias, which holds the one test target.
TEST_F(Commands, EvalOfExactModelIsZero) {
  const auto topo = cfg_.topology();
  Rng rng = make_rng(120);
  const Pose3D pose = random_pose(rng, topo, Vec3(0, 0, 5000));
  const auto rec = make_gt_record(0, 0, "walk", pose, cfg_.camera, topo);
  write_dataset(path("test.jsonl"), {rec});
  ModelShape s;
  s.hidden = 4;
  s.blocks = 1;
  EstimatorModel m(s);
  const Pose3D target = root_relative(pose, topo);
  for (int j = 0; j < 17; ++j) {
    for (int k = 0; k < 3; ++k) m.bias(m.layer_count() - 1)[3 * j + k] = target.joints(j, k) / s.output_scale;
  }
  write_file_atomic(path("model.json"), checkpoint_to_json(m, topo.digest()).dump());
  const auto r = cmd_eval(path("model.json"), path("test.jsonl"), path("report.json"), cfg_, log_);
  EXPECT_LT(r.overall.mpjpe, 1e-9);
  EXPECT_EQ(r.overall.pck, 100.0);

  write_file_atomic(path("empty.jsonl"), "");
  EXPECT_THROW(cmd_eval(path("model.json"), path("empty.jsonl"), path("r.json"), cfg_, log_),
               DataError);
  auto doc = checkpoint_to_json(m, topo.digest());
  doc["version"] = 99;
  write_file_atomic(path("old.json"), doc.dump());
  EXPECT_THROW(cmd_eval(path("old.json"), path("test.jsonl"), path("r.json"), cfg_, log_), DataError);
}

TEST_F(Commands, PlotDist) {
  cmd_make_gt({"walk"}, 1, path("a.jsonl"), cfg_, log_);
  cmd_make_gt({"squat"}, 2, path("b.jsonl"), cfg_, log_);
  cmd_plot_dist(path("a.jsonl"), path("b.jsonl"), 16, path("plot"), cfg_, log_);
  EXPECT_EQ(lines(path("plot/points_a.csv")), 51);
  EXPECT_EQ(lines(path("plot/points_b.csv")), 101);
  for (const char* f : {"plot/marginal_u.csv", "plot/marginal_v.csv"}) {
    std::istringstream in(read_file(path(f)));
    std::string line;
    std::getline(in, line);
    long ca = 0, cb = 0;
    while (std::getline(in, line)) {
      std::istringstream row(line);
      std::string lo, hi, a, b;
      std::getline(row, lo, ',');
      std::getline(row, hi, ',');
      std::getline(row, a, ',');
      std::getline(row, b, ',');
      ca += std::stol(a);
      cb += std::stol(b);
    }
    EXPECT_EQ(ca, 50);
    EXPECT_EQ(cb, 100);
  }
  cmd_plot_dist(path("a.jsonl"), path("a.jsonl"), 3, path("same"), cfg_, log_);
  EXPECT_EQ(read_file(path("same/points_a.csv")), read_file(path("same/points_b.csv")));
  EXPECT_THROW(cmd_plot_dist(path("a.jsonl"), path("b.jsonl"), 17, path("p2"), cfg_, log_),
               ConfigError);
}

TEST(TraceCsv, Format) {
  std::vector<EpochLoss> t{{0, {1.5, 2.0, 3.5}}, {1, {1.0, 1.0, 2.0}}};
  EXPECT_EQ(trace_csv(t), "epoch,L_P,L_co,L_A\n0,1.5,2,3.5\n1,1,1,2\n");
}

#ifdef POSEGU_CLI_PATH
namespace {
int run_cli(const std::string& args) {
  const int status = std::system((std::string(POSEGU_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
  return WEXITSTATUS(status);
}
}  // namespace

TEST(Cli, ExitCodes) {
  const fs::path d = fs::temp_directory_path() / "posegu_cli_exit";
  fs::remove_all(d);
  fs::create_directories(d);
  const std::string gt = (d / "gt.jsonl").string();
  EXPECT_EQ(run_cli("make-gt --actions walk --sequences 1 --out " + gt), 0);
  EXPECT_EQ(run_cli("extract-ranges " + (d / "none.jsonl").string() + " --out " + (d / "r.json").string()), 3);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  write_file_atomic((d / "cfg.json").string(), R"({"train": {"epoch": 1}})");
  EXPECT_EQ(run_cli("--config " + (d / "cfg.json").string() + " extract-ranges " + gt + " --out " +
                    (d / "r.json").string()),
            2);
  fs::remove_all(d);
}
#endif
