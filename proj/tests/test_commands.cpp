#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "oracles.hpp"
#include "taxbigan/bigan.hpp"
#include "taxbigan/commands.hpp"
#include "taxbigan/features.hpp"
#include "taxbigan/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace taxbigan;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("taxbigan_cli_" + std::string(info->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override {
    if (!HasFailure()) fs::remove_all(dir_);
  }

  // Runs the CLI with stdout/stderr captured; returns the exit status.
  int run(const std::string& args, const std::string& env = "") {
    const auto log = dir_ / "last.log";
    const std::string cmd = env + (env.empty() ? "" : " ") + "\"" TAXBIGAN_CLI_PATH "\" " + args + " > \"" +
                            log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    output_ = slurp(log);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string path(const std::string& rel) const { return (dir_ / rel).string(); }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  static json read_json(const fs::path& p) { return json::parse(slurp(p)); }

  // Small synthetic dataset and its features, shared by several tests.
  void make_features() {
    std::ofstream cfg(path("synth.json"));
    cfg << R"({"n_genuine": 120, "n_fraud": 12, "months": 12})";
    cfg.close();
    ASSERT_EQ(run("synth --config " + path("synth.json") + " --out " + path("s")), 0) << output_;
    ASSERT_EQ(run("features " + path("s/returns.csv") + " --out " + path("f")), 0) << output_;
  }

  fs::path dir_;
  std::string output_;
};

}  // namespace

TEST_F(CliTest, SynthIsReproducibleAndCreatesOutputDir) {
  ASSERT_EQ(run("synth --out " + path("a/deep/nested")), 0) << output_;
  ASSERT_EQ(run("synth --out " + path("b")), 0) << output_;
  for (const char* f : {"returns.csv", "labels.csv"}) {
    EXPECT_EQ(slurp(dir_ / "a/deep/nested" / f), slurp(dir_ / "b" / f)) << f;
  }
  const auto ma = cli::RunManifest::load(path("a/deep/nested/manifest.json"));
  const auto mb = cli::RunManifest::load(path("b/manifest.json"));
  EXPECT_TRUE(cli::differing_outputs(ma, mb).empty());
  EXPECT_EQ(ma.config.at("n_genuine"), 1000);
  EXPECT_EQ(ma.seed, 2017u);
}

TEST_F(CliTest, OutDirFallsBackToEnvironment) {
  ASSERT_EQ(run("synth --seed 5", "BIGAN_OUT_DIR=" + path("root")), 0) << output_;
  EXPECT_TRUE(fs::exists(dir_ / "root" / "synth" / "returns.csv"));
  EXPECT_EQ(cli::RunManifest::load(path("root/synth/manifest.json")).seed, 5u);
}

TEST_F(CliTest, FeaturesWithEveryTaxpayerTooShort) {
  ASSERT_EQ(run("synth --out " + path("s")), 0) << output_;
  ASSERT_EQ(run("features " + path("s/returns.csv") + " --min-months 30 --out " + path("f")), 0) << output_;
  EXPECT_NE(output_.find("warning"), std::string::npos) << output_;
  EXPECT_EQ(slurp(dir_ / "f/features.csv"), std::string(features::kFeaturesHeader) + "\n");
  std::istringstream excluded(slurp(dir_ / "f/excluded.csv"));
  std::string line;
  std::size_t lines = 0;
  while (std::getline(excluded, line)) ++lines;
  EXPECT_EQ(lines, 1061u);  // header + every taxpayer
}

TEST_F(CliTest, FeaturesOnGstReturnRows) {
  std::ofstream out(path("r.csv"));
  out << features::kReturnsHeader << '\n';
  for (int m = 1; m <= 6; ++m) {
    out << "BC,2019-0" << m << ',' << 210000 + 1000 * m << ",190000,12000,12000," << 100 * m << ",10100,10100,"
        << 50 * m << ',' << 1900 + 10 * m * m << '\n';
  }
  out.close();
  ASSERT_EQ(run("features " + path("r.csv") + " --out " + path("f")), 0) << output_;
  const auto rows = features::load_features(path("f/features.csv"));
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].months_used, 6u);
  EXPECT_TRUE(fs::exists(dir_ / "f/normalization.json"));
}

TEST_F(CliTest, CorruptReturnsIsDataError) {
  std::ofstream out(path("bad.csv"));
  out << features::kReturnsHeader << "\nA,2020-01,100,80,5,5,8,3,3,6,2\nA,2020-02,1O0,80,5,5,8,3,3,6,2\n";
  out.close();
  EXPECT_EQ(run("features " + path("bad.csv") + " --out " + path("f")), 2);
  EXPECT_NE(output_.find("line 3"), std::string::npos) << output_;
  EXPECT_EQ(run("features " + path("missing.csv") + " --out " + path("f")), 2);
}

TEST_F(CliTest, UsageAndConfigErrors) {
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("frobnicate"), 1);
  make_features();
  const std::string feats = path("f/features.csv");
  EXPECT_EQ(run("train " + feats + " --alignment sideways"), 1);
  EXPECT_EQ(run("train " + feats + " --epochs 0 --out " + path("t")), 1) << output_;
  std::ofstream cfg(path("bad.json"));
  cfg << R"({"learning_rate": 0.1})";
  cfg.close();
  EXPECT_EQ(run("train " + feats + " --config " + path("bad.json") + " --out " + path("t")), 1) << output_;
}

TEST_F(CliTest, TrainEmitsOneMetricsLinePerEpochAndScores) {
  make_features();
  const std::string feats = path("f/features.csv");
  ASSERT_EQ(run("train " + feats + " --epochs 5 --batch-size 32 --seed 3 --out " + path("t")), 0) << output_;
  std::istringstream metrics(slurp(dir_ / "t/metrics.jsonl"));
  std::string line;
  std::size_t epoch = 0;
  while (std::getline(metrics, line)) {
    const auto j = json::parse(line);
    EXPECT_EQ(j.at("epoch"), ++epoch);
    for (const char* k : {"d_loss", "g_loss", "e_loss", "mean_cosine", "mean_euclidean"}) EXPECT_TRUE(j.contains(k));
  }
  EXPECT_EQ(epoch, 5u);

  ASSERT_EQ(run("score " + path("t/checkpoint.json") + " " + feats + " --labels " + path("s/labels.csv") + " --out " +
                path("sc")),
            0)
      << output_;
  const auto summary = read_json(dir_ / "sc/summary.json");
  for (const char* k : {"Q1", "Q3", "IQR", "threshold", "flagged_count", "roc_auc"}) EXPECT_TRUE(summary.contains(k)) << k;
  std::istringstream report(slurp(dir_ / "sc/report.csv"));
  std::getline(report, line);
  std::size_t flagged = 0, rows = 0;
  std::vector<double> anomaly;
  while (std::getline(report, line)) {
    ++rows;
    if (line.size() >= 5 && line.compare(line.size() - 5, 5, ",true") == 0) ++flagged;
  }
  EXPECT_EQ(rows, 132u);
  EXPECT_EQ(summary.at("flagged_count").get<std::size_t>(), flagged);

  // ROC-AUC in the summary against pair counting over the same report.
  std::map<std::string, bool> labels;
  for (const auto& l : synth::load_labels(path("s/labels.csv"))) labels[l.taxpayer_id] = l.is_fraud;
  std::istringstream again(slurp(dir_ / "sc/report.csv"));
  std::getline(again, line);
  std::vector<bool> positive;
  while (std::getline(again, line)) {
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    anomaly.push_back(1.0 - std::stod(line.substr(c1 + 1, c2 - c1 - 1)));
    positive.push_back(labels.at(line.substr(0, c1)));
  }
  EXPECT_NEAR(summary.at("roc_auc").get<double>(), oracle::auc_pairs(anomaly, positive), 1e-12);
}

TEST_F(CliTest, AlignmentFlagReachesTheRun) {
  make_features();
  const std::string feats = path("f/features.csv");
  for (const char* a : {"none", "euclidean", "cosine"}) {
    ASSERT_EQ(run("train " + feats + " --epochs 1 --alignment " + std::string(a) + " --out " + path(a)), 0) << output_;
    const auto ckpt = bigan::load_checkpoint(path(std::string(a) + "/checkpoint.json"));
    EXPECT_EQ(bigan::alignment_tag(ckpt.config.alignment), a);
    EXPECT_EQ(ckpt.model.encoder_align_opt.step == 0, std::string(a) == "none");
  }
}

TEST_F(CliTest, ResumeContinuesAndRefusesMismatchedDimensions) {
  make_features();
  const std::string feats = path("f/features.csv");
  ASSERT_EQ(run("train " + feats + " --epochs 2 --out " + path("t1")), 0) << output_;
  ASSERT_EQ(run("train " + feats + " --epochs 2 --resume " + path("t1/checkpoint.json") + " --out " + path("t2")), 0)
      << output_;
  ASSERT_EQ(run("train " + feats + " --epochs 4 --out " + path("t4")), 0) << output_;
  // Only the recorded config (epochs 2 vs 4) may differ.
  auto resumed = read_json(dir_ / "t2/checkpoint.json");
  auto straight = read_json(dir_ / "t4/checkpoint.json");
  EXPECT_EQ(resumed.at("epochs_completed"), 4);
  for (const char* k : {"networks", "optimizers", "normalization", "epochs_completed"}) {
    EXPECT_TRUE(resumed.at(k) == straight.at(k)) << k;
  }

  std::mt19937_64 rng(1);
  bigan::TrainConfig c;
  bigan::save_checkpoint(path("five.json"), {bigan::BiGanModel::create(5, c, rng), c, std::nullopt});
  EXPECT_EQ(run("train " + feats + " --epochs 1 --resume " + path("five.json") + " --out " + path("t5")), 2);
  EXPECT_NE(output_.find("5 feature dimensions"), std::string::npos) << output_;
}

TEST_F(CliTest, NumericFailureExitCode) {
  make_features();
  std::ofstream cfg(path("wild.json"));
  cfg << R"({"lr_alignment": 1e300, "alignment": "euclidean"})";
  cfg.close();
  EXPECT_EQ(run("train " + path("f/features.csv") + " --epochs 2 --config " + path("wild.json") + " --out " +
                path("t")),
            3)
      << output_;
}

TEST_F(CliTest, CompareSingleSeedAndValidation) {
  make_features();
  const std::string feats = path("f/features.csv");
  ASSERT_EQ(run("compare " + feats + " --seeds 7 --epochs 2 --out " + path("c")), 0) << output_;
  std::istringstream table(slurp(dir_ / "c/comparison.csv"));
  std::string line;
  std::getline(table, line);
  EXPECT_EQ(line, "seed,cosine_final_mean_cosine,euclidean_final_mean_cosine,cosine_wins");
  std::size_t rows = 0;
  while (std::getline(table, line)) {
    ++rows;
    EXPECT_EQ(line.substr(0, 2), "7,");
  }
  EXPECT_EQ(rows, 1u);
  EXPECT_EQ(run("compare " + feats + " --seeds 7 --epochs 0 --out " + path("c0")), 1);
}

TEST_F(CliTest, ReplayReproducesEveryStage) {
  make_features();
  const std::string feats = path("f/features.csv");
  ASSERT_EQ(run("train " + feats + " --epochs 2 --out " + path("t")), 0) << output_;
  ASSERT_EQ(run("score " + path("t/checkpoint.json") + " " + feats + " --out " + path("sc")), 0) << output_;
  for (const char* stage : {"s", "f", "t", "sc"}) {
    EXPECT_EQ(run("replay " + path(std::string(stage) + "/manifest.json") + " --out " + path(std::string("re_") + stage)),
              0)
        << stage << ": " << output_;
  }
  EXPECT_EQ(slurp(dir_ / "t/checkpoint.json"), slurp(dir_ / "re_t/checkpoint.json"));

  // An input edited after the fact is detected.
  std::ofstream(path("f/features.csv"), std::ios::app) << "ZZ,0,0,0,0,0,0,1,1,1,6\n";
  EXPECT_EQ(run("replay " + path("t/manifest.json") + " --out " + path("re_t2")), 2);
}
