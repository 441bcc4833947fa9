#pragma once

// The pipeline stages behind the command-line tool. Each stage writes its
// artifacts plus a manifest.json into an output directory; a manifest holds
// the fully resolved configuration and input hashes, so replay() can rerun
// the stage and check that every artifact comes out byte-identical.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "taxbigan/bigan.hpp"
#include "taxbigan/scoring.hpp"
#include "taxbigan/synth.hpp"

namespace taxbigan::cli {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitNumeric = 3 };

struct Artifact {
  std::string name;
  std::string path;
  std::string hash;
};

struct RunManifest {
  std::string command;
  nlohmann::json config;  // resolved, every default materialized
  std::vector<Artifact> inputs;
  std::vector<Artifact> outputs;
  std::uint64_t seed = 0;

  const Artifact* output(const std::string& name) const;
  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
  static RunManifest load(const std::string& path);
};

inline constexpr const char* kManifestFile = "manifest.json";

RunManifest run_synth(const synth::SynthConfig& config, const std::filesystem::path& out_dir);

struct FeaturesOutcome {
  RunManifest manifest;
  std::size_t retained = 0;
  std::size_t excluded = 0;
};
FeaturesOutcome run_features(const std::string& returns_path, const std::filesystem::path& out_dir,
                             std::size_t min_months);

struct TrainOutcome {
  RunManifest manifest;
  std::vector<bigan::EpochMetrics> metrics;
};
TrainOutcome run_train(const std::string& features_path, const bigan::TrainConfig& config,
                       const std::filesystem::path& out_dir, const std::optional<std::string>& resume_from = {});

struct ScoreOutcome {
  RunManifest manifest;
  scoring::ScoreReport report;
  std::optional<double> roc_auc;
  std::optional<double> flagged_precision;
};
ScoreOutcome run_score(const std::string& checkpoint_path, const std::string& features_path,
                       const std::filesystem::path& out_dir, const std::optional<std::string>& labels_path = {});

struct CompareRow {
  std::uint64_t seed = 0;
  double cosine_final = 0;     // final mean reconstruction cosine, cosine alignment
  double euclidean_final = 0;  // same, Euclidean alignment
  bool cosine_wins() const { return cosine_final >= euclidean_final; }
};
struct CompareOutcome {
  RunManifest manifest;
  std::vector<CompareRow> rows;
  std::size_t cosine_wins = 0;
};
// Trains both alignment variants per seed; the runs are independent and may
// execute concurrently.
CompareOutcome run_compare(const std::string& features_path, const bigan::TrainConfig& base,
                           const std::vector<std::uint64_t>& seeds, const std::filesystem::path& out_dir);

// synth -> features -> train -> score under out_dir/{synth,features,train,score}.
struct PipelineOutcome {
  RunManifest manifest;
  ScoreOutcome score;
};
PipelineOutcome run_pipeline(const synth::SynthConfig& synth_config, std::size_t min_months,
                             const bigan::TrainConfig& train_config, const std::filesystem::path& out_dir);

// Reruns the command a manifest describes into out_dir and returns the new
// manifest. Throws InputError if a recorded input no longer matches its hash.
RunManifest replay(const RunManifest& manifest, const std::filesystem::path& out_dir);

// Output names whose hashes differ between two manifests of the same command.
std::vector<std::string> differing_outputs(const RunManifest& a, const RunManifest& b);

// --out if given, else $BIGAN_OUT_DIR/<command>, else ./bigan_out/<command>.
std::filesystem::path resolve_out_dir(const std::optional<std::string>& out, const std::string& command);

}  // namespace taxbigan::cli
