// taxbigan: synthetic returns, feature derivation, BiGAN training, scoring and
// alignment-variant comparison from the command line.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "taxbigan/commands.hpp"
#include "taxbigan/errors.hpp"
#include "taxbigan/features.hpp"

namespace {

using namespace taxbigan;
using nlohmann::json;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
}

struct TrainFlags {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> alignment;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch_size;
  std::optional<std::size_t> latent_dim;

  void add_to(CLI::App* cmd, bool with_alignment = true) {
    cmd->add_option("--config", config, "TrainConfig JSON document");
    cmd->add_option("--seed", seed, "Run seed");
    if (with_alignment) {
      cmd->add_option("--alignment", alignment, "Alignment phase: none, euclidean or cosine")
          ->check(CLI::IsMember({"none", "euclidean", "cosine"}));
    }
    cmd->add_option("--epochs", epochs, "Training epochs");
    cmd->add_option("--batch-size", batch_size, "Batch size");
    cmd->add_option("--latent-dim", latent_dim, "Latent dimension");
  }

  bigan::TrainConfig resolve(const json& from_file = json::object()) const {
    json j = from_file;
    if (config) j = read_json_file(*config);
    if (seed) j["seed"] = *seed;
    if (alignment) j["alignment"] = *alignment;
    if (epochs) j["epochs"] = *epochs;
    if (batch_size) j["batch_size"] = *batch_size;
    if (latent_dim) j["latent_dim"] = *latent_dim;
    return bigan::TrainConfig::from_json(j);
  }
};

void print_manifest_outputs(const cli::RunManifest& m) {
  for (const auto& a : m.outputs) std::cout << "  " << a.name << ": " << a.path << " (" << a.hash << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BiGAN-based anomaly detection for monthly tax-return data"};
  app.require_subcommand(1);
  std::optional<std::string> out;

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate a seeded synthetic returns dataset with fraud labels");
  std::optional<std::string> synth_config;
  std::optional<std::uint64_t> synth_seed;
  synth_cmd->add_option("--config", synth_config, "SynthConfig JSON document");
  synth_cmd->add_option("--seed", synth_seed, "Generator seed");
  synth_cmd->add_option("--out", out, "Output directory");

  // features
  auto* feat_cmd = app.add_subcommand("features", "Derive the nine per-taxpayer features from a returns CSV");
  std::string returns_path;
  std::size_t min_months = features::kDefaultMinMonths;
  feat_cmd->add_option("returns", returns_path, "Returns CSV")->required();
  feat_cmd->add_option("--min-months", min_months, "Minimum months of data per taxpayer");
  feat_cmd->add_option("--out", out, "Output directory");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a BiGAN on a features CSV");
  std::string train_features;
  std::optional<std::string> resume;
  TrainFlags train_flags;
  train_cmd->add_option("features", train_features, "Features CSV")->required();
  train_flags.add_to(train_cmd);
  train_cmd->add_option("--resume", resume, "Continue from this checkpoint");
  train_cmd->add_option("--out", out, "Output directory");

  // score
  auto* score_cmd = app.add_subcommand("score", "Score taxpayers and flag outliers below Q1 - 1.5 IQR");
  std::string checkpoint, score_features;
  std::optional<std::string> labels;
  score_cmd->add_option("checkpoint", checkpoint, "Checkpoint JSON")->required();
  score_cmd->add_option("features", score_features, "Features CSV")->required();
  score_cmd->add_option("--labels", labels, "labels.csv; adds ROC-AUC and flagged precision to the summary");
  score_cmd->add_option("--out", out, "Output directory");

  // compare
  auto* cmp_cmd = app.add_subcommand("compare", "Final mean cosine of cosine vs Euclidean alignment per seed");
  std::string cmp_features;
  std::vector<std::uint64_t> seeds{1};
  TrainFlags cmp_flags;
  cmp_cmd->add_option("features", cmp_features, "Features CSV")->required();
  cmp_cmd->add_option("--seeds", seeds, "Seeds to compare")->delimiter(',');
  cmp_flags.add_to(cmp_cmd, false);
  cmp_cmd->add_option("--out", out, "Output directory");

  // pipeline
  auto* pipe_cmd = app.add_subcommand("pipeline", "synth -> features -> train -> score in one run");
  TrainFlags pipe_flags;
  std::optional<std::size_t> pipe_min_months;
  std::optional<std::uint64_t> pipe_synth_seed;
  pipe_flags.add_to(pipe_cmd);
  pipe_cmd->add_option("--min-months", pipe_min_months, "Minimum months of data per taxpayer");
  pipe_cmd->add_option("--synth-seed", pipe_synth_seed, "Synthetic data seed");
  pipe_cmd->add_option("--out", out, "Output directory");

  // replay
  auto* replay_cmd = app.add_subcommand("replay", "Rerun a manifest and check its outputs are byte-identical");
  std::string manifest_path;
  replay_cmd->add_option("manifest", manifest_path, "manifest.json")->required();
  replay_cmd->add_option("--out", out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and friends print and succeed; every other parse failure is a usage error.
    const int code = app.exit(e);
    return code == 0 ? cli::kExitOk : cli::kExitUsage;
  }

  try {
    if (*synth_cmd) {
      json j = synth_config ? read_json_file(*synth_config) : json::object();
      if (synth_seed) j["seed"] = *synth_seed;
      const auto m = cli::run_synth(synth::SynthConfig::from_json(j), cli::resolve_out_dir(out, "synth"));
      std::cout << "synth: wrote\n";
      print_manifest_outputs(m);
    } else if (*feat_cmd) {
      const auto fo = cli::run_features(returns_path, cli::resolve_out_dir(out, "features"), min_months);
      std::cout << "features: " << fo.retained << " taxpayers retained, " << fo.excluded << " excluded\n";
      print_manifest_outputs(fo.manifest);
    } else if (*train_cmd) {
      const auto to = cli::run_train(train_features, train_flags.resolve(), cli::resolve_out_dir(out, "train"), resume);
      const auto& last = to.metrics.back();
      std::cout << "train: epoch " << last.epoch << " d_loss " << last.d_loss << " mean_cosine " << last.mean_cosine
                << '\n';
      print_manifest_outputs(to.manifest);
    } else if (*score_cmd) {
      const auto so = cli::run_score(checkpoint, score_features, cli::resolve_out_dir(out, "score"), labels);
      std::cout << "score: Q1 " << so.report.q1 << " Q3 " << so.report.q3 << " threshold " << so.report.threshold
                << " flagged " << so.report.flagged_count() << " of " << so.report.entries.size() << '\n';
      if (so.roc_auc) std::cout << "score: ROC-AUC " << *so.roc_auc << '\n';
      print_manifest_outputs(so.manifest);
    } else if (*cmp_cmd) {
      const auto co = cli::run_compare(cmp_features, cmp_flags.resolve(), seeds, cli::resolve_out_dir(out, "compare"));
      std::cout << "seed  cosine      euclidean\n";
      for (const auto& r : co.rows) {
        std::cout << r.seed << "  " << r.cosine_final << "  " << r.euclidean_final << (r.cosine_wins() ? "  *" : "")
                  << '\n';
      }
      std::cout << "cosine alignment wins " << co.cosine_wins << " of " << co.rows.size() << '\n';
      print_manifest_outputs(co.manifest);
    } else if (*pipe_cmd) {
      json synth_json = json::object();
      json train_json = json::object();
      std::size_t mm = features::kDefaultMinMonths;
      if (pipe_flags.config) {
        const json doc = read_json_file(*pipe_flags.config);
        if (doc.contains("synth")) synth_json = doc.at("synth");
        if (doc.contains("train")) train_json = doc.at("train");
        if (doc.contains("min_months")) mm = doc.at("min_months").get<std::size_t>();
      }
      if (pipe_synth_seed) synth_json["seed"] = *pipe_synth_seed;
      if (pipe_min_months) mm = *pipe_min_months;
      TrainFlags flags = pipe_flags;
      flags.config.reset();
      const auto po = cli::run_pipeline(synth::SynthConfig::from_json(synth_json), mm, flags.resolve(train_json),
                                        cli::resolve_out_dir(out, "pipeline"));
      std::cout << "pipeline: flagged " << po.score.report.flagged_count() << " of " << po.score.report.entries.size();
      if (po.score.roc_auc) std::cout << ", ROC-AUC " << *po.score.roc_auc;
      std::cout << '\n';
      print_manifest_outputs(po.manifest);
    } else if (*replay_cmd) {
      const auto original = cli::RunManifest::load(manifest_path);
      const auto rerun = cli::replay(original, cli::resolve_out_dir(out, "replay"));
      const auto diff = cli::differing_outputs(original, rerun);
      if (!diff.empty()) {
        for (const auto& d : diff) std::cerr << "replay: output '" << d << "' differs\n";
        return cli::kExitData;
      }
      std::cout << "replay: all " << rerun.outputs.size() << " outputs identical\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return cli::kExitUsage;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return cli::kExitNumeric;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return cli::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitData;
  }
  return cli::kExitOk;
}
