#include "taxbigan/commands.hpp"

#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>

#include "taxbigan/errors.hpp"
#include "taxbigan/features.hpp"
#include "taxbigan/hash.hpp"

namespace taxbigan::cli {

namespace fs = std::filesystem;
using nlohmann::json;

const Artifact* RunManifest::output(const std::string& name) const {
  for (const auto& a : outputs) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

namespace {

json artifacts_to_json(const std::vector<Artifact>& v) {
  json j = json::array();
  for (const auto& a : v) j.push_back({{"name", a.name}, {"path", a.path}, {"hash", a.hash}});
  return j;
}

std::vector<Artifact> artifacts_from_json(const json& j) {
  std::vector<Artifact> v;
  for (const auto& a : j) v.push_back({a.at("name"), a.at("path"), a.at("hash")});
  return v;
}

}  // namespace

json RunManifest::to_json() const {
  return {{"tool", "taxbigan"},
          {"manifest_version", 1},
          {"command", command},
          {"seed", seed},
          {"config", config},
          {"inputs", artifacts_to_json(inputs)},
          {"outputs", artifacts_to_json(outputs)}};
}

RunManifest RunManifest::from_json(const json& j) {
  try {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config = j.at("config");
    m.inputs = artifacts_from_json(j.at("inputs"));
    m.outputs = artifacts_from_json(j.at("outputs"));
    return m;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed manifest: ") + e.what());
  }
}

RunManifest RunManifest::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open manifest '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InputError("manifest '" + path + "' is not valid JSON: " + e.what());
  }
  return from_json(j);
}

fs::path resolve_out_dir(const std::optional<std::string>& out, const std::string& command) {
  if (out) return fs::path(*out);
  if (const char* root = std::getenv("BIGAN_OUT_DIR"); root != nullptr && *root != '\0') return fs::path(root) / command;
  return fs::path("bigan_out") / command;
}

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InputError("cannot write '" + p.string() + "'");
  return out;
}

Artifact artifact(const std::string& name, const fs::path& p) { return {name, p.string(), hash_file(p.string())}; }

void write_json(const fs::path& p, const json& j) { open_out(p) << j.dump(2) << '\n'; }

void write_manifest(const fs::path& dir, const RunManifest& m) { write_json(dir / kManifestFile, m.to_json()); }

}  // namespace

RunManifest run_synth(const synth::SynthConfig& config, const fs::path& out_dir) {
  ensure_dir(out_dir);
  const auto ds = synth::generate(config);
  const fs::path returns = out_dir / "returns.csv";
  const fs::path labels = out_dir / "labels.csv";
  {
    auto out = open_out(returns);
    features::write_returns(out, ds.returns);
  }
  {
    auto out = open_out(labels);
    synth::write_labels(out, ds.labels);
  }
  RunManifest m;
  m.command = "synth";
  m.config = config.to_json();
  m.seed = config.seed;
  m.outputs = {artifact("returns", returns), artifact("labels", labels)};
  write_manifest(out_dir, m);
  return m;
}

FeaturesOutcome run_features(const std::string& returns_path, const fs::path& out_dir, std::size_t min_months) {
  if (min_months < 2) throw InputError("min_months must be >= 2");
  const auto records = features::load_returns(returns_path);
  const auto series = features::group_series(records);
  const auto derived = features::derive_all(series, min_months);

  ensure_dir(out_dir);
  const fs::path feat = out_dir / "features.csv";
  const fs::path stats = out_dir / "normalization.json";
  const fs::path excluded = out_dir / "excluded.csv";
  {
    auto out = open_out(feat);
    features::write_features(out, derived.features);
  }
  {
    auto out = open_out(excluded);
    out << "taxpayer_id,months_used\n";
    for (const auto& e : derived.excluded) out << e.taxpayer_id << ',' << e.months_used << '\n';
  }
  if (derived.features.empty()) {
    std::cerr << "warning: every taxpayer has fewer than " << min_months
              << " months; feature file is empty, see " << excluded.string() << '\n';
    write_json(stats, json(nullptr));
  } else {
    write_json(stats, features::fit_normalization(derived.features).to_json());
  }

  FeaturesOutcome fo;
  fo.retained = derived.features.size();
  fo.excluded = derived.excluded.size();
  auto& m = fo.manifest;
  m.command = "features";
  m.config = {{"min_months", min_months}};
  m.inputs = {artifact("returns", returns_path)};
  m.outputs = {artifact("features", feat), artifact("normalization", stats), artifact("excluded", excluded)};
  write_manifest(out_dir, m);
  return fo;
}

TrainOutcome run_train(const std::string& features_path, const bigan::TrainConfig& config, const fs::path& out_dir,
                       const std::optional<std::string>& resume_from) {
  config.validate();
  const auto rows = features::load_features(features_path);
  if (rows.empty()) throw InputError(features_path + ": no feature rows to train on");

  std::optional<bigan::Checkpoint> prior;
  features::NormalizationStats stats;
  if (resume_from) {
    prior = bigan::load_checkpoint(*resume_from);
    if (prior->model.data_dim != features::kFeatureDim) {
      throw ShapeError("checkpoint '" + *resume_from + "' was trained on " + std::to_string(prior->model.data_dim) +
                       " feature dimensions; " + features_path + " has " + std::to_string(features::kFeatureDim));
    }
    if (prior->model.latent_dim != config.latent_dim) {
      throw ShapeError("checkpoint latent_dim " + std::to_string(prior->model.latent_dim) +
                       " does not match configured latent_dim " + std::to_string(config.latent_dim));
    }
    stats = prior->normalization ? *prior->normalization : features::fit_normalization(rows);
  } else {
    stats = features::fit_normalization(rows);
  }
  const auto data = features::normalize_with(rows, stats);

  ensure_dir(out_dir);
  const fs::path metrics_path = out_dir / "metrics.jsonl";
  const fs::path ckpt_path = out_dir / "checkpoint.json";
  auto metrics_out = open_out(metrics_path);
  bigan::TrainHooks hooks;
  hooks.on_epoch = [&](const bigan::EpochMetrics& em) { metrics_out << em.to_json().dump() << '\n' << std::flush; };

  auto result = prior ? bigan::resume(std::move(prior->model), data.values, config, hooks)
                      : bigan::train(data.values, config, hooks);
  metrics_out.close();
  bigan::save_checkpoint(ckpt_path.string(), {result.model, config, stats});

  TrainOutcome to;
  to.metrics = std::move(result.metrics);
  auto& m = to.manifest;
  m.command = "train";
  m.config = config.to_json();
  m.seed = config.seed;
  m.inputs = {artifact("features", features_path)};
  if (resume_from) m.inputs.push_back(artifact("resume", *resume_from));
  m.outputs = {artifact("checkpoint", ckpt_path), artifact("metrics", metrics_path)};
  write_manifest(out_dir, m);
  return to;
}

ScoreOutcome run_score(const std::string& checkpoint_path, const std::string& features_path, const fs::path& out_dir,
                       const std::optional<std::string>& labels_path) {
  const auto ckpt = bigan::load_checkpoint(checkpoint_path);
  const auto rows = features::load_features(features_path);
  if (rows.empty()) throw InputError(features_path + ": no feature rows to score");
  if (ckpt.model.data_dim != features::kFeatureDim) {
    throw ShapeError("checkpoint expects " + std::to_string(ckpt.model.data_dim) + " feature dimensions, got " +
                     std::to_string(features::kFeatureDim));
  }
  const auto data = ckpt.normalization ? features::normalize_with(rows, *ckpt.normalization) : features::normalize(rows);
  const auto scores = scoring::score(ckpt.model, data.values);

  ScoreOutcome so;
  so.report = scoring::iqr_gate(data.ids, scores);
  json summary = so.report.summary_json();

  if (labels_path) {
    std::map<std::string, bool> label_of;
    for (const auto& l : synth::load_labels(*labels_path)) label_of[l.taxpayer_id] = l.is_fraud;
    std::vector<double> anomaly(scores.size());
    std::vector<bool> positive(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const auto it = label_of.find(data.ids[i]);
      if (it == label_of.end()) throw InputError("labels file has no entry for taxpayer " + data.ids[i]);
      anomaly[i] = 1.0 - scores[i];
      positive[i] = it->second;
    }
    so.roc_auc = scoring::roc_auc(anomaly, positive);
    summary["roc_auc"] = *so.roc_auc;
    if (!so.report.flagged.empty()) {
      std::size_t hits = 0;
      for (const auto& id : so.report.flagged) hits += label_of.at(id) ? 1 : 0;
      so.flagged_precision = static_cast<double>(hits) / static_cast<double>(so.report.flagged.size());
      summary["flagged_precision"] = *so.flagged_precision;
    } else {
      summary["flagged_precision"] = nullptr;
    }
  }

  ensure_dir(out_dir);
  const fs::path report_path = out_dir / "report.csv";
  const fs::path summary_path = out_dir / "summary.json";
  {
    auto out = open_out(report_path);
    scoring::write_report(out, so.report);
  }
  write_json(summary_path, summary);

  auto& m = so.manifest;
  m.command = "score";
  m.config = json::object();
  m.seed = ckpt.config.seed;
  m.inputs = {artifact("checkpoint", checkpoint_path), artifact("features", features_path)};
  if (labels_path) m.inputs.push_back(artifact("labels", *labels_path));
  m.outputs = {artifact("report", report_path), artifact("summary", summary_path)};
  write_manifest(out_dir, m);
  return so;
}

CompareOutcome run_compare(const std::string& features_path, const bigan::TrainConfig& base,
                           const std::vector<std::uint64_t>& seeds, const fs::path& out_dir) {
  base.validate();
  if (seeds.empty()) throw InputError("compare: need at least one seed");
  const auto rows = features::load_features(features_path);
  if (rows.empty()) throw InputError(features_path + ": no feature rows");
  const auto data = features::normalize(rows);

  const std::size_t jobs = seeds.size() * 2;
  std::vector<std::vector<bigan::EpochMetrics>> runs(jobs);
  std::vector<std::exception_ptr> errors(jobs);
  const auto n = static_cast<std::ptrdiff_t>(jobs);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t jj = 0; jj < n; ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    bigan::TrainConfig c = base;
    c.seed = seeds[j / 2];
    c.alignment = j % 2 == 0 ? bigan::Alignment::Cosine : bigan::Alignment::Euclidean;
    try {
      runs[j] = bigan::train(data.values, c).metrics;
    } catch (...) {
      errors[j] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  CompareOutcome co;
  ensure_dir(out_dir);
  const fs::path table = out_dir / "comparison.csv";
  const fs::path series = out_dir / "series.csv";
  {
    auto out = open_out(table);
    out << "seed,cosine_final_mean_cosine,euclidean_final_mean_cosine,cosine_wins\n";
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      CompareRow row{seeds[s], runs[2 * s].back().mean_cosine, runs[2 * s + 1].back().mean_cosine};
      co.cosine_wins += row.cosine_wins() ? 1 : 0;
      out << row.seed << ',' << features::format_double(row.cosine_final) << ','
          << features::format_double(row.euclidean_final) << ',' << (row.cosine_wins() ? "true" : "false") << '\n';
      co.rows.push_back(row);
    }
  }
  {
    auto out = open_out(series);
    out << "seed,alignment,epoch,mean_cosine,mean_euclidean,d_loss\n";
    for (std::size_t j = 0; j < jobs; ++j) {
      for (const auto& em : runs[j]) {
        out << seeds[j / 2] << ',' << (j % 2 == 0 ? "cosine" : "euclidean") << ',' << em.epoch << ','
            << features::format_double(em.mean_cosine) << ',' << features::format_double(em.mean_euclidean) << ','
            << features::format_double(em.d_loss) << '\n';
      }
    }
  }
  auto& m = co.manifest;
  m.command = "compare";
  m.config = {{"train", base.to_json()}, {"seeds", seeds}};
  m.seed = seeds.front();
  m.inputs = {artifact("features", features_path)};
  m.outputs = {artifact("comparison", table), artifact("series", series)};
  write_manifest(out_dir, m);
  return co;
}

PipelineOutcome run_pipeline(const synth::SynthConfig& synth_config, std::size_t min_months,
                             const bigan::TrainConfig& train_config, const fs::path& out_dir) {
  const auto sm = run_synth(synth_config, out_dir / "synth");
  const auto fm = run_features(sm.output("returns")->path, out_dir / "features", min_months).manifest;
  const std::string features_path = fm.output("features")->path;
  const auto tm = run_train(features_path, train_config, out_dir / "train").manifest;
  auto so = run_score(tm.output("checkpoint")->path, features_path, out_dir / "score", sm.output("labels")->path);

  PipelineOutcome po;
  auto& m = po.manifest;
  m.command = "pipeline";
  m.config = {{"synth", synth_config.to_json()}, {"min_months", min_months}, {"train", train_config.to_json()}};
  m.seed = train_config.seed;
  for (const RunManifest* stage : std::initializer_list<const RunManifest*>{&sm, &fm, &tm, &so.manifest}) {
    for (const auto& a : stage->outputs) m.outputs.push_back({stage->command + "/" + a.name, a.path, a.hash});
  }
  write_manifest(out_dir, m);
  po.score = std::move(so);
  return po;
}

namespace {

const Artifact& input(const RunManifest& m, const std::string& name) {
  for (const auto& a : m.inputs) {
    if (a.name == name) {
      if (hash_file(a.path) != a.hash) throw InputError("input '" + a.path + "' changed since the manifest was written");
      return a;
    }
  }
  throw InputError("manifest for '" + m.command + "' lacks input '" + name + "'");
}

std::optional<std::string> optional_input(const RunManifest& m, const std::string& name) {
  for (const auto& a : m.inputs) {
    if (a.name == name) return input(m, name).path;
  }
  return std::nullopt;
}

}  // namespace

RunManifest replay(const RunManifest& m, const fs::path& out_dir) {
  try {
    if (m.command == "synth") return run_synth(synth::SynthConfig::from_json(m.config), out_dir);
    if (m.command == "features") {
      return run_features(input(m, "returns").path, out_dir, m.config.at("min_months").get<std::size_t>()).manifest;
    }
    if (m.command == "train") {
      return run_train(input(m, "features").path, bigan::TrainConfig::from_json(m.config), out_dir,
                       optional_input(m, "resume"))
          .manifest;
    }
    if (m.command == "score") {
      return run_score(input(m, "checkpoint").path, input(m, "features").path, out_dir, optional_input(m, "labels"))
          .manifest;
    }
    if (m.command == "compare") {
      return run_compare(input(m, "features").path, bigan::TrainConfig::from_json(m.config.at("train")),
                         m.config.at("seeds").get<std::vector<std::uint64_t>>(), out_dir)
          .manifest;
    }
    if (m.command == "pipeline") {
      return run_pipeline(synth::SynthConfig::from_json(m.config.at("synth")),
                          m.config.at("min_months").get<std::size_t>(),
                          bigan::TrainConfig::from_json(m.config.at("train")), out_dir)
          .manifest;
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("manifest config: ") + e.what());
  }
  throw InputError("manifest has unknown command '" + m.command + "'");
}

std::vector<std::string> differing_outputs(const RunManifest& a, const RunManifest& b) {
  std::vector<std::string> diff;
  for (const auto& out : a.outputs) {
    const auto* other = b.output(out.name);
    if (other == nullptr || other->hash != out.hash) diff.push_back(out.name);
  }
  for (const auto& out : b.outputs) {
    if (a.output(out.name) == nullptr) diff.push_back(out.name);
  }
  return diff;
}

}  // namespace taxbigan::cli
