#include "taxbigan/bigan.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "taxbigan/errors.hpp"
#include "taxbigan/hash.hpp"
#include "taxbigan/kernels.hpp"
#include "taxbigan/nn_json.hpp"

namespace taxbigan::bigan {

using nlohmann::json;

std::string_view alignment_tag(Alignment a) {
  switch (a) {
    case Alignment::None: return "none";
    case Alignment::Euclidean: return "euclidean";
    case Alignment::Cosine: return "cosine";
  }
  return "none";
}

Alignment alignment_from_tag(std::string_view tag) {
  if (tag == "none") return Alignment::None;
  if (tag == "euclidean") return Alignment::Euclidean;
  if (tag == "cosine") return Alignment::Cosine;
  throw ConfigError("unknown alignment '" + std::string(tag) + "' (expected none, euclidean or cosine)");
}

std::string_view phase_name(Phase p) {
  switch (p) {
    case Phase::Discriminator: return "discriminator";
    case Phase::Generator: return "generator";
    case Phase::Encoder: return "encoder";
    case Phase::Alignment: return "alignment";
  }
  return "?";
}

// ---------------------------------------------------------------- config

void TrainConfig::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(what) + " must be finite and > 0");
  };
  if (latent_dim < 1) throw ConfigError("latent_dim must be >= 1");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  positive(lr_discriminator, "lr_discriminator");
  positive(lr_generator, "lr_generator");
  positive(lr_encoder, "lr_encoder");
  positive(lr_alignment, "lr_alignment");
  positive(adam_epsilon, "adam_epsilon");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0)) throw ConfigError("adam_beta1 must lie in [0,1)");
  if (!(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) throw ConfigError("adam_beta2 must lie in [0,1)");
  if (!(leaky_slope > 0.0 && leaky_slope < 1.0)) throw ConfigError("leaky_slope must lie in (0,1)");
  for (const auto* widths : {&encoder_hidden, &generator_hidden, &discriminator_hidden}) {
    for (auto w : *widths) {
      if (w < 1) throw ConfigError("hidden layer widths must be >= 1");
    }
  }
}

json TrainConfig::to_json() const {
  return {{"latent_dim", latent_dim},
          {"epochs", epochs},
          {"batch_size", batch_size},
          {"lr_discriminator", lr_discriminator},
          {"lr_generator", lr_generator},
          {"lr_encoder", lr_encoder},
          {"lr_alignment", lr_alignment},
          {"adam_beta1", adam_beta1},
          {"adam_beta2", adam_beta2},
          {"adam_epsilon", adam_epsilon},
          {"alignment", std::string(alignment_tag(alignment))},
          {"seed", seed},
          {"encoder_hidden", encoder_hidden},
          {"generator_hidden", generator_hidden},
          {"discriminator_hidden", discriminator_hidden},
          {"leaky_slope", leaky_slope}};
}

TrainConfig TrainConfig::from_json(const json& j, const TrainConfig& base) {
  if (!j.is_object()) throw ConfigError("train config must be a JSON object");
  TrainConfig c = base;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "latent_dim") c.latent_dim = value.get<std::size_t>();
      else if (key == "epochs") c.epochs = value.get<std::size_t>();
      else if (key == "batch_size") c.batch_size = value.get<std::size_t>();
      else if (key == "lr_discriminator") c.lr_discriminator = value.get<double>();
      else if (key == "lr_generator") c.lr_generator = value.get<double>();
      else if (key == "lr_encoder") c.lr_encoder = value.get<double>();
      else if (key == "lr_alignment") c.lr_alignment = value.get<double>();
      else if (key == "adam_beta1") c.adam_beta1 = value.get<double>();
      else if (key == "adam_beta2") c.adam_beta2 = value.get<double>();
      else if (key == "adam_epsilon") c.adam_epsilon = value.get<double>();
      else if (key == "alignment") c.alignment = alignment_from_tag(value.get<std::string>());
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "encoder_hidden") c.encoder_hidden = value.get<std::vector<std::size_t>>();
      else if (key == "generator_hidden") c.generator_hidden = value.get<std::vector<std::size_t>>();
      else if (key == "discriminator_hidden") c.discriminator_hidden = value.get<std::vector<std::size_t>>();
      else if (key == "leaky_slope") c.leaky_slope = value.get<double>();
      else throw ConfigError("unknown train config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }
  c.validate();
  return c;
}

TrainConfig TrainConfig::from_json(const json& j) { return from_json(j, TrainConfig{}); }

std::string TrainConfig::hash() const { return hash_string(to_json().dump()); }

json EpochMetrics::to_json() const {
  return {{"epoch", epoch},         {"d_loss", d_loss},           {"g_loss", g_loss},
          {"e_loss", e_loss},       {"mean_cosine", mean_cosine}, {"mean_euclidean", mean_euclidean}};
}

// ---------------------------------------------------------------- model

BiGanModel BiGanModel::create(std::size_t data_dim, const TrainConfig& config, std::mt19937_64& rng) {
  config.validate();
  if (data_dim < 1) throw InputError("data_dim must be >= 1");
  const auto hidden = nn::Activation::leaky_relu(config.leaky_slope);
  BiGanModel m;
  m.data_dim = data_dim;
  m.latent_dim = config.latent_dim;
  m.encoder = nn::Network::mlp("encoder", data_dim, config.encoder_hidden, config.latent_dim, hidden,
                               nn::Activation::identity());
  m.generator = nn::Network::mlp("generator", config.latent_dim, config.generator_hidden, data_dim, hidden,
                                 nn::Activation::identity());
  m.discriminator = nn::Network::mlp("discriminator", data_dim + config.latent_dim, config.discriminator_hidden, 1,
                                     hidden, nn::Activation::sigmoid());
  m.encoder.init_glorot(rng);
  m.generator.init_glorot(rng);
  m.discriminator.init_glorot(rng);

  auto opts = [&](double lr) {
    return nn::AdamOptions{lr, config.adam_beta1, config.adam_beta2, config.adam_epsilon};
  };
  m.encoder_opt = nn::make_adam_state(m.encoder.parameters(), opts(config.lr_encoder));
  m.generator_opt = nn::make_adam_state(m.generator.parameters(), opts(config.lr_generator));
  m.discriminator_opt = nn::make_adam_state(m.discriminator.parameters(), opts(config.lr_discriminator));
  m.encoder_align_opt = nn::make_adam_state(m.encoder.parameters(), opts(config.lr_alignment));
  m.generator_align_opt = nn::make_adam_state(m.generator.parameters(), opts(config.lr_alignment));
  return m;
}

Matrix sample_latent(std::size_t n, std::size_t latent_dim, std::mt19937_64& rng) {
  if (n < 1 || latent_dim < 1) throw InputError("sample_latent: n and latent_dim must be >= 1");
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix z(n, latent_dim);
  for (double& v : z.flat()) v = dist(rng);
  return z;
}

// ---------------------------------------------------------------- losses

namespace {

void check_prob_column(const Matrix& p, const char* what) {
  if (p.cols() != 1 || p.rows() == 0) throw ShapeError(std::string(what) + ": expected a non-empty column, got " + p.shape_str());
}

double clamp_prob(double p) { return std::clamp(p, nn::kProbEpsilon, 1.0 - nn::kProbEpsilon); }

}  // namespace

double discriminator_loss(const Matrix& de, const Matrix& dg) {
  check_prob_column(de, "discriminator_loss");
  check_prob_column(dg, "discriminator_loss");
  if (de.rows() != dg.rows()) throw ShapeError("discriminator_loss: DE and DG batch sizes differ");
  const auto real = nn::bce_terms(de);
  const auto fake = nn::bce_terms(dg);
  double sum = 0.0;
  for (std::size_t i = 0; i < de.rows(); ++i) sum += -(real.log_p(i, 0) + fake.log_one_minus_p(i, 0));
  return sum / static_cast<double>(de.rows());
}

double generator_loss(const Matrix& dg) {
  check_prob_column(dg, "generator_loss");
  const auto t = nn::bce_terms(dg);
  double sum = 0.0;
  for (std::size_t i = 0; i < dg.rows(); ++i) sum += -t.log_p(i, 0);
  return sum / static_cast<double>(dg.rows());
}

double encoder_loss(const Matrix& de) {
  check_prob_column(de, "encoder_loss");
  const auto t = nn::bce_terms(de);
  double sum = 0.0;
  for (std::size_t i = 0; i < de.rows(); ++i) sum += -t.log_one_minus_p(i, 0);
  return sum / static_cast<double>(de.rows());
}

AlignmentGradient alignment_gradient(const Matrix& x, const Matrix& recon, Alignment variant) {
  if (x.rows() != recon.rows() || x.cols() != recon.cols() || x.rows() == 0) {
    throw ShapeError("alignment: x" + x.shape_str() + " vs reconstruction" + recon.shape_str());
  }
  if (variant == Alignment::None) throw InputError("alignment_gradient: variant is none");
  const std::size_t n = x.rows();
  const double inv_n = 1.0 / static_cast<double>(n);
  AlignmentGradient out{0.0, Matrix(n, x.cols())};
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = x.row(i);
    const auto ri = recon.row(i);
    auto gi = out.grad.row(i);
    if (variant == Alignment::Cosine) {
      double dot = 0.0, xx = 0.0, rr = 0.0;
      for (std::size_t k = 0; k < xi.size(); ++k) {
        dot += xi[k] * ri[k];
        xx += xi[k] * xi[k];
        rr += ri[k] * ri[k];
      }
      if (xx == 0.0 || rr == 0.0) continue;  // zero row: similarity 0, no gradient
      const double xn = std::sqrt(xx), rn = std::sqrt(rr);
      const double cos = dot / (xn * rn);
      total += std::clamp(cos, -1.0, 1.0);
      // d(-cos)/dr = -(x / (|x||r|) - cos * r / |r|^2)
      for (std::size_t k = 0; k < xi.size(); ++k) gi[k] = -inv_n * (xi[k] / (xn * rn) - cos * ri[k] / rr);
    } else {
      double ss = 0.0;
      for (std::size_t k = 0; k < xi.size(); ++k) ss += (ri[k] - xi[k]) * (ri[k] - xi[k]);
      const double dist = std::sqrt(ss);
      total += dist;
      if (dist == 0.0) continue;
      for (std::size_t k = 0; k < xi.size(); ++k) gi[k] = inv_n * (ri[k] - xi[k]) / dist;
    }
  }
  out.objective = total * inv_n;
  return out;
}

std::optional<double> alignment_objective(const Matrix& x, const Matrix& recon, Alignment variant) {
  if (variant == Alignment::None) return std::nullopt;
  if (x.rows() != recon.rows() || x.cols() != recon.cols() || x.rows() == 0) {
    throw ShapeError("alignment: x" + x.shape_str() + " vs reconstruction" + recon.shape_str());
  }
  std::vector<double> per_row(x.rows());
  if (variant == Alignment::Cosine) {
    kernels::parallel::row_cosine(x, recon, per_row);
  } else {
    kernels::parallel::row_euclidean(x, recon, per_row);
  }
  return std::accumulate(per_row.begin(), per_row.end(), 0.0) / static_cast<double>(per_row.size());
}

// ---------------------------------------------------------------- phases

namespace {

void check_data(const BiGanModel& m, const Matrix& x) {
  if (x.cols() != m.data_dim) {
    throw ShapeError("model expects " + std::to_string(m.data_dim) + " data columns, got " + std::to_string(x.cols()));
  }
  if (x.rows() == 0) throw InputError("empty batch");
}

void check_latent(const BiGanModel& m, const Matrix& z) {
  if (z.cols() != m.latent_dim) {
    throw ShapeError("model expects " + std::to_string(m.latent_dim) + " latent columns, got " +
                     std::to_string(z.cols()));
  }
  if (z.rows() == 0) throw InputError("empty latent batch");
}

}  // namespace

double discriminator_step(BiGanModel& m, const Matrix& x, const Matrix& z) {
  check_data(m, x);
  check_latent(m, z);
  if (x.rows() != z.rows()) throw ShapeError("discriminator_step: data and latent batches differ in size");
  const std::size_t b = x.rows();
  const Matrix real = hconcat(x, m.encoder.predict(x));
  const Matrix fake = hconcat(m.generator.predict(z), z);
  const Matrix p = m.discriminator.forward(vconcat(real, fake));
  const Matrix de = p.slice_rows(0, b);
  const Matrix dg = p.slice_rows(b, 2 * b);
  const double loss = discriminator_loss(de, dg);

  const double inv_b = 1.0 / static_cast<double>(b);
  Matrix grad(2 * b, 1);
  for (std::size_t i = 0; i < b; ++i) {
    grad(i, 0) = -inv_b / clamp_prob(de(i, 0));
    grad(b + i, 0) = inv_b / (1.0 - clamp_prob(dg(i, 0)));
  }
  m.discriminator.backward(grad);
  nn::adam_step(m.discriminator.parameters(), m.discriminator_opt);
  return loss;
}

double generator_step(BiGanModel& m, const Matrix& z) {
  check_latent(m, z);
  const std::size_t b = z.rows();
  const Matrix gz = m.generator.forward(z);
  const Matrix dg = m.discriminator.forward(hconcat(gz, z));
  const double loss = generator_loss(dg);

  const double inv_b = 1.0 / static_cast<double>(b);
  Matrix grad(b, 1);
  for (std::size_t i = 0; i < b; ++i) grad(i, 0) = -inv_b / clamp_prob(dg(i, 0));
  const Matrix d_input = m.discriminator.backward(grad);
  m.generator.backward(d_input.slice_cols(0, m.data_dim));
  nn::adam_step(m.generator.parameters(), m.generator_opt);
  return loss;
}

double encoder_step(BiGanModel& m, const Matrix& x) {
  check_data(m, x);
  const std::size_t b = x.rows();
  const Matrix ex = m.encoder.forward(x);
  const Matrix de = m.discriminator.forward(hconcat(x, ex));
  const double loss = encoder_loss(de);

  const double inv_b = 1.0 / static_cast<double>(b);
  Matrix grad(b, 1);
  for (std::size_t i = 0; i < b; ++i) grad(i, 0) = inv_b / (1.0 - clamp_prob(de(i, 0)));
  const Matrix d_input = m.discriminator.backward(grad);
  m.encoder.backward(d_input.slice_cols(m.data_dim, m.data_dim + m.latent_dim));
  nn::adam_step(m.encoder.parameters(), m.encoder_opt);
  return loss;
}

double alignment_step(BiGanModel& m, const Matrix& x, Alignment variant) {
  check_data(m, x);
  if (variant == Alignment::None) throw InputError("alignment_step: variant is none");
  const Matrix ex = m.encoder.forward(x);
  const Matrix recon = m.generator.forward(ex);
  const auto ag = alignment_gradient(x, recon, variant);
  const Matrix d_latent = m.generator.backward(ag.grad);
  m.encoder.backward(d_latent);
  nn::adam_step(m.generator.parameters(), m.generator_align_opt);
  nn::adam_step(m.encoder.parameters(), m.encoder_align_opt);
  return ag.objective;
}

Matrix reconstruct(const BiGanModel& m, const Matrix& x) {
  check_data(m, x);
  return m.generator.predict(m.encoder.predict(x));
}

ReconstructionStats reconstruction_stats(const BiGanModel& m, const Matrix& data) {
  const Matrix recon = reconstruct(m, data);
  std::vector<double> cos(data.rows()), dist(data.rows());
  kernels::parallel::row_cosine(data, recon, cos);
  kernels::parallel::row_euclidean(data, recon, dist);
  const double n = static_cast<double>(data.rows());
  return {std::accumulate(cos.begin(), cos.end(), 0.0) / n, std::accumulate(dist.begin(), dist.end(), 0.0) / n};
}

// ---------------------------------------------------------------- training

namespace {

constexpr std::uint64_t kInitStream = 0x1717;
constexpr std::uint64_t kEpochStream = 0xe90c;

std::mt19937_64 derive_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

void check_finite(double v, Phase phase, std::size_t epoch, std::size_t batch) {
  if (!std::isfinite(v)) {
    throw NumericError("non-finite " + std::string(phase_name(phase)) + " loss at epoch " + std::to_string(epoch) +
                       ", batch " + std::to_string(batch));
  }
}

void sync_learning_rates(BiGanModel& m, const TrainConfig& c) {
  m.discriminator_opt.options.learning_rate = c.lr_discriminator;
  m.generator_opt.options.learning_rate = c.lr_generator;
  m.encoder_opt.options.learning_rate = c.lr_encoder;
  m.encoder_align_opt.options.learning_rate = c.lr_alignment;
  m.generator_align_opt.options.learning_rate = c.lr_alignment;
}

}  // namespace

TrainResult resume(BiGanModel model, const Matrix& data, const TrainConfig& config, const TrainHooks& hooks) {
  config.validate();
  if (data.rows() == 0) throw InputError("train: empty dataset");
  if (data.rows() < config.batch_size) {
    throw InputError("train: dataset has " + std::to_string(data.rows()) + " rows, fewer than batch_size " +
                     std::to_string(config.batch_size));
  }
  if (!data.all_finite()) throw InputError("train: dataset contains non-finite values");
  if (data.cols() != model.data_dim) {
    throw ShapeError("train: model expects " + std::to_string(model.data_dim) + " feature columns, data has " +
                     std::to_string(data.cols()));
  }
  if (config.latent_dim != model.latent_dim) {
    throw ShapeError("train: config latent_dim " + std::to_string(config.latent_dim) + " != model latent_dim " +
                     std::to_string(model.latent_dim));
  }
  sync_learning_rates(model, config);

  const std::size_t n = data.rows();
  const std::size_t bs = config.batch_size;
  std::vector<std::size_t> order(n);
  TrainResult result;

  auto run_phase = [&](Phase phase, std::size_t epoch, std::size_t batch, auto&& fn) {
    if (hooks.before_phase) hooks.before_phase(phase, epoch, batch, model);
    double v = 0.0;
    try {
      v = fn();
    } catch (const DomainError& e) {
      // Only a NaN probability reaches the loss clamp's domain check.
      throw NumericError("non-finite " + std::string(phase_name(phase)) + " output at epoch " + std::to_string(epoch) +
                         ", batch " + std::to_string(batch) + ": " + e.what());
    }
    check_finite(v, phase, epoch, batch);
    if (hooks.after_phase) hooks.after_phase(phase, epoch, batch, model);
    return v;
  };

  for (std::size_t e = 0; e < config.epochs; ++e) {
    const std::size_t epoch = model.epochs_completed + 1;
    auto rng = derive_rng(config.seed, kEpochStream, epoch);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);

    double d_sum = 0, g_sum = 0, e_sum = 0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += bs, ++batches) {
      const std::size_t end = std::min(n, start + bs);
      const Matrix x = data.gather_rows(std::span<const std::size_t>(order).subspan(start, end - start));
      const std::size_t b = x.rows();

      const Matrix z_d = sample_latent(b, model.latent_dim, rng);
      d_sum += run_phase(Phase::Discriminator, epoch, batches, [&] { return discriminator_step(model, x, z_d); });
      const Matrix z_g = sample_latent(b, model.latent_dim, rng);
      g_sum += run_phase(Phase::Generator, epoch, batches, [&] { return generator_step(model, z_g); });
      e_sum += run_phase(Phase::Encoder, epoch, batches, [&] { return encoder_step(model, x); });
      if (config.alignment != Alignment::None) {
        run_phase(Phase::Alignment, epoch, batches, [&] { return alignment_step(model, x, config.alignment); });
      }
    }

    const auto rs = reconstruction_stats(model, data);
    EpochMetrics m;
    m.epoch = epoch;
    m.d_loss = d_sum / static_cast<double>(batches);
    m.g_loss = g_sum / static_cast<double>(batches);
    m.e_loss = e_sum / static_cast<double>(batches);
    m.mean_cosine = rs.mean_cosine;
    m.mean_euclidean = rs.mean_euclidean;
    if (!std::isfinite(m.mean_cosine) || !std::isfinite(m.mean_euclidean)) {
      throw NumericError("non-finite reconstruction metric at epoch " + std::to_string(epoch));
    }
    model.epochs_completed = epoch;
    if (hooks.on_epoch) hooks.on_epoch(m);
    result.metrics.push_back(m);
  }
  result.model = std::move(model);
  return result;
}

TrainResult train(const Matrix& data, const TrainConfig& config, const TrainHooks& hooks) {
  config.validate();
  if (data.rows() == 0) throw InputError("train: empty dataset");
  auto rng = derive_rng(config.seed, kInitStream, 0);
  return resume(BiGanModel::create(data.cols(), config, rng), data, config, hooks);
}

// ---------------------------------------------------------------- checkpoint

json checkpoint_to_json(const Checkpoint& c) {
  const auto& m = c.model;
  json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["config"] = c.config.to_json();
  j["config_hash"] = c.config.hash();
  j["data_dim"] = m.data_dim;
  j["latent_dim"] = m.latent_dim;
  j["epochs_completed"] = m.epochs_completed;
  j["normalization"] = c.normalization ? c.normalization->to_json() : json(nullptr);
  j["networks"] = {{"encoder", nn::network_to_json(m.encoder)},
                   {"generator", nn::network_to_json(m.generator)},
                   {"discriminator", nn::network_to_json(m.discriminator)}};
  j["optimizers"] = {{"encoder", nn::adam_to_json(m.encoder_opt)},
                     {"generator", nn::adam_to_json(m.generator_opt)},
                     {"discriminator", nn::adam_to_json(m.discriminator_opt)},
                     {"encoder_alignment", nn::adam_to_json(m.encoder_align_opt)},
                     {"generator_alignment", nn::adam_to_json(m.generator_align_opt)}};
  return j;
}

Checkpoint checkpoint_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != kCheckpointFormat) throw InputError("not a taxbigan checkpoint");
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) throw InputError("unsupported checkpoint version " + std::to_string(version));
    Checkpoint c;
    c.config = TrainConfig::from_json(j.at("config"));
    if (j.contains("config_hash") && j.at("config_hash").get<std::string>() != c.config.hash()) {
      throw InputError("checkpoint config_hash does not match its config");
    }
    auto& m = c.model;
    m.data_dim = j.at("data_dim").get<std::size_t>();
    m.latent_dim = j.at("latent_dim").get<std::size_t>();
    m.epochs_completed = j.at("epochs_completed").get<std::size_t>();
    const auto& nets = j.at("networks");
    m.encoder = nn::network_from_json(nets.at("encoder"));
    m.generator = nn::network_from_json(nets.at("generator"));
    m.discriminator = nn::network_from_json(nets.at("discriminator"));
    const auto& opts = j.at("optimizers");
    m.encoder_opt = nn::adam_from_json(opts.at("encoder"));
    m.generator_opt = nn::adam_from_json(opts.at("generator"));
    m.discriminator_opt = nn::adam_from_json(opts.at("discriminator"));
    m.encoder_align_opt = nn::adam_from_json(opts.at("encoder_alignment"));
    m.generator_align_opt = nn::adam_from_json(opts.at("generator_alignment"));
    if (!j.at("normalization").is_null()) c.normalization = features::NormalizationStats::from_json(j.at("normalization"));

    if (m.encoder.input_dim() != m.data_dim || m.encoder.output_dim() != m.latent_dim ||
        m.generator.input_dim() != m.latent_dim || m.generator.output_dim() != m.data_dim ||
        m.discriminator.input_dim() != m.data_dim + m.latent_dim || m.discriminator.output_dim() != 1) {
      throw InputError("checkpoint network dimensions are inconsistent");
    }
    if (m.discriminator.layers().back().activation.kind != nn::ActivationKind::Sigmoid) {
      throw InputError("checkpoint discriminator must end in a sigmoid");
    }
    auto check_opt = [](nn::Network& net, const nn::AdamState& s, const char* what) {
      const auto params = net.parameters();
      bool ok = s.first_moment.size() == params.size() && s.second_moment.size() == params.size();
      for (std::size_t b = 0; ok && b < params.size(); ++b) {
        ok = s.first_moment[b].size() == params[b].value.size() && s.second_moment[b].size() == params[b].value.size();
      }
      if (!ok) throw InputError(std::string("checkpoint optimizer state for ") + what + " does not match its network");
    };
    check_opt(m.encoder, m.encoder_opt, "encoder");
    check_opt(m.generator, m.generator_opt, "generator");
    check_opt(m.discriminator, m.discriminator_opt, "discriminator");
    check_opt(m.encoder, m.encoder_align_opt, "encoder alignment");
    check_opt(m.generator, m.generator_align_opt, "generator alignment");
    return c;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write checkpoint '" + path + "'");
  out << checkpoint_to_json(ckpt).dump(1) << '\n';
  if (!out) throw InputError("failed writing checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open checkpoint '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InputError("checkpoint '" + path + "' is not valid JSON: " + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace taxbigan::bigan
