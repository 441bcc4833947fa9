#pragma once

// Bidirectional GAN over tabular rows: encoder E (data -> latent), generator
// G (latent -> data) and discriminator D on (data, latent) pairs. Training
// runs four phases per batch: D, G, E, then an optional joint E+G step that
// pulls G(E(X)) toward X under a cosine or Euclidean objective.

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "taxbigan/features.hpp"
#include "taxbigan/matrix.hpp"
#include "taxbigan/nn.hpp"

namespace taxbigan::bigan {

enum class Alignment { None, Euclidean, Cosine };

std::string_view alignment_tag(Alignment a);
Alignment alignment_from_tag(std::string_view tag);

struct TrainConfig {
  std::size_t latent_dim = 4;
  std::size_t epochs = 300;
  std::size_t batch_size = 64;
  double lr_discriminator = 2e-4;
  double lr_generator = 2e-4;
  double lr_encoder = 2e-4;
  double lr_alignment = 1e-3;
  double adam_beta1 = 0.5;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  Alignment alignment = Alignment::Cosine;
  std::uint64_t seed = 1;
  std::vector<std::size_t> encoder_hidden{32, 16};
  std::vector<std::size_t> generator_hidden{16, 32};
  std::vector<std::size_t> discriminator_hidden{32, 16};
  double leaky_slope = 0.2;

  // Throws InputError on invalid values.
  void validate() const;
  nlohmann::json to_json() const;
  // Keys present in `j` override `base`; unknown keys are rejected.
  static TrainConfig from_json(const nlohmann::json& j, const TrainConfig& base);
  static TrainConfig from_json(const nlohmann::json& j);
  std::string hash() const;
};

struct EpochMetrics {
  std::size_t epoch = 0;
  double d_loss = 0;
  double g_loss = 0;
  double e_loss = 0;
  double mean_cosine = 0;
  double mean_euclidean = 0;

  nlohmann::json to_json() const;
  friend bool operator==(const EpochMetrics&, const EpochMetrics&) = default;
};

struct BiGanModel {
  std::size_t data_dim = 0;
  std::size_t latent_dim = 0;
  nn::Network encoder;        // data_dim -> latent_dim
  nn::Network generator;      // latent_dim -> data_dim
  nn::Network discriminator;  // data_dim + latent_dim -> 1, sigmoid output
  nn::AdamState encoder_opt;
  nn::AdamState generator_opt;
  nn::AdamState discriminator_opt;
  // The joint alignment phase keeps its own moments for E and G.
  nn::AdamState encoder_align_opt;
  nn::AdamState generator_align_opt;
  std::size_t epochs_completed = 0;

  // Builds the three networks from config and initializes them from rng.
  static BiGanModel create(std::size_t data_dim, const TrainConfig& config, std::mt19937_64& rng);
};

// n x latent_dim draws from N(0,1).
Matrix sample_latent(std::size_t n, std::size_t latent_dim, std::mt19937_64& rng);

// Batch means of -(log DE + log(1-DG)), -log DG and -log(1-DE) with clamped
// probabilities. de/dg are column vectors of discriminator outputs.
double discriminator_loss(const Matrix& de, const Matrix& dg);
double generator_loss(const Matrix& dg);
double encoder_loss(const Matrix& de);

// Mean row-wise cosine similarity (Cosine) or Euclidean distance (Euclidean)
// between x and its reconstruction; nullopt for None.
std::optional<double> alignment_objective(const Matrix& x, const Matrix& reconstruction, Alignment variant);

struct AlignmentGradient {
  double objective = 0;  // as reported by alignment_objective
  Matrix grad;           // d(loss)/d(reconstruction), loss = -cosine or +distance
};
AlignmentGradient alignment_gradient(const Matrix& x, const Matrix& reconstruction, Alignment variant);

// One optimizer step of each phase. Each returns the phase loss (for the
// alignment step: the objective) measured before the update, and changes only
// the parameters of the networks it names.
double discriminator_step(BiGanModel& model, const Matrix& x, const Matrix& z);
double generator_step(BiGanModel& model, const Matrix& z);
double encoder_step(BiGanModel& model, const Matrix& x);
double alignment_step(BiGanModel& model, const Matrix& x, Alignment variant);

// G(E(x)) without touching any tape.
Matrix reconstruct(const BiGanModel& model, const Matrix& x);

struct ReconstructionStats {
  double mean_cosine = 0;
  double mean_euclidean = 0;
};
ReconstructionStats reconstruction_stats(const BiGanModel& model, const Matrix& data);

enum class Phase { Discriminator, Generator, Encoder, Alignment };
std::string_view phase_name(Phase p);

struct TrainHooks {
  std::function<void(Phase, std::size_t epoch, std::size_t batch, const BiGanModel&)> before_phase;
  std::function<void(Phase, std::size_t epoch, std::size_t batch, const BiGanModel&)> after_phase;
  std::function<void(const EpochMetrics&)> on_epoch;
};

struct TrainResult {
  BiGanModel model;
  std::vector<EpochMetrics> metrics;
};

// Fresh model, config.epochs epochs. Deterministic in (data, config).
TrainResult train(const Matrix& data, const TrainConfig& config, const TrainHooks& hooks = {});
// Continues an existing model for config.epochs more epochs. Per-epoch
// randomness derives from (seed, epoch index), so a resumed run matches an
// uninterrupted one.
TrainResult resume(BiGanModel model, const Matrix& data, const TrainConfig& config, const TrainHooks& hooks = {});

// Checkpoint container: model, optimizer state, the config that produced it
// and the normalization applied to its training features.
struct Checkpoint {
  BiGanModel model;
  TrainConfig config;
  std::optional<features::NormalizationStats> normalization;
};

inline constexpr std::string_view kCheckpointFormat = "taxbigan-checkpoint";
inline constexpr int kCheckpointVersion = 1;

nlohmann::json checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const nlohmann::json& j);
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace taxbigan::bigan
