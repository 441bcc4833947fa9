#pragma once

// Minimal dense-network substrate: fully connected layers with a recorded
// forward pass and hand-written reverse-mode gradients, Adam, and the clamped
// log terms the adversarial losses are built from.

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "taxbigan/matrix.hpp"

namespace taxbigan::nn {

enum class ActivationKind { LeakyReLU, Sigmoid, Tanh, Identity };

struct Activation {
  ActivationKind kind = ActivationKind::Identity;
  double slope = 0.0;  // LeakyReLU only, in (0, 1)

  static Activation leaky_relu(double slope);
  static Activation sigmoid() { return {ActivationKind::Sigmoid, 0.0}; }
  static Activation tanh() { return {ActivationKind::Tanh, 0.0}; }
  static Activation identity() { return {ActivationKind::Identity, 0.0}; }

  friend bool operator==(const Activation&, const Activation&) = default;
};

std::string_view activation_tag(ActivationKind kind);
ActivationKind activation_from_tag(std::string_view tag);

// Elementwise activation and its derivative. The derivative takes both the
// pre-activation z and the activation a = f(z) so each kind can use the
// cheaper one.
double activate(const Activation& act, double z);
double activate_grad(const Activation& act, double z, double a);

struct DenseLayer {
  DenseLayer(std::size_t in, std::size_t out, Activation act);

  std::size_t in_dim() const { return weights.cols(); }
  std::size_t out_dim() const { return weights.rows(); }
  std::size_t parameter_count() const { return weights.size() + bias.size(); }

  Matrix weights;  // out x in
  std::vector<double> bias;
  Activation activation;

  Matrix grad_weights;
  std::vector<double> grad_bias;
};

// View of one parameter block and its gradient buffer.
struct ParamRef {
  std::span<double> value;
  std::span<const double> grad;
};

// Activations recorded by Network::forward for the following backward pass.
struct GradientTape {
  std::vector<Matrix> inputs;  // per layer
  std::vector<Matrix> pre;     // per layer, before activation
  std::vector<Matrix> post;    // per layer, after activation
  bool recorded = false;
};

class Network {
 public:
  Network() = default;
  Network(std::string name, std::vector<DenseLayer> layers);

  // Fully connected stack in -> hidden... -> out.
  static Network mlp(std::string name, std::size_t in, std::span<const std::size_t> hidden, std::size_t out,
                     Activation hidden_act, Activation out_act);

  // Glorot-uniform weights, zero biases.
  void init_glorot(std::mt19937_64& rng);

  // Evaluates the stack and records the tape for backward().
  Matrix forward(const Matrix& input);
  // Same arithmetic as forward() without touching the tape; safe to call
  // concurrently.
  Matrix predict(const Matrix& input) const;
  // Zeroes, then fills, every gradient buffer from dL/d(output) and returns
  // dL/d(input). Requires a recorded forward pass over the same batch.
  Matrix backward(const Matrix& output_grad);

  void zero_grad();
  std::vector<ParamRef> parameters();
  std::size_t parameter_count() const;

  const std::string& name() const { return name_; }
  std::size_t input_dim() const;
  std::size_t output_dim() const;
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }
  const GradientTape& tape() const { return tape_; }

  // Copies of every weight and bias, flattened; used for snapshots.
  std::vector<double> flat_parameters() const;
  std::vector<double> flat_gradients() const;

 private:
  void check_input(const Matrix& input) const;

  std::string name_;
  std::vector<DenseLayer> layers_;
  GradientTape tape_;
};

struct AdamOptions {
  double learning_rate = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamOptions options;
  std::uint64_t step = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
};

AdamState make_adam_state(std::span<const ParamRef> params, const AdamOptions& options);
// One bias-corrected Adam update over every block; increments state.step.
void adam_step(std::span<const ParamRef> params, AdamState& state);

// Probabilities are clamped to [kProbEpsilon, 1 - kProbEpsilon] before logs.
inline constexpr double kProbEpsilon = 1e-7;
inline constexpr double kProbTolerance = 1e-9;

struct BceTerms {
  Matrix log_p;
  Matrix log_one_minus_p;
};

BceTerms bce_terms(const Matrix& p);
// Clamped log(p) for a single value, with the same domain check.
double clamped_log(double p);
double clamped_log1m(double p);

}  // namespace taxbigan::nn
