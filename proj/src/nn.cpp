#include "taxbigan/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "taxbigan/errors.hpp"
#include "taxbigan/kernels.hpp"

namespace taxbigan::nn {

Activation Activation::leaky_relu(double slope) {
  if (!(slope > 0.0 && slope < 1.0)) throw DomainError("LeakyReLU slope must lie in (0,1)");
  return {ActivationKind::LeakyReLU, slope};
}

std::string_view activation_tag(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::LeakyReLU: return "leaky_relu";
    case ActivationKind::Sigmoid: return "sigmoid";
    case ActivationKind::Tanh: return "tanh";
    case ActivationKind::Identity: return "identity";
  }
  return "identity";
}

ActivationKind activation_from_tag(std::string_view tag) {
  if (tag == "leaky_relu") return ActivationKind::LeakyReLU;
  if (tag == "sigmoid") return ActivationKind::Sigmoid;
  if (tag == "tanh") return ActivationKind::Tanh;
  if (tag == "identity") return ActivationKind::Identity;
  throw InputError("unknown activation tag '" + std::string(tag) + "'");
}

namespace {

// Keeps sigmoid strictly inside (0,1) even where 1/(1+e^-z) rounds to 0 or 1.
constexpr double kSigmoidLo = std::numeric_limits<double>::min();
const double kSigmoidHi = std::nextafter(1.0, 0.0);

double sigmoid(double z) {
  const double s = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
  return std::clamp(s, kSigmoidLo, kSigmoidHi);
}

}  // namespace

double activate(const Activation& act, double z) {
  switch (act.kind) {
    case ActivationKind::LeakyReLU: return z > 0.0 ? z : act.slope * z;
    case ActivationKind::Sigmoid: return sigmoid(z);
    case ActivationKind::Tanh: return std::tanh(z);
    case ActivationKind::Identity: return z;
  }
  return z;
}

double activate_grad(const Activation& act, double z, double a) {
  switch (act.kind) {
    case ActivationKind::LeakyReLU: return z > 0.0 ? 1.0 : act.slope;
    case ActivationKind::Sigmoid: return a * (1.0 - a);
    case ActivationKind::Tanh: return 1.0 - a * a;
    case ActivationKind::Identity: return 1.0;
  }
  return 1.0;
}

DenseLayer::DenseLayer(std::size_t in, std::size_t out, Activation act)
    : weights(out, in), bias(out, 0.0), activation(act), grad_weights(out, in), grad_bias(out, 0.0) {
  if (in == 0 || out == 0) throw ShapeError("DenseLayer: zero dimension");
  if (act.kind == ActivationKind::LeakyReLU && !(act.slope > 0.0 && act.slope < 1.0)) {
    throw DomainError("LeakyReLU slope must lie in (0,1)");
  }
}

Network::Network(std::string name, std::vector<DenseLayer> layers) : name_(std::move(name)), layers_(std::move(layers)) {
  if (layers_.empty()) throw ShapeError("Network '" + name_ + "': no layers");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (layer.bias.size() != layer.out_dim() || layer.grad_weights.rows() != layer.out_dim() ||
        layer.grad_weights.cols() != layer.in_dim() || layer.grad_bias.size() != layer.out_dim()) {
      throw ShapeError("Network '" + name_ + "' layer " + std::to_string(l) + ": inconsistent parameter shapes");
    }
    if (l > 0 && layers_[l - 1].out_dim() != layer.in_dim()) {
      throw ShapeError("Network '" + name_ + "' layer " + std::to_string(l) + ": expects " +
                       std::to_string(layer.in_dim()) + " inputs, previous layer emits " +
                       std::to_string(layers_[l - 1].out_dim()));
    }
  }
}

Network Network::mlp(std::string name, std::size_t in, std::span<const std::size_t> hidden, std::size_t out,
                     Activation hidden_act, Activation out_act) {
  std::vector<DenseLayer> layers;
  std::size_t prev = in;
  for (std::size_t width : hidden) {
    layers.emplace_back(prev, width, hidden_act);
    prev = width;
  }
  layers.emplace_back(prev, out, out_act);
  return Network(std::move(name), std::move(layers));
}

void Network::init_glorot(std::mt19937_64& rng) {
  for (auto& layer : layers_) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.in_dim() + layer.out_dim()));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& w : layer.weights.flat()) w = dist(rng);
    std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
  }
  zero_grad();
  tape_ = {};
}

std::size_t Network::input_dim() const { return layers_.empty() ? 0 : layers_.front().in_dim(); }
std::size_t Network::output_dim() const { return layers_.empty() ? 0 : layers_.back().out_dim(); }

void Network::check_input(const Matrix& input) const {
  if (layers_.empty()) throw StateError("Network '" + name_ + "': no layers");
  if (input.cols() != input_dim()) {
    throw ShapeError("Network '" + name_ + "' layer 0: expects " + std::to_string(input_dim()) +
                     " input columns, got " + std::to_string(input.cols()));
  }
}

Matrix Network::forward(const Matrix& input) {
  check_input(input);
  tape_.inputs.resize(layers_.size());
  tape_.pre.resize(layers_.size());
  tape_.post.resize(layers_.size());
  const Matrix* current = &input;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    tape_.inputs[l] = *current;
    Matrix& z = tape_.pre[l];
    z = Matrix(current->rows(), layer.out_dim());
    kernels::parallel::affine_forward(*current, layer.weights, layer.bias, z);
    Matrix& a = tape_.post[l];
    a = Matrix(z.rows(), z.cols());
    auto zf = z.flat();
    auto af = a.flat();
    for (std::size_t i = 0; i < zf.size(); ++i) af[i] = activate(layer.activation, zf[i]);
    current = &a;
  }
  tape_.recorded = true;
  return tape_.post.back();
}

Matrix Network::predict(const Matrix& input) const {
  check_input(input);
  Matrix current = input;
  for (const auto& layer : layers_) {
    Matrix z(current.rows(), layer.out_dim());
    kernels::parallel::affine_forward(current, layer.weights, layer.bias, z);
    for (double& v : z.flat()) v = activate(layer.activation, v);
    current = std::move(z);
  }
  return current;
}

Matrix Network::backward(const Matrix& output_grad) {
  if (!tape_.recorded) throw StateError("Network '" + name_ + "': backward called without a recorded forward pass");
  const Matrix& out = tape_.post.back();
  if (output_grad.rows() != out.rows() || output_grad.cols() != out.cols()) {
    throw ShapeError("Network '" + name_ + "': output gradient " + output_grad.shape_str() +
                     " does not match recorded output " + out.shape_str());
  }
  zero_grad();
  Matrix grad = output_grad;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    auto& layer = layers_[l];
    const auto zf = tape_.pre[l].flat();
    const auto af = tape_.post[l].flat();
    auto gf = grad.flat();
    for (std::size_t i = 0; i < gf.size(); ++i) gf[i] *= activate_grad(layer.activation, zf[i], af[i]);
    kernels::parallel::affine_backward_params(grad, tape_.inputs[l], layer.grad_weights, layer.grad_bias);
    Matrix input_grad(grad.rows(), layer.in_dim());
    kernels::parallel::affine_backward_input(grad, layer.weights, input_grad);
    grad = std::move(input_grad);
  }
  return grad;
}

void Network::zero_grad() {
  for (auto& layer : layers_) {
    layer.grad_weights.fill(0.0);
    std::fill(layer.grad_bias.begin(), layer.grad_bias.end(), 0.0);
  }
}

std::vector<ParamRef> Network::parameters() {
  std::vector<ParamRef> refs;
  refs.reserve(layers_.size() * 2);
  for (auto& layer : layers_) {
    refs.push_back({layer.weights.flat(), layer.grad_weights.flat()});
    refs.push_back({std::span<double>(layer.bias), std::span<const double>(layer.grad_bias)});
  }
  return refs;
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += layer.parameter_count();
  return n;
}

std::vector<double> Network::flat_parameters() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const auto& layer : layers_) {
    out.insert(out.end(), layer.weights.data().begin(), layer.weights.data().end());
    out.insert(out.end(), layer.bias.begin(), layer.bias.end());
  }
  return out;
}

std::vector<double> Network::flat_gradients() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const auto& layer : layers_) {
    out.insert(out.end(), layer.grad_weights.data().begin(), layer.grad_weights.data().end());
    out.insert(out.end(), layer.grad_bias.begin(), layer.grad_bias.end());
  }
  return out;
}

AdamState make_adam_state(std::span<const ParamRef> params, const AdamOptions& options) {
  if (!(options.learning_rate > 0.0)) throw InputError("Adam learning rate must be > 0");
  AdamState state;
  state.options = options;
  for (const auto& p : params) {
    state.first_moment.emplace_back(p.value.size(), 0.0);
    state.second_moment.emplace_back(p.value.size(), 0.0);
  }
  return state;
}

void adam_step(std::span<const ParamRef> params, AdamState& state) {
  if (params.size() != state.first_moment.size() || params.size() != state.second_moment.size()) {
    throw ShapeError("adam_step: " + std::to_string(params.size()) + " parameter blocks, state holds " +
                     std::to_string(state.first_moment.size()));
  }
  for (std::size_t b = 0; b < params.size(); ++b) {
    if (params[b].value.size() != params[b].grad.size() || params[b].value.size() != state.first_moment[b].size() ||
        params[b].value.size() != state.second_moment[b].size()) {
      throw ShapeError("adam_step: block " + std::to_string(b) + " shape mismatch");
    }
  }
  const auto& o = state.options;
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(o.beta1, t);
  const double correction2 = 1.0 - std::pow(o.beta2, t);
  for (std::size_t b = 0; b < params.size(); ++b) {
    auto value = params[b].value;
    auto grad = params[b].grad;
    auto& m = state.first_moment[b];
    auto& v = state.second_moment[b];
    for (std::size_t i = 0; i < value.size(); ++i) {
      m[i] = o.beta1 * m[i] + (1.0 - o.beta1) * grad[i];
      v[i] = o.beta2 * v[i] + (1.0 - o.beta2) * grad[i] * grad[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      value[i] -= o.learning_rate * m_hat / (std::sqrt(v_hat) + o.epsilon);
    }
  }
}

namespace {

double checked_clamp(double p) {
  if (!(p >= -kProbTolerance && p <= 1.0 + kProbTolerance)) {
    throw DomainError("probability " + std::to_string(p) + " outside [0,1]");
  }
  return std::clamp(p, kProbEpsilon, 1.0 - kProbEpsilon);
}

}  // namespace

double clamped_log(double p) { return std::log(checked_clamp(p)); }
double clamped_log1m(double p) { return std::log(1.0 - checked_clamp(p)); }

BceTerms bce_terms(const Matrix& p) {
  BceTerms out{Matrix(p.rows(), p.cols()), Matrix(p.rows(), p.cols())};
  const auto pf = p.flat();
  auto lp = out.log_p.flat();
  auto lq = out.log_one_minus_p.flat();
  for (std::size_t i = 0; i < pf.size(); ++i) {
    const double c = checked_clamp(pf[i]);
    lp[i] = std::log(c);
    lq[i] = std::log(1.0 - c);
  }
  return out;
}

}  // namespace taxbigan::nn
