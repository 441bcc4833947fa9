#include "taxbigan/nn_json.hpp"

#include "taxbigan/errors.hpp"

namespace taxbigan::nn {

using nlohmann::json;

json network_to_json(const Network& net) {
  json layers = json::array();
  for (const auto& layer : net.layers()) {
    json l;
    l["in"] = layer.in_dim();
    l["out"] = layer.out_dim();
    l["activation"] = std::string(activation_tag(layer.activation.kind));
    if (layer.activation.kind == ActivationKind::LeakyReLU) l["slope"] = layer.activation.slope;
    l["weights"] = layer.weights.data();
    l["bias"] = layer.bias;
    layers.push_back(std::move(l));
  }
  return {{"name", net.name()}, {"layers", std::move(layers)}};
}

Network network_from_json(const json& j) {
  try {
    std::vector<DenseLayer> layers;
    for (const auto& l : j.at("layers")) {
      const auto in = l.at("in").get<std::size_t>();
      const auto out = l.at("out").get<std::size_t>();
      Activation act{activation_from_tag(l.at("activation").get<std::string>()), 0.0};
      if (act.kind == ActivationKind::LeakyReLU) act = Activation::leaky_relu(l.at("slope").get<double>());
      DenseLayer layer(in, out, act);
      auto w = l.at("weights").get<std::vector<double>>();
      auto b = l.at("bias").get<std::vector<double>>();
      if (w.size() != in * out || b.size() != out) throw ShapeError("checkpoint layer has inconsistent weights/bias");
      layer.weights = Matrix(out, in, std::move(w));
      layer.bias = std::move(b);
      layers.push_back(std::move(layer));
    }
    return Network(j.at("name").get<std::string>(), std::move(layers));
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed network JSON: ") + e.what());
  }
}

json adam_to_json(const AdamState& state) {
  return {{"learning_rate", state.options.learning_rate},
          {"beta1", state.options.beta1},
          {"beta2", state.options.beta2},
          {"epsilon", state.options.epsilon},
          {"step", state.step},
          {"first_moment", state.first_moment},
          {"second_moment", state.second_moment}};
}

AdamState adam_from_json(const json& j) {
  try {
    AdamState s;
    s.options.learning_rate = j.at("learning_rate").get<double>();
    s.options.beta1 = j.at("beta1").get<double>();
    s.options.beta2 = j.at("beta2").get<double>();
    s.options.epsilon = j.at("epsilon").get<double>();
    s.step = j.at("step").get<std::uint64_t>();
    s.first_moment = j.at("first_moment").get<std::vector<std::vector<double>>>();
    s.second_moment = j.at("second_moment").get<std::vector<std::vector<double>>>();
    return s;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed optimizer JSON: ") + e.what());
  }
}

}  // namespace taxbigan::nn
