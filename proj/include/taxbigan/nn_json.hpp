#pragma once

#include <json.hpp>

#include "taxbigan/nn.hpp"

namespace taxbigan::nn {

// Layer dims, activation tags, weights and biases. Doubles are written with
// round-trip precision so a reload reproduces the network bit-for-bit.
nlohmann::json network_to_json(const Network& net);
Network network_from_json(const nlohmann::json& j);

nlohmann::json adam_to_json(const AdamState& state);
AdamState adam_from_json(const nlohmann::json& j);

}  // namespace taxbigan::nn
