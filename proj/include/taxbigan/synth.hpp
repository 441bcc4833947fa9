#pragma once

// Seeded synthetic GSTR-3B returns for a population of dealers, with a
// labelled minority whose returns carry one of three fraud signatures.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "taxbigan/features.hpp"

namespace taxbigan::synth {

enum class Recipe {
  Genuine,
  // Nearly all purchases booked as intra-state, so IGST ITC is a sliver of
  // total ITC.
  IntraStateItcShift,
  // Purchases inflated until ITC covers the liability; SGST cash is zero
  // apart from sporadic token payments unrelated to turnover.
  NoCashSettlement,
  // Declared liability drawn independently of the month's sales.
  DecorrelatedLiability,
};

inline constexpr std::array<Recipe, 3> kFraudRecipes = {Recipe::IntraStateItcShift, Recipe::NoCashSettlement,
                                                        Recipe::DecorrelatedLiability};

std::string_view recipe_tag(Recipe r);
Recipe recipe_from_tag(std::string_view tag);

struct SynthConfig {
  std::size_t n_genuine = 1000;
  std::size_t n_fraud = 60;
  std::size_t months = 24;
  std::uint64_t seed = 2017;
  // Weights over kFraudRecipes, summing to 1.
  std::array<double, 3> fraud_mix{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  features::Period start{2017, 7};

  // Noise model magnitudes.
  double tax_rate = 0.18;
  double turnover_log_mean = 13.8;  // monthly sales ~ e^13.8 ~ 1e6 currency units
  double turnover_log_sigma = 1.0;
  double sales_jitter = 0.25;     // relative sd of month-to-month sales
  double purchase_jitter = 0.01;  // relative sd of purchases around sales / markup
  double liability_jitter = 0.01; // relative sd of liability around tax_rate * sales
  double share_jitter = 0.02;     // absolute sd of monthly interstate shares

  void validate() const;
  nlohmann::json to_json() const;
  static SynthConfig from_json(const nlohmann::json& j, const SynthConfig& base);
  static SynthConfig from_json(const nlohmann::json& j);
};

struct Label {
  std::string taxpayer_id;
  bool is_fraud = false;
  Recipe recipe = Recipe::Genuine;
};

struct SynthDataset {
  std::vector<features::MonthlyReturn> returns;  // by taxpayer id, then period
  std::vector<Label> labels;                     // by taxpayer id
};

SynthDataset generate(const SynthConfig& config);

// taxpayer_id,is_fraud
void write_labels(std::ostream& out, const std::vector<Label>& labels);
std::vector<Label> parse_labels(std::istream& in);
std::vector<Label> load_labels(const std::string& path);

}  // namespace taxbigan::synth
