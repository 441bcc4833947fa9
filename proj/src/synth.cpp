#include "taxbigan/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <set>

#include "taxbigan/errors.hpp"

namespace taxbigan::synth {

using features::MonthlyReturn;
using nlohmann::json;

std::string_view recipe_tag(Recipe r) {
  switch (r) {
    case Recipe::Genuine: return "genuine";
    case Recipe::IntraStateItcShift: return "intra-state-itc-shift";
    case Recipe::NoCashSettlement: return "no-cash-settlement";
    case Recipe::DecorrelatedLiability: return "decorrelated-liability";
  }
  return "genuine";
}

Recipe recipe_from_tag(std::string_view tag) {
  for (Recipe r : {Recipe::Genuine, Recipe::IntraStateItcShift, Recipe::NoCashSettlement, Recipe::DecorrelatedLiability}) {
    if (recipe_tag(r) == tag) return r;
  }
  throw ConfigError("unknown fraud recipe '" + std::string(tag) + "'");
}

void SynthConfig::validate() const {
  if (months < features::kDefaultMinMonths) {
    throw ConfigError("months must be >= " + std::to_string(features::kDefaultMinMonths));
  }
  double total = 0.0;
  for (double w : fraud_mix) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("fraud_mix weights must be finite and >= 0");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("fraud_mix weights must sum to 1");
  if (n_genuine + n_fraud == 0) throw ConfigError("need at least one taxpayer");
  if (start.month < 1 || start.month > 12) throw ConfigError("start month out of range");
  if (!(tax_rate > 0.0 && tax_rate < 1.0)) throw ConfigError("tax_rate must lie in (0,1)");
  for (double v : {turnover_log_sigma, sales_jitter, purchase_jitter, liability_jitter, share_jitter}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("noise magnitudes must be finite and >= 0");
  }
  if (!std::isfinite(turnover_log_mean)) throw ConfigError("turnover_log_mean must be finite");
}

json SynthConfig::to_json() const {
  return {{"n_genuine", n_genuine},
          {"n_fraud", n_fraud},
          {"months", months},
          {"seed", seed},
          {"fraud_mix",
           {{std::string(recipe_tag(Recipe::IntraStateItcShift)), fraud_mix[0]},
            {std::string(recipe_tag(Recipe::NoCashSettlement)), fraud_mix[1]},
            {std::string(recipe_tag(Recipe::DecorrelatedLiability)), fraud_mix[2]}}},
          {"start", start.str()},
          {"tax_rate", tax_rate},
          {"turnover_log_mean", turnover_log_mean},
          {"turnover_log_sigma", turnover_log_sigma},
          {"sales_jitter", sales_jitter},
          {"purchase_jitter", purchase_jitter},
          {"liability_jitter", liability_jitter},
          {"share_jitter", share_jitter}};
}

SynthConfig SynthConfig::from_json(const json& j, const SynthConfig& base) {
  if (!j.is_object()) throw ConfigError("synth config must be a JSON object");
  SynthConfig c = base;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "n_genuine") c.n_genuine = value.get<std::size_t>();
      else if (key == "n_fraud") c.n_fraud = value.get<std::size_t>();
      else if (key == "months") c.months = value.get<std::size_t>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "start") c.start = features::Period::parse(value.get<std::string>());
      else if (key == "tax_rate") c.tax_rate = value.get<double>();
      else if (key == "turnover_log_mean") c.turnover_log_mean = value.get<double>();
      else if (key == "turnover_log_sigma") c.turnover_log_sigma = value.get<double>();
      else if (key == "sales_jitter") c.sales_jitter = value.get<double>();
      else if (key == "purchase_jitter") c.purchase_jitter = value.get<double>();
      else if (key == "liability_jitter") c.liability_jitter = value.get<double>();
      else if (key == "share_jitter") c.share_jitter = value.get<double>();
      else if (key == "fraud_mix") {
        c.fraud_mix = {0.0, 0.0, 0.0};
        for (const auto& [tag, w] : value.items()) {
          const Recipe r = recipe_from_tag(tag);
          if (r == Recipe::Genuine) throw ConfigError("fraud_mix cannot weight 'genuine'");
          c.fraud_mix[static_cast<std::size_t>(r) - 1] = w.get<double>();
        }
      } else {
        throw ConfigError("unknown synth config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("synth config: ") + e.what());
  }
  c.validate();
  return c;
}

SynthConfig SynthConfig::from_json(const json& j) { return from_json(j, SynthConfig{}); }

namespace {

std::mt19937_64 sub_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), 0x5ca1ab1eu};
  return std::mt19937_64(seq);
}

// Largest-remainder split of n_fraud over the recipe weights.
std::array<std::size_t, 3> recipe_counts(const SynthConfig& c) {
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    const double exact = c.fraud_mix[k] * static_cast<double>(c.n_fraud);
    counts[k] = static_cast<std::size_t>(std::floor(exact));
    remainder[k] = exact - std::floor(exact);
    assigned += counts[k];
  }
  std::array<std::size_t, 3> by_remainder{0, 1, 2};
  std::stable_sort(by_remainder.begin(), by_remainder.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < c.n_fraud; ++k, ++assigned) ++counts[by_remainder[k % 3]];
  return counts;
}

double positive_factor(std::normal_distribution<double>& n, std::mt19937_64& rng, double sd) {
  return std::max(0.05, 1.0 + sd * n(rng));
}

std::vector<MonthlyReturn> simulate(const std::string& id, Recipe recipe, const SynthConfig& c, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  const double base = std::exp(c.turnover_log_mean + c.turnover_log_sigma * normal(rng));
  const double growth = uniform(-0.01, 0.02);
  const double season_amp = uniform(0.0, 0.2);
  const double season_phase = uniform(0.0, 2.0 * std::numbers::pi);
  const double markup = uniform(1.15, 1.4);
  const double out_share = uniform(0.05, 0.4);
  double in_share = uniform(0.45, 0.8);
  if (recipe == Recipe::IntraStateItcShift) in_share = uniform(0.01, 0.05);

  std::vector<MonthlyReturn> months;
  months.reserve(c.months);
  std::vector<double> sales(c.months);
  for (std::size_t m = 0; m < c.months; ++m) {
    const double t = static_cast<double>(m);
    sales[m] = base * std::pow(1.0 + growth, t) *
               (1.0 + season_amp * std::sin(2.0 * std::numbers::pi * t / 12.0 + season_phase)) *
               positive_factor(normal, rng, c.sales_jitter);
  }
  const double mean_sales = std::accumulate(sales.begin(), sales.end(), 0.0) / static_cast<double>(c.months);

  features::Period period = c.start;
  for (std::size_t m = 0; m < c.months; ++m, period = period.next()) {
    MonthlyReturn r;
    r.taxpayer_id = id;
    r.period = period;
    r.total_sales = sales[m];

    double purchases = sales[m] / markup * positive_factor(normal, rng, c.purchase_jitter);
    if (recipe == Recipe::NoCashSettlement) purchases = sales[m] * uniform(0.97, 1.0);
    r.total_purchases = purchases;

    double liability = c.tax_rate * sales[m] * positive_factor(normal, rng, c.liability_jitter);
    if (recipe == Recipe::DecorrelatedLiability) liability = c.tax_rate * mean_sales * uniform(0.3, 1.7);
    const double f_out = std::clamp(out_share + c.share_jitter * normal(rng), 0.0, 1.0);
    r.igst_liability = liability * f_out;
    r.sgst_liability = liability * (1.0 - f_out) / 2.0;
    r.cgst_liability = r.sgst_liability;

    const double itc = c.tax_rate * purchases;
    const double f_in = std::clamp(in_share + c.share_jitter * normal(rng), 0.0, 1.0);
    r.igst_itc = itc * f_in;
    r.sgst_itc = itc * (1.0 - f_in) / 2.0;
    r.cgst_itc = r.sgst_itc;

    // State half of whatever the credit does not cover.
    double cash = std::max(0.0, liability - itc) / 2.0;
    if (recipe == Recipe::NoCashSettlement) cash = unit(rng) < 0.15 ? uniform(0.0, 0.002) * base : 0.0;
    r.sgst_cash_paid = cash;
    months.push_back(std::move(r));
  }
  return months;
}

}  // namespace

SynthDataset generate(const SynthConfig& config) {
  config.validate();
  const std::size_t total = config.n_genuine + config.n_fraud;

  std::vector<Recipe> kinds(config.n_genuine, Recipe::Genuine);
  const auto counts = recipe_counts(config);
  for (std::size_t k = 0; k < 3; ++k) kinds.insert(kinds.end(), counts[k], kFraudRecipes[k]);
  auto layout_rng = sub_rng(config.seed, 0);
  std::shuffle(kinds.begin(), kinds.end(), layout_rng);

  const std::size_t width = std::to_string(total).size();
  SynthDataset ds;
  ds.labels.reserve(total);
  std::vector<std::vector<MonthlyReturn>> per_taxpayer(total);
  std::vector<std::string> ids(total);
  for (std::size_t i = 0; i < total; ++i) {
    std::string num = std::to_string(i + 1);
    ids[i] = "TP" + std::string(width - num.size(), '0') + num;
  }

  const auto n = static_cast<std::ptrdiff_t>(total);
#pragma omp parallel for schedule(dynamic, 32) if (n > 256)
  for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    auto rng = sub_rng(config.seed, i + 1);
    per_taxpayer[i] = simulate(ids[i], kinds[i], config, rng);
  }

  for (std::size_t i = 0; i < total; ++i) {
    ds.labels.push_back({ids[i], kinds[i] != Recipe::Genuine, kinds[i]});
    for (auto& r : per_taxpayer[i]) ds.returns.push_back(std::move(r));
  }
  return ds;
}

void write_labels(std::ostream& out, const std::vector<Label>& labels) {
  out << "taxpayer_id,is_fraud\n";
  for (const auto& l : labels) out << l.taxpayer_id << ',' << (l.is_fraud ? 1 : 0) << '\n';
}

std::vector<Label> parse_labels(std::istream& in) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) throw InputError("labels: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "taxpayer_id,is_fraud") throw InputError("labels: line 1: expected header 'taxpayer_id,is_fraud'");
  std::vector<Label> out;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw InputError("labels: line " + std::to_string(lineno) + ": expected 2 fields");
    }
    Label l;
    l.taxpayer_id = line.substr(0, comma);
    const auto flag = line.substr(comma + 1);
    if (flag == "1" || flag == "true") l.is_fraud = true;
    else if (flag == "0" || flag == "false") l.is_fraud = false;
    else throw InputError("labels: line " + std::to_string(lineno) + ": is_fraud must be 0/1");
    if (!seen.insert(l.taxpayer_id).second) {
      throw InputError("labels: line " + std::to_string(lineno) + ": duplicate taxpayer " + l.taxpayer_id);
    }
    out.push_back(std::move(l));
  }
  return out;
}

std::vector<Label> load_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open labels file '" + path + "'");
  return parse_labels(in);
}

}  // namespace taxbigan::synth
