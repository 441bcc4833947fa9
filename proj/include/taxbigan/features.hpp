#pragma once

// Per-taxpayer ground-truth features from monthly GSTR-3B summaries: six
// Pearson correlations between monthly series and three whole-window ratios,
// plus dataset-level normalization.

#include <array>
#include <compare>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "taxbigan/matrix.hpp"

namespace taxbigan::features {

inline constexpr std::size_t kFeatureDim = 9;
inline constexpr std::size_t kCorrelationCount = 6;
inline constexpr std::size_t kRatioCount = 3;
inline constexpr std::size_t kDefaultMinMonths = 6;

inline constexpr std::string_view kReturnsHeader =
    "taxpayer_id,period,total_sales,total_purchases,sgst_liability,cgst_liability,igst_liability,"
    "sgst_itc,cgst_itc,igst_itc,sgst_cash_paid";
inline constexpr std::string_view kFeaturesHeader =
    "taxpayer_id,corr1,corr2,corr3,corr4,corr5,corr6,ratio1,ratio2,ratio3,months_used";

extern const std::array<std::string_view, kFeatureDim> kFeatureNames;

struct Period {
  int year = 0;
  int month = 0;  // 1..12

  static Period parse(std::string_view text);  // "YYYY-MM"
  std::string str() const;
  Period next() const;
  auto operator<=>(const Period&) const = default;
};

struct MonthlyReturn {
  std::string taxpayer_id;
  Period period;
  double total_sales = 0;
  double total_purchases = 0;
  double sgst_liability = 0;
  double cgst_liability = 0;
  double igst_liability = 0;
  double sgst_itc = 0;
  double cgst_itc = 0;
  double igst_itc = 0;
  double sgst_cash_paid = 0;

  double total_liability() const { return sgst_liability + cgst_liability + igst_liability; }
  double total_itc() const { return sgst_itc + cgst_itc + igst_itc; }
};

struct TaxpayerSeries {
  std::string taxpayer_id;
  std::vector<MonthlyReturn> months;  // strictly increasing periods
};

struct FeatureVector {
  std::string taxpayer_id;
  // 1 total liability~sales, 2 SGST liability~total liability,
  // 3 SGST cash~SGST liability, 4 SGST cash~sales, 5 total ITC~total
  // liability, 6 IGST ITC~total ITC.
  std::array<double, kCorrelationCount> corr{};
  // 1 sales/purchases, 2 IGST ITC/total ITC, 3 total liability/IGST ITC.
  std::array<double, kRatioCount> ratio{};
  std::size_t months_used = 0;

  std::array<double, kFeatureDim> values() const;
};

// Returned in place of a FeatureVector when a series is too short.
struct Excluded {
  std::string taxpayer_id;
  std::size_t months_used = 0;
};

using FeatureResult = std::variant<FeatureVector, Excluded>;

// Pearson product-moment correlation. Returns 0 when either series is
// constant. Throws InputError on length mismatch or fewer than two points.
double pearson(std::span<const double> xs, std::span<const double> ys);

// Sorts by period internally, so record order does not matter.
FeatureResult derive_features(const TaxpayerSeries& series, std::size_t min_months = kDefaultMinMonths);

struct DerivedSet {
  std::vector<FeatureVector> features;
  std::vector<Excluded> excluded;
};

// derive_features over many taxpayers; OpenMP-parallel over taxpayers.
DerivedSet derive_all(std::span<const TaxpayerSeries> series, std::size_t min_months = kDefaultMinMonths);
// Single-threaded reference for derive_all.
DerivedSet derive_all_serial(std::span<const TaxpayerSeries> series, std::size_t min_months = kDefaultMinMonths);

struct NormalizationStats {
  std::array<double, kFeatureDim> mean{};
  std::array<double, kFeatureDim> stddev{};
  std::array<bool, kFeatureDim> zscored{};

  std::array<double, kFeatureDim> apply(const std::array<double, kFeatureDim>& raw) const;
  std::array<double, kFeatureDim> invert(const std::array<double, kFeatureDim>& normalized) const;

  nlohmann::json to_json() const;
  static NormalizationStats from_json(const nlohmann::json& j);
};

struct NormalizedDataset {
  std::vector<std::string> ids;
  Matrix values;  // n x 9
  NormalizationStats stats;
};

// Z-scores the ratio dimensions with population mean/std, passes correlations
// through. A ratio dimension with zero spread keeps its mean but records std 1.
NormalizationStats fit_normalization(std::span<const FeatureVector> dataset);
NormalizedDataset normalize(std::span<const FeatureVector> dataset);
NormalizedDataset normalize_with(std::span<const FeatureVector> dataset, const NormalizationStats& stats);

// CSV I/O. Parse errors carry the 1-based line number.
std::vector<MonthlyReturn> parse_returns(std::istream& in);
std::vector<MonthlyReturn> load_returns(const std::string& path);
void write_returns(std::ostream& out, std::span<const MonthlyReturn> records);

// Groups by taxpayer (sorted by id) with months sorted by period.
std::vector<TaxpayerSeries> group_series(std::span<const MonthlyReturn> records);

std::vector<FeatureVector> parse_features(std::istream& in);
std::vector<FeatureVector> load_features(const std::string& path);
void write_features(std::ostream& out, std::span<const FeatureVector> rows);

// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace taxbigan::features
