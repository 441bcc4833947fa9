#include "taxbigan/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "taxbigan/errors.hpp"

namespace taxbigan::features {

const std::array<std::string_view, kFeatureDim> kFeatureNames = {
    "corr1", "corr2", "corr3", "corr4", "corr5", "corr6", "ratio1", "ratio2", "ratio3"};

Period Period::parse(std::string_view text) {
  auto digits = [](std::string_view s) { return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }); };
  if (text.size() != 7 || text[4] != '-' || !digits(text.substr(0, 4)) || !digits(text.substr(5, 2))) {
    throw InputError("period '" + std::string(text) + "' is not YYYY-MM");
  }
  Period p;
  std::from_chars(text.data(), text.data() + 4, p.year);
  std::from_chars(text.data() + 5, text.data() + 7, p.month);
  if (p.month < 1 || p.month > 12) throw InputError("period '" + std::string(text) + "' has month out of range");
  return p;
}

std::string Period::str() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
  return buf;
}

Period Period::next() const { return month == 12 ? Period{year + 1, 1} : Period{year, month + 1}; }

std::array<double, kFeatureDim> FeatureVector::values() const {
  std::array<double, kFeatureDim> v{};
  std::copy(corr.begin(), corr.end(), v.begin());
  std::copy(ratio.begin(), ratio.end(), v.begin() + kCorrelationCount);
  return v;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw InputError("pearson: length mismatch");
  if (xs.size() < 2) throw InputError("pearson: need at least two points");
  auto constant = [](std::span<const double> s) {
    return std::all_of(s.begin(), s.end(), [&](double v) { return v == s.front(); });
  };
  if (constant(xs) || constant(ys)) return 0.0;

  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return std::clamp(sxy / (std::sqrt(sxx) * std::sqrt(syy)), -1.0, 1.0);
}

namespace {

// Zero or tiny denominators are floored at one currency unit.
double safe_ratio(double num, double den) { return num / std::max(den, 1.0); }

}  // namespace

FeatureResult derive_features(const TaxpayerSeries& series, std::size_t min_months) {
  std::vector<MonthlyReturn> months = series.months;
  std::sort(months.begin(), months.end(), [](const auto& a, const auto& b) { return a.period < b.period; });

  const std::size_t n = months.size();
  if (n < std::max<std::size_t>(min_months, 2)) return Excluded{series.taxpayer_id, n};

  std::vector<double> sales(n), liability(n), sgst_liability(n), sgst_cash(n), itc(n), igst_itc(n);
  double sum_sales = 0, sum_purchases = 0, sum_liability = 0, sum_itc = 0, sum_igst_itc = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& m = months[i];
    sales[i] = m.total_sales;
    liability[i] = m.total_liability();
    sgst_liability[i] = m.sgst_liability;
    sgst_cash[i] = m.sgst_cash_paid;
    itc[i] = m.total_itc();
    igst_itc[i] = m.igst_itc;
    sum_sales += m.total_sales;
    sum_purchases += m.total_purchases;
    sum_liability += liability[i];
    sum_itc += itc[i];
    sum_igst_itc += m.igst_itc;
  }

  FeatureVector fv;
  fv.taxpayer_id = series.taxpayer_id;
  fv.months_used = n;
  fv.corr[0] = pearson(liability, sales);
  fv.corr[1] = pearson(sgst_liability, liability);
  fv.corr[2] = pearson(sgst_cash, sgst_liability);
  fv.corr[3] = pearson(sgst_cash, sales);
  fv.corr[4] = pearson(itc, liability);
  fv.corr[5] = pearson(igst_itc, itc);
  fv.ratio[0] = safe_ratio(sum_sales, sum_purchases);
  fv.ratio[1] = safe_ratio(sum_igst_itc, sum_itc);
  fv.ratio[2] = safe_ratio(sum_liability, sum_igst_itc);
  return fv;
}

namespace {

DerivedSet collect(std::vector<FeatureResult>& results) {
  DerivedSet out;
  for (auto& r : results) {
    if (auto* fv = std::get_if<FeatureVector>(&r)) {
      out.features.push_back(std::move(*fv));
    } else {
      out.excluded.push_back(std::move(std::get<Excluded>(r)));
    }
  }
  return out;
}

}  // namespace

DerivedSet derive_all(std::span<const TaxpayerSeries> series, std::size_t min_months) {
  std::vector<FeatureResult> results(series.size());
  const auto n = static_cast<std::ptrdiff_t>(series.size());
#pragma omp parallel for schedule(dynamic, 16) if (n > 64)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    results[static_cast<std::size_t>(i)] = derive_features(series[static_cast<std::size_t>(i)], min_months);
  }
  return collect(results);
}

DerivedSet derive_all_serial(std::span<const TaxpayerSeries> series, std::size_t min_months) {
  std::vector<FeatureResult> results;
  results.reserve(series.size());
  for (const auto& s : series) results.push_back(derive_features(s, min_months));
  return collect(results);
}

std::array<double, kFeatureDim> NormalizationStats::apply(const std::array<double, kFeatureDim>& raw) const {
  std::array<double, kFeatureDim> out{};
  for (std::size_t d = 0; d < kFeatureDim; ++d) out[d] = zscored[d] ? (raw[d] - mean[d]) / stddev[d] : raw[d];
  return out;
}

std::array<double, kFeatureDim> NormalizationStats::invert(const std::array<double, kFeatureDim>& normalized) const {
  std::array<double, kFeatureDim> out{};
  for (std::size_t d = 0; d < kFeatureDim; ++d) {
    out[d] = zscored[d] ? normalized[d] * stddev[d] + mean[d] : normalized[d];
  }
  return out;
}

nlohmann::json NormalizationStats::to_json() const {
  nlohmann::json j;
  j["dims"] = std::vector<std::string>(kFeatureNames.begin(), kFeatureNames.end());
  j["mean"] = mean;
  j["std"] = stddev;
  j["zscored"] = zscored;
  return j;
}

NormalizationStats NormalizationStats::from_json(const nlohmann::json& j) {
  try {
    NormalizationStats s;
    s.mean = j.at("mean").get<std::array<double, kFeatureDim>>();
    s.stddev = j.at("std").get<std::array<double, kFeatureDim>>();
    s.zscored = j.at("zscored").get<std::array<bool, kFeatureDim>>();
    for (double sd : s.stddev) {
      if (!(sd > 0.0) || !std::isfinite(sd)) throw InputError("normalization stats: std must be finite and > 0");
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed normalization stats: ") + e.what());
  }
}

NormalizationStats fit_normalization(std::span<const FeatureVector> dataset) {
  if (dataset.empty()) throw InputError("normalize: empty dataset");
  NormalizationStats stats;
  for (std::size_t d = 0; d < kFeatureDim; ++d) {
    stats.mean[d] = 0.0;
    stats.stddev[d] = 1.0;
    stats.zscored[d] = d >= kCorrelationCount;
  }
  const double n = static_cast<double>(dataset.size());
  for (std::size_t r = 0; r < kRatioCount; ++r) {
    const std::size_t d = kCorrelationCount + r;
    double mean = 0.0;
    for (const auto& fv : dataset) mean += fv.ratio[r];
    mean /= n;
    double ss = 0.0;
    for (const auto& fv : dataset) ss += (fv.ratio[r] - mean) * (fv.ratio[r] - mean);
    const double sd = std::sqrt(ss / n);
    stats.mean[d] = mean;
    stats.stddev[d] = sd > 0.0 ? sd : 1.0;
  }
  return stats;
}

NormalizedDataset normalize_with(std::span<const FeatureVector> dataset, const NormalizationStats& stats) {
  if (dataset.empty()) throw InputError("normalize: empty dataset");
  NormalizedDataset out;
  out.stats = stats;
  out.values = Matrix(dataset.size(), kFeatureDim);
  out.ids.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    out.ids.push_back(dataset[i].taxpayer_id);
    const auto z = stats.apply(dataset[i].values());
    std::copy(z.begin(), z.end(), out.values.row(i).begin());
  }
  return out;
}

NormalizedDataset normalize(std::span<const FeatureVector> dataset) {
  return normalize_with(dataset, fit_normalization(dataset));
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string_view chomp(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  return s;
}

std::string at_line(std::size_t line, const std::string& msg) { return "line " + std::to_string(line) + ": " + msg; }

double parse_number(std::string_view field, std::string_view column, std::size_t line) {
  double v = 0.0;
  while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw InputError(at_line(line, "column " + std::string(column) + ": '" + std::string(field) + "' is not a number"));
  }
  if (!std::isfinite(v)) throw InputError(at_line(line, "column " + std::string(column) + " is not finite"));
  return v;
}

template <typename RowFn>
void read_csv(std::istream& in, std::string_view header, RowFn&& on_row) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw InputError("empty file: expected header '" + std::string(header) + "'");
  ++lineno;
  if (chomp(line) != header) throw InputError(at_line(1, "unexpected header; expected '" + std::string(header) + "'"));
  const auto columns = split_csv(header);
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = chomp(line);
    if (body.empty()) continue;
    const auto fields = split_csv(body);
    if (fields.size() != columns.size()) {
      throw InputError(at_line(lineno, "expected " + std::to_string(columns.size()) + " fields, got " +
                                           std::to_string(fields.size())));
    }
    on_row(fields, columns, lineno);
  }
}

}  // namespace

std::vector<MonthlyReturn> parse_returns(std::istream& in) {
  std::vector<MonthlyReturn> out;
  std::set<std::pair<std::string, Period>> seen;
  read_csv(in, kReturnsHeader, [&](const auto& f, const auto& cols, std::size_t line) {
    MonthlyReturn r;
    r.taxpayer_id = std::string(f[0]);
    if (r.taxpayer_id.empty()) throw InputError(at_line(line, "empty taxpayer_id"));
    try {
      r.period = Period::parse(f[1]);
    } catch (const InputError& e) {
      throw InputError(at_line(line, e.what()));
    }
    double* money[] = {&r.total_sales, &r.total_purchases, &r.sgst_liability, &r.cgst_liability, &r.igst_liability,
                       &r.sgst_itc,    &r.cgst_itc,        &r.igst_itc,       &r.sgst_cash_paid};
    for (std::size_t k = 0; k < 9; ++k) {
      *money[k] = parse_number(f[k + 2], cols[k + 2], line);
      if (*money[k] < 0.0) throw InputError(at_line(line, "column " + std::string(cols[k + 2]) + " is negative"));
    }
    if (!seen.emplace(r.taxpayer_id, r.period).second) {
      throw InputError(at_line(line, "duplicate record for (" + r.taxpayer_id + ", " + r.period.str() + ")"));
    }
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<MonthlyReturn> load_returns(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open returns file '" + path + "'");
  try {
    return parse_returns(in);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

void write_returns(std::ostream& out, std::span<const MonthlyReturn> records) {
  out << kReturnsHeader << '\n';
  for (const auto& r : records) {
    out << r.taxpayer_id << ',' << r.period.str() << ',' << format_double(r.total_sales) << ','
        << format_double(r.total_purchases) << ',' << format_double(r.sgst_liability) << ','
        << format_double(r.cgst_liability) << ',' << format_double(r.igst_liability) << ','
        << format_double(r.sgst_itc) << ',' << format_double(r.cgst_itc) << ',' << format_double(r.igst_itc) << ','
        << format_double(r.sgst_cash_paid) << '\n';
  }
}

std::vector<TaxpayerSeries> group_series(std::span<const MonthlyReturn> records) {
  std::map<std::string, std::vector<MonthlyReturn>> by_id;
  for (const auto& r : records) by_id[r.taxpayer_id].push_back(r);
  std::vector<TaxpayerSeries> out;
  out.reserve(by_id.size());
  for (auto& [id, months] : by_id) {
    std::sort(months.begin(), months.end(), [](const auto& a, const auto& b) { return a.period < b.period; });
    for (std::size_t i = 1; i < months.size(); ++i) {
      if (!(months[i - 1].period < months[i].period)) {
        throw InputError("duplicate period " + months[i].period.str() + " for taxpayer " + id);
      }
    }
    out.push_back({id, std::move(months)});
  }
  return out;
}

std::vector<FeatureVector> parse_features(std::istream& in) {
  std::vector<FeatureVector> out;
  std::set<std::string> seen;
  read_csv(in, kFeaturesHeader, [&](const auto& f, const auto& cols, std::size_t line) {
    FeatureVector fv;
    fv.taxpayer_id = std::string(f[0]);
    if (fv.taxpayer_id.empty()) throw InputError(at_line(line, "empty taxpayer_id"));
    if (!seen.insert(fv.taxpayer_id).second) throw InputError(at_line(line, "duplicate taxpayer " + fv.taxpayer_id));
    for (std::size_t k = 0; k < kCorrelationCount; ++k) {
      fv.corr[k] = parse_number(f[1 + k], cols[1 + k], line);
      if (fv.corr[k] < -1.0 || fv.corr[k] > 1.0) {
        throw InputError(at_line(line, "column " + std::string(cols[1 + k]) + " outside [-1,1]"));
      }
    }
    for (std::size_t k = 0; k < kRatioCount; ++k) fv.ratio[k] = parse_number(f[7 + k], cols[7 + k], line);
    const double months = parse_number(f[10], cols[10], line);
    if (months < 0 || months != std::floor(months)) throw InputError(at_line(line, "months_used must be a count"));
    fv.months_used = static_cast<std::size_t>(months);
    out.push_back(std::move(fv));
  });
  return out;
}

std::vector<FeatureVector> load_features(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open features file '" + path + "'");
  try {
    return parse_features(in);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

void write_features(std::ostream& out, std::span<const FeatureVector> rows) {
  out << kFeaturesHeader << '\n';
  for (const auto& fv : rows) {
    out << fv.taxpayer_id;
    for (double v : fv.values()) out << ',' << format_double(v);
    out << ',' << fv.months_used << '\n';
  }
}

}  // namespace taxbigan::features
