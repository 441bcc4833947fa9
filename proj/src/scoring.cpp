#include "taxbigan/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "taxbigan/errors.hpp"
#include "taxbigan/features.hpp"
#include "taxbigan/kernels.hpp"

namespace taxbigan::scoring {

std::vector<double> score(const bigan::BiGanModel& model, const Matrix& data) {
  if (data.cols() != model.data_dim) {
    throw ShapeError("score: model expects " + std::to_string(model.data_dim) + " columns, data has " +
                     std::to_string(data.cols()));
  }
  const Matrix recon = bigan::reconstruct(model, data);
  std::vector<double> out(data.rows());
  kernels::parallel::row_cosine(data, recon, out);
  return out;
}

double quantile(std::span<const double> values, double q) {
  if (values.empty()) throw InputError("quantile: empty list");
  if (!(q >= 0.0 && q <= 1.0)) throw InputError("quantile: q must lie in [0,1]");
  std::vector<double> sorted(values.begin(), values.end());
  if (std::any_of(sorted.begin(), sorted.end(), [](double v) { return std::isnan(v); })) {
    throw InputError("quantile: NaN in input");
  }
  std::sort(sorted.begin(), sorted.end());
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

nlohmann::json ScoreReport::summary_json() const {
  return {{"Q1", q1},
          {"Q3", q3},
          {"IQR", iqr},
          {"threshold", threshold},
          {"flagged_count", flagged.size()},
          {"total_count", entries.size()}};
}

ScoreReport iqr_gate(std::span<const std::string> ids, std::span<const double> scores) {
  if (ids.size() != scores.size()) throw InputError("iqr_gate: ids and scores differ in length");
  if (scores.size() < kMinGateScores) {
    throw InputError("iqr_gate: need at least " + std::to_string(kMinGateScores) + " scores, got " +
                     std::to_string(scores.size()));
  }
  ScoreReport r;
  r.q1 = quantile(scores, 0.25);
  r.q3 = quantile(scores, 0.75);
  r.iqr = r.q3 - r.q1;
  r.threshold = r.q1 - kIqrMultiplier * r.iqr;

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] < scores[b];
    return ids[a] < ids[b];
  });
  r.entries.reserve(scores.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto i = order[k];
    ScoreEntry e{ids[i], scores[i], k + 1, scores[i] < r.threshold};
    if (e.flagged) r.flagged.push_back(e.taxpayer_id);
    r.entries.push_back(std::move(e));
  }
  return r;
}

ScoreReport iqr_gate(std::span<const double> scores) {
  std::vector<std::string> ids(scores.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = std::to_string(i);
  return iqr_gate(ids, scores);
}

double roc_auc(std::span<const double> anomaly, const std::vector<bool>& positive) {
  if (anomaly.size() != positive.size()) throw InputError("roc_auc: length mismatch");
  std::vector<std::size_t> order(anomaly.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return anomaly[a] < anomaly[b]; });

  // Mann-Whitney U with midranks for ties.
  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && anomaly[order[j]] == anomaly[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (positive[order[k]]) {
        rank_sum += midrank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = anomaly.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw InputError("roc_auc: need both positive and negative labels");
  const double np = static_cast<double>(n_pos);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

void write_report(std::ostream& out, const ScoreReport& report) {
  out << "taxpayer_id,score,rank,flagged\n";
  for (const auto& e : report.entries) {
    out << e.taxpayer_id << ',' << features::format_double(e.score) << ',' << e.rank << ','
        << (e.flagged ? "true" : "false") << '\n';
  }
}

}  // namespace taxbigan::scoring
