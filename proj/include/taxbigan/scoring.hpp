#pragma once

// Reconstruction-based anomaly scores and the quartile/IQR outlier gate.

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "taxbigan/bigan.hpp"
#include "taxbigan/matrix.hpp"

namespace taxbigan::scoring {

// score_i = cosine(x_i, G(E(x_i))). Rows of `data` are normalized features.
std::vector<double> score(const bigan::BiGanModel& model, const Matrix& data);

// Linear interpolation between order statistics at position q*(n-1).
double quantile(std::span<const double> values, double q);

struct ScoreEntry {
  std::string taxpayer_id;
  double score = 0;
  std::size_t rank = 0;  // 1 = lowest score
  bool flagged = false;
};

struct ScoreReport {
  std::vector<ScoreEntry> entries;  // ascending by score, ties by taxpayer id
  double q1 = 0;
  double q3 = 0;
  double iqr = 0;
  double threshold = 0;  // q1 - 1.5 * iqr
  std::vector<std::string> flagged;  // in rank order

  std::size_t flagged_count() const { return flagged.size(); }
  nlohmann::json summary_json() const;
};

inline constexpr double kIqrMultiplier = 1.5;
inline constexpr std::size_t kMinGateScores = 4;

// Flags every score strictly below q1 - 1.5 * iqr. Needs at least 4 scores.
ScoreReport iqr_gate(std::span<const std::string> ids, std::span<const double> scores);
ScoreReport iqr_gate(std::span<const double> scores);

// Area under the ROC curve for `anomaly` as a detector of positive labels.
// Ties count one half. Throws InputError when either class is empty.
double roc_auc(std::span<const double> anomaly, const std::vector<bool>& positive);

// taxpayer_id,score,rank,flagged
void write_report(std::ostream& out, const ScoreReport& report);

}  // namespace taxbigan::scoring
