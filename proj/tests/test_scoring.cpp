#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "taxbigan/errors.hpp"
#include "taxbigan/scoring.hpp"

using namespace taxbigan;
using namespace taxbigan::scoring;

namespace {

bigan::BiGanModel identity_model(std::size_t dim) {
  nn::DenseLayer e(dim, dim, nn::Activation::identity());
  nn::DenseLayer g(dim, dim, nn::Activation::identity());
  for (std::size_t i = 0; i < dim; ++i) {
    e.weights(i, i) = 2.0;
    g.weights(i, i) = 0.5;
  }
  bigan::BiGanModel m;
  m.data_dim = dim;
  m.latent_dim = dim;
  m.encoder = nn::Network("encoder", {e});
  m.generator = nn::Network("generator", {g});
  return m;
}

// E: 3 -> 2 (LeakyReLU 0.2) -> 2, G: 2 -> 2 (LeakyReLU 0.2) -> 3.
bigan::BiGanModel hand_model() {
  nn::DenseLayer e1(3, 2, nn::Activation::leaky_relu(0.2));
  e1.weights = Matrix{{1, 0, 1}, {0, 1, -1}};
  nn::DenseLayer e2(2, 2, nn::Activation::identity());
  e2.weights = Matrix{{1, 1}, {0, 2}};
  e2.bias = {0.5, 0};
  nn::DenseLayer g1(2, 2, nn::Activation::leaky_relu(0.2));
  g1.weights = Matrix{{1, 0}, {0, 1}};
  g1.bias = {0, -1};
  nn::DenseLayer g2(2, 3, nn::Activation::identity());
  g2.weights = Matrix{{1, 0}, {0, 1}, {1, 1}};
  bigan::BiGanModel m;
  m.data_dim = 3;
  m.latent_dim = 2;
  m.encoder = nn::Network("encoder", {e1, e2});
  m.generator = nn::Network("generator", {g1, g2});
  return m;
}

}  // namespace

TEST(Quantile, Examples) {
  const std::vector<double> v{4, 1, 3, 2};
  EXPECT_DOUBLE_EQ(quantile(v, 0.25), 1.75);
  EXPECT_EQ(quantile(v, 0.0), 1.0);
  EXPECT_EQ(quantile(v, 1.0), 4.0);
  const std::vector<double> same{5, 5, 5};
  for (double q : {0.0, 0.3, 0.5, 0.99, 1.0}) EXPECT_EQ(quantile(same, q), 5.0);
  EXPECT_EQ(quantile(std::vector<double>{7}, 0.25), 7.0);
}

TEST(Quantile, Errors) {
  EXPECT_THROW(quantile(std::vector<double>{}, 0.5), InputError);
  EXPECT_THROW(quantile(std::vector<double>{1, 2}, 1.5), InputError);
  EXPECT_THROW(quantile(std::vector<double>{1, std::nan("")}, 0.5), InputError);
}

TEST(Quantile, MatchesOrderStatisticOracle) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  std::uniform_int_distribution<int> coarse(0, 5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v(1 + static_cast<std::size_t>(trial % 40));
    // Half the trials use a coarse grid so ties are common.
    for (double& x : v) x = trial % 2 ? u(rng) : coarse(rng) * 0.1;
    for (double q : {0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0}) {
      EXPECT_NEAR(quantile(v, q), oracle::quantile(v, q), 1e-15);
    }
  }
}

TEST(IqrGate, FiveScoreExample) {
  const std::vector<double> s{0.1, 0.8, 0.82, 0.85, 0.9};
  const auto r = iqr_gate(s);
  EXPECT_DOUBLE_EQ(r.q1, oracle::quantile(s, 0.25));
  EXPECT_DOUBLE_EQ(r.q3, oracle::quantile(s, 0.75));
  EXPECT_DOUBLE_EQ(r.q1, 0.8);
  EXPECT_DOUBLE_EQ(r.q3, 0.85);
  EXPECT_NEAR(r.threshold, 0.725, 1e-12);
  ASSERT_EQ(r.flagged, std::vector<std::string>{"0"});
  EXPECT_EQ(r.entries.front().rank, 1u);
  EXPECT_TRUE(r.entries.front().flagged);
}

TEST(IqrGate, EqualScoresFlagNothing) {
  const std::vector<double> s(6, 0.9);
  const auto r = iqr_gate(s);
  EXPECT_EQ(r.iqr, 0.0);
  EXPECT_EQ(r.threshold, r.q1);
  EXPECT_TRUE(r.flagged.empty());
}

TEST(IqrGate, TooFewScores) {
  EXPECT_THROW(iqr_gate(std::vector<double>{0.1, 0.2, 0.3}), InputError);
  const std::vector<std::string> ids{"a", "b"};
  EXPECT_THROW(iqr_gate(ids, std::vector<double>{0.1, 0.2, 0.3, 0.4}), InputError);
}

TEST(IqrGate, MatchesBruteForceAndRanksArePermutation) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.9, 0.05);
  std::uniform_real_distribution<double> low(-1, 0.5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> s(4 + static_cast<std::size_t>(trial * 3));
    for (double& x : s) x = std::clamp(n(rng), -1.0, 1.0);
    for (std::size_t k = 0; k < s.size() / 10; ++k) s[k] = low(rng);
    std::vector<std::string> ids(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) ids[i] = "t" + std::to_string(1000 + i);
    const auto r = iqr_gate(ids, s);
    const auto expected = oracle::iqr_flags(s);
    std::vector<bool> seen(s.size());
    for (std::size_t k = 0; k < r.entries.size(); ++k) {
      const auto& e = r.entries[k];
      EXPECT_EQ(e.rank, k + 1);
      const auto i = static_cast<std::size_t>(std::stoul(e.taxpayer_id.substr(1))) - 1000;
      EXPECT_FALSE(seen[i]);
      seen[i] = true;
      EXPECT_EQ(e.flagged, expected[i]);
      EXPECT_EQ(e.flagged, e.score < r.threshold);
      if (k > 0) EXPECT_LE(r.entries[k - 1].score, e.score);
    }
    std::size_t flagged = 0;
    for (bool f : expected) flagged += f;
    EXPECT_EQ(r.flagged_count(), flagged);
  }
}

TEST(IqrGate, ShiftInvariant) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> s(200);
  for (double& x : s) x = n(rng);
  const auto base = iqr_gate(s);
  // Power-of-two shift keeps the arithmetic exact.
  std::vector<double> shifted(s);
  for (double& x : shifted) x += 8.0;
  const auto moved = iqr_gate(shifted);
  EXPECT_EQ(moved.flagged, base.flagged);
  EXPECT_NEAR(moved.threshold, base.threshold + 8.0, 1e-12);
}

TEST(IqrGate, TiesRankedById) {
  const std::vector<std::string> ids{"c", "a", "b", "d"};
  const auto r = iqr_gate(ids, std::vector<double>{0.5, 0.5, 0.2, 0.9});
  EXPECT_EQ(r.entries[0].taxpayer_id, "b");
  EXPECT_EQ(r.entries[1].taxpayer_id, "a");
  EXPECT_EQ(r.entries[2].taxpayer_id, "c");
}

TEST(IqrGate, ReportCsv) {
  const std::vector<std::string> ids{"x", "y", "z", "w", "v"};
  const auto r = iqr_gate(ids, std::vector<double>{0.9, 0.1, 0.8, 0.85, 0.82});
  std::ostringstream out;
  write_report(out, r);
  EXPECT_EQ(out.str(),
            "taxpayer_id,score,rank,flagged\n"
            "y,0.1,1,true\n"
            "z,0.8,2,false\n"
            "v,0.82,3,false\n"
            "w,0.85,4,false\n"
            "x,0.9,5,false\n");
  const auto j = r.summary_json();
  EXPECT_EQ(j["flagged_count"], 1);
  EXPECT_EQ(j["total_count"], 5);
}

TEST(RocAuc, MatchesPairwiseOracle) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> grid(0, 20);
  std::bernoulli_distribution coin(0.3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 10 + static_cast<std::size_t>(trial);
    std::vector<double> a(n);
    std::vector<bool> pos(n);
    for (std::size_t i = 0; i < n; ++i) {
      pos[i] = coin(rng);
      a[i] = grid(rng) + (pos[i] ? 4 : 0);
    }
    pos[0] = true;
    pos[1] = false;
    EXPECT_NEAR(roc_auc(a, pos), oracle::auc_pairs(a, pos), 1e-12);
  }
}

TEST(RocAuc, EdgeCases) {
  EXPECT_EQ(roc_auc(std::vector<double>{1, 2, 3, 4}, {false, false, true, true}), 1.0);
  EXPECT_EQ(roc_auc(std::vector<double>{1, 2, 3, 4}, {true, true, false, false}), 0.0);
  EXPECT_EQ(roc_auc(std::vector<double>{1, 1, 1, 1}, {true, false, true, false}), 0.5);
  EXPECT_THROW(roc_auc(std::vector<double>{1, 2}, {true, true}), InputError);
  EXPECT_THROW(roc_auc(std::vector<double>{1, 2}, {true}), InputError);
}

TEST(Score, IdentityReconstructionScoresOne) {
  const auto m = identity_model(9);
  std::mt19937_64 rng(5);
  const Matrix data = oracle::random_matrix(20, 9, rng);
  for (double s : score(m, data)) EXPECT_NEAR(s, 1.0, 1e-15);
}

TEST(Score, HandFixedNetworks) {
  // Reconstructions by hand: (4.3, -0.28, 4.02), (1.1, -0.36, 0.74),
  // (2.3, -0.28, 2.02).
  const Matrix data{{1, 2, 3}, {-1, 0, 2}, {2, -1, 0}};
  const auto s = score(hand_model(), data);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_NEAR(s[0], 0.7165527721610235, 1e-12);
  EXPECT_NEAR(s[1], 0.12370567703861116, 1e-12);
  EXPECT_NEAR(s[2], 0.7099806157999078, 1e-12);
  EXPECT_NEAR(s[0], oracle::cosine({1, 2, 3}, {4.3, -0.28, 4.02}), 1e-12);
}

TEST(Score, RangeAndShapeChecks) {
  std::mt19937_64 rng(6);
  bigan::TrainConfig c;
  const auto m = bigan::BiGanModel::create(9, c, rng);
  const Matrix data = oracle::random_matrix(100, 9, rng, -5, 5);
  for (double s : score(m, data)) {
    EXPECT_GE(s, -1.0);
    EXPECT_LE(s, 1.0);
  }
  EXPECT_EQ(score(m, data), score(m, data));
  EXPECT_THROW(score(m, Matrix(3, 8)), ShapeError);
}
