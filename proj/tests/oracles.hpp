#pragma once

// Independent reference implementations used only by tests. They take
// deliberately different routes from the library (one-pass sums in long
// double, order statistics by counting, pairwise AUC, finite differences) so
// agreement is evidence rather than tautology.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <vector>

#include "taxbigan/matrix.hpp"
#include "taxbigan/nn.hpp"

namespace oracle {

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const auto constant = [](const std::vector<double>& v) {
    for (double e : v) {
      if (e != v.front()) return false;
    }
    return true;
  };
  if (constant(x) || constant(y)) return 0.0;
  long double n = static_cast<long double>(x.size());
  long double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += static_cast<long double>(x[i]) * x[i];
    syy += static_cast<long double>(y[i]) * y[i];
    sxy += static_cast<long double>(x[i]) * y[i];
  }
  const long double num = n * sxy - sx * sy;
  const long double den = std::sqrt(n * sxx - sx * sx) * std::sqrt(n * syy - sy * sy);
  long double r = num / den;
  if (r > 1) r = 1;
  if (r < -1) r = -1;
  return static_cast<double>(r);
}

// k-th smallest (0-based) by counting, no sorting.
inline double order_statistic(const std::vector<double>& v, std::size_t k) {
  for (double candidate : v) {
    std::size_t less = 0, equal = 0;
    for (double e : v) {
      if (e < candidate) ++less;
      if (e == candidate) ++equal;
    }
    if (less <= k && k < less + equal) return candidate;
  }
  return v.front();
}

inline double quantile(const std::vector<double>& v, double q) {
  const double h = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const double a = order_statistic(v, lo);
  if (lo + 1 >= v.size()) return a;
  const double b = order_statistic(v, lo + 1);
  return a + (h - static_cast<double>(lo)) * (b - a);
}

inline std::vector<bool> iqr_flags(const std::vector<double>& v) {
  const double q1 = quantile(v, 0.25);
  const double q3 = quantile(v, 0.75);
  const double threshold = q1 - 1.5 * (q3 - q1);
  std::vector<bool> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] < threshold;
  return out;
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  long double dot = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<long double>(a[i]) * b[i];
    aa += static_cast<long double>(a[i]) * a[i];
    bb += static_cast<long double>(b[i]) * b[i];
  }
  if (aa == 0 || bb == 0) return 0.0;
  long double c = dot / std::sqrt(aa * bb);
  if (c > 1) c = 1;
  if (c < -1) c = -1;
  return static_cast<double>(c);
}

// Fraction of (positive, negative) pairs ranked correctly, ties count 1/2.
inline double auc_pairs(const std::vector<double>& score, const std::vector<bool>& positive) {
  double wins = 0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < score.size(); ++i) {
    if (!positive[i]) continue;
    for (std::size_t j = 0; j < score.size(); ++j) {
      if (positive[j]) continue;
      ++pairs;
      if (score[i] > score[j]) wins += 1;
      else if (score[i] == score[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

// Central differences of `loss` with respect to every parameter of `net`.
inline std::vector<double> numeric_gradient(taxbigan::nn::Network& net, const std::function<double()>& loss,
                                            double h = 1e-5) {
  std::vector<double> grad;
  for (auto& layer : net.layers()) {
    auto probe = [&](double& p) {
      const double saved = p;
      p = saved + h;
      const double up = loss();
      p = saved - h;
      const double down = loss();
      p = saved;
      grad.push_back((up - down) / (2 * h));
    };
    for (double& w : layer.weights.flat()) probe(w);
    for (double& b : layer.bias) probe(b);
  }
  return grad;
}

// |a - n| / max(|a|, |n|, floor). The floor keeps near-zero gradients from
// turning rounding noise into large relative errors.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

inline taxbigan::Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double lo = -1,
                                      double hi = 1) {
  std::uniform_real_distribution<double> d(lo, hi);
  taxbigan::Matrix m(r, c);
  for (double& v : m.flat()) v = d(rng);
  return m;
}

}  // namespace oracle
