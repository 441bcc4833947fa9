#pragma once

// Hand-built return series shared by the feature tests and the acceptance run.

#include <array>
#include <string>

#include "taxbigan/features.hpp"

namespace fixture {

inline taxbigan::features::MonthlyReturn month(const std::string& id, int m, std::array<double, 9> v) {
  taxbigan::features::MonthlyReturn r;
  r.taxpayer_id = id;
  r.period = {2020, m};
  r.total_sales = v[0];
  r.total_purchases = v[1];
  r.sgst_liability = v[2];
  r.cgst_liability = v[3];
  r.igst_liability = v[4];
  r.sgst_itc = v[5];
  r.cgst_itc = v[6];
  r.igst_itc = v[7];
  r.sgst_cash_paid = v[8];
  return r;
}

// Six irregular months; expected values computed offline with numpy.corrcoef
// and plain sums.
inline taxbigan::features::TaxpayerSeries hand_series() {
  taxbigan::features::TaxpayerSeries s{"T1", {}};
  const std::array<std::array<double, 9>, 6> rows{{
      {1000, 800, 60, 60, 50, 40, 40, 60, 25},
      {1200, 950, 70, 70, 80, 45, 45, 80, 30},
      {900, 700, 55, 55, 40, 35, 35, 55, 22},
      {1500, 1300, 95, 95, 90, 60, 60, 110, 38},
      {1300, 1000, 75, 75, 85, 50, 50, 85, 40},
      {1100, 900, 68, 68, 55, 42, 42, 70, 20},
  }};
  for (int m = 0; m < 6; ++m) s.months.push_back(month("T1", m + 1, rows[static_cast<std::size_t>(m)]));
  return s;
}

inline constexpr std::array<double, 9> kHandExpected{
    0.9984156178920286, 0.9752032674008019, 0.7577848231661388, 0.846090553040133,  0.9919352150082841,
    0.9974177310666114, 1.238938053097345,  0.4581673306772908, 2.708695652173913};

// Total liability exactly 0.1 x sales in every month.
inline taxbigan::features::TaxpayerSeries proportional_series() {
  taxbigan::features::TaxpayerSeries s{"P", {}};
  for (int m = 1; m <= 8; ++m) {
    const double sales = 1000.0 + 137.0 * m * m - 40.0 * m;
    const double liab = 0.1 * sales;
    s.months.push_back(month("P", m, {sales, 0.8 * sales, liab / 3, liab / 3, liab / 3, 10, 10, 20, 5}));
  }
  return s;
}

}  // namespace fixture
