#include <gtest/gtest.h>

#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "oracles.hpp"
#include "taxbigan/errors.hpp"
#include "taxbigan/kernels.hpp"

using namespace taxbigan;

namespace {

class KernelsTest : public ::testing::TestWithParam<std::size_t> {
 protected:
  void SetUp() override {
#ifdef _OPENMP
    omp_set_num_threads(4);
#endif
  }
};

}  // namespace

// Parallel and serial kernels accumulate in the same order: results must be
// bit-identical, on batches both below and above the parallel grain.
TEST_P(KernelsTest, ParallelMatchesSerialBitwise) {
  const std::size_t rows = GetParam();
  std::mt19937_64 rng(rows);
  const Matrix x = oracle::random_matrix(rows, 13, rng);
  const Matrix w = oracle::random_matrix(32, 13, rng);
  const std::vector<double> b(32, 0.25);

  Matrix ys(rows, 32), yp(rows, 32);
  kernels::serial::affine_forward(x, w, b, ys);
  kernels::parallel::affine_forward(x, w, b, yp);
  EXPECT_EQ(ys, yp);

  const Matrix dy = oracle::random_matrix(rows, 32, rng);
  Matrix dxs(rows, 13), dxp(rows, 13);
  kernels::serial::affine_backward_input(dy, w, dxs);
  kernels::parallel::affine_backward_input(dy, w, dxp);
  EXPECT_EQ(dxs, dxp);

  Matrix dws(32, 13), dwp(32, 13);
  std::vector<double> dbs(32), dbp(32);
  kernels::serial::affine_backward_params(dy, x, dws, dbs);
  kernels::parallel::affine_backward_params(dy, x, dwp, dbp);
  EXPECT_EQ(dws, dwp);
  EXPECT_EQ(dbs, dbp);

  const Matrix a = oracle::random_matrix(rows, 9, rng);
  const Matrix c = oracle::random_matrix(rows, 9, rng);
  std::vector<double> cs(rows), cp(rows), es(rows), ep(rows);
  kernels::serial::row_cosine(a, c, cs);
  kernels::parallel::row_cosine(a, c, cp);
  kernels::serial::row_euclidean(a, c, es);
  kernels::parallel::row_euclidean(a, c, ep);
  EXPECT_EQ(cs, cp);
  EXPECT_EQ(es, ep);
}

INSTANTIATE_TEST_SUITE_P(BatchSizes, KernelsTest, ::testing::Values(1, 7, 64, 2000));

TEST(Kernels, AffineForwardMatchesHandComputation) {
  const Matrix x{{1, 2}, {3, -1}};
  const Matrix w{{1, 0}, {2, 1}, {-1, 1}};
  const std::vector<double> b{0.5, 0, 1};
  Matrix y(2, 3);
  kernels::parallel::affine_forward(x, w, b, y);
  EXPECT_EQ(y, (Matrix{{1.5, 4, 2}, {3.5, 5, -3}}));
}

TEST(Kernels, ShapeMismatchThrows) {
  Matrix x(2, 3), w(4, 2), y(2, 4);
  std::vector<double> b(4);
  EXPECT_THROW(kernels::parallel::affine_forward(x, w, b, y), ShapeError);
  std::vector<double> out(3);
  EXPECT_THROW(kernels::parallel::row_cosine(Matrix(2, 3), Matrix(2, 3), out), ShapeError);
}

TEST(Kernels, CosineSpecialCases) {
  const std::vector<double> e1{1, 0, 0, 0}, e2{0, 1, 0, 0}, d{1, 1, 0, 0}, zero(4, 0.0);
  EXPECT_DOUBLE_EQ(kernels::cosine(e1, e1), 1.0);
  EXPECT_DOUBLE_EQ(kernels::cosine(e1, e2), 0.0);
  EXPECT_NEAR(kernels::cosine(d, e1), 0.7071067811865476, 1e-15);
  EXPECT_EQ(kernels::cosine(zero, e1), 0.0);
  EXPECT_EQ(kernels::cosine(e1, zero), 0.0);
}

TEST(Kernels, CosineIsScaleInvariantAndBounded) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5, 5), scale(0.01, 100);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> a(9), r(9);
    for (auto& v : a) v = u(rng);
    for (auto& v : r) v = u(rng);
    const double c = kernels::cosine(a, r);
    ASSERT_GE(c, -1.0);
    ASSERT_LE(c, 1.0);
    const double alpha = scale(rng);
    std::vector<double> scaled(a);
    for (auto& v : scaled) v *= alpha;
    ASSERT_NEAR(kernels::cosine(scaled, r), c, 1e-12);
  }
}
