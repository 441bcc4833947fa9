// Serial reference vs OpenMP kernels. Arg(0) is the row count; the layer is
// 64 wide so a batch of 4096 rows is well past the parallel grain.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "taxbigan/kernels.hpp"
#include "taxbigan/matrix.hpp"

namespace {

using taxbigan::Matrix;
namespace k = taxbigan::kernels;

constexpr std::size_t kWidth = 64;

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1, 1);
  Matrix m(r, c);
  for (double& v : m.flat()) v = d(rng);
  return m;
}

template <auto Kernel>
void BM_Forward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix x = random_matrix(n, kWidth, 1);
  const Matrix w = random_matrix(kWidth, kWidth, 2);
  const std::vector<double> b(kWidth, 0.1);
  Matrix y(n, kWidth);
  for (auto _ : state) {
    Kernel(x, w, b, y);
    benchmark::DoNotOptimize(y.flat().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n));
}

template <auto Kernel>
void BM_BackwardInput(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix dy = random_matrix(n, kWidth, 3);
  const Matrix w = random_matrix(kWidth, kWidth, 4);
  Matrix dx(n, kWidth);
  for (auto _ : state) {
    Kernel(dy, w, dx);
    benchmark::DoNotOptimize(dx.flat().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n));
}

template <auto Kernel>
void BM_BackwardParams(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix dy = random_matrix(n, kWidth, 5);
  const Matrix x = random_matrix(n, kWidth, 6);
  Matrix dw(kWidth, kWidth);
  std::vector<double> db(kWidth);
  for (auto _ : state) {
    Kernel(dy, x, dw, db);
    benchmark::DoNotOptimize(dw.flat().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n));
}

template <auto Kernel>
void BM_RowCosine(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(n, 9, 7);
  const Matrix b = random_matrix(n, 9, 8);
  std::vector<double> out(n);
  for (auto _ : state) {
    Kernel(a, b, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n));
}

#define SIZES RangeMultiplier(8)->Range(64, 32768)

BENCHMARK(BM_Forward<k::serial::affine_forward>)->Name("affine_forward/serial")->SIZES;
BENCHMARK(BM_Forward<k::parallel::affine_forward>)->Name("affine_forward/parallel")->SIZES;
BENCHMARK(BM_BackwardInput<k::serial::affine_backward_input>)->Name("affine_backward_input/serial")->SIZES;
BENCHMARK(BM_BackwardInput<k::parallel::affine_backward_input>)->Name("affine_backward_input/parallel")->SIZES;
BENCHMARK(BM_BackwardParams<k::serial::affine_backward_params>)->Name("affine_backward_params/serial")->SIZES;
BENCHMARK(BM_BackwardParams<k::parallel::affine_backward_params>)->Name("affine_backward_params/parallel")->SIZES;
BENCHMARK(BM_RowCosine<k::serial::row_cosine>)->Name("row_cosine/serial")->SIZES;
BENCHMARK(BM_RowCosine<k::parallel::row_cosine>)->Name("row_cosine/parallel")->SIZES;

}  // namespace

BENCHMARK_MAIN();
