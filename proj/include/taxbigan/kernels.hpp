#pragma once

// Data-parallel inner loops used by the networks, the reconstruction metrics
// and scoring. Every kernel has an OpenMP version (namespace `parallel`) and a
// plain single-threaded reference (namespace `serial`). Both accumulate in the
// same order, so their outputs are bit-identical; the tests rely on that.

#include <span>

#include "taxbigan/matrix.hpp"

namespace taxbigan::kernels {

// Below this many multiply-adds a kernel stays on the calling thread.
inline constexpr long kParallelGrain = 1 << 14;

int max_threads();

namespace serial {

// y = x * w^T + b   (x: n x in, w: out x in, b: out, y: n x out)
void affine_forward(const Matrix& x, const Matrix& w, std::span<const double> b, Matrix& y);
// dx = dy * w
void affine_backward_input(const Matrix& dy, const Matrix& w, Matrix& dx);
// dw = dy^T * x, db = column sums of dy. Overwrites dw and db.
void affine_backward_params(const Matrix& dy, const Matrix& x, Matrix& dw, std::span<double> db);
// out[i] = cosine(a_i, b_i); 0 when either row is all zeros.
void row_cosine(const Matrix& a, const Matrix& b, std::span<double> out);
// out[i] = ||a_i - b_i||_2
void row_euclidean(const Matrix& a, const Matrix& b, std::span<double> out);

}  // namespace serial

namespace parallel {

void affine_forward(const Matrix& x, const Matrix& w, std::span<const double> b, Matrix& y);
void affine_backward_input(const Matrix& dy, const Matrix& w, Matrix& dx);
void affine_backward_params(const Matrix& dy, const Matrix& x, Matrix& dw, std::span<double> db);
void row_cosine(const Matrix& a, const Matrix& b, std::span<double> out);
void row_euclidean(const Matrix& a, const Matrix& b, std::span<double> out);

}  // namespace parallel

// Cosine similarity of two equal-length vectors with the zero-vector rule.
double cosine(std::span<const double> a, std::span<const double> b);

}  // namespace taxbigan::kernels
