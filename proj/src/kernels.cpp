#include "taxbigan/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "taxbigan/errors.hpp"

namespace taxbigan::kernels {

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace {

void check_affine(const Matrix& x, const Matrix& w, std::size_t bias_len, const Matrix& y) {
  if (x.cols() != w.cols() || bias_len != w.rows() || y.rows() != x.rows() || y.cols() != w.rows()) {
    throw ShapeError("affine_forward: x" + x.shape_str() + " w" + w.shape_str() + " y" + y.shape_str());
  }
}

void check_backward_input(const Matrix& dy, const Matrix& w, const Matrix& dx) {
  if (dy.cols() != w.rows() || dx.rows() != dy.rows() || dx.cols() != w.cols()) {
    throw ShapeError("affine_backward_input: dy" + dy.shape_str() + " w" + w.shape_str() + " dx" +
                     dx.shape_str());
  }
}

void check_backward_params(const Matrix& dy, const Matrix& x, const Matrix& dw, std::size_t db_len) {
  if (dy.rows() != x.rows() || dw.rows() != dy.cols() || dw.cols() != x.cols() || db_len != dy.cols()) {
    throw ShapeError("affine_backward_params: dy" + dy.shape_str() + " x" + x.shape_str() + " dw" +
                     dw.shape_str());
  }
}

void check_rowwise(const Matrix& a, const Matrix& b, std::size_t out_len) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || out_len != a.rows()) {
    throw ShapeError("row-wise kernel: a" + a.shape_str() + " b" + b.shape_str());
  }
}

inline double cosine_row(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dot += a[k] * b[k];
    aa += a[k] * a[k];
    bb += b[k] * b[k];
  }
  if (aa == 0.0 || bb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
}

inline double euclidean_row(std::span<const double> a, std::span<const double> b) {
  double ss = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    ss += d * d;
  }
  return std::sqrt(ss);
}

}  // namespace

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("cosine: length mismatch");
  return cosine_row(a, b);
}

namespace serial {

void affine_forward(const Matrix& x, const Matrix& w, std::span<const double> b, Matrix& y) {
  check_affine(x, w, b.size(), y);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < w.rows(); ++j) {
      double acc = b[j];
      for (std::size_t k = 0; k < x.cols(); ++k) acc += x(i, k) * w(j, k);
      y(i, j) = acc;
    }
  }
}

void affine_backward_input(const Matrix& dy, const Matrix& w, Matrix& dx) {
  check_backward_input(dy, w, dx);
  for (std::size_t i = 0; i < dy.rows(); ++i) {
    for (std::size_t k = 0; k < w.cols(); ++k) {
      double acc = 0.0;
      for (std::size_t j = 0; j < w.rows(); ++j) acc += dy(i, j) * w(j, k);
      dx(i, k) = acc;
    }
  }
}

void affine_backward_params(const Matrix& dy, const Matrix& x, Matrix& dw, std::span<double> db) {
  check_backward_params(dy, x, dw, db.size());
  for (std::size_t j = 0; j < dw.rows(); ++j) {
    auto dwj = dw.row(j);
    std::fill(dwj.begin(), dwj.end(), 0.0);
    // Row-major sweep over x; each dw(j, k) still sums i in ascending order.
    for (std::size_t i = 0; i < dy.rows(); ++i) {
      const double d = dy(i, j);
      const auto xi = x.row(i);
      for (std::size_t k = 0; k < dwj.size(); ++k) dwj[k] += d * xi[k];
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < dy.rows(); ++i) acc += dy(i, j);
    db[j] = acc;
  }
}

void row_cosine(const Matrix& a, const Matrix& b, std::span<double> out) {
  check_rowwise(a, b, out.size());
  for (std::size_t i = 0; i < a.rows(); ++i) out[i] = cosine_row(a.row(i), b.row(i));
}

void row_euclidean(const Matrix& a, const Matrix& b, std::span<double> out) {
  check_rowwise(a, b, out.size());
  for (std::size_t i = 0; i < a.rows(); ++i) out[i] = euclidean_row(a.row(i), b.row(i));
}

}  // namespace serial

namespace parallel {

void affine_forward(const Matrix& x, const Matrix& w, std::span<const double> b, Matrix& y) {
  check_affine(x, w, b.size(), y);
  const auto n = static_cast<std::ptrdiff_t>(x.rows());
  const long work = static_cast<long>(x.rows() * w.rows() * x.cols());
#pragma omp parallel for schedule(static) if (work > kParallelGrain)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto xi = x.row(static_cast<std::size_t>(i));
    auto yi = y.row(static_cast<std::size_t>(i));
    for (std::size_t j = 0; j < w.rows(); ++j) {
      const auto wj = w.row(j);
      double acc = b[j];
      for (std::size_t k = 0; k < xi.size(); ++k) acc += xi[k] * wj[k];
      yi[j] = acc;
    }
  }
}

void affine_backward_input(const Matrix& dy, const Matrix& w, Matrix& dx) {
  check_backward_input(dy, w, dx);
  const auto n = static_cast<std::ptrdiff_t>(dy.rows());
  const long work = static_cast<long>(dy.rows() * w.rows() * w.cols());
#pragma omp parallel for schedule(static) if (work > kParallelGrain)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto dyi = dy.row(static_cast<std::size_t>(i));
    auto dxi = dx.row(static_cast<std::size_t>(i));
    for (std::size_t k = 0; k < w.cols(); ++k) {
      double acc = 0.0;
      for (std::size_t j = 0; j < w.rows(); ++j) acc += dyi[j] * w(j, k);
      dxi[k] = acc;
    }
  }
}

void affine_backward_params(const Matrix& dy, const Matrix& x, Matrix& dw, std::span<double> db) {
  check_backward_params(dy, x, dw, db.size());
  const auto outs = static_cast<std::ptrdiff_t>(dw.rows());
  const long work = static_cast<long>(dy.rows() * dw.rows() * dw.cols());
#pragma omp parallel for schedule(static) if (work > kParallelGrain)
  for (std::ptrdiff_t jj = 0; jj < outs; ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    auto dwj = dw.row(j);
    std::fill(dwj.begin(), dwj.end(), 0.0);
    for (std::size_t i = 0; i < dy.rows(); ++i) {
      const double d = dy(i, j);
      const auto xi = x.row(i);
      for (std::size_t k = 0; k < dwj.size(); ++k) dwj[k] += d * xi[k];
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < dy.rows(); ++i) acc += dy(i, j);
    db[j] = acc;
  }
}

void row_cosine(const Matrix& a, const Matrix& b, std::span<double> out) {
  check_rowwise(a, b, out.size());
  const auto n = static_cast<std::ptrdiff_t>(a.rows());
  const long work = static_cast<long>(a.size());
#pragma omp parallel for schedule(static) if (work > kParallelGrain)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(i);
    out[r] = cosine_row(a.row(r), b.row(r));
  }
}

void row_euclidean(const Matrix& a, const Matrix& b, std::span<double> out) {
  check_rowwise(a, b, out.size());
  const auto n = static_cast<std::ptrdiff_t>(a.rows());
  const long work = static_cast<long>(a.size());
#pragma omp parallel for schedule(static) if (work > kParallelGrain)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(i);
    out[r] = euclidean_row(a.row(r), b.row(r));
  }
}

}  // namespace parallel

}  // namespace taxbigan::kernels
