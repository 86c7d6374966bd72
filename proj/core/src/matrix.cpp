// Copyright 2026 The quadpar Authors.
// SPDX-License-Identifier: Apache-2.0

#include "quadpar/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "quadpar/error.hpp"

namespace quadpar {

namespace {

std::string dims(const DenseMatrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols,
                         std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows * cols) {
    throw ShapeError("matrix " + std::to_string(rows) + "x" +
                     std::to_string(cols) + " given " +
                     std::to_string(values_.size()) + " values");
  }
}

DenseMatrix DenseMatrix::random(std::size_t rows, std::size_t cols,
                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  DenseMatrix m(rows, cols);
  for (auto& v : m.values_) v = dist(rng);
  return m;
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  }
  return t;
}

DenseMatrix DenseMatrix::block(std::size_t row0, std::size_t col0,
                               std::size_t rows, std::size_t cols) const {
  if (row0 + rows > rows_ || col0 + cols > cols_) {
    throw ShapeError("block exceeds matrix " + dims(*this));
  }
  DenseMatrix b(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>(
                                      (row0 + r) * cols_ + col0),
                cols,
                b.values_.begin() + static_cast<std::ptrdiff_t>(r * cols));
  }
  return b;
}

void DenseMatrix::set_block(std::size_t row0, std::size_t col0,
                            const DenseMatrix& src) {
  if (row0 + src.rows_ > rows_ || col0 + src.cols_ > cols_) {
    throw ShapeError("block " + dims(src) + " exceeds matrix " + dims(*this));
  }
  for (std::size_t r = 0; r < src.rows_; ++r) {
    std::copy_n(src.values_.begin() + static_cast<std::ptrdiff_t>(r * src.cols_),
                src.cols_,
                values_.begin() + static_cast<std::ptrdiff_t>(
                                      (row0 + r) * cols_ + col0));
  }
}

std::string_view to_string(MatmulMode mode) {
  switch (mode) {
    case MatmulMode::NN: return "NN";
    case MatmulMode::NT: return "NT";
    case MatmulMode::TN: return "TN";
  }
  return "?";
}

// The three kernels walk memory differently but each output entry is the
// sum over p = 0..k-1 in increasing p, so their results agree bit for bit.

DenseMatrix gemm_nn(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("NN multiply of " + dims(a) + " by " + dims(b));
  }
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  DenseMatrix c(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a(i, p);
      for (std::size_t j = 0; j < n; ++j) c(i, j) += aip * b(p, j);
    }
  }
  return c;
}

DenseMatrix gemm_nt(const DenseMatrix& a, const DenseMatrix& bt) {
  if (a.cols() != bt.cols()) {
    throw ShapeError("NT multiply of " + dims(a) + " by transposed " +
                     dims(bt));
  }
  const std::size_t m = a.rows(), k = a.cols(), n = bt.rows();
  DenseMatrix c(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += a(i, p) * bt(j, p);
      c(i, j) = acc;
    }
  }
  return c;
}

DenseMatrix gemm_tn(const DenseMatrix& at, const DenseMatrix& b) {
  if (at.rows() != b.rows()) {
    throw ShapeError("TN multiply of transposed " + dims(at) + " by " +
                     dims(b));
  }
  const std::size_t m = at.cols(), k = at.rows(), n = b.cols();
  DenseMatrix c(m, n);
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t i = 0; i < m; ++i) {
      const double api = at(p, i);
      for (std::size_t j = 0; j < n; ++j) c(i, j) += api * b(p, j);
    }
  }
  return c;
}

DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b,
                     MatmulMode mode) {
  switch (mode) {
    case MatmulMode::NN: return gemm_nn(a, b);
    case MatmulMode::NT: return gemm_nt(a, b.transposed());
    case MatmulMode::TN: return gemm_tn(a.transposed(), b);
  }
  return gemm_nn(a, b);
}

double max_relative_error(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError("cannot compare " + dims(a) + " with " + dims(b));
  }
  double diff = 0.0, scale = 0.0;
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) {
    diff = std::max(diff, std::abs(av[i] - bv[i]));
    scale = std::max(scale, std::abs(bv[i]));
  }
  return diff / std::max(scale, std::numeric_limits<double>::min());
}

}  // namespace quadpar
