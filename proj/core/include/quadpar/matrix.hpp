// Copyright 2026 The quadpar Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace quadpar {

/// Row-major dense matrix of doubles.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  /// Throws ShapeError when `values.size() != rows * cols`.
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  /// Entries drawn from uniform(-1, 1) with a seeded generator.
  static DenseMatrix random(std::size_t rows, std::size_t cols,
                            std::uint64_t seed);
  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return values_.size(); }

  double& operator()(std::size_t r, std::size_t c) {
    return values_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return values_[r * cols_ + c];
  }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::vector<double>&& release() && { return std::move(values_); }

  DenseMatrix transposed() const;
  DenseMatrix block(std::size_t row0, std::size_t col0, std::size_t rows,
                    std::size_t cols) const;
  void set_block(std::size_t row0, std::size_t col0, const DenseMatrix& src);

  bool operator==(const DenseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

/// Operand storage of a local matrix multiply C = A * B.
///   NN: A and B stored as is.
///   NT: B supplied transposed (n x k).
///   TN: A supplied transposed (k x m).
enum class MatmulMode { NN = 0, NT = 1, TN = 2 };

inline constexpr MatmulMode kAllModes[] = {MatmulMode::NN, MatmulMode::NT,
                                           MatmulMode::TN};

std::string_view to_string(MatmulMode mode);

/// C = A * B.
DenseMatrix gemm_nn(const DenseMatrix& a, const DenseMatrix& b);
/// C = A * Bt^T.
DenseMatrix gemm_nt(const DenseMatrix& a, const DenseMatrix& bt);
/// C = At^T * B.
DenseMatrix gemm_tn(const DenseMatrix& at, const DenseMatrix& b);

/// A * B computed with the kernel for `mode`; transposed operands are
/// materialised as needed. Every mode accumulates each output entry over the
/// contraction index in the same order.
DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b,
                     MatmulMode mode = MatmulMode::NN);

/// max |a - b| / max(max |b|, tiny); throws ShapeError on shape mismatch.
double max_relative_error(const DenseMatrix& a, const DenseMatrix& b);

}  // namespace quadpar
