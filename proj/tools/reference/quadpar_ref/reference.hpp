// Copyright 2026 The quadpar Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Serial reference for a chain of fully connected layers, written with plain
// loops so it shares nothing with the distributed kernels it checks. Also
// generates random chains that divide evenly over a given grid.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "quadpar/grid.hpp"
#include "quadpar/matrix.hpp"
#include "quadpar/pmm.hpp"

namespace quadpar::ref {

struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> v;

  Mat() = default;
  Mat(std::size_t r, std::size_t c) : rows(r), cols(c), v(r * c, 0.0) {}
  explicit Mat(const DenseMatrix& d) : Mat(d.rows(), d.cols()) {
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) at(i, j) = d(i, j);
  }
  double& at(std::size_t i, std::size_t j) { return v[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return v[i * cols + j]; }
};

// C = A * B, C = A * B^T, C = A^T * B.
inline Mat mul(const Mat& a, const Mat& b) {
  Mat c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < b.cols; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < a.cols; ++p) s += a.at(i, p) * b.at(p, j);
      c.at(i, j) = s;
    }
  return c;
}
inline Mat mul_bt(const Mat& a, const Mat& b) {
  Mat c(a.rows, b.rows);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < b.rows; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < a.cols; ++p) s += a.at(i, p) * b.at(j, p);
      c.at(i, j) = s;
    }
  return c;
}
inline Mat mul_at(const Mat& a, const Mat& b) {
  Mat c(a.cols, b.cols);
  for (std::size_t i = 0; i < a.cols; ++i)
    for (std::size_t j = 0; j < b.cols; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < a.rows; ++p) s += a.at(p, i) * b.at(p, j);
      c.at(i, j) = s;
    }
  return c;
}

struct Step {
  double loss = 0.0;
  Mat output;
  std::vector<Mat> weight_grads;
  Mat input_grad;
};

/// Forward, loss = mean(O^2), and backward through the chain.
inline Step step(std::span<const DenseMatrix> weights, const DenseMatrix& batch) {
  std::vector<Mat> acts{Mat(batch)};
  std::vector<Mat> ws;
  for (const auto& w : weights) {
    ws.emplace_back(w);
    acts.push_back(mul(acts.back(), ws.back()));
  }
  Step out;
  out.output = acts.back();
  const double count = static_cast<double>(out.output.v.size());
  for (double x : out.output.v) out.loss += x * x;
  out.loss /= count;
  Mat grad = out.output;
  for (double& x : grad.v) x = 2.0 * x / count;
  out.weight_grads.resize(ws.size());
  for (std::size_t l = ws.size(); l-- > 0;) {
    out.weight_grads[l] = mul_at(acts[l], grad);
    grad = mul_bt(grad, ws[l]);
  }
  out.input_grad = std::move(grad);
  return out;
}

inline double loss(std::span<const DenseMatrix> weights, const DenseMatrix& batch) {
  Mat a(batch);
  for (const auto& w : weights) a = mul(a, Mat(w));
  double s = 0.0;
  for (double x : a.v) s += x * x;
  return s / static_cast<double>(a.v.size());
}

/// Largest |a - b| over the largest |b| (or 1 when b is zero).
inline double relative_error(const Mat& a, const DenseMatrix& b) {
  if (a.rows != b.rows() || a.cols != b.cols()) return INFINITY;
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) {
      diff = std::max(diff, std::abs(a.at(i, j) - b(i, j)));
      scale = std::max(scale, std::abs(a.at(i, j)));
    }
  return diff / (scale > 0.0 ? scale : 1.0);
}

/// Random chain of `layers` layers whose every dimension, and every weight
/// block's Z sharding, divides evenly over `config`; dimensions stay within
/// `max_dim` whenever the grid allows it.
inline std::vector<LayerSpec> random_chain(const GridConfig& config, int layers,
                                           std::mt19937_64& rng,
                                           std::uint64_t max_dim = 32) {
  auto pick = [&](std::uint64_t unit) {
    const std::uint64_t most = std::max<std::uint64_t>(1, max_dim / unit);
    std::uniform_int_distribution<std::uint64_t> d(1, most);
    return unit * d(rng);
  };
  const auto gx = static_cast<std::uint64_t>(config.g_x);
  const auto gy = static_cast<std::uint64_t>(config.g_y);
  const auto gz = static_cast<std::uint64_t>(config.g_z);
  const std::uint64_t m =
      pick(static_cast<std::uint64_t>(config.g_data) * gz);
  std::vector<std::uint64_t> dims;
  for (int l = 0; l <= layers; ++l) {
    dims.push_back(pick((l % 2 == 0 ? gy : gx) * gz));
  }
  return make_chain(m, dims);
}

/// Seeded weights for `net` and a seeded batch, uniform in (-1, 1).
inline std::vector<DenseMatrix> random_weights(std::span<const LayerSpec> net,
                                               std::uint64_t seed) {
  std::vector<DenseMatrix> ws;
  for (std::size_t l = 0; l < net.size(); ++l) {
    ws.push_back(DenseMatrix::random(net[l].k, net[l].n, seed + 1 + l));
  }
  return ws;
}

/// Every grid with at most `max_workers` workers.
inline std::vector<GridConfig> small_grids(int max_workers) {
  std::vector<GridConfig> out;
  for (int g = 1; g <= max_workers; ++g) {
    for (const auto& c : enumerate_configs(g, {})) out.push_back(c);
  }
  return out;
}

}  // namespace quadpar::ref
