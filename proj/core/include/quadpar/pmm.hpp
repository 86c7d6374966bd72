// Copyright 2026 The quadpar Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

/** @file
 *
 * Three-dimensional tensor-parallel fully connected layers.
 *
 * For a layer O = I * W (I is m x k, W is k x n) on a g_x * g_y * g_z grid
 * replicated g_data times, worker (i, j, k, d) holds
 *
 *   I block:  rows (d, k) of the batch, columns block j   (copied along X)
 *   W block:  rows block j, columns block i, further cut into g_z flat
 *             shards of which it keeps shard k            (copied along DATA)
 *
 * and computes
 *
 *   forward:   W~ = all-gather_Z(W^)         O = all-reduce_Y(I * W~)
 *   backward:  dI = all-reduce_X(dO * W~^T)  dW^ = reduce-scatter_Z(I^T * dO)
 *
 * A "transposed" layer exchanges the roles of X and Y, so that layer l's
 * output layout is exactly layer (l + 1)'s input layout.
 */

#include <array>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "quadpar/grid.hpp"
#include "quadpar/matrix.hpp"
#include "quadpar/simnet.hpp"

namespace quadpar {

struct LayerSpec {
  std::uint64_t m = 1;  ///< rows of the input (batch * sequence), global
  std::uint64_t k = 1;  ///< contraction dimension
  std::uint64_t n = 1;  ///< output features
  bool transposed = false;

  /// Axis that splits k (and over which the forward output is reduced).
  Axis contract_axis() const { return transposed ? Axis::X : Axis::Y; }
  /// Axis that splits n (and over which the input gradient is reduced).
  Axis output_axis() const { return transposed ? Axis::Y : Axis::X; }

  /// Throws ShapeError naming the axis whose extent does not divide the
  /// corresponding dimension.
  void check_divisible(const GridConfig& config) const;
  bool divisible(const GridConfig& config) const;

  bool operator==(const LayerSpec&) const = default;
};

/// Copies `net` with transpose flags set on every odd layer.
std::vector<LayerSpec> alternate_transposes(std::vector<LayerSpec> net);

/// Chain of layers m x dims[0] -> dims[1] -> ... with alternating transposes.
std::vector<LayerSpec> make_chain(std::uint64_t m,
                                  std::span<const std::uint64_t> dims);

/// How a global matrix is laid over the grid. Row blocks are indexed by the
/// coordinates along `row_axes` (first axis outermost), column blocks
/// likewise. With `flat_axis`, each block is flattened row-major and cut into
/// contiguous shards along that axis. Remaining axes hold copies.
struct Distribution {
  std::vector<Axis> row_axes;
  std::vector<Axis> col_axes;
  std::optional<Axis> flat_axis;

  bool operator==(const Distribution&) const = default;
};

Distribution input_distribution(const LayerSpec& layer);
Distribution output_distribution(const LayerSpec& layer);
Distribution weight_distribution(const LayerSpec& layer);

class ShardedMatrix {
 public:
  ShardedMatrix() = default;

  /// Scatters `global` over `grid`. Throws ShapeError naming the axis whose
  /// extent does not divide the matrix.
  static ShardedMatrix distribute(const DenseMatrix& global, const Grid& grid,
                                  Distribution dist);
  /// Wraps per-rank blocks produced by a computation.
  static ShardedMatrix from_blocks(std::size_t rows, std::size_t cols,
                                   Distribution dist,
                                   std::vector<DenseMatrix> blocks);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const Distribution& distribution() const { return dist_; }

  const DenseMatrix& local(int rank) const {
    return blocks_.at(static_cast<std::size_t>(rank));
  }
  const std::vector<DenseMatrix>& blocks() const { return blocks_; }

  /// Reassembles the global matrix from the copies at coordinate 0 of every
  /// replicated axis.
  DenseMatrix gather(const Grid& grid) const;

  /// True when every copy equals its coordinate-0 counterpart exactly.
  bool replicas_consistent(const Grid& grid) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Distribution dist_;
  std::vector<DenseMatrix> blocks_;
};

ShardedMatrix shard_weight(const DenseMatrix& weight, const Grid& grid,
                           const LayerSpec& layer);
ShardedMatrix shard_input(const DenseMatrix& input, const Grid& grid,
                          const LayerSpec& layer);

/// Kernel used for each of a layer's three local multiplies.
struct KernelModes {
  MatmulMode forward = MatmulMode::NN;       // I * W~
  MatmulMode input_grad = MatmulMode::NT;    // dO * W~^T
  MatmulMode weight_grad = MatmulMode::TN;   // I^T * dO
};

/// Which of a layer's five collectives a planned or recorded transfer is.
enum class LayerCollective {
  AllGatherZ,         ///< weight shards before the forward multiply
  AllReduceForward,   ///< partial outputs (Y, or X when transposed)
  AllReduceBackward,  ///< partial input gradients (X, or Y when transposed)
  ReduceScatterZ,     ///< weight gradients back to shards
  AllReduceData,      ///< data-parallel gradient sync
};

std::string_view to_string(LayerCollective which);

struct PlannedCollective {
  LayerCollective which;
  CollectiveKind kind;
  Axis axis;
  /// Full buffer length in elements (see simulate_collective_time).
  std::uint64_t buffer_elements;
};

/// The collectives one layer issues per step on `config`, derived from the
/// local block shapes. Collectives over singleton groups are omitted.
std::vector<PlannedCollective> plan_layer_collectives(const LayerSpec& layer,
                                                      const GridConfig& config);

inline constexpr std::string_view kForwardPhase = "forward";
inline constexpr std::string_view kBackwardPhase = "backward";
inline constexpr std::string_view kDataSyncPhase = "data-sync";

struct BackwardResult {
  ShardedMatrix input_grad;   ///< laid out like the layer input
  ShardedMatrix weight_grad;  ///< laid out like the weight shards
};

/// One tensor-parallel fully connected layer. Keeps the gathered weight
/// blocks and the input from the last forward pass for the backward pass.
class ParallelLinear {
 public:
  ParallelLinear(LayerSpec layer, ShardedMatrix weight, int index = 0,
                 KernelModes modes = {});

  const LayerSpec& spec() const { return layer_; }
  const ShardedMatrix& weight() const { return weight_; }

  /// Throws ProtocolError when `input` is not laid out as this layer expects.
  ShardedMatrix forward(const ShardedMatrix& input, const Grid& grid,
                        Transport& transport);

  /// Throws StateError when no forward pass preceded it.
  BackwardResult backward(const ShardedMatrix& output_grad, const Grid& grid,
                          Transport& transport);

  bool has_cache() const { return !cached_input_.empty(); }

 private:
  LayerSpec layer_;
  ShardedMatrix weight_;
  int index_;
  KernelModes modes_;
  std::vector<DenseMatrix> cached_input_;
  std::vector<DenseMatrix> cached_weight_;
};

struct StepResult {
  double loss = 0.0;
  DenseMatrix output;  ///< gathered network output
  /// Weight-gradient shards after the data-parallel sync, one per layer.
  std::vector<ShardedMatrix> weight_grads;
  DenseMatrix input_grad;  ///< gathered gradient w.r.t. the batch
  TrafficReport traffic;
  std::map<std::string, std::uint64_t> bytes_by_phase;
  std::map<std::string, std::chrono::duration<double>> wall_time_by_phase;
};

/// Mean of squared outputs over the whole batch.
double mean_square_loss(const DenseMatrix& output);

/// Forward pass through every layer, mean-square loss, backward pass, and
/// an all-reduce of weight-gradient shards across the data-parallel axis.
/// `weights` are the global matrices, sharded here. Throws ShapeError when
/// consecutive layers do not chain or transposes do not alternate.
StepResult network_step(std::span<const LayerSpec> net,
                        std::span<const DenseMatrix> weights,
                        const DenseMatrix& batch, const Grid& grid,
                        Transport& transport, KernelModes modes = {});

/// Throws ShapeError unless `net` chains and alternates transposes.
void check_chain(std::span<const LayerSpec> net);

struct MatmulShape {
  std::size_t m = 1;
  std::size_t k = 1;
  std::size_t n = 1;
};

/// Seconds one execution of `mode` takes on `shape`.
using MatmulTimer = std::function<double(MatmulMode, const MatmulShape&)>;

struct TuneResult {
  MatmulMode mode = MatmulMode::NN;
  std::array<double, 3> median_seconds{};  // indexed by MatmulMode
};

/// Times every mode `trials` times (interleaved) and picks the lowest median;
/// ties go to the earlier of NN, NT, TN.
TuneResult tune_matmul_mode(const MatmulShape& shape, const MatmulTimer& timer,
                            int trials);

/// Times the local kernels on seeded random operands. Operand preparation is
/// outside the timed region.
MatmulTimer wall_clock_timer(std::uint64_t seed);

}  // namespace quadpar
