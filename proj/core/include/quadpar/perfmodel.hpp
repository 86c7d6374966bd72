// Copyright 2026 The quadpar Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

/** @file
 *
 * Analytical communication model for the 4D hybrid-parallel layer.
 *
 * Every collective is a bandwidth-only ring: a rank moving b bytes at an
 * effective per-peer bandwidth beta spends b / beta seconds. Per layer, with
 * element size s and per-replica batch rows m:
 *
 *   t_ag_z    = (G_z - 1)            * k n / (G_x G_y G_z) * s / beta_z
 *   t_rs_z    = (G_z - 1) / G_z      * k n / (G_x G_y)     * s / beta_z
 *   t_ar_y    = 2 (G_y - 1) / G_y    * m n / (G_z G_x)     * s / beta_y
 *   t_ar_x    = 2 (G_x - 1) / G_x    * m k / (G_z G_y)     * s / beta_x
 *   t_ar_data = 2 (G_d - 1) / G_d    * k n / (G_x G_y G_z) * s / beta_data
 *
 * with G_x and G_y (and beta_x, beta_y) exchanged for transposed layers.
 * Only communication is modelled; compute never enters these estimates.
 */

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "quadpar/grid.hpp"
#include "quadpar/pmm.hpp"
#include "quadpar/simnet.hpp"

namespace quadpar {

inline constexpr int kDefaultBytesPerElement = 2;

/// Effective per-peer bandwidth (bytes/s) seen by each hierarchy level.
/// Levels of extent 1 hold +infinity: they never communicate.
struct BandwidthVector {
  double beta_x = 0.0;
  double beta_y = 0.0;
  double beta_z = 0.0;
  double beta_data = 0.0;

  double get(Axis axis) const;
};

/// For level i in (X, Y, Z, DATA) with inner = prod_{j<i} G_j:
///   inner * G_i <= g_node:  intra_table[(inner, G_i)]
///   otherwise:              beta_inter / min(g_node, inner)
/// Throws ConfigError when an intra-node entry is missing.
BandwidthVector effective_bandwidths(const GridConfig& config,
                                     const ClusterSpec& cluster);

/// Bytes each rank sends in each collective of one layer.
struct CommVolume {
  double ag_z = 0.0;
  double rs_z = 0.0;
  double ar_y = 0.0;
  double ar_x = 0.0;
  double ar_data = 0.0;

  double total() const { return ag_z + rs_z + ar_y + ar_x + ar_data; }
  double get(LayerCollective which) const;
};

/// Seconds per collective of one layer.
struct CommEstimate {
  double t_ag_z = 0.0;
  double t_rs_z = 0.0;
  double t_ar_y = 0.0;     ///< forward output all-reduce
  double t_ar_x = 0.0;     ///< backward input-gradient all-reduce
  double t_ar_data = 0.0;
  double t_comm = 0.0;     ///< sum of the five terms

  double get(LayerCollective which) const;
  void set(LayerCollective which, double seconds);
  CommEstimate& operator+=(const CommEstimate& other);
};

/// `batch_shard_rows` is the number of rows one data-parallel replica
/// processes (m / G_data).
CommVolume layer_comm_volume(const LayerSpec& layer, const GridConfig& config,
                             int bytes_per_element,
                             std::uint64_t batch_shard_rows);

CommEstimate layer_comm_time(const LayerSpec& layer, const GridConfig& config,
                             const BandwidthVector& betas,
                             int bytes_per_element,
                             std::uint64_t batch_shard_rows);

/// Sum of per-layer estimates; each layer's batch rows are split over
/// G_data. Layers carry their own transpose flags.
CommEstimate network_comm_estimate(
    std::span<const LayerSpec> net, const GridConfig& config,
    const ClusterSpec& cluster,
    int bytes_per_element = kDefaultBytesPerElement);

double network_comm_time(std::span<const LayerSpec> net,
                         const GridConfig& config, const ClusterSpec& cluster,
                         int bytes_per_element = kDefaultBytesPerElement);

struct RankConstraints {
  /// Drop configurations on which some layer is not evenly divisible.
  bool require_divisible = true;
  /// Upper bound on weight bytes held per worker (weights are sharded over
  /// G_x G_y G_z).
  std::optional<double> max_weight_bytes_per_worker;
  int bytes_per_element = kDefaultBytesPerElement;
  std::vector<ConfigPredicate> predicates;
};

struct RankedConfig {
  GridConfig config;
  double predicted_seconds = 0.0;
};

/// Feasible configurations in ascending predicted communication time, ties
/// by (g_x, g_y, g_z, g_data). Throws InfeasibleError when none remain.
std::vector<RankedConfig> rank_configs(std::span<const LayerSpec> net,
                                       int total_workers,
                                       const ClusterSpec& cluster,
                                       const RankConstraints& constraints = {});

/// Predicates implied by `constraints` for `net`.
std::vector<ConfigPredicate> feasibility_predicates(
    std::span<const LayerSpec> net, const RankConstraints& constraints);

}  // namespace quadpar
