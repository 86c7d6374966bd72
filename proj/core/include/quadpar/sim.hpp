// Copyright 2026 The quadpar Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

/** @file
 *
 * Batch-time simulation: collective durations measured on the simulated
 * network (every group of an axis running its ring at once), compute from
 * a roofline, and the overlap schedule on top.
 */

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "quadpar/grid.hpp"
#include "quadpar/overlap.hpp"
#include "quadpar/perfmodel.hpp"
#include "quadpar/pmm.hpp"
#include "quadpar/simnet.hpp"

namespace quadpar {

/// Per-worker time of the three local multiplies at `flops_per_second`.
LayerCompute roofline_compute(const LayerSpec& layer, const GridConfig& config,
                              double flops_per_second);

/// Ring plans of every group along every axis of a grid.
class RingCatalog {
 public:
  explicit RingCatalog(const Grid& grid);

  std::span<const RingPlan> rings(Axis axis) const {
    return rings_[static_cast<std::size_t>(axis)];
  }

 private:
  std::array<std::vector<RingPlan>, 4> rings_;
};

/// Duration of one collective issued by every group of `axis` at once: the
/// slowest group's time.
double simulate_axis_collective(const RingCatalog& catalog, Axis axis,
                                CollectiveKind kind, double bytes,
                                const ClusterSpec& cluster);

/// A layer's five collective durations measured on the simulated network.
CommEstimate simulate_layer_comm(const LayerSpec& layer, const Grid& grid,
                                 const RingCatalog& catalog,
                                 const ClusterSpec& cluster,
                                 int bytes_per_element);

struct BatchSimulation {
  GridConfig config;
  std::vector<LayerCompute> compute;
  std::vector<CommEstimate> comm;
  /// Keyed by OverlapFlags::name().
  std::map<std::string, double> batch_time;
};

/// Simulates one training step of `net` on `grid` under each flag set.
BatchSimulation simulate_batch(std::span<const LayerSpec> net,
                               const Grid& grid, const ClusterSpec& cluster,
                               double flops_per_second,
                               std::span<const OverlapFlags> flag_sets,
                               int bytes_per_element = kDefaultBytesPerElement);

struct RankingValidation {
  std::vector<RankedConfig> predicted;  ///< model order
  /// Simulated batch time for each entry of `predicted`, same order.
  std::vector<double> measured;
  /// Of the model's top-k, how many fall in the simulator's top-k (ties at
  /// the k-th measured time count as inside).
  int top_k_hits = 0;
  int top_k = 0;
  double spearman = 0.0;
};

/// Ranks every feasible configuration of `total_workers` with the model and
/// compares against simulated batch times under `flags`.
RankingValidation validate_ranking(std::span<const LayerSpec> net,
                                   int total_workers,
                                   const ClusterSpec& cluster,
                                   double flops_per_second,
                                   const OverlapFlags& flags, int top_k = 10,
                                   const RankConstraints& constraints = {});

/// Per-rank bytes one layer's collectives send on `config`, counted from
/// the ring schedule (steps times segment size) rather than a closed form.
CommVolume ring_bytes_per_rank(const LayerSpec& layer, const GridConfig& config,
                               int bytes_per_element = kDefaultBytesPerElement);

/// Bytes `rank` sent in each of the first `layers` layers' collectives, read
/// back from a transport log.
std::vector<CommVolume> measured_volumes(const TrafficReport& report,
                                         std::size_t layers, int rank);

/// Spearman correlation of two samples, ties given their average rank.
double spearman_correlation(std::span<const double> a,
                            std::span<const double> b);

}  // namespace quadpar
