// Copyright 2026 The quadpar Authors.
// SPDX-License-Identifier: Apache-2.0

#include "quadpar/perfmodel.hpp"

#include <algorithm>
#include <limits>

#include "quadpar/error.hpp"

namespace quadpar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double over(double bytes, double beta) {
  return bytes == 0.0 ? 0.0 : bytes / beta;
}

}  // namespace

double BandwidthVector::get(Axis axis) const {
  switch (axis) {
    case Axis::X: return beta_x;
    case Axis::Y: return beta_y;
    case Axis::Z: return beta_z;
    case Axis::Data: return beta_data;
  }
  return kInf;
}

BandwidthVector effective_bandwidths(const GridConfig& config,
                                     const ClusterSpec& cluster) {
  std::array<double, 4> beta{};
  const auto g = config.as_array();
  long long inner = 1;
  for (std::size_t level = 0; level < g.size(); ++level) {
    if (g[level] == 1) {
      beta[level] = kInf;
    } else if (inner * g[level] <= cluster.g_node) {
      beta[level] = cluster.intra_bandwidth(static_cast<int>(inner), g[level]);
    } else {
      beta[level] = cluster.beta_inter /
                    static_cast<double>(std::min<long long>(cluster.g_node, inner));
    }
    inner *= g[level];
  }
  return {beta[0], beta[1], beta[2], beta[3]};
}

double CommVolume::get(LayerCollective which) const {
  switch (which) {
    case LayerCollective::AllGatherZ: return ag_z;
    case LayerCollective::AllReduceForward: return ar_y;
    case LayerCollective::AllReduceBackward: return ar_x;
    case LayerCollective::ReduceScatterZ: return rs_z;
    case LayerCollective::AllReduceData: return ar_data;
  }
  return 0.0;
}

double CommEstimate::get(LayerCollective which) const {
  switch (which) {
    case LayerCollective::AllGatherZ: return t_ag_z;
    case LayerCollective::AllReduceForward: return t_ar_y;
    case LayerCollective::AllReduceBackward: return t_ar_x;
    case LayerCollective::ReduceScatterZ: return t_rs_z;
    case LayerCollective::AllReduceData: return t_ar_data;
  }
  return 0.0;
}

void CommEstimate::set(LayerCollective which, double seconds) {
  switch (which) {
    case LayerCollective::AllGatherZ: t_ag_z = seconds; break;
    case LayerCollective::AllReduceForward: t_ar_y = seconds; break;
    case LayerCollective::AllReduceBackward: t_ar_x = seconds; break;
    case LayerCollective::ReduceScatterZ: t_rs_z = seconds; break;
    case LayerCollective::AllReduceData: t_ar_data = seconds; break;
  }
  t_comm = t_ag_z + t_rs_z + t_ar_y + t_ar_x + t_ar_data;
}

CommEstimate& CommEstimate::operator+=(const CommEstimate& other) {
  t_ag_z += other.t_ag_z;
  t_rs_z += other.t_rs_z;
  t_ar_y += other.t_ar_y;
  t_ar_x += other.t_ar_x;
  t_ar_data += other.t_ar_data;
  t_comm = t_ag_z + t_rs_z + t_ar_y + t_ar_x + t_ar_data;
  return *this;
}

CommVolume layer_comm_volume(const LayerSpec& layer, const GridConfig& config,
                             int bytes_per_element,
                             std::uint64_t batch_shard_rows) {
  const GridConfig g = layer.transposed ? config.with_xy_swapped() : config;
  const double gx = g.g_x, gy = g.g_y, gz = g.g_z, gd = g.g_data;
  const double m = static_cast<double>(batch_shard_rows);
  const double k = static_cast<double>(layer.k);
  const double n = static_cast<double>(layer.n);
  const double s = bytes_per_element;

  // Divide last so integral volumes come out exact.
  CommVolume v;
  v.ag_z = (gz - 1) * k * n * s / (gx * gy * gz);
  v.rs_z = (gz - 1) * k * n * s / (gx * gy * gz);
  v.ar_y = 2 * (gy - 1) * m * n * s / (gy * gz * gx);
  v.ar_x = 2 * (gx - 1) * m * k * s / (gx * gz * gy);
  v.ar_data = 2 * (gd - 1) * k * n * s / (gd * gx * gy * gz);
  return v;
}

CommEstimate layer_comm_time(const LayerSpec& layer, const GridConfig& config,
                             const BandwidthVector& betas,
                             int bytes_per_element,
                             std::uint64_t batch_shard_rows) {
  const CommVolume v =
      layer_comm_volume(layer, config, bytes_per_element, batch_shard_rows);
  double beta_x = betas.beta_x, beta_y = betas.beta_y;
  if (layer.transposed) std::swap(beta_x, beta_y);
  CommEstimate t;
  t.t_ag_z = over(v.ag_z, betas.beta_z);
  t.t_rs_z = over(v.rs_z, betas.beta_z);
  t.t_ar_y = over(v.ar_y, beta_y);
  t.t_ar_x = over(v.ar_x, beta_x);
  t.t_ar_data = over(v.ar_data, betas.beta_data);
  t.t_comm = t.t_ag_z + t.t_rs_z + t.t_ar_y + t.t_ar_x + t.t_ar_data;
  return t;
}

CommEstimate network_comm_estimate(std::span<const LayerSpec> net,
                                   const GridConfig& config,
                                   const ClusterSpec& cluster,
                                   int bytes_per_element) {
  CommEstimate total;
  if (net.empty()) return total;
  const BandwidthVector betas = effective_bandwidths(config, cluster);
  for (const auto& layer : net) {
    total += layer_comm_time(layer, config, betas, bytes_per_element,
                             layer.m / static_cast<std::uint64_t>(config.g_data));
  }
  return total;
}

double network_comm_time(std::span<const LayerSpec> net,
                         const GridConfig& config, const ClusterSpec& cluster,
                         int bytes_per_element) {
  return network_comm_estimate(net, config, cluster, bytes_per_element).t_comm;
}

std::vector<ConfigPredicate> feasibility_predicates(
    std::span<const LayerSpec> net, const RankConstraints& constraints) {
  std::vector<ConfigPredicate> preds = constraints.predicates;
  std::vector<LayerSpec> layers(net.begin(), net.end());
  if (constraints.require_divisible) {
    preds.emplace_back([layers](const GridConfig& config) {
      return std::all_of(layers.begin(), layers.end(), [&](const LayerSpec& l) {
        return l.divisible(config);
      });
    });
  }
  if (constraints.max_weight_bytes_per_worker) {
    const double limit = *constraints.max_weight_bytes_per_worker;
    const double s = constraints.bytes_per_element;
    preds.emplace_back([layers, limit, s](const GridConfig& config) {
      double bytes = 0.0;
      for (const auto& l : layers) {
        bytes += static_cast<double>(l.k) * static_cast<double>(l.n) * s /
                 config.tensor_size();
      }
      return bytes <= limit;
    });
  }
  return preds;
}

std::vector<RankedConfig> rank_configs(std::span<const LayerSpec> net,
                                       int total_workers,
                                       const ClusterSpec& cluster,
                                       const RankConstraints& constraints) {
  const auto preds = feasibility_predicates(net, constraints);
  std::vector<RankedConfig> ranked;
  for (const auto& config : enumerate_configs(total_workers, preds)) {
    ranked.push_back({config, network_comm_time(net, config, cluster,
                                                constraints.bytes_per_element)});
  }
  if (ranked.empty()) {
    throw InfeasibleError("no feasible grid configuration for " +
                          std::to_string(total_workers) + " workers");
  }
  // enumerate_configs is lexicographic, so a stable sort keeps ties in order.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const RankedConfig& a, const RankedConfig& b) {
                     return a.predicted_seconds < b.predicted_seconds;
                   });
  return ranked;
}

}  // namespace quadpar
