// Copyright 2026 The quadpar Authors.
// SPDX-License-Identifier: Apache-2.0

#include "quadpar/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include "quadpar/error.hpp"

namespace quadpar {

LayerCompute roofline_compute(const LayerSpec& layer, const GridConfig& config,
                              double flops_per_second) {
  if (!(flops_per_second > 0.0)) {
    throw ConfigError("compute throughput must be positive");
  }
  const double rows = static_cast<double>(layer.m) / config.g_data / config.g_z;
  const double k = static_cast<double>(layer.k) /
                   config.extent(layer.contract_axis());
  const double n = static_cast<double>(layer.n) /
                   config.extent(layer.output_axis());
  const double t = 2.0 * rows * k * n / flops_per_second;
  return {t, t, t};
}

RingCatalog::RingCatalog(const Grid& grid) {
  for (Axis axis : kHierarchy) {
    auto& rings = rings_[static_cast<std::size_t>(axis)];
    for (const auto& group : grid.groups(axis)) {
      rings.push_back(ring_order(group, grid.nodes()));
    }
  }
}

double simulate_axis_collective(const RingCatalog& catalog, Axis axis,
                                CollectiveKind kind, double bytes,
                                const ClusterSpec& cluster) {
  const auto rings = catalog.rings(axis);
  double slowest = 0.0;
  std::vector<RingPlan> others;
  others.reserve(rings.size());
  for (std::size_t g = 0; g < rings.size(); ++g) {
    others.clear();
    for (std::size_t h = 0; h < rings.size(); ++h) {
      if (h != g) others.push_back(rings[h]);
    }
    slowest = std::max(slowest, simulate_collective_time(rings[g], kind, bytes,
                                                         cluster, others));
  }
  return slowest;
}

CommEstimate simulate_layer_comm(const LayerSpec& layer, const Grid& grid,
                                 const RingCatalog& catalog,
                                 const ClusterSpec& cluster,
                                 int bytes_per_element) {
  CommEstimate est;
  for (const auto& c : plan_layer_collectives(layer, grid.config())) {
    const double bytes =
        static_cast<double>(c.buffer_elements) * bytes_per_element;
    est.set(c.which,
            simulate_axis_collective(catalog, c.axis, c.kind, bytes, cluster));
  }
  return est;
}

BatchSimulation simulate_batch(std::span<const LayerSpec> net,
                               const Grid& grid, const ClusterSpec& cluster,
                               double flops_per_second,
                               std::span<const OverlapFlags> flag_sets,
                               int bytes_per_element) {
  BatchSimulation sim;
  sim.config = grid.config();
  const RingCatalog catalog(grid);
  // Layers with equal shapes issue identical collectives.
  std::map<std::tuple<std::uint64_t, std::uint64_t, std::uint64_t, bool>,
           CommEstimate>
      cache;
  for (const auto& layer : net) {
    sim.compute.push_back(
        roofline_compute(layer, grid.config(), flops_per_second));
    auto key = std::make_tuple(layer.m, layer.k, layer.n, layer.transposed);
    auto it = cache.find(key);
    if (it == cache.end()) {
      it = cache
               .emplace(key, simulate_layer_comm(layer, grid, catalog, cluster,
                                                 bytes_per_element))
               .first;
    }
    sim.comm.push_back(it->second);
  }
  for (const auto& flags : flag_sets) {
    sim.batch_time[flags.name()] =
        batch_time(build_schedule(net, sim.compute, sim.comm, flags));
  }
  return sim;
}

CommVolume ring_bytes_per_rank(const LayerSpec& layer, const GridConfig& config,
                               int bytes_per_element) {
  CommVolume v;
  for (const auto& c : plan_layer_collectives(layer, config)) {
    const auto p = static_cast<std::uint64_t>(config.extent(c.axis));
    const auto steps = static_cast<std::uint64_t>(ring_steps(c.kind, static_cast<int>(p)));
    const double bytes = static_cast<double>(
        steps * (c.buffer_elements / p) *
        static_cast<std::uint64_t>(bytes_per_element));
    switch (c.which) {
      case LayerCollective::AllGatherZ: v.ag_z += bytes; break;
      case LayerCollective::ReduceScatterZ: v.rs_z += bytes; break;
      case LayerCollective::AllReduceForward: v.ar_y += bytes; break;
      case LayerCollective::AllReduceBackward: v.ar_x += bytes; break;
      case LayerCollective::AllReduceData: v.ar_data += bytes; break;
    }
  }
  return v;
}

std::vector<CommVolume> measured_volumes(const TrafficReport& report,
                                         std::size_t layers, int rank) {
  std::vector<CommVolume> out(layers);
  for (const auto& r : report.log) {
    if (r.tag.layer < 0 || static_cast<std::size_t>(r.tag.layer) >= layers) {
      continue;
    }
    if (std::find(r.members.begin(), r.members.end(), rank) ==
        r.members.end()) {
      continue;
    }
    auto& v = out[static_cast<std::size_t>(r.tag.layer)];
    const auto bytes = static_cast<double>(r.bytes_per_rank);
    if (r.tag.phase == kDataSyncPhase) {
      v.ar_data += bytes;
    } else if (r.kind == CollectiveKind::AllGather) {
      v.ag_z += bytes;
    } else if (r.kind == CollectiveKind::ReduceScatter) {
      v.rs_z += bytes;
    } else if (r.tag.phase == kForwardPhase) {
      v.ar_y += bytes;
    } else {
      v.ar_x += bytes;
    }
  }
  return out;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[idx[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman_correlation(std::span<const double> a,
                            std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw ShapeError("spearman correlation needs two equal samples of >= 2");
  }
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double mean = (n + 1.0) / 2.0;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    cov += (ra[i] - mean) * (rb[i] - mean);
    va += (ra[i] - mean) * (ra[i] - mean);
    vb += (rb[i] - mean) * (rb[i] - mean);
  }
  if (va == 0.0 || vb == 0.0) return 0.0;
  return cov / std::sqrt(va * vb);
}

RankingValidation validate_ranking(std::span<const LayerSpec> net,
                                   int total_workers,
                                   const ClusterSpec& cluster,
                                   double flops_per_second,
                                   const OverlapFlags& flags, int top_k,
                                   const RankConstraints& constraints) {
  RankingValidation out;
  out.predicted = rank_configs(net, total_workers, cluster, constraints);
  const OverlapFlags sets[] = {flags};
  for (const auto& entry : out.predicted) {
    const Grid grid = Grid::build(total_workers, entry.config, cluster.g_node);
    auto sim = simulate_batch(net, grid, cluster, flops_per_second, sets,
                              constraints.bytes_per_element);
    out.measured.push_back(sim.batch_time.at(flags.name()));
  }
  out.top_k = std::min<int>(top_k, static_cast<int>(out.predicted.size()));
  if (out.top_k > 0) {
    std::vector<double> sorted = out.measured;
    std::sort(sorted.begin(), sorted.end());
    const double cutoff = sorted[static_cast<std::size_t>(out.top_k - 1)];
    for (int i = 0; i < out.top_k; ++i) {
      if (out.measured[static_cast<std::size_t>(i)] <= cutoff) ++out.top_k_hits;
    }
  }
  if (out.predicted.size() >= 2) {
    std::vector<double> predicted;
    for (const auto& e : out.predicted) predicted.push_back(e.predicted_seconds);
    out.spearman = spearman_correlation(predicted, out.measured);
  }
  return out;
}

}  // namespace quadpar
