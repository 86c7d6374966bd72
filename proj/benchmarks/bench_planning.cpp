// Copyright 2026 The quadpar Authors.
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "quadpar/models.hpp"
#include "quadpar/overlap.hpp"
#include "quadpar/perfmodel.hpp"
#include "quadpar/sim.hpp"

namespace {

using namespace quadpar;

void BM_RankConfigs(benchmark::State& state) {
  const int workers = static_cast<int>(state.range(0));
  const auto net = transformer_fc_layers(6144, 4, 8192);
  const auto cluster = synthetic_cluster(4, 25, 200);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rank_configs(net, workers, cluster));
  }
}
BENCHMARK(BM_RankConfigs)->Arg(32)->Arg(1024)->Arg(4096)->Unit(benchmark::kMicrosecond);

void BM_BuildSchedule(benchmark::State& state) {
  const auto net = transformer_fc_layers(6144, static_cast<int>(state.range(0)), 8192);
  const GridConfig config{4, 2, 2, 2};
  const auto cluster = synthetic_cluster(4, 25, 200);
  std::vector<LayerCompute> compute;
  std::vector<CommEstimate> comm;
  for (const auto& layer : net) {
    compute.push_back(roofline_compute(layer, config, 2e14));
    comm.push_back(layer_comm_time(layer, config, effective_bandwidths(config, cluster), 2,
                                     layer.m / static_cast<std::uint64_t>(config.g_data)));
  }
  const auto flags = OverlapFlags::all();
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_schedule(net, compute, comm, flags));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(net.size()));
}
BENCHMARK(BM_BuildSchedule)->Arg(4)->Arg(64)->Unit(benchmark::kMicrosecond);

}  // namespace
