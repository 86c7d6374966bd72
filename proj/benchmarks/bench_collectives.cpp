// Copyright 2026 The quadpar Authors.
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <vector>

#include "quadpar/grid.hpp"
#include "quadpar/simnet.hpp"

namespace {

using namespace quadpar;

Transport::Buffers make_buffers(int p, std::size_t len) {
  Transport::Buffers out(static_cast<std::size_t>(p));
  for (int r = 0; r < p; ++r) out[static_cast<std::size_t>(r)].assign(len, 1.0 + r);
  return out;
}

ProcessGroup whole_world(int p) {
  ProcessGroup g;
  for (int r = 0; r < p; ++r) g.members.push_back(r);
  return g;
}

void BM_AllReduce(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const auto len = static_cast<std::size_t>(state.range(1));
  const auto group = whole_world(p);
  const auto in = make_buffers(p, len);
  Transport t(p, NodeMap(4));
  for (auto _ : state) {
    benchmark::DoNotOptimize(t.all_reduce(group, in));
    state.PauseTiming();
    t.take_report();
    state.ResumeTiming();
  }
  state.SetBytesProcessed(state.iterations() * p * static_cast<std::int64_t>(len * sizeof(double)));
}
BENCHMARK(BM_AllReduce)->ArgsProduct({{2, 8, 16}, {1 << 10, 1 << 16}});

void BM_AllGather(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const auto group = whole_world(p);
  const auto in = make_buffers(p, 1 << 12);
  Transport t(p, NodeMap(4));
  for (auto _ : state) {
    benchmark::DoNotOptimize(t.all_gather(group, in));
    state.PauseTiming();
    t.take_report();
    state.ResumeTiming();
  }
}
BENCHMARK(BM_AllGather)->Arg(2)->Arg(8)->Arg(16);

void BM_CollectiveTime(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const auto cluster = synthetic_cluster(4, 25, 200);
  const auto plan = ring_order(whole_world(p), NodeMap(cluster.g_node));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        simulate_collective_time(plan, CollectiveKind::AllReduce, 1 << 26, cluster));
  }
}
BENCHMARK(BM_CollectiveTime)->Arg(8)->Arg(64);

}  // namespace
