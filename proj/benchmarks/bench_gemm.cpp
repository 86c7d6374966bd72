// Copyright 2026 The quadpar Authors.
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "quadpar/matrix.hpp"

namespace {

using quadpar::DenseMatrix;
using quadpar::MatmulMode;

// Square multiply in each layout; the tuner picks among these.
void BM_Multiply(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto mode = static_cast<MatmulMode>(state.range(1));
  const auto a = DenseMatrix::random(n, n, 1);
  const auto b = DenseMatrix::random(n, n, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(quadpar::multiply(a, b, mode));
  }
  state.SetLabel(std::string(quadpar::to_string(mode)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}
BENCHMARK(BM_Multiply)->ArgsProduct({{64, 128, 256}, {0, 1, 2}})->Unit(benchmark::kMicrosecond);

}  // namespace
