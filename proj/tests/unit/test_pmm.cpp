// Copyright 2026 The quadpar Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "quadpar/error.hpp"
#include "quadpar/pmm.hpp"
#include "quadpar_ref/reference.hpp"

namespace quadpar {
namespace {

struct LayerRun {
  DenseMatrix output;
  DenseMatrix input_grad;
  DenseMatrix weight_grad;
  TrafficReport traffic;
};

// One layer forward then backward with `dO`, gathered.
LayerRun run_layer(const LayerSpec& layer, const DenseMatrix& in,
                   const DenseMatrix& w, const DenseMatrix& d_out,
                   const GridConfig& config) {
  const Grid grid = Grid::build(config.total(), config, 4);
  Transport t(grid.size(), grid.nodes());
  ParallelLinear pl(layer, shard_weight(w, grid, layer));
  const auto out = pl.forward(shard_input(in, grid, layer), grid, t);
  EXPECT_TRUE(out.replicas_consistent(grid));
  const auto back = pl.backward(
      ShardedMatrix::distribute(d_out, grid, output_distribution(layer)), grid, t);
  EXPECT_FALSE(pl.has_cache());
  return {out.gather(grid), back.input_grad.gather(grid),
          back.weight_grad.gather(grid), t.take_report()};
}

TEST(Sharding, SingleWorkerHoldsWholeWeight) {
  const Grid grid = Grid::build(1, {1, 1, 1, 1});
  const auto w = DenseMatrix::random(5, 3, 1);
  const auto s = shard_weight(w, grid, {4, 5, 3, false});
  // Weights are stored as flat Z shards even when Z is a singleton.
  const auto& local = s.local(0);
  ASSERT_EQ(local.rows() * local.cols(), 15u);
  EXPECT_TRUE(std::equal(local.values().begin(), local.values().end(),
                         w.values().begin()));
  EXPECT_EQ(s.gather(grid), w);
}

TEST(Sharding, EightWayWeightBlocks) {
  const Grid grid = Grid::build(8, {2, 2, 2, 1});
  const auto w = DenseMatrix::random(4, 4, 2);
  const auto s = shard_weight(w, grid, {2, 4, 4, false});
  for (int r = 0; r < 8; ++r) EXPECT_EQ(s.local(r).size(), 2u);
  EXPECT_EQ(s.gather(grid), w);
}

TEST(Sharding, RoundTripIsExactOnEveryGrid) {
  std::mt19937_64 rng(3);
  for (const auto& config : ref::small_grids(16)) {
    const Grid grid = Grid::build(config.total(), config);
    const auto net = ref::random_chain(config, 2, rng);
    for (const auto& layer : net) {
      const auto w = DenseMatrix::random(layer.k, layer.n, 9);
      const auto in = DenseMatrix::random(layer.m, layer.k, 10);
      const auto sw = shard_weight(w, grid, layer);
      const auto si = shard_input(in, grid, layer);
      ASSERT_EQ(sw.gather(grid), w) << config.to_string();
      ASSERT_EQ(si.gather(grid), in) << config.to_string();
      EXPECT_TRUE(si.replicas_consistent(grid));
      EXPECT_EQ(sw.local(0).size(),
                layer.k * layer.n / static_cast<std::size_t>(config.tensor_size()));
    }
  }
}

TEST(Sharding, IndivisibleShapesNameTheAxis) {
  const Grid grid = Grid::build(6, {3, 2, 1, 1});
  try {
    shard_weight(DenseMatrix(4, 4), grid, {2, 4, 4, false});
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find('X'), std::string::npos) << e.what();
  }
  EXPECT_FALSE((LayerSpec{2, 4, 4, false}.divisible({3, 2, 1, 1})));
}

TEST(ParallelLinear, SingleWorkerIsSerialProduct) {
  const LayerSpec layer{3, 5, 4, false};
  const auto in = DenseMatrix::random(3, 5, 1);
  const auto w = DenseMatrix::random(5, 4, 2);
  const auto d_out = DenseMatrix::random(3, 4, 3);
  const auto r = run_layer(layer, in, w, d_out, {1, 1, 1, 1});
  const ref::Mat I(in), W(w), dO(d_out);
  EXPECT_EQ(ref::relative_error(ref::mul(I, W), r.output), 0.0);
  EXPECT_EQ(ref::relative_error(ref::mul_bt(dO, W), r.input_grad), 0.0);
  EXPECT_EQ(ref::relative_error(ref::mul_at(I, dO), r.weight_grad), 0.0);
  EXPECT_EQ(r.traffic.total_bytes(), 0u);
}

TEST(ParallelLinear, IdentityInputReturnsWeight) {
  for (const GridConfig& config : {GridConfig{2, 2, 2, 1}, GridConfig{4, 1, 2, 1},
                                   GridConfig{1, 2, 4, 2}}) {
    for (bool transposed : {false, true}) {
      const LayerSpec layer{8, 8, 8, transposed};
      const auto w = DenseMatrix::random(8, 8, 4);
      const auto r = run_layer(layer, DenseMatrix::identity(8), w,
                               DenseMatrix(8, 8), config);
      EXPECT_EQ(r.output, w) << config.to_string();
    }
  }
}

TEST(ParallelLinear, RandomLayerOnEightWorkersMatchesSerial) {
  const LayerSpec layer{4, 6, 8, false};
  const auto in = DenseMatrix::random(4, 6, 5);
  const auto w = DenseMatrix::random(6, 8, 6);
  const auto d_out = DenseMatrix::random(4, 8, 7);
  const auto r = run_layer(layer, in, w, d_out, {2, 2, 2, 1});
  const ref::Mat I(in), W(w), dO(d_out);
  EXPECT_LE(ref::relative_error(ref::mul(I, W), r.output), 1e-12);
  EXPECT_LE(ref::relative_error(ref::mul_bt(dO, W), r.input_grad), 1e-12);
  EXPECT_LE(ref::relative_error(ref::mul_at(I, dO), r.weight_grad), 1e-12);
}

TEST(ParallelLinear, ZeroOutputGradientGivesZeroGradients) {
  const LayerSpec layer{4, 4, 8, true};
  const auto r = run_layer(layer, DenseMatrix::random(4, 4, 1),
                           DenseMatrix::random(4, 8, 2), DenseMatrix(4, 8), {2, 2, 1, 2});
  EXPECT_EQ(r.input_grad, DenseMatrix(4, 4));
  EXPECT_EQ(r.weight_grad, DenseMatrix(4, 8));
}

TEST(ParallelLinear, BackwardBeforeForwardIsAStateError) {
  const Grid grid = Grid::build(2, {2, 1, 1, 1});
  const LayerSpec layer{2, 2, 2, false};
  ParallelLinear pl(layer, shard_weight(DenseMatrix(2, 2), grid, layer));
  Transport t(2);
  const auto d_out =
      ShardedMatrix::distribute(DenseMatrix(2, 2), grid, output_distribution(layer));
  EXPECT_THROW(pl.backward(d_out, grid, t), StateError);
}

TEST(ParallelLinear, WrongInputLayoutIsAProtocolError) {
  const Grid grid = Grid::build(4, {2, 2, 1, 1});
  const LayerSpec layer{2, 4, 4, false};
  ParallelLinear pl(layer, shard_weight(DenseMatrix(4, 4), grid, layer));
  Transport t(4);
  const auto wrong =
      ShardedMatrix::distribute(DenseMatrix(2, 4), grid, output_distribution(layer));
  EXPECT_THROW(pl.forward(wrong, grid, t), ProtocolError);
}

TEST(NetworkStep, DataParallelHalvesMatchFullBatch) {
  const auto net = make_chain(8, std::vector<std::uint64_t>{6, 4, 6});
  const auto weights = ref::random_weights(net, 1);
  const auto batch = DenseMatrix::random(8, 6, 2);
  const Grid grid = Grid::build(2, {1, 1, 1, 2});
  Transport t(2);
  const auto got = network_step(net, weights, batch, grid, t);
  const auto want = ref::step(weights, batch);
  EXPECT_LE(std::abs(got.loss - want.loss), 1e-12 * want.loss);
  for (std::size_t l = 0; l < net.size(); ++l) {
    EXPECT_LE(ref::relative_error(want.weight_grads[l], got.weight_grads[l].gather(grid)),
              1e-12);
    EXPECT_TRUE(got.weight_grads[l].replicas_consistent(grid));
  }
  EXPECT_GT(got.bytes_by_phase.at(std::string(kDataSyncPhase)), 0u);
}

TEST(NetworkStep, TwoLayersOnEightWorkersMatchSerialProduct) {
  const auto net = make_chain(4, std::vector<std::uint64_t>{8, 4, 8});
  ASSERT_FALSE(net[0].transposed);
  ASSERT_TRUE(net[1].transposed);
  const auto weights = ref::random_weights(net, 3);
  const auto batch = DenseMatrix::random(4, 8, 4);
  const Grid grid = Grid::build(8, {2, 2, 2, 1});
  Transport t(8);
  const auto got = network_step(net, weights, batch, grid, t);
  const auto want = ref::step(weights, batch);
  EXPECT_LE(ref::relative_error(want.output, got.output), 1e-12);
  EXPECT_LE(ref::relative_error(want.input_grad, got.input_grad), 1e-12);
}

TEST(NetworkStep, NoDataTrafficWithoutDataParallelism) {
  const LayerSpec net[] = {{4, 4, 4, false}};
  const Grid grid = Grid::build(4, {2, 2, 1, 1});
  Transport t(4);
  const auto r = network_step(net, ref::random_weights(net, 1),
                              DenseMatrix::random(4, 4, 2), grid, t);
  for (const auto& rec : r.traffic.log) EXPECT_NE(rec.tag.phase, kDataSyncPhase);
  const auto it = r.bytes_by_phase.find(std::string(kDataSyncPhase));
  EXPECT_TRUE(it == r.bytes_by_phase.end() || it->second == 0u);
}

TEST(NetworkStep, RejectsBrokenChains) {
  const Grid grid = Grid::build(1, {1, 1, 1, 1});
  Transport t(1);
  const std::vector<LayerSpec> bad_dims = {{2, 3, 4, false}, {2, 5, 2, true}};
  const std::vector<LayerSpec> bad_flags = {{2, 3, 4, false}, {2, 4, 2, false}};
  const std::vector<DenseMatrix> w = {DenseMatrix(3, 4), DenseMatrix(4, 2)};
  EXPECT_THROW(network_step(bad_dims, w, DenseMatrix(2, 3), grid, t), ShapeError);
  EXPECT_THROW(network_step(bad_flags, w, DenseMatrix(2, 3), grid, t), ShapeError);
}

TEST(NetworkStep, ZShardingOnlyGivesShardedDataParallelPattern) {
  const auto net = make_chain(8, std::vector<std::uint64_t>{8, 8, 8});
  const Grid grid = Grid::build(8, {1, 1, 4, 2});
  Transport t(8);
  network_step(net, ref::random_weights(net, 1), DenseMatrix::random(8, 8, 2), grid, t);
  for (const auto& rec : t.report().log) {
    if (rec.axis == Axis::Z) {
      EXPECT_NE(rec.kind, CollectiveKind::AllReduce);
    } else {
      EXPECT_EQ(rec.axis, Axis::Data);
      EXPECT_EQ(rec.kind, CollectiveKind::AllReduce);
    }
  }
}

TEST(NetworkStep, OneDimensionalTensorParallelism) {
  // g_y = g_z = 1 on a single untransposed layer: only the X all-reduce of
  // the input gradient remains.
  const LayerSpec net[] = {{4, 8, 8, false}};
  const Grid grid = Grid::build(4, {4, 1, 1, 1});
  Transport t(4);
  network_step(net, ref::random_weights(net, 1), DenseMatrix::random(4, 8, 2), grid, t);
  ASSERT_FALSE(t.report().log.empty());
  for (const auto& rec : t.report().log) {
    EXPECT_EQ(rec.axis, Axis::X);
    EXPECT_EQ(rec.kind, CollectiveKind::AllReduce);
    EXPECT_EQ(rec.tag.phase, kBackwardPhase);
  }
}

TEST(NetworkStep, KernelModesAgree) {
  const auto net = make_chain(4, std::vector<std::uint64_t>{4, 8, 4});
  const auto weights = ref::random_weights(net, 7);
  const auto batch = DenseMatrix::random(4, 4, 8);
  const Grid grid = Grid::build(4, {2, 2, 1, 1});
  Transport t0(4);
  const auto base = network_step(net, weights, batch, grid, t0);
  for (auto f : kAllModes)
    for (auto i : kAllModes)
      for (auto w : kAllModes) {
        Transport t(4);
        const auto r = network_step(net, weights, batch, grid, t, {f, i, w});
        EXPECT_LE(max_relative_error(r.output, base.output), 1e-12);
        EXPECT_LE(max_relative_error(r.input_grad, base.input_grad), 1e-12);
      }
}

TEST(PlanLayerCollectives, SkipsSingletonsAndMatchesExecution) {
  EXPECT_TRUE(plan_layer_collectives({4, 4, 4, false}, {1, 1, 1, 1}).empty());
  const LayerSpec layer{8, 8, 8, true};
  const GridConfig config{2, 2, 2, 1};
  const auto plan = plan_layer_collectives(layer, config);
  EXPECT_EQ(plan.size(), 4u);
  const LayerSpec net[] = {layer};
  const Grid grid = Grid::build(8, config);
  Transport t(8);
  network_step(net, ref::random_weights(net, 1), DenseMatrix::random(8, 8, 2), grid, t);
  for (const auto& p : plan) {
    bool found = false;
    for (const auto& rec : t.report().log) {
      found |= rec.axis == p.axis && rec.kind == p.kind &&
               rec.buffer_elements == p.buffer_elements;
    }
    EXPECT_TRUE(found) << to_string(p.which);
  }
}

TEST(Tuner, EqualCostPicksNN) {
  const MatmulTimer flat = [](MatmulMode, const MatmulShape&) { return 1.0; };
  EXPECT_EQ(tune_matmul_mode({8, 8, 8}, flat, 3).mode, MatmulMode::NN);
}

TEST(Tuner, NeverPicksEightTimesSlowerMode) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(0.8, 1.25);
    const MatmulTimer timer = [&](MatmulMode m, const MatmulShape&) {
      return (m == MatmulMode::TN ? 8.0 : 1.0) * jitter(rng);
    };
    const auto r = tune_matmul_mode({64, 64, 64}, timer, 5);
    EXPECT_NE(r.mode, MatmulMode::TN);
    for (double t : r.median_seconds) {
      EXPECT_LE(r.median_seconds[static_cast<std::size_t>(r.mode)], t);
    }
  }
}

TEST(Tuner, RejectsZeroTrials) {
  const MatmulTimer flat = [](MatmulMode, const MatmulShape&) { return 1.0; };
  EXPECT_THROW(tune_matmul_mode({1, 1, 1}, flat, 0), ConfigError);
}

TEST(Tuner, WallClockTimerMeasuresSomething) {
  const auto timer = wall_clock_timer(1);
  EXPECT_GE(timer(MatmulMode::NT, {16, 16, 16}), 0.0);
}

}  // namespace
}  // namespace quadpar
