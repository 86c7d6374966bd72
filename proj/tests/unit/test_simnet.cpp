// Copyright 2026 The quadpar Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <numeric>
#include <random>

#include "quadpar/error.hpp"
#include "quadpar/simnet.hpp"

namespace quadpar {
namespace {

using Buffers = Transport::Buffers;

ProcessGroup group_of(std::vector<int> members, Axis axis = Axis::X) {
  return {axis, std::move(members)};
}

Buffers random_buffers(int p, std::size_t len, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Buffers out(static_cast<std::size_t>(p), std::vector<double>(len));
  for (auto& b : out)
    for (auto& x : b) x = u(rng);
  return out;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

TEST(RingOrder, CrossingsFollowNodeBoundaries) {
  const NodeMap nodes(4);
  EXPECT_EQ(ring_order(group_of({0, 1, 2, 3, 4, 5, 6, 7}), nodes).crossings, 2);
  EXPECT_EQ(ring_order(group_of({0, 1, 2, 3}), nodes).crossings, 0);
  const auto a = ring_order(group_of({0, 2, 4, 6}), nodes);
  const auto b = ring_order(group_of({1, 3, 5, 7}), nodes);
  EXPECT_EQ(a.crossings, 2);
  EXPECT_EQ(b.crossings, 2);
  EXPECT_EQ(a.crossings + b.crossings, 4);
  EXPECT_EQ(a.stride, 2);
  EXPECT_EQ(ring_order(group_of({5}), nodes).crossings, 0);
}

TEST(Transport, AllGatherSmall) {
  Transport t(2);
  const auto out = t.all_gather(group_of({0, 1}), {{1, 2}, {3, 4}});
  EXPECT_EQ(out, (Buffers{{1, 2, 3, 4}, {1, 2, 3, 4}}));
}

TEST(Transport, SingletonCollectivesAreIdentity) {
  Transport t(1);
  const Buffers in{{1.5, -2.0, 3.0}};
  EXPECT_EQ(t.all_gather(group_of({0}), in), in);
  EXPECT_EQ(t.reduce_scatter(group_of({0}), in), in);
  EXPECT_EQ(t.all_reduce(group_of({0}), in), in);
  EXPECT_EQ(t.report().total_bytes(), 0u);
}

TEST(Transport, AllGatherVolumeAndContent) {
  Transport t(4, NodeMap(1), 2);
  const auto shards = random_buffers(4, 512, 1);  // 1024 bytes each
  const auto out = t.all_gather(group_of({0, 1, 2, 3}), shards);
  std::vector<double> naive;
  for (const auto& s : shards) naive.insert(naive.end(), s.begin(), s.end());
  for (const auto& o : out) EXPECT_TRUE(bit_equal(o, naive));
  for (int r = 0; r < 4; ++r) EXPECT_EQ(t.report().bytes_sent[r], 3072u);
}

TEST(Transport, ReduceScatterSmall) {
  Transport t(2);
  const auto out = t.reduce_scatter(group_of({0, 1}), {{1, 2, 3, 4}, {5, 6, 7, 8}});
  EXPECT_EQ(out, (Buffers{{6, 8}, {10, 12}}));
}

TEST(Transport, ReduceScatterMatchesRingOrderSum) {
  for (int p = 2; p <= 8; ++p) {
    std::vector<int> m(static_cast<std::size_t>(p));
    std::iota(m.begin(), m.end(), 0);
    const auto group = group_of(m);
    const std::size_t seg = 5;
    const auto in = random_buffers(p, seg * static_cast<std::size_t>(p), 10 + p);
    Transport t(p, NodeMap(3));
    const auto out = t.reduce_scatter(group, in);
    const auto order = ring_order(group, NodeMap(3)).order;
    for (int q = 0; q < p; ++q) {
      // Segment owned by ring position q: summed from q + 1 around to q.
      const int owner = order[static_cast<std::size_t>(q)];
      const int idx = group.index_of(owner);
      std::vector<double> want(seg);
      for (std::size_t e = 0; e < seg; ++e) {
        const std::size_t at = static_cast<std::size_t>(idx) * seg + e;
        double s = in[static_cast<std::size_t>(group.index_of(order[(q + 1) % p]))][at];
        for (int step = 2; step <= p; ++step) {
          s += in[static_cast<std::size_t>(group.index_of(order[(q + step) % p]))][at];
        }
        want[e] = s;
      }
      EXPECT_TRUE(bit_equal(out[static_cast<std::size_t>(idx)], want)) << "p=" << p;
    }
  }
}

TEST(Transport, AllReduceSmall) {
  Transport t(2);
  EXPECT_EQ(t.all_reduce(group_of({0, 1}), {{1, 2}, {3, 4}}),
            (Buffers{{4, 6}, {4, 6}}));
}

TEST(Transport, AllReduceIsReduceScatterThenAllGather) {
  for (int p = 2; p <= 6; ++p) {
    std::vector<int> m;
    for (int r = 0; r < p; ++r) m.push_back(2 * r + 1);
    const auto group = group_of(m, Axis::Y);
    const auto in = random_buffers(p, 4 * static_cast<std::size_t>(p), 50 + p);
    Transport a(2 * p), b(2 * p);
    const auto fused = a.all_reduce(group, in);
    const auto split = b.all_gather(group, b.reduce_scatter(group, in));
    for (int r = 0; r < p; ++r) {
      EXPECT_TRUE(bit_equal(fused[static_cast<std::size_t>(r)],
                            split[static_cast<std::size_t>(r)]));
    }
  }
}

TEST(Transport, AllReducePadsUnevenLengths) {
  Transport t(3);
  const auto out = t.all_reduce(group_of({0, 1, 2}), {{1, 2}, {3, 4}, {5, 6}});
  for (const auto& o : out) EXPECT_EQ(o, (std::vector<double>{9, 12}));
}

TEST(Transport, ProtocolErrors) {
  Transport t(2);
  EXPECT_THROW(t.all_gather(group_of({0, 1}), {{1, 2}, {3}}), ProtocolError);
  EXPECT_THROW(t.reduce_scatter(group_of({0, 1}), {{1, 2, 3}, {4, 5, 6}}),
               ProtocolError);
  EXPECT_THROW(t.all_reduce(group_of({0, 1}), {{1}}), ProtocolError);
}

TEST(Transport, BytesMatchRingVolumes) {
  for (int p = 1; p <= 8; ++p) {
    std::vector<int> m(static_cast<std::size_t>(p));
    std::iota(m.begin(), m.end(), 0);
    const auto group = group_of(m);
    for (std::uint64_t payload : {1ull, 7ull, 1000ull, 65536ull, 1ull << 20}) {
      const auto up = static_cast<std::size_t>((payload + p - 1) / p * p);
      const auto P = static_cast<std::uint64_t>(p);
      {
        Transport t(p, NodeMap(2), 1);
        t.all_gather(group, Buffers(m.size(), std::vector<double>(payload, 1.0)));
        for (int r = 0; r < p; ++r) EXPECT_EQ(t.report().bytes_sent[r], (P - 1) * payload);
      }
      {
        Transport t(p, NodeMap(2), 1);
        t.reduce_scatter(group, Buffers(m.size(), std::vector<double>(up, 1.0)));
        for (int r = 0; r < p; ++r) EXPECT_EQ(t.report().bytes_sent[r], (P - 1) * up / P);
      }
      {
        Transport t(p, NodeMap(2), 1);
        t.all_reduce(group, Buffers(m.size(), std::vector<double>(up, 1.0)));
        for (int r = 0; r < p; ++r) {
          EXPECT_EQ(t.report().bytes_sent[r], 2 * (P - 1) * up / P);
        }
        EXPECT_EQ(t.report().total_bytes(), P * 2 * (P - 1) * up / P);
      }
    }
  }
}

TEST(Transport, IntraAndInterBytesSplitByNode) {
  Transport t(8, NodeMap(4), 1);
  t.all_gather(group_of({0, 1, 2, 3, 4, 5, 6, 7}), Buffers(8, std::vector<double>(10)));
  // 7 steps x 8 edges x 10 bytes, 2 of the 8 ring edges cross nodes.
  EXPECT_EQ(t.report().inter_bytes, 7u * 2 * 10);
  EXPECT_EQ(t.report().intra_bytes, 7u * 6 * 10);
  ASSERT_EQ(t.report().log.size(), 1u);
  EXPECT_EQ(t.report().log[0].bytes_per_rank, 70u);
}

ClusterSpec fast_intra(int g_node, double beta_inter) {
  ClusterSpec c;
  c.g_node = g_node;
  c.beta_inter = beta_inter;
  for (int inner = 1; inner <= g_node; ++inner)
    for (int size = 1; inner * size <= g_node; ++size)
      c.intra_table[{inner, size}] = 1e15;
  return c;
}

TEST(CollectiveTime, SingleRingAcrossTwoNodes) {
  const auto cluster = fast_intra(4, 25e9);
  const auto plan = ring_order(group_of({0, 1, 2, 3, 4, 5, 6, 7}), NodeMap(4));
  const double bytes = 8e9;
  EXPECT_DOUBLE_EQ(simulate_collective_time(plan, CollectiveKind::AllGather, bytes, cluster),
                   7 * (bytes / 8) / 25e9);
  EXPECT_DOUBLE_EQ(simulate_collective_time(plan, CollectiveKind::AllReduce, bytes, cluster),
                   14 * (bytes / 8) / 25e9);
}

TEST(CollectiveTime, TwoRingsShareInterNodeLinks) {
  const auto cluster = fast_intra(4, 25e9);
  const auto a = ring_order(group_of({0, 2, 4, 6}), NodeMap(4));
  const auto b = ring_order(group_of({1, 3, 5, 7}), NodeMap(4));
  const RingPlan other[] = {b};
  const double bytes = 4e9;
  EXPECT_DOUBLE_EQ(
      simulate_collective_time(a, CollectiveKind::AllGather, bytes, cluster, other),
      3 * (bytes / 4) / (25e9 / 2));
}

TEST(CollectiveTime, ZeroBytesTakeNoTime) {
  const auto cluster = fast_intra(4, 25e9);
  const auto plan = ring_order(group_of({0, 4}), NodeMap(4));
  EXPECT_EQ(simulate_collective_time(plan, CollectiveKind::AllReduce, 0.0, cluster), 0.0);
  EXPECT_GT(simulate_collective_time(plan, CollectiveKind::AllReduce, 1e-6, cluster), 0.0);
  EXPECT_LT(simulate_collective_time(plan, CollectiveKind::AllReduce, 1e-6, cluster), 1e-15);
}

TEST(CollectiveTime, MissingIntraEntryIsNamed) {
  ClusterSpec c;
  c.g_node = 4;
  c.beta_inter = 1e9;
  const auto plan = ring_order(group_of({0, 1}), NodeMap(4));
  try {
    simulate_collective_time(plan, CollectiveKind::AllGather, 100.0, c);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("inner_product=1, group_size=2"), std::string::npos) << e.what();
  }
}

TEST(CollectiveTime, MonotoneInBandwidth) {
  const auto base = synthetic_cluster(4, 25.0, 200.0);
  const auto plan = ring_order(group_of({0, 1, 2, 3, 4, 5, 6, 7}), NodeMap(4));
  const RingPlan other[] = {ring_order(group_of({8, 9, 10, 11, 12, 13, 14, 15}), NodeMap(4))};
  double prev = INFINITY;
  for (double f : {0.5, 1.0, 2.0, 4.0}) {
    const double t = simulate_collective_time(plan, CollectiveKind::AllReduce, 1e8,
                                              base.scaled(f), other);
    EXPECT_LE(t, prev);
    prev = t;
  }
  auto faster_inter = base;
  faster_inter.beta_inter *= 2;
  EXPECT_LE(simulate_collective_time(plan, CollectiveKind::AllReduce, 1e8, faster_inter),
            simulate_collective_time(plan, CollectiveKind::AllReduce, 1e8, base));
}

TEST(ClusterSpec, SyntheticTableAndValidation) {
  const auto c = synthetic_cluster(4, 25.0, 200.0);
  EXPECT_DOUBLE_EQ(c.beta_inter, 25e9);
  EXPECT_DOUBLE_EQ(c.intra_bandwidth(1, 4), 200e9);
  EXPECT_DOUBLE_EQ(c.intra_bandwidth(2, 2), 100e9);
  EXPECT_THROW(c.intra_bandwidth(3, 3), ConfigError);
  EXPECT_NO_THROW(c.validate());
  auto bad = c;
  bad.beta_inter = -1;
  EXPECT_THROW(bad.validate(), ConfigError);
}

}  // namespace
}  // namespace quadpar
