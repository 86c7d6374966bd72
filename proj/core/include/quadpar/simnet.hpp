// Copyright 2026 The quadpar Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

/** @file
 *
 * Simulated interconnect: an in-memory transport executing ring collectives
 * with per-link byte accounting, and a step-synchronous timing engine that
 * shares node-to-node bandwidth among concurrently active rings.
 *
 * Message startup latency is zero; a transfer of b bytes over a link of
 * bandwidth B takes b / B seconds.
 */

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "quadpar/grid.hpp"

namespace quadpar {

inline constexpr double kBytesPerGB = 1e9;

/// Two-level machine description. Bandwidths are in bytes per second.
struct ClusterSpec {
  int g_node = 1;
  /// Bidirectional peer-to-peer bandwidth between any pair of nodes.
  double beta_inter = 0.0;
  /// (inner_product, group_size) -> effective per-peer bandwidth of rings of
  /// `group_size` members issued concurrently by `inner_product` groups
  /// inside one node.
  std::map<std::pair<int, int>, double> intra_table;

  /// Throws ConfigError naming the missing (inner_product, group_size) key.
  double intra_bandwidth(int inner_product, int group_size) const;

  /// Throws ConfigError when an invariant does not hold.
  void validate() const;

  /// Every bandwidth multiplied by `factor`.
  ClusterSpec scaled(double factor) const;
};

/// A cluster whose intra-node table covers every (G0, G1) with G0 * G1 <=
/// g_node. Intra-node bandwidth is split evenly among the G0 concurrent
/// rings: intra_peak / G0.
ClusterSpec synthetic_cluster(int g_node, double beta_inter_gbps,
                              double intra_peak_gbps);

struct RingPlan {
  ProcessGroup group;
  /// Cyclic visiting order; members of one node are consecutive.
  std::vector<int> order;
  /// Ring edges whose endpoints sit on different nodes.
  int crossings = 0;
  /// Rank distance between adjacent members of `group` (1 for singletons).
  int stride = 1;
};

/// Orders the members node by node (ascending node id, member order within a
/// node), which touches every node exactly once and so minimises the number
/// of node-boundary edges.
RingPlan ring_order(const ProcessGroup& group, const NodeMap& nodes);

enum class CollectiveKind { AllGather, ReduceScatter, AllReduce };

std::string_view to_string(CollectiveKind kind);

/// Ring steps needed by `kind` among `group_size` ranks.
int ring_steps(CollectiveKind kind, int group_size);

/// Seconds taken by a ring collective whose full buffer is `bytes` long
/// (all-gather output, reduce-scatter input, all-reduce buffer) while the
/// rings in `concurrent` run alongside it. A zero-sized buffer takes no time.
double simulate_collective_time(const RingPlan& plan, CollectiveKind kind,
                                double bytes, const ClusterSpec& cluster,
                                std::span<const RingPlan> concurrent = {});

struct CollectiveTag {
  std::string phase;
  int layer = -1;
};

struct CollectiveRecord {
  CollectiveKind kind = CollectiveKind::AllGather;
  Axis axis = Axis::X;
  CollectiveTag tag;
  std::vector<int> members;
  /// Full buffer length in elements (see simulate_collective_time).
  std::uint64_t buffer_elements = 0;
  /// Bytes every member sent.
  std::uint64_t bytes_per_rank = 0;
  std::uint64_t intra_bytes = 0;
  std::uint64_t inter_bytes = 0;
};

struct TrafficReport {
  std::vector<std::uint64_t> bytes_sent;  // indexed by rank
  std::uint64_t intra_bytes = 0;
  std::uint64_t inter_bytes = 0;
  std::vector<CollectiveRecord> log;

  std::uint64_t total_bytes() const { return intra_bytes + inter_bytes; }
};

/// Deterministic single-arena transport. Every collective receives the
/// contributions of all group members at once, indexed by position in
/// `group.members`, and returns their results in the same order.
///
/// Reductions are summed in double precision following the ring: the
/// segment owned by ring position q is accumulated starting at position
/// q + 1 and ending at q.
class Transport {
 public:
  explicit Transport(int world_size, NodeMap nodes = NodeMap(1),
                     int bytes_per_element = 2);

  using Buffers = std::vector<std::vector<double>>;

  /// Concatenation of all shards in member order. Throws ProtocolError on
  /// unequal shard lengths.
  Buffers all_gather(const ProcessGroup& group, const Buffers& shards,
                     const CollectiveTag& tag = {});

  /// Member r receives the sum of every member's r-th segment. Throws
  /// ProtocolError unless all lengths are equal and divisible by the group
  /// size.
  Buffers reduce_scatter(const ProcessGroup& group, const Buffers& inputs,
                         const CollectiveTag& tag = {});

  /// reduce_scatter followed by all_gather. Lengths not divisible by the
  /// group size are zero-padded internally and trimmed on return.
  Buffers all_reduce(const ProcessGroup& group, const Buffers& inputs,
                     const CollectiveTag& tag = {});

  const TrafficReport& report() const { return report_; }
  TrafficReport take_report();

  int bytes_per_element() const { return bytes_per_element_; }
  const NodeMap& nodes() const { return nodes_; }

  /// Negative control for harness self-tests: the next all-reduce delivers a
  /// perturbed value to its first member.
  void corrupt_next_all_reduce() { corrupt_next_all_reduce_ = true; }

 private:
  struct Volume {
    std::map<int, std::uint64_t> sent_elements;
    std::uint64_t intra_elements = 0;
    std::uint64_t inter_elements = 0;
  };

  void check_group(const ProcessGroup& group, std::size_t inputs) const;
  Buffers ring_all_gather(const RingPlan& plan, const ProcessGroup& group,
                          const Buffers& shards, Volume& volume);
  Buffers ring_reduce_scatter(const RingPlan& plan, const ProcessGroup& group,
                              const Buffers& inputs, Volume& volume);
  void account(int from, int to, std::uint64_t elements, Volume& volume);
  void record(CollectiveKind kind, const ProcessGroup& group,
              const CollectiveTag& tag, std::uint64_t buffer_elements,
              const Volume& volume);

  NodeMap nodes_;
  int bytes_per_element_;
  TrafficReport report_;
  bool corrupt_next_all_reduce_ = false;
};

}  // namespace quadpar
