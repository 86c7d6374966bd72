// Copyright 2026 The quadpar Authors.
// SPDX-License-Identifier: Apache-2.0

#include "quadpar/simnet.hpp"

#include <algorithm>
#include <cmath>

#include "quadpar/error.hpp"

namespace quadpar {

namespace {

std::string key_string(int inner_product, int group_size) {
  return "(inner_product=" + std::to_string(inner_product) +
         ", group_size=" + std::to_string(group_size) + ")";
}

}  // namespace

double ClusterSpec::intra_bandwidth(int inner_product, int group_size) const {
  auto it = intra_table.find({inner_product, group_size});
  if (it == intra_table.end()) {
    throw ConfigError("intra-node bandwidth table has no entry for " +
                      key_string(inner_product, group_size));
  }
  return it->second;
}

void ClusterSpec::validate() const {
  if (g_node < 1) {
    throw ConfigError("g_node must be >= 1, got " + std::to_string(g_node));
  }
  if (!(beta_inter > 0.0) || !std::isfinite(beta_inter)) {
    throw ConfigError("inter-node bandwidth must be positive and finite");
  }
  for (const auto& [key, bw] : intra_table) {
    if (key.first < 1 || key.second < 1) {
      throw ConfigError("intra-node table key " +
                        key_string(key.first, key.second) +
                        " must be positive");
    }
    if (key.first * key.second > g_node) {
      throw ConfigError("intra-node table key " +
                        key_string(key.first, key.second) + " exceeds g_node=" +
                        std::to_string(g_node));
    }
    if (!(bw > 0.0) || !std::isfinite(bw)) {
      throw ConfigError("intra-node bandwidth for " +
                        key_string(key.first, key.second) +
                        " must be positive and finite");
    }
  }
}

ClusterSpec ClusterSpec::scaled(double factor) const {
  ClusterSpec out = *this;
  out.beta_inter *= factor;
  for (auto& [key, bw] : out.intra_table) bw *= factor;
  return out;
}

ClusterSpec synthetic_cluster(int g_node, double beta_inter_gbps,
                              double intra_peak_gbps) {
  ClusterSpec cluster;
  cluster.g_node = g_node;
  cluster.beta_inter = beta_inter_gbps * kBytesPerGB;
  for (int inner = 1; inner <= g_node; ++inner) {
    for (int size = 1; inner * size <= g_node; ++size) {
      cluster.intra_table[{inner, size}] =
          intra_peak_gbps * kBytesPerGB / inner;
    }
  }
  cluster.validate();
  return cluster;
}

RingPlan ring_order(const ProcessGroup& group, const NodeMap& nodes) {
  RingPlan plan;
  plan.group = group;
  plan.order = group.members;
  std::stable_sort(plan.order.begin(), plan.order.end(), [&](int a, int b) {
    return nodes.node_of(a) < nodes.node_of(b);
  });
  const auto p = plan.order.size();
  if (p > 1) {
    for (std::size_t q = 0; q < p; ++q) {
      if (nodes.node_of(plan.order[q]) !=
          nodes.node_of(plan.order[(q + 1) % p])) {
        ++plan.crossings;
      }
    }
    plan.stride = group.members[1] - group.members[0];
  }
  return plan;
}

std::string_view to_string(CollectiveKind kind) {
  switch (kind) {
    case CollectiveKind::AllGather: return "all-gather";
    case CollectiveKind::ReduceScatter: return "reduce-scatter";
    case CollectiveKind::AllReduce: return "all-reduce";
  }
  return "?";
}

int ring_steps(CollectiveKind kind, int group_size) {
  const int one_pass = std::max(group_size - 1, 0);
  return kind == CollectiveKind::AllReduce ? 2 * one_pass : one_pass;
}

double simulate_collective_time(const RingPlan& plan, CollectiveKind kind,
                                double bytes, const ClusterSpec& cluster,
                                std::span<const RingPlan> concurrent) {
  const int p = static_cast<int>(plan.order.size());
  if (p <= 1 || bytes <= 0.0) return 0.0;
  const NodeMap nodes(cluster.g_node);

  // Ring edges crossing each directed node pair, over all active rings.
  std::map<std::pair<int, int>, int> sharers;
  auto count_edges = [&](const RingPlan& ring) {
    const auto n = ring.order.size();
    if (n <= 1) return;
    for (std::size_t q = 0; q < n; ++q) {
      int a = nodes.node_of(ring.order[q]);
      int b = nodes.node_of(ring.order[(q + 1) % n]);
      if (a != b) ++sharers[{a, b}];
    }
  };
  count_edges(plan);
  for (const auto& ring : concurrent) count_edges(ring);

  std::map<int, int> members_on_node;
  for (int rank : plan.order) ++members_on_node[nodes.node_of(rank)];

  const double chunk = bytes / p;
  double step = 0.0;
  for (int q = 0; q < p; ++q) {
    int a = nodes.node_of(plan.order[static_cast<std::size_t>(q)]);
    int b = nodes.node_of(plan.order[static_cast<std::size_t>((q + 1) % p)]);
    double bw;
    if (a == b) {
      bw = cluster.intra_bandwidth(plan.stride, members_on_node[a]);
    } else {
      int share = std::min(sharers[{a, b}], cluster.g_node);
      bw = cluster.beta_inter / share;
    }
    step = std::max(step, chunk / bw);
  }
  return ring_steps(kind, p) * step;
}

Transport::Transport(int world_size, NodeMap nodes, int bytes_per_element)
    : nodes_(nodes), bytes_per_element_(bytes_per_element) {
  if (world_size < 1) {
    throw ConfigError("transport needs at least one rank");
  }
  if (bytes_per_element < 1) {
    throw ConfigError("bytes per element must be >= 1");
  }
  report_.bytes_sent.assign(static_cast<std::size_t>(world_size), 0);
}

TrafficReport Transport::take_report() {
  TrafficReport out = std::move(report_);
  report_ = TrafficReport{};
  report_.bytes_sent.assign(out.bytes_sent.size(), 0);
  return out;
}

void Transport::check_group(const ProcessGroup& group,
                            std::size_t inputs) const {
  if (group.members.empty()) {
    throw ProtocolError("collective over an empty group");
  }
  if (inputs != group.members.size()) {
    throw ProtocolError("collective over " +
                        std::to_string(group.members.size()) +
                        " members received " + std::to_string(inputs) +
                        " contributions");
  }
  for (int rank : group.members) {
    if (rank < 0 || static_cast<std::size_t>(rank) >= report_.bytes_sent.size()) {
      throw ProtocolError("group member " + std::to_string(rank) +
                          " outside the transport world");
    }
  }
}

void Transport::account(int from, int to, std::uint64_t elements,
                        Volume& volume) {
  volume.sent_elements[from] += elements;
  report_.bytes_sent[static_cast<std::size_t>(from)] +=
      elements * static_cast<std::uint64_t>(bytes_per_element_);
  if (nodes_.node_of(from) == nodes_.node_of(to)) {
    volume.intra_elements += elements;
  } else {
    volume.inter_elements += elements;
  }
}

void Transport::record(CollectiveKind kind, const ProcessGroup& group,
                       const CollectiveTag& tag,
                       std::uint64_t buffer_elements, const Volume& volume) {
  const auto bpe = static_cast<std::uint64_t>(bytes_per_element_);
  CollectiveRecord rec;
  rec.kind = kind;
  rec.axis = group.axis;
  rec.tag = tag;
  rec.members = group.members;
  rec.buffer_elements = buffer_elements;
  std::uint64_t per_rank = 0;
  for (const auto& [rank, elements] : volume.sent_elements) {
    per_rank = std::max(per_rank, elements);
  }
  rec.bytes_per_rank = per_rank * bpe;
  rec.intra_bytes = volume.intra_elements * bpe;
  rec.inter_bytes = volume.inter_elements * bpe;
  report_.intra_bytes += rec.intra_bytes;
  report_.inter_bytes += rec.inter_bytes;
  report_.log.push_back(std::move(rec));
}

Transport::Buffers Transport::ring_all_gather(const RingPlan& plan,
                                              const ProcessGroup& group,
                                              const Buffers& shards,
                                              Volume& volume) {
  const int p = group.size();
  const std::size_t s = shards.front().size();
  // held[q][c]: segment originating at ring position c, as held by q.
  std::vector<Buffers> held(static_cast<std::size_t>(p),
                            Buffers(static_cast<std::size_t>(p)));
  std::vector<int> member_at(static_cast<std::size_t>(p));
  for (int q = 0; q < p; ++q) {
    int m = group.index_of(plan.order[static_cast<std::size_t>(q)]);
    member_at[static_cast<std::size_t>(q)] = m;
    held[static_cast<std::size_t>(q)][static_cast<std::size_t>(q)] =
        shards[static_cast<std::size_t>(m)];
  }
  for (int t = 0; t + 1 < p; ++t) {
    for (int q = 0; q < p; ++q) {
      const int dest = (q + 1) % p;
      const int c = ((q - t) % p + p) % p;
      held[static_cast<std::size_t>(dest)][static_cast<std::size_t>(c)] =
          held[static_cast<std::size_t>(q)][static_cast<std::size_t>(c)];
      account(plan.order[static_cast<std::size_t>(q)],
              plan.order[static_cast<std::size_t>(dest)], s, volume);
    }
  }
  Buffers out(static_cast<std::size_t>(p));
  for (int q = 0; q < p; ++q) {
    // Reassemble in member order, not ring order.
    std::vector<double> full(s * static_cast<std::size_t>(p));
    for (int c = 0; c < p; ++c) {
      const auto& seg =
          held[static_cast<std::size_t>(q)][static_cast<std::size_t>(c)];
      std::copy(seg.begin(), seg.end(),
                full.begin() + static_cast<std::ptrdiff_t>(
                                   s * static_cast<std::size_t>(
                                           member_at[static_cast<std::size_t>(c)])));
    }
    out[static_cast<std::size_t>(member_at[static_cast<std::size_t>(q)])] =
        std::move(full);
  }
  return out;
}

Transport::Buffers Transport::ring_reduce_scatter(const RingPlan& plan,
                                                  const ProcessGroup& group,
                                                  const Buffers& inputs,
                                                  Volume& volume) {
  const int p = group.size();
  const std::size_t seg = inputs.front().size() / static_cast<std::size_t>(p);
  std::vector<int> member_at(static_cast<std::size_t>(p));
  for (int q = 0; q < p; ++q) {
    member_at[static_cast<std::size_t>(q)] =
        group.index_of(plan.order[static_cast<std::size_t>(q)]);
  }
  // Chunk c (owned by ring position c) is member_at[c]'s output segment.
  auto own = [&](int q, int c) {
    const auto& in = inputs[static_cast<std::size_t>(
        member_at[static_cast<std::size_t>(q)])];
    auto first = in.begin() + static_cast<std::ptrdiff_t>(
                                  seg * static_cast<std::size_t>(
                                            member_at[static_cast<std::size_t>(c)]));
    return std::vector<double>(first, first + static_cast<std::ptrdiff_t>(seg));
  };
  Buffers in_flight(static_cast<std::size_t>(p));
  for (int q = 0; q < p; ++q) {
    in_flight[static_cast<std::size_t>(q)] = own(q, ((q - 1) % p + p) % p);
  }
  for (int t = 0; t + 1 < p; ++t) {
    Buffers next(static_cast<std::size_t>(p));
    for (int q = 0; q < p; ++q) {
      const int dest = (q + 1) % p;
      const int c = (((q - t - 1) % p) + p) % p;
      account(plan.order[static_cast<std::size_t>(q)],
              plan.order[static_cast<std::size_t>(dest)], seg, volume);
      auto received = in_flight[static_cast<std::size_t>(q)];
      auto mine = own(dest, c);
      for (std::size_t e = 0; e < seg; ++e) received[e] += mine[e];
      next[static_cast<std::size_t>(dest)] = std::move(received);
    }
    in_flight = std::move(next);
  }
  if (p == 1) in_flight[0] = own(0, 0);
  Buffers out(static_cast<std::size_t>(p));
  for (int q = 0; q < p; ++q) {
    out[static_cast<std::size_t>(member_at[static_cast<std::size_t>(q)])] =
        std::move(in_flight[static_cast<std::size_t>(q)]);
  }
  return out;
}

Transport::Buffers Transport::all_gather(const ProcessGroup& group,
                                         const Buffers& shards,
                                         const CollectiveTag& tag) {
  check_group(group, shards.size());
  const auto s = shards.front().size();
  for (const auto& shard : shards) {
    if (shard.size() != s) {
      throw ProtocolError("all-gather shards have unequal lengths (" +
                          std::to_string(s) + " vs " +
                          std::to_string(shard.size()) + ")");
    }
  }
  Volume volume;
  auto out = ring_all_gather(ring_order(group, nodes_), group, shards, volume);
  record(CollectiveKind::AllGather, group, tag,
         s * static_cast<std::uint64_t>(group.size()), volume);
  return out;
}

Transport::Buffers Transport::reduce_scatter(const ProcessGroup& group,
                                             const Buffers& inputs,
                                             const CollectiveTag& tag) {
  check_group(group, inputs.size());
  const auto n = inputs.front().size();
  for (const auto& in : inputs) {
    if (in.size() != n) {
      throw ProtocolError("reduce-scatter inputs have unequal lengths (" +
                          std::to_string(n) + " vs " +
                          std::to_string(in.size()) + ")");
    }
  }
  if (n % static_cast<std::size_t>(group.size()) != 0) {
    throw ProtocolError("reduce-scatter length " + std::to_string(n) +
                        " is not divisible by group size " +
                        std::to_string(group.size()));
  }
  Volume volume;
  auto out =
      ring_reduce_scatter(ring_order(group, nodes_), group, inputs, volume);
  record(CollectiveKind::ReduceScatter, group, tag, n, volume);
  return out;
}

Transport::Buffers Transport::all_reduce(const ProcessGroup& group,
                                         const Buffers& inputs,
                                         const CollectiveTag& tag) {
  check_group(group, inputs.size());
  const auto n = inputs.front().size();
  for (const auto& in : inputs) {
    if (in.size() != n) {
      throw ProtocolError("all-reduce inputs have unequal lengths (" +
                          std::to_string(n) + " vs " +
                          std::to_string(in.size()) + ")");
    }
  }
  const auto p = static_cast<std::size_t>(group.size());
  const auto padded = (n + p - 1) / p * p;
  Buffers work = inputs;
  if (padded != n) {
    for (auto& buf : work) buf.resize(padded, 0.0);
  }
  const RingPlan plan = ring_order(group, nodes_);
  Volume volume;
  auto shards = ring_reduce_scatter(plan, group, work, volume);
  auto out = ring_all_gather(plan, group, shards, volume);
  for (auto& buf : out) buf.resize(n);
  if (corrupt_next_all_reduce_ && !out.front().empty()) {
    out.front().front() += 1e-3;
    corrupt_next_all_reduce_ = false;
  }
  record(CollectiveKind::AllReduce, group, tag, padded, volume);
  return out;
}

}  // namespace quadpar
