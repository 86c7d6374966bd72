// Copyright 2026 The quadpar Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

/** @file
 *
 * The four-dimensional virtual worker grid.
 *
 * Workers are arranged as g_x * g_y * g_z * g_data. Ranks are assigned with
 * X innermost, then Y, then Z, and the data-parallel axis outermost:
 *
 *   rank = i + g_x * (j + g_y * (k + g_z * d))
 *
 * Physical placement is blocked: ranks [n * g_node, (n + 1) * g_node) live on
 * node n.
 */

#include <array>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace quadpar {

enum class Axis { X = 0, Y = 1, Z = 2, Data = 3 };

inline constexpr std::array<Axis, 4> kHierarchy = {Axis::X, Axis::Y, Axis::Z,
                                                   Axis::Data};

std::string_view to_string(Axis axis);
std::ostream& operator<<(std::ostream& os, Axis axis);

struct GridConfig {
  int g_x = 1;
  int g_y = 1;
  int g_z = 1;
  int g_data = 1;

  int extent(Axis axis) const;
  int tensor_size() const { return g_x * g_y * g_z; }
  int total() const { return tensor_size() * g_data; }
  /// Factors in hierarchy order (X, Y, Z, DATA).
  std::array<int, 4> as_array() const { return {g_x, g_y, g_z, g_data}; }
  /// Same grid with the X and Y extents exchanged.
  GridConfig with_xy_swapped() const { return {g_y, g_x, g_z, g_data}; }

  /// "gx,gy,gz,gdata"
  std::string to_string() const;
  /// Parses "gx,gy,gz,gdata"; throws ConfigError on malformed input.
  static GridConfig parse(std::string_view text);

  auto operator<=>(const GridConfig&) const = default;
};

std::ostream& operator<<(std::ostream& os, const GridConfig& config);

struct Coords {
  int i = 0;  // X
  int j = 0;  // Y
  int k = 0;  // Z
  int d = 0;  // DATA

  int get(Axis axis) const;
  void set(Axis axis, int value);

  auto operator<=>(const Coords&) const = default;
};

struct ProcessGroup {
  Axis axis = Axis::X;
  /// Ordered by increasing coordinate along `axis`.
  std::vector<int> members;

  int size() const { return static_cast<int>(members.size()); }
  /// Position of `rank` in `members`, or -1.
  int index_of(int rank) const;
};

class NodeMap {
 public:
  explicit NodeMap(int g_node = 1);

  int g_node() const { return g_node_; }
  int node_of(int rank) const { return rank / g_node_; }

 private:
  int g_node_;
};

/// Immutable after construction.
class Grid {
 public:
  /// Throws ConfigError when a factor is < 1, the product differs from
  /// `total_workers`, or `g_node` < 1.
  static Grid build(int total_workers, GridConfig config, int g_node = 1);

  const GridConfig& config() const { return config_; }
  const NodeMap& nodes() const { return nodes_; }
  int size() const { return config_.total(); }
  int extent(Axis axis) const { return config_.extent(axis); }

  Coords coords_of(int rank) const;
  int rank_of(const Coords& coords) const;

  /// All groups along `axis`, ordered by their smallest member.
  const std::vector<ProcessGroup>& groups(Axis axis) const;
  /// The group along `axis` containing `rank`.
  const ProcessGroup& group_of(int rank, Axis axis) const;

 private:
  Grid(GridConfig config, NodeMap nodes);

  GridConfig config_;
  NodeMap nodes_;
  std::array<std::vector<ProcessGroup>, 4> groups_;
  std::array<std::vector<int>, 4> group_index_;  // rank -> index in groups_
};

using ConfigPredicate = std::function<bool(const GridConfig&)>;

/// Every ordered factorization (g_x, g_y, g_z, g_data) of `total_workers`
/// accepted by all `predicates`, in lexicographic order.
std::vector<GridConfig> enumerate_configs(
    int total_workers, std::span<const ConfigPredicate> predicates = {});

}  // namespace quadpar
