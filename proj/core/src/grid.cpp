// Copyright 2026 The quadpar Authors.
// SPDX-License-Identifier: Apache-2.0

#include "quadpar/grid.hpp"

#include <charconv>
#include <ostream>
#include <sstream>

#include "quadpar/error.hpp"

namespace quadpar {

std::string_view to_string(Axis axis) {
  switch (axis) {
    case Axis::X: return "X";
    case Axis::Y: return "Y";
    case Axis::Z: return "Z";
    case Axis::Data: return "DATA";
  }
  return "?";
}

std::ostream& operator<<(std::ostream& os, Axis axis) {
  return os << to_string(axis);
}

int GridConfig::extent(Axis axis) const {
  switch (axis) {
    case Axis::X: return g_x;
    case Axis::Y: return g_y;
    case Axis::Z: return g_z;
    case Axis::Data: return g_data;
  }
  return 1;
}

std::string GridConfig::to_string() const {
  std::ostringstream os;
  os << g_x << ',' << g_y << ',' << g_z << ',' << g_data;
  return os.str();
}

GridConfig GridConfig::parse(std::string_view text) {
  std::array<int, 4> values{};
  std::size_t field = 0;
  std::size_t pos = 0;
  while (true) {
    if (field == values.size()) {
      throw ConfigError("grid config '" + std::string(text) +
                        "' must have exactly four comma-separated factors");
    }
    auto comma = text.find(',', pos);
    auto token = text.substr(pos, comma == std::string_view::npos
                                      ? std::string_view::npos
                                      : comma - pos);
    int value = 0;
    auto [end, ec] =
        std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || end != token.data() + token.size()) {
      throw ConfigError("grid config '" + std::string(text) +
                        "' has a non-integer factor '" + std::string(token) +
                        "'");
    }
    if (value < 1) {
      throw ConfigError("grid config '" + std::string(text) +
                        "' has a non-positive factor " + std::to_string(value));
    }
    values[field++] = value;
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  if (field != values.size()) {
    throw ConfigError("grid config '" + std::string(text) +
                      "' must have exactly four comma-separated factors");
  }
  return {values[0], values[1], values[2], values[3]};
}

std::ostream& operator<<(std::ostream& os, const GridConfig& config) {
  return os << '(' << config.to_string() << ')';
}

int Coords::get(Axis axis) const {
  switch (axis) {
    case Axis::X: return i;
    case Axis::Y: return j;
    case Axis::Z: return k;
    case Axis::Data: return d;
  }
  return 0;
}

void Coords::set(Axis axis, int value) {
  switch (axis) {
    case Axis::X: i = value; break;
    case Axis::Y: j = value; break;
    case Axis::Z: k = value; break;
    case Axis::Data: d = value; break;
  }
}

int ProcessGroup::index_of(int rank) const {
  for (std::size_t p = 0; p < members.size(); ++p) {
    if (members[p] == rank) return static_cast<int>(p);
  }
  return -1;
}

NodeMap::NodeMap(int g_node) : g_node_(g_node) {
  if (g_node < 1) {
    throw ConfigError("workers per node must be >= 1, got " +
                      std::to_string(g_node));
  }
}

Grid Grid::build(int total_workers, GridConfig config, int g_node) {
  for (Axis axis : kHierarchy) {
    if (config.extent(axis) < 1) {
      throw ConfigError("grid factor along " + std::string(to_string(axis)) +
                        " must be >= 1 in " + config.to_string());
    }
  }
  if (config.total() != total_workers) {
    throw ConfigError("grid " + config.to_string() + " has " +
                      std::to_string(config.total()) + " workers, expected " +
                      std::to_string(total_workers));
  }
  return Grid(config, NodeMap(g_node));
}

Grid::Grid(GridConfig config, NodeMap nodes)
    : config_(config), nodes_(nodes) {
  const int total = config_.total();
  for (Axis axis : kHierarchy) {
    auto a = static_cast<std::size_t>(axis);
    auto& groups = groups_[a];
    auto& index = group_index_[a];
    index.assign(static_cast<std::size_t>(total), -1);
    // Ranks ascend, so each group is first reached through its smallest
    // member (the one with coordinate 0 along `axis`).
    for (int rank = 0; rank < total; ++rank) {
      if (index[static_cast<std::size_t>(rank)] >= 0) continue;
      ProcessGroup group{axis, {}};
      Coords c = coords_of(rank);
      for (int v = 0; v < config_.extent(axis); ++v) {
        c.set(axis, v);
        int member = rank_of(c);
        group.members.push_back(member);
        index[static_cast<std::size_t>(member)] =
            static_cast<int>(groups.size());
      }
      groups.push_back(std::move(group));
    }
  }
}

Coords Grid::coords_of(int rank) const {
  if (rank < 0 || rank >= size()) {
    throw ConfigError("rank " + std::to_string(rank) + " outside grid of " +
                      std::to_string(size()));
  }
  Coords c;
  c.i = rank % config_.g_x;
  rank /= config_.g_x;
  c.j = rank % config_.g_y;
  rank /= config_.g_y;
  c.k = rank % config_.g_z;
  c.d = rank / config_.g_z;
  return c;
}

int Grid::rank_of(const Coords& c) const {
  for (Axis axis : kHierarchy) {
    if (c.get(axis) < 0 || c.get(axis) >= extent(axis)) {
      throw ConfigError("coordinate along " + std::string(to_string(axis)) +
                        " out of range");
    }
  }
  return c.i + config_.g_x * (c.j + config_.g_y * (c.k + config_.g_z * c.d));
}

const std::vector<ProcessGroup>& Grid::groups(Axis axis) const {
  return groups_[static_cast<std::size_t>(axis)];
}

const ProcessGroup& Grid::group_of(int rank, Axis axis) const {
  auto a = static_cast<std::size_t>(axis);
  if (rank < 0 || rank >= size()) {
    throw ConfigError("rank " + std::to_string(rank) + " outside grid of " +
                      std::to_string(size()));
  }
  return groups_[a][static_cast<std::size_t>(
      group_index_[a][static_cast<std::size_t>(rank)])];
}

std::vector<GridConfig> enumerate_configs(
    int total_workers, std::span<const ConfigPredicate> predicates) {
  std::vector<GridConfig> out;
  if (total_workers < 1) return out;
  for (int gx = 1; gx <= total_workers; ++gx) {
    if (total_workers % gx) continue;
    const int rest_x = total_workers / gx;
    for (int gy = 1; gy <= rest_x; ++gy) {
      if (rest_x % gy) continue;
      const int rest_y = rest_x / gy;
      for (int gz = 1; gz <= rest_y; ++gz) {
        if (rest_y % gz) continue;
        GridConfig config{gx, gy, gz, rest_y / gz};
        bool ok = true;
        for (const auto& pred : predicates) {
          if (!pred(config)) {
            ok = false;
            break;
          }
        }
        if (ok) out.push_back(config);
      }
    }
  }
  return out;
}

}  // namespace quadpar
