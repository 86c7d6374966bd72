// Copyright 2026 The quadpar Authors.
// SPDX-License-Identifier: Apache-2.0

#include "quadpar/models.hpp"

#include <algorithm>
#include <array>

#include "quadpar/error.hpp"

namespace quadpar {

namespace {

const std::array<GptPreset, 9> kPresets = {{
    {"GPT-5B", 5e9, 24, 4096, 32},
    {"GPT-10B", 10e9, 32, 5120, 40},
    {"GPT-20B", 20e9, 32, 7168, 56},
    {"GPT-40B", 40e9, 38, 9216, 72},
    {"GPT-60B", 60e9, 56, 9216, 72},
    {"GPT-80B", 80e9, 42, 12288, 96},
    {"GPT-160B", 160e9, 84, 12288, 96},
    {"GPT-320B", 320e9, 96, 16384, 128},
    {"GPT-640B", 640e9, 192, 16384, 128},
}};

}  // namespace

std::span<const GptPreset> gpt_presets() { return kPresets; }

std::optional<GptPreset> find_gpt_preset(std::string_view name) {
  for (const auto& p : kPresets) {
    if (p.name == name) return p;
  }
  return std::nullopt;
}

std::vector<LayerSpec> transformer_fc_layers(std::uint64_t hidden, int blocks,
                                             std::uint64_t batch_rows) {
  std::vector<LayerSpec> net;
  net.reserve(static_cast<std::size_t>(blocks) * 4);
  for (int b = 0; b < blocks; ++b) {
    net.push_back({batch_rows, hidden, 3 * hidden, false});
    net.push_back({batch_rows, hidden, hidden, true});
    net.push_back({batch_rows, hidden, 4 * hidden, false});
    net.push_back({batch_rows, 4 * hidden, hidden, true});
  }
  return net;
}

std::vector<LayerSpec> gpt_fc_layers(const GptPreset& preset,
                                     std::uint64_t batch_rows) {
  return transformer_fc_layers(preset.hidden, preset.layers, batch_rows);
}

bool ModelSpec::executable() const {
  if (layers.empty()) return false;
  try {
    check_chain(layers);
    return true;
  } catch (const ShapeError&) {
    return false;
  }
}

std::uint64_t ModelSpec::max_matrix_elements() const {
  std::uint64_t most = 0;
  for (const auto& l : layers) {
    most = std::max({most, l.m * l.k, l.k * l.n, l.m * l.n});
  }
  return most;
}

}  // namespace quadpar
