// Copyright 2026 The quadpar Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "quadpar/pmm.hpp"

namespace quadpar {

/// A GPT-style transformer size.
struct GptPreset {
  std::string name;
  double parameters = 0.0;
  int layers = 0;
  std::uint64_t hidden = 0;
  int heads = 0;
};

/// GPT-5B through GPT-640B.
std::span<const GptPreset> gpt_presets();
std::optional<GptPreset> find_gpt_preset(std::string_view name);

/// Fully connected layers of `blocks` transformer blocks of width `hidden`:
/// per block QKV (h -> 3h), attention projection (h -> h), MLP up (h -> 4h)
/// and MLP down (4h -> h), with transposes alternating so each block's
/// projection and MLP-down layers are the transposed ones.
std::vector<LayerSpec> transformer_fc_layers(std::uint64_t hidden, int blocks,
                                             std::uint64_t batch_rows);

/// transformer_fc_layers for every block of `preset`.
std::vector<LayerSpec> gpt_fc_layers(const GptPreset& preset,
                                     std::uint64_t batch_rows);

struct ModelSpec {
  std::string name;
  std::vector<LayerSpec> layers;

  /// True when the layers chain (n_l = k_{l+1}) and can run end to end.
  bool executable() const;
  std::uint64_t max_matrix_elements() const;
};

}  // namespace quadpar
