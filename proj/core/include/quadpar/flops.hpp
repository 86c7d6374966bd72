// Copyright 2026 The quadpar Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "quadpar/pmm.hpp"

namespace quadpar {

/// Per-worker peak throughput in flop/s.
struct PeakSpec {
  std::string name;
  double advertised = 0.0;
  double empirical = 0.0;

  /// False when empirical exceeds advertised or either is non-positive.
  bool plausible() const;
};

/// bf16 peaks per GPU (or per MI250X GCD).
PeakSpec a100_peak();
PeakSpec mi250x_gcd_peak();
PeakSpec h100_peak();
/// "a100", "mi250x-gcd" or "h100".
std::optional<PeakSpec> find_peak(std::string_view name);

/// Model flops of one training step over `net`: 2mkn for the forward
/// multiply plus 4mkn for the two backward multiplies, and another 2mkn per
/// layer when activations are recomputed. `batch_rows` replaces each layer's
/// m when non-zero.
double network_flops(std::span<const LayerSpec> net,
                     std::uint64_t batch_rows = 0, bool recompute = false);

struct Efficiency {
  double pflops = 0.0;          ///< sustained total, Pflop/s
  double pct_advertised = 0.0;  ///< of workers * advertised peak
  double pct_empirical = 0.0;   ///< of workers * empirical peak
};

/// Throws ConfigError when `seconds` or `workers` is not positive.
Efficiency efficiency(double flops, double seconds, int workers,
                      const PeakSpec& peaks);

struct EfficiencyRow {
  int workers = 0;
  std::string model;
  Efficiency value;
};

/// CSV with columns workers, model, total_pflops, pct_advertised,
/// pct_empirical.
std::string efficiency_csv(std::span<const EfficiencyRow> rows);

}  // namespace quadpar
