// Copyright 2026 The quadpar Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Reading cluster and model descriptions, writing reports. All parsers throw
// ConfigError with the offending field in the message.

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "quadpar/flops.hpp"
#include "quadpar/models.hpp"
#include "quadpar/overlap.hpp"
#include "quadpar/perfmodel.hpp"
#include "quadpar/simnet.hpp"

namespace quadpar {

struct ClusterDescription {
  ClusterSpec spec;
  PeakSpec peak = a100_peak();
  /// Sustained per-worker throughput used for compute time.
  double flops_per_second = 0.0;
};

/// {"g_node": 4, "beta_inter_gbps": 25,
///  "intra_table": [{"inner_product": 1, "group_size": 2, "gbps": 150}, ...],
///  "peak": "a100", "compute_tflops": 200}
/// `peak` and `compute_tflops` are optional; the latter defaults to the
/// peak's empirical figure.
ClusterDescription parse_cluster(std::string_view json_text);
ClusterDescription load_cluster(const std::filesystem::path& path);

/// Either {"name": ..., "batch_rows": m, "layers": [{"k", "n", "m"?,
/// "transposed"?}, ...]} or {"preset": "GPT-20B", "batch_rows": m,
/// "blocks"?: b}. Layer `m` defaults to `batch_rows`.
ModelSpec parse_model(std::string_view json_text);
ModelSpec load_model(const std::filesystem::path& path);

std::string traffic_json(const TrafficReport& report);
std::string timeline_json(const Timeline& timeline);
/// Chrome trace-event format, loadable in chrome://tracing or Perfetto.
std::string timeline_trace_json(const Timeline& timeline);

/// Header: config,predicted_s,rank
std::string rankings_csv(std::span<const RankedConfig> ranked);
std::string rankings_json(std::span<const RankedConfig> ranked);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace quadpar
