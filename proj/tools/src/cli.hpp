// Copyright 2026 The quadpar Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace quadpar::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kUsageError = 1,       ///< bad flags, unreadable or malformed input files
  kInfeasible = 2,       ///< no grid fits, or the chosen one does not divide
  kCheckFailed = 3,      ///< verify found a mismatch
};

/// Everything a command needs; filled from the command line.
struct RunConfig {
  std::string cluster_path;  ///< empty: built-in synthetic cluster
  std::string model_path;
  std::string preset;
  std::uint64_t batch_rows = 2048;
  int blocks = 0;  ///< 0: the preset's own depth
  int workers = 1;
  std::string config;  ///< "gx,gy,gz,gdata"; empty: model's top choice
  std::string overlap = "all";
  std::uint64_t seed = 42;
  int trials = 5;
  int iterations = 10;
  int warmup = 2;
  double jitter = 0.0;
  std::string out_dir;

  // verify
  bool inject_fault = false;
  int layers = 2;

  // tune
  std::uint64_t m = 256, k = 256, n = 256;

  // flops
  double total_pflops = 0.0;
  double seconds = 0.0;
  std::string peak;
  bool recompute = false;
};

/// Output directory: --out, else $QUADPAR_OUT_DIR, else ./quadpar-out.
std::filesystem::path output_dir(const RunConfig& run);

int cmd_rank_configs(const RunConfig& run, std::ostream& out);
int cmd_simulate(const RunConfig& run, std::ostream& out);
int cmd_verify(const RunConfig& run, std::ostream& out);
int cmd_tune(const RunConfig& run, std::ostream& out);
int cmd_flops(const RunConfig& run, std::ostream& out);

/// Parses `args` (without the program name) and runs the chosen command.
/// Errors are reported on `err` and mapped to an ExitCode.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace quadpar::cli
