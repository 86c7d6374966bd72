// Copyright 2026 The quadpar Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

/** @file
 *
 * Per-iteration schedules of compute and communication.
 *
 * A schedule is a list of events in issue order. Each event runs on one
 * resource: the compute stream, or the communication channel of one grid
 * axis. An event starts once its dependencies allow and its resource is
 * free; resources execute their events in issue order. Because the order on
 * every resource is the same for all flag settings and the flags only
 * relax dependencies, enabling an optimisation can never delay any event.
 *
 * Per layer the baseline runs, strictly one after another,
 *
 *   forward:  AG_z   F (I * W~)   AR_fwd
 *   backward: dI (dO * W~^T)   AR_bwd   dW (I^T * dO)   RS_z
 *   sync:     AR_data for every layer, after the whole backward pass
 *
 * OAR lets AR_bwd run under the dW multiply of the same layer; the next
 * layer's dI waits for it. ORS lets RS_z run under the backward compute of
 * the layers that follow it; all of them are awaited before the sync. OAG
 * issues layer l + 1's AG_z when layer l's forward multiply starts.
 */

#include <span>
#include <string>
#include <vector>

#include "quadpar/perfmodel.hpp"
#include "quadpar/pmm.hpp"

namespace quadpar {

struct OverlapFlags {
  bool oar = false;
  bool ors = false;
  bool oag = false;

  static OverlapFlags none() { return {}; }
  static OverlapFlags all() { return {true, true, true}; }
  /// Subset order: true when every flag set here is also set in `other`.
  bool subset_of(const OverlapFlags& other) const;
  /// "baseline", or the enabled flags joined by '+', e.g. "oar+oag".
  std::string name() const;
  /// Parses a comma-separated list of oar, ors, oag (or "none", "all").
  static OverlapFlags parse(std::string_view text);

  bool operator==(const OverlapFlags&) const = default;
};

/// The eight flag combinations, baseline first.
std::vector<OverlapFlags> all_flag_sets();

/// Compute seconds of a layer's three local multiplies.
struct LayerCompute {
  double forward = 0.0;
  double input_grad = 0.0;
  double weight_grad = 0.0;

  double total() const { return forward + input_grad + weight_grad; }
};

enum class EventKind { Compute, Comm };
enum class Phase { Forward, Backward, DataSync };

std::string_view to_string(EventKind kind);
std::string_view to_string(Phase phase);

struct TimelineEvent {
  std::string name;
  EventKind kind = EventKind::Compute;
  Phase phase = Phase::Forward;
  int layer = -1;
  /// "compute", or the axis of a communication channel ("X", "Y", ...).
  std::string resource;
  double duration = 0.0;
  double start = 0.0;
  double end = 0.0;
  /// Events that must end before this one starts.
  std::vector<int> after_end;
  /// Events that must start before this one starts.
  std::vector<int> after_start;
};

struct Timeline {
  std::vector<TimelineEvent> events;

  double total_compute() const;
  double total_comm() const;
};

/// Throws ShapeError when the three spans differ in length or a duration is
/// negative.
Timeline build_schedule(std::span<const LayerSpec> net,
                        std::span<const LayerCompute> compute,
                        std::span<const CommEstimate> comm,
                        const OverlapFlags& flags);

/// Latest event end; 0 for an empty timeline.
double batch_time(const Timeline& timeline);

/// Communication that no flag can hide: the first layer's all-gather, every
/// forward all-reduce, and the data-parallel sync.
double non_hideable_comm(std::span<const CommEstimate> comm);

/// True when, with every flag on, all communication fits inside compute:
/// nothing non-hideable, the first layer's reduce-scatter is zero, and
///   AG_z(l + 1) <= F(l),   AR_bwd(l) <= dW(l),
///   RS_z(l) <= dI(l - 1) + dW(l - 1)  for l >= 1.
bool comm_fits_windows(std::span<const LayerCompute> compute,
                       std::span<const CommEstimate> comm);

}  // namespace quadpar
