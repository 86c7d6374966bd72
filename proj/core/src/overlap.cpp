// Copyright 2026 The quadpar Authors.
// SPDX-License-Identifier: Apache-2.0

#include "quadpar/overlap.hpp"

#include <algorithm>
#include <map>

#include "quadpar/error.hpp"

namespace quadpar {

bool OverlapFlags::subset_of(const OverlapFlags& other) const {
  return (!oar || other.oar) && (!ors || other.ors) && (!oag || other.oag);
}

std::string OverlapFlags::name() const {
  std::string s;
  auto add = [&s](const char* f) {
    if (!s.empty()) s += '+';
    s += f;
  };
  if (oar) add("oar");
  if (ors) add("ors");
  if (oag) add("oag");
  return s.empty() ? "baseline" : s;
}

OverlapFlags OverlapFlags::parse(std::string_view text) {
  OverlapFlags flags;
  if (text.empty() || text == "none" || text == "baseline") return flags;
  if (text == "all") return all();
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto comma = text.find(',', pos);
    auto token = text.substr(pos, comma == std::string_view::npos
                                      ? std::string_view::npos
                                      : comma - pos);
    if (token == "oar") {
      flags.oar = true;
    } else if (token == "ors") {
      flags.ors = true;
    } else if (token == "oag") {
      flags.oag = true;
    } else {
      throw ConfigError("unknown overlap flag '" + std::string(token) +
                        "' (expected oar, ors, oag, none or all)");
    }
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return flags;
}

std::vector<OverlapFlags> all_flag_sets() {
  std::vector<OverlapFlags> out;
  for (int bits = 0; bits < 8; ++bits) {
    out.push_back({(bits & 1) != 0, (bits & 2) != 0, (bits & 4) != 0});
  }
  return out;
}

std::string_view to_string(EventKind kind) {
  return kind == EventKind::Compute ? "compute" : "comm";
}

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::Forward: return "fwd";
    case Phase::Backward: return "bwd";
    case Phase::DataSync: return "data-sync";
  }
  return "?";
}

double Timeline::total_compute() const {
  double sum = 0.0;
  for (const auto& e : events) {
    if (e.kind == EventKind::Compute) sum += e.duration;
  }
  return sum;
}

double Timeline::total_comm() const {
  double sum = 0.0;
  for (const auto& e : events) {
    if (e.kind == EventKind::Comm) sum += e.duration;
  }
  return sum;
}

namespace {

class ScheduleBuilder {
 public:
  int add(std::string name, EventKind kind, Phase phase, int layer,
          std::string resource, double duration, std::vector<int> after_end,
          std::vector<int> after_start = {}) {
    TimelineEvent e;
    e.name = std::move(name);
    e.kind = kind;
    e.phase = phase;
    e.layer = layer;
    e.resource = std::move(resource);
    e.duration = duration;
    after_end.erase(std::remove(after_end.begin(), after_end.end(), -1),
                    after_end.end());
    after_start.erase(std::remove(after_start.begin(), after_start.end(), -1),
                      after_start.end());
    double ready = free_at_[e.resource];
    for (int d : after_end) {
      ready = std::max(ready, timeline_.events[static_cast<std::size_t>(d)].end);
    }
    for (int d : after_start) {
      ready =
          std::max(ready, timeline_.events[static_cast<std::size_t>(d)].start);
    }
    e.after_end = std::move(after_end);
    e.after_start = std::move(after_start);
    e.start = ready;
    e.end = ready + duration;
    free_at_[e.resource] = e.end;
    timeline_.events.push_back(std::move(e));
    return static_cast<int>(timeline_.events.size()) - 1;
  }

  Timeline take() { return std::move(timeline_); }

 private:
  Timeline timeline_;
  std::map<std::string, double> free_at_;
};

const std::string kCompute = "compute";

std::string channel(Axis axis) { return std::string(to_string(axis)); }

}  // namespace

Timeline build_schedule(std::span<const LayerSpec> net,
                        std::span<const LayerCompute> compute,
                        std::span<const CommEstimate> comm,
                        const OverlapFlags& flags) {
  if (net.size() != compute.size() || net.size() != comm.size()) {
    throw ShapeError("schedule needs one compute and one comm entry per layer");
  }
  for (std::size_t l = 0; l < net.size(); ++l) {
    const auto& c = compute[l];
    const auto& t = comm[l];
    for (double v : {c.forward, c.input_grad, c.weight_grad, t.t_ag_z,
                     t.t_rs_z, t.t_ar_y, t.t_ar_x, t.t_ar_data}) {
      if (!(v >= 0.0)) {
        throw ShapeError("layer " + std::to_string(l) +
                         " has a negative or NaN duration");
      }
    }
  }
  const int layers = static_cast<int>(net.size());
  ScheduleBuilder b;
  const std::string z = channel(Axis::Z);

  std::vector<int> gather(net.size(), -1);
  int prev_reduce = -1;
  if (flags.oag && layers > 0) {
    gather[0] = b.add("ag_z", EventKind::Comm, Phase::Forward, 0, z,
                      comm[0].t_ag_z, {});
  }
  for (int l = 0; l < layers; ++l) {
    const auto ul = static_cast<std::size_t>(l);
    if (gather[ul] < 0) {
      gather[ul] = b.add("ag_z", EventKind::Comm, Phase::Forward, l, z,
                         comm[ul].t_ag_z, {prev_reduce});
    }
    const int fwd = b.add("fwd", EventKind::Compute, Phase::Forward, l,
                          kCompute, compute[ul].forward,
                          {gather[ul], prev_reduce});
    if (flags.oag && l + 1 < layers) {
      gather[ul + 1] = b.add("ag_z", EventKind::Comm, Phase::Forward, l + 1, z,
                             comm[ul + 1].t_ag_z, {}, {fwd});
    }
    prev_reduce = b.add("ar_fwd", EventKind::Comm, Phase::Forward, l,
                        channel(net[ul].contract_axis()), comm[ul].t_ar_y,
                        {fwd});
  }

  int grad_ready = prev_reduce;
  int prev_scatter = -1;
  std::vector<int> backward_events;
  for (int l = layers - 1; l >= 0; --l) {
    const auto ul = static_cast<std::size_t>(l);
    std::vector<int> deps = {grad_ready};
    if (!flags.ors) deps.push_back(prev_scatter);
    const int dgrad = b.add("bwd_dI", EventKind::Compute, Phase::Backward, l,
                            kCompute, compute[ul].input_grad, deps);
    const int reduce = b.add("ar_bwd", EventKind::Comm, Phase::Backward, l,
                             channel(net[ul].output_axis()), comm[ul].t_ar_x,
                             {dgrad});
    std::vector<int> wdeps = {dgrad};
    if (!flags.oar) wdeps.push_back(reduce);
    const int wgrad = b.add("bwd_dW", EventKind::Compute, Phase::Backward, l,
                            kCompute, compute[ul].weight_grad, wdeps);
    prev_scatter = b.add("rs_z", EventKind::Comm, Phase::Backward, l, z,
                         comm[ul].t_rs_z, {wgrad});
    grad_ready = reduce;
    backward_events.insert(backward_events.end(),
                           {dgrad, reduce, wgrad, prev_scatter});
  }

  // The sync waits for every outstanding backward event.
  const std::string data = channel(Axis::Data);
  for (int l = layers - 1; l >= 0; --l) {
    b.add("ar_data", EventKind::Comm, Phase::DataSync, l, data,
          comm[static_cast<std::size_t>(l)].t_ar_data, backward_events);
  }
  return b.take();
}

double batch_time(const Timeline& timeline) {
  double end = 0.0;
  for (const auto& e : timeline.events) end = std::max(end, e.end);
  return end;
}

double non_hideable_comm(std::span<const CommEstimate> comm) {
  double sum = comm.empty() ? 0.0 : comm.front().t_ag_z;
  for (const auto& c : comm) sum += c.t_ar_y + c.t_ar_data;
  return sum;
}

bool comm_fits_windows(std::span<const LayerCompute> compute,
                       std::span<const CommEstimate> comm) {
  if (compute.size() != comm.size()) return false;
  if (comm.empty()) return true;
  if (non_hideable_comm(comm) != 0.0 || comm.front().t_rs_z != 0.0) {
    return false;
  }
  for (std::size_t l = 0; l < comm.size(); ++l) {
    if (comm[l].t_ar_x > compute[l].weight_grad) return false;
    if (l + 1 < comm.size() && comm[l + 1].t_ag_z > compute[l].forward) {
      return false;
    }
    if (l >= 1 && comm[l].t_rs_z >
                      compute[l - 1].input_grad + compute[l - 1].weight_grad) {
      return false;
    }
  }
  return true;
}

}  // namespace quadpar
