// Copyright 2026 The quadpar Authors.
// SPDX-License-Identifier: Apache-2.0

#include "quadpar/io.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "quadpar/error.hpp"

namespace quadpar {

namespace {

using nlohmann::json;

json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string(what) + ": invalid JSON: " + e.what());
  }
}

const json& require(const json& obj, const char* key, std::string_view ctx) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ConfigError(std::string(ctx) + ": missing field '" + key + "'");
  }
  return obj.at(key);
}

double positive_number(const json& v, std::string_view field) {
  if (!v.is_number() || !(v.get<double>() > 0.0)) {
    throw ConfigError(std::string(field) + " must be a positive number");
  }
  return v.get<double>();
}

std::uint64_t positive_count(const json& v, std::string_view field) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 1) {
    throw ConfigError(std::string(field) + " must be a positive integer");
  }
  return v.get<std::uint64_t>();
}

}  // namespace

ClusterDescription parse_cluster(std::string_view json_text) {
  const json doc = parse_json(json_text, "cluster");
  ClusterDescription out;
  out.spec.g_node = static_cast<int>(
      positive_count(require(doc, "g_node", "cluster"), "g_node"));
  out.spec.beta_inter =
      positive_number(require(doc, "beta_inter_gbps", "cluster"),
                      "beta_inter_gbps") *
      kBytesPerGB;
  const json& table = require(doc, "intra_table", "cluster");
  if (!table.is_array()) throw ConfigError("intra_table must be an array");
  for (std::size_t i = 0; i < table.size(); ++i) {
    const std::string ctx = "intra_table[" + std::to_string(i) + "]";
    const json& row = table[i];
    const int inner = static_cast<int>(positive_count(
        require(row, "inner_product", ctx), ctx + ".inner_product"));
    const int size = static_cast<int>(
        positive_count(require(row, "group_size", ctx), ctx + ".group_size"));
    const double bw =
        positive_number(require(row, "gbps", ctx), ctx + ".gbps") * kBytesPerGB;
    if (!out.spec.intra_table.emplace(std::make_pair(inner, size), bw).second) {
      throw ConfigError(ctx + ": duplicate entry");
    }
  }
  if (doc.contains("peak")) {
    const json& p = doc.at("peak");
    if (!p.is_string()) throw ConfigError("peak must be a string");
    auto found = find_peak(p.get<std::string>());
    if (!found) throw ConfigError("unknown peak '" + p.get<std::string>() + "'");
    out.peak = *found;
  }
  out.flops_per_second =
      doc.contains("compute_tflops")
          ? positive_number(doc.at("compute_tflops"), "compute_tflops") * 1e12
          : out.peak.empirical;
  out.spec.validate();
  return out;
}

ClusterDescription load_cluster(const std::filesystem::path& path) {
  return parse_cluster(read_text_file(path));
}

ModelSpec parse_model(std::string_view json_text) {
  const json doc = parse_json(json_text, "model");
  const std::uint64_t rows =
      positive_count(require(doc, "batch_rows", "model"), "batch_rows");
  ModelSpec out;
  if (doc.contains("preset")) {
    const std::string name = doc.at("preset").get<std::string>();
    auto preset = find_gpt_preset(name);
    if (!preset) throw ConfigError("unknown preset '" + name + "'");
    int blocks = preset->layers;
    if (doc.contains("blocks")) {
      blocks = static_cast<int>(positive_count(doc.at("blocks"), "blocks"));
    }
    out.name = doc.value("name", name);
    out.layers = transformer_fc_layers(preset->hidden, blocks, rows);
    return out;
  }
  out.name = doc.value("name", std::string("model"));
  const json& layers = require(doc, "layers", "model");
  if (!layers.is_array() || layers.empty()) {
    throw ConfigError("layers must be a non-empty array");
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string ctx = "layers[" + std::to_string(i) + "]";
    const json& l = layers[i];
    LayerSpec spec;
    spec.k = positive_count(require(l, "k", ctx), ctx + ".k");
    spec.n = positive_count(require(l, "n", ctx), ctx + ".n");
    spec.m = l.contains("m") ? positive_count(l.at("m"), ctx + ".m") : rows;
    if (l.contains("transposed")) {
      if (!l.at("transposed").is_boolean()) {
        throw ConfigError(ctx + ".transposed must be a boolean");
      }
      spec.transposed = l.at("transposed").get<bool>();
    }
    out.layers.push_back(spec);
  }
  return out;
}

ModelSpec load_model(const std::filesystem::path& path) {
  return parse_model(read_text_file(path));
}

std::string traffic_json(const TrafficReport& report) {
  json doc;
  doc["bytes_sent"] = report.bytes_sent;
  doc["intra_bytes"] = report.intra_bytes;
  doc["inter_bytes"] = report.inter_bytes;
  doc["total_bytes"] = report.total_bytes();
  json log = json::array();
  for (const auto& r : report.log) {
    log.push_back({{"kind", to_string(r.kind)},
                   {"axis", to_string(r.axis)},
                   {"phase", r.tag.phase},
                   {"layer", r.tag.layer},
                   {"members", r.members},
                   {"buffer_elements", r.buffer_elements},
                   {"bytes_per_rank", r.bytes_per_rank},
                   {"intra_bytes", r.intra_bytes},
                   {"inter_bytes", r.inter_bytes}});
  }
  doc["collectives"] = std::move(log);
  return doc.dump(2) + "\n";
}

std::string timeline_json(const Timeline& timeline) {
  json events = json::array();
  for (const auto& e : timeline.events) {
    events.push_back({{"name", e.name},
                      {"kind", to_string(e.kind)},
                      {"phase", to_string(e.phase)},
                      {"layer", e.layer},
                      {"resource", e.resource},
                      {"start_s", e.start},
                      {"end_s", e.end},
                      {"duration_s", e.duration}});
  }
  json doc;
  doc["batch_time_s"] = batch_time(timeline);
  doc["events"] = std::move(events);
  return doc.dump(2) + "\n";
}

std::string timeline_trace_json(const Timeline& timeline) {
  json events = json::array();
  for (const auto& e : timeline.events) {
    events.push_back({{"name", e.name + "[" + std::to_string(e.layer) + "]"},
                      {"cat", to_string(e.phase)},
                      {"ph", "X"},
                      {"pid", 0},
                      {"tid", e.resource},
                      {"ts", e.start * 1e6},
                      {"dur", e.duration * 1e6}});
  }
  return json{{"traceEvents", std::move(events)}}.dump() + "\n";
}

std::string rankings_csv(std::span<const RankedConfig> ranked) {
  std::ostringstream os;
  os.precision(17);
  os << "config,predicted_s,rank\n";
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    os << '"' << ranked[i].config.to_string() << "\","
       << ranked[i].predicted_seconds << ',' << (i + 1) << '\n';
  }
  return os.str();
}

std::string rankings_json(std::span<const RankedConfig> ranked) {
  json rows = json::array();
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto& c = ranked[i].config;
    rows.push_back({{"rank", i + 1},
                    {"g_x", c.g_x},
                    {"g_y", c.g_y},
                    {"g_z", c.g_z},
                    {"g_data", c.g_data},
                    {"predicted_s", ranked[i].predicted_seconds}});
  }
  return rows.dump(2) + "\n";
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

}  // namespace quadpar
