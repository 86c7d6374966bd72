// Copyright 2026 The quadpar Authors.
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "quadpar/error.hpp"
#include "quadpar/flops.hpp"
#include "quadpar/io.hpp"
#include "quadpar/models.hpp"
#include "quadpar/overlap.hpp"
#include "quadpar/perfmodel.hpp"
#include "quadpar/pmm.hpp"
#include "quadpar/sim.hpp"
#include "quadpar_ref/reference.hpp"

namespace quadpar::cli {

namespace {

using nlohmann::json;

// Networks above this many elements in their largest matrix are timed from
// the collective plan instead of being executed.
constexpr std::uint64_t kExecuteLimit = std::uint64_t{1} << 20;

constexpr std::array<LayerCollective, 5> kCollectives = {
    LayerCollective::AllGatherZ, LayerCollective::AllReduceForward,
    LayerCollective::AllReduceBackward, LayerCollective::ReduceScatterZ,
    LayerCollective::AllReduceData};

ClusterDescription cluster_of(const RunConfig& run) {
  if (!run.cluster_path.empty()) return load_cluster(run.cluster_path);
  ClusterDescription d;
  d.spec = synthetic_cluster(4, 25.0, 200.0);
  d.flops_per_second = d.peak.empirical;
  return d;
}

ModelSpec model_of(const RunConfig& run) {
  if (!run.model_path.empty() && !run.preset.empty()) {
    throw ConfigError("--model and --preset are mutually exclusive");
  }
  if (!run.model_path.empty()) return load_model(run.model_path);
  if (run.preset.empty()) throw ConfigError("one of --model or --preset is required");
  auto preset = find_gpt_preset(run.preset);
  if (!preset) throw ConfigError("unknown preset '" + run.preset + "'");
  if (run.batch_rows == 0) throw ConfigError("--batch-rows must be positive");
  return {preset->name,
          transformer_fc_layers(preset->hidden,
                                run.blocks > 0 ? run.blocks : preset->layers,
                                run.batch_rows)};
}

json to_json(const CommVolume& v) {
  json j;
  for (auto c : kCollectives) j[std::string(to_string(c))] = v.get(c);
  j["total"] = v.total();
  return j;
}

json to_json(const CommEstimate& e) {
  json j;
  for (auto c : kCollectives) j[std::string(to_string(c))] = e.get(c);
  j["total"] = e.t_comm;
  return j;
}

std::string fixed(double v, int digits = 6) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

void write_outputs(const std::filesystem::path& dir, std::ostream& out,
                   std::initializer_list<std::pair<const char*, std::string>>
                       files) {
  for (const auto& [name, text] : files) {
    write_text_file(dir / name, text);
    out << "wrote " << (dir / name).string() << "\n";
  }
}

}  // namespace

std::filesystem::path output_dir(const RunConfig& run) {
  if (!run.out_dir.empty()) return run.out_dir;
  if (const char* env = std::getenv("QUADPAR_OUT_DIR"); env && *env) {
    return env;
  }
  return "quadpar-out";
}

int cmd_rank_configs(const RunConfig& run, std::ostream& out) {
  const auto cluster = cluster_of(run);
  const auto model = model_of(run);
  const auto ranked = rank_configs(model.layers, run.workers, cluster.spec);

  out << "rank  config            predicted_comm_s\n";
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    out << std::left << std::setw(6) << (i + 1) << std::setw(18)
        << ranked[i].config.to_string() << fixed(ranked[i].predicted_seconds)
        << "\n";
  }
  const auto dir = output_dir(run);
  write_outputs(dir, out,
                {{"rankings.csv", rankings_csv(ranked)},
                 {"rankings.json", rankings_json(ranked)}});
  return kOk;
}

int cmd_simulate(const RunConfig& run, std::ostream& out) {
  if (run.iterations <= run.warmup || run.warmup < 0) {
    throw ConfigError("--iterations must exceed --warmup");
  }
  if (run.jitter < 0.0 || run.jitter >= 1.0) {
    throw ConfigError("--jitter must lie in [0, 1)");
  }
  const auto cluster = cluster_of(run);
  const auto model = model_of(run);
  const auto selected = OverlapFlags::parse(run.overlap);
  const int bpe = kDefaultBytesPerElement;

  GridConfig config;
  std::string source;
  if (!run.config.empty()) {
    config = GridConfig::parse(run.config);
    if (config.total() != run.workers) {
      throw ConfigError("--config " + config.to_string() + " has " +
                        std::to_string(config.total()) + " workers, not " +
                        std::to_string(run.workers));
    }
    for (const auto& l : model.layers) l.check_divisible(config);
    source = "explicit";
  } else {
    config = rank_configs(model.layers, run.workers, cluster.spec)
                 .front()
                 .config;
    source = "top-ranked";
  }
  const Grid grid = Grid::build(run.workers, config, cluster.spec.g_node);
  const auto& net = model.layers;

  // Per-rank bytes of every layer: executed through the transport when the
  // network is small enough, otherwise counted from the ring schedule.
  std::vector<CommVolume> measured;
  std::optional<TrafficReport> traffic;
  bool volumes_match = true;
  if (model.executable() && model.max_matrix_elements() <= kExecuteLimit) {
    const auto weights = ref::random_weights(net, run.seed);
    const auto batch = DenseMatrix::random(net.front().m, net.front().k,
                                           run.seed);
    Transport transport(grid.size(), grid.nodes(), bpe);
    auto step = network_step(net, weights, batch, grid, transport);
    traffic = std::move(step.traffic);
    measured = measured_volumes(*traffic, net.size(), 0);
    for (int r = 1; r < grid.size(); ++r) {
      const auto mine = measured_volumes(*traffic, net.size(), r);
      for (std::size_t l = 0; l < net.size(); ++l) {
        for (auto c : kCollectives) {
          volumes_match &= mine[l].get(c) == measured[l].get(c);
        }
      }
    }
  } else {
    for (const auto& l : net) measured.push_back(ring_bytes_per_rank(l, config, bpe));
  }

  const auto betas = effective_bandwidths(config, cluster.spec);
  const auto flag_sets = all_flag_sets();
  const auto sim = simulate_batch(net, grid, cluster.spec,
                                  cluster.flops_per_second, flag_sets, bpe);

  // Iterations: the simulated network is deterministic, so repeated
  // iterations differ only by the optional seeded jitter.
  std::mt19937_64 rng(run.seed);
  std::uniform_real_distribution<double> noise(1.0 - run.jitter,
                                               1.0 + run.jitter);
  std::map<std::string, double> mean_batch;
  Timeline selected_timeline;
  const int kept = run.iterations - run.warmup;
  for (int it = 0; it < run.iterations; ++it) {
    auto compute = sim.compute;
    auto comm = sim.comm;
    if (run.jitter > 0.0) {
      for (auto& c : compute) {
        c.forward *= noise(rng);
        c.input_grad *= noise(rng);
        c.weight_grad *= noise(rng);
      }
      for (auto& e : comm) {
        for (auto c : kCollectives) e.set(c, e.get(c) * noise(rng));
      }
    }
    for (const auto& flags : flag_sets) {
      auto timeline = build_schedule(net, compute, comm, flags);
      if (it >= run.warmup) {
        mean_batch[flags.name()] += batch_time(timeline) / kept;
      }
      if (it == run.iterations - 1 && flags == selected) {
        selected_timeline = std::move(timeline);
      }
    }
  }

  json layers = json::array();
  CommVolume predicted_total, measured_total;
  CommEstimate comm_total;
  double fwd_compute = 0.0, bwd_compute = 0.0;
  for (std::size_t l = 0; l < net.size(); ++l) {
    const auto& layer = net[l];
    const auto shard_rows = layer.m / static_cast<std::uint64_t>(config.g_data);
    const auto predicted = layer_comm_volume(layer, config, bpe, shard_rows);
    for (auto c : kCollectives) {
      volumes_match &= predicted.get(c) == measured[l].get(c);
    }
    predicted_total.ag_z += predicted.ag_z;
    predicted_total.rs_z += predicted.rs_z;
    predicted_total.ar_y += predicted.ar_y;
    predicted_total.ar_x += predicted.ar_x;
    predicted_total.ar_data += predicted.ar_data;
    measured_total.ag_z += measured[l].ag_z;
    measured_total.rs_z += measured[l].rs_z;
    measured_total.ar_y += measured[l].ar_y;
    measured_total.ar_x += measured[l].ar_x;
    measured_total.ar_data += measured[l].ar_data;
    comm_total += sim.comm[l];
    fwd_compute += sim.compute[l].forward;
    bwd_compute += sim.compute[l].input_grad + sim.compute[l].weight_grad;
    layers.push_back(
        {{"index", l},
         {"m", layer.m},
         {"k", layer.k},
         {"n", layer.n},
         {"transposed", layer.transposed},
         {"compute_s",
          {{"forward", sim.compute[l].forward},
           {"input_grad", sim.compute[l].input_grad},
           {"weight_grad", sim.compute[l].weight_grad}}},
         {"comm_s", to_json(sim.comm[l])},
         {"predicted_comm_s",
          to_json(layer_comm_time(layer, config, betas, bpe, shard_rows))},
         {"bytes_per_rank", to_json(measured[l])},
         {"predicted_bytes_per_rank", to_json(predicted)}});
  }

  json doc;
  doc["model"] = model.name;
  doc["workers"] = run.workers;
  doc["config"] = config.to_string();
  doc["config_source"] = source;
  doc["seed"] = run.seed;
  doc["iterations"] = run.iterations;
  doc["averaged_iterations"] = kept;
  doc["jitter"] = run.jitter;
  doc["bytes_per_element"] = bpe;
  doc["flops_per_second"] = cluster.flops_per_second;
  doc["traffic_source"] = traffic ? "executed" : "planned";
  doc["volumes_match_model"] = volumes_match;
  doc["selected_overlap"] = selected.name();
  doc["phases"] = {{"forward_compute_s", fwd_compute},
                   {"backward_compute_s", bwd_compute},
                   {"comm_s", to_json(comm_total)},
                   {"bytes_per_rank", to_json(measured_total)},
                   {"predicted_bytes_per_rank", to_json(predicted_total)}};
  json batch = json::object();
  for (const auto& flags : flag_sets) {
    const double t = mean_batch.at(flags.name());
    batch[flags.name()] = {{"batch_time_s", t},
                           {"exposed_comm_s", t - (fwd_compute + bwd_compute)}};
  }
  doc["overlap"] = std::move(batch);
  if (traffic) {
    doc["traffic"] = {{"total_bytes", traffic->total_bytes()},
                      {"intra_bytes", traffic->intra_bytes},
                      {"inter_bytes", traffic->inter_bytes}};
  }
  doc["layers"] = std::move(layers);

  std::ostringstream csv;
  csv.precision(17);
  csv << "overlap,batch_time_s,compute_s,exposed_comm_s\n";
  for (const auto& flags : flag_sets) {
    const double t = mean_batch.at(flags.name());
    csv << flags.name() << ',' << t << ',' << fwd_compute + bwd_compute << ','
        << t - (fwd_compute + bwd_compute) << '\n';
  }

  out << "model " << model.name << " on " << config.to_string() << " ("
      << source << "), traffic " << (traffic ? "executed" : "planned")
      << ", volumes " << (volumes_match ? "match" : "DIFFER")
      << " the closed form\n";
  out << "overlap          batch_time_s   exposed_comm_s\n";
  for (const auto& flags : flag_sets) {
    const double t = mean_batch.at(flags.name());
    out << std::left << std::setw(17) << flags.name() << std::setw(15)
        << fixed(t) << fixed(t - (fwd_compute + bwd_compute)) << "\n";
  }

  const auto dir = output_dir(run);
  write_outputs(dir, out,
                {{"metrics.json", doc.dump(2) + "\n"},
                 {"summary.csv", csv.str()},
                 {"timeline.json", timeline_json(selected_timeline)},
                 {"trace.json", timeline_trace_json(selected_timeline)}});
  if (traffic) write_outputs(dir, out, {{"traffic.json", traffic_json(*traffic)}});
  return kOk;
}

namespace {

struct GridCheck {
  GridConfig config;
  std::vector<LayerSpec> net;
  double oracle_error = 0.0;
  double gradient_error = 0.0;
  bool replicas = true;
  bool pass = false;
};

constexpr double kOracleTolerance = 1e-10;
constexpr double kGradientTolerance = 1e-4;
constexpr double kFiniteStep = 1e-5;

GridCheck check_grid(const GridConfig& config, int layers, int g_node,
                     std::uint64_t seed, bool inject_fault) {
  GridCheck out;
  out.config = config;
  std::mt19937_64 rng(seed);
  out.net = ref::random_chain(config, layers, rng);
  const auto weights = ref::random_weights(out.net, seed);
  const auto batch =
      DenseMatrix::random(out.net.front().m, out.net.front().k, seed);
  const Grid grid = Grid::build(config.total(), config, g_node);

  Transport transport(grid.size(), grid.nodes());
  if (inject_fault) transport.corrupt_next_all_reduce();
  const auto got = network_step(out.net, weights, batch, grid, transport);
  const auto want = ref::step(weights, batch);

  auto worst = [&](double e) { out.oracle_error = std::max(out.oracle_error, e); };
  worst(ref::relative_error(want.output, got.output));
  worst(ref::relative_error(want.input_grad, got.input_grad));
  worst(std::abs(want.loss - got.loss) / std::max(std::abs(want.loss), 1.0));
  for (std::size_t l = 0; l < out.net.size(); ++l) {
    worst(ref::relative_error(want.weight_grads[l],
                              got.weight_grads[l].gather(grid)));
    out.replicas &= got.weight_grads[l].replicas_consistent(grid);
  }

  // Central differences of the distributed loss on a few weight entries.
  double diff = 0.0, norm = 0.0;
  for (std::size_t l = 0; l < out.net.size(); ++l) {
    std::uniform_int_distribution<std::size_t> row(0, out.net[l].k - 1);
    std::uniform_int_distribution<std::size_t> col(0, out.net[l].n - 1);
    const auto grad = got.weight_grads[l].gather(grid);
    for (int s = 0; s < 2; ++s) {
      const std::size_t i = row(rng), j = col(rng);
      auto perturbed = weights;
      auto loss_at = [&](double delta) {
        perturbed[l](i, j) = weights[l](i, j) + delta;
        Transport t(grid.size(), grid.nodes());
        return network_step(out.net, perturbed, batch, grid, t).loss;
      };
      const double fd =
          (loss_at(kFiniteStep) - loss_at(-kFiniteStep)) / (2 * kFiniteStep);
      diff += (fd - grad(i, j)) * (fd - grad(i, j));
      norm += grad(i, j) * grad(i, j);
    }
  }
  out.gradient_error = norm > 0.0 ? std::sqrt(diff / norm) : std::sqrt(diff);
  out.pass = out.oracle_error <= kOracleTolerance &&
             out.gradient_error <= kGradientTolerance && out.replicas;
  return out;
}

}  // namespace

int cmd_verify(const RunConfig& run, std::ostream& out) {
  if (run.layers < 1) throw ConfigError("--layers must be positive");
  const int g_node = run.cluster_path.empty()
                         ? 4
                         : load_cluster(run.cluster_path).spec.g_node;
  json rows = json::array();
  int failures = 0;
  bool fault_pending = run.inject_fault;
  std::uint64_t index = 0;
  for (const auto& config : ref::small_grids(run.workers)) {
    // The fault goes to the first grid that has something to all-reduce.
    const bool fault = fault_pending && config.total() > 1;
    fault_pending &= !fault;
    const auto r = check_grid(config, run.layers, g_node,
                              run.seed * 1000003 + index++, fault);
    failures += r.pass ? 0 : 1;
    json dims = json::array();
    for (const auto& l : r.net) dims.push_back({l.m, l.k, l.n});
    rows.push_back({{"config", config.to_string()},
                    {"layers", dims},
                    {"oracle_rel_error", r.oracle_error},
                    {"gradient_rel_error", r.gradient_error},
                    {"replicas_consistent", r.replicas},
                    {"pass", r.pass}});
    if (!r.pass) {
      out << "FAIL " << config.to_string() << " oracle "
          << fixed(r.oracle_error, 3) << " gradient "
          << fixed(r.gradient_error, 3) << "\n";
    }
  }
  out << (failures ? "FAIL" : "PASS") << ": " << rows.size() - failures << "/"
      << rows.size() << " grids with up to " << run.workers
      << " workers match the serial reference\n";
  json doc = {{"seed", run.seed},
              {"inject_fault", run.inject_fault},
              {"oracle_tolerance", kOracleTolerance},
              {"gradient_tolerance", kGradientTolerance},
              {"failures", failures},
              {"grids", rows}};
  write_outputs(output_dir(run), out, {{"verify.json", doc.dump(2) + "\n"}});
  return failures ? kCheckFailed : kOk;
}

int cmd_tune(const RunConfig& run, std::ostream& out) {
  const MatmulShape shape{run.m, run.k, run.n};
  const auto result = tune_matmul_mode(shape, wall_clock_timer(run.seed), run.trials);
  json medians = json::object();
  out << "mode  median_s\n";
  for (MatmulMode mode : kAllModes) {
    const double t = result.median_seconds[static_cast<std::size_t>(mode)];
    medians[std::string(to_string(mode))] = t;
    out << std::left << std::setw(6) << to_string(mode) << fixed(t) << "\n";
  }
  out << "chosen " << to_string(result.mode) << "\n";
  json doc = {{"m", run.m},
              {"k", run.k},
              {"n", run.n},
              {"trials", run.trials},
              {"median_s", medians},
              {"chosen", to_string(result.mode)}};
  write_outputs(output_dir(run), out, {{"tune.json", doc.dump(2) + "\n"}});
  return kOk;
}

int cmd_flops(const RunConfig& run, std::ostream& out) {
  PeakSpec peak = a100_peak();
  if (!run.peak.empty()) {
    auto p = find_peak(run.peak);
    if (!p) throw ConfigError("unknown peak '" + run.peak + "'");
    peak = *p;
  } else if (!run.cluster_path.empty()) {
    peak = load_cluster(run.cluster_path).peak;
  }

  std::string name;
  double flops = 0.0, seconds = 0.0;
  if (run.total_pflops > 0.0) {
    // A sustained rate: one second's worth of work.
    name = run.preset.empty() ? "reported" : run.preset;
    flops = run.total_pflops * 1e15;
    seconds = 1.0;
  } else {
    if (!(run.seconds > 0.0)) {
      throw ConfigError("give --total-pflops, or --seconds with a model");
    }
    const auto model = model_of(run);
    name = model.name;
    flops = network_flops(model.layers, 0, run.recompute);
    seconds = run.seconds;
  }
  const EfficiencyRow row{run.workers, name,
                          efficiency(flops, seconds, run.workers, peak)};
  out << name << " on " << run.workers << " x " << peak.name << ": "
      << fixed(row.value.pflops) << " Pflop/s, "
      << fixed(row.value.pct_advertised, 4) << "% of advertised, "
      << fixed(row.value.pct_empirical, 4) << "% of empirical peak\n";
  json doc = {{"workers", run.workers},
              {"model", name},
              {"peak", peak.name},
              {"model_flops", flops},
              {"seconds", seconds},
              {"total_pflops", row.value.pflops},
              {"pct_advertised", row.value.pct_advertised},
              {"pct_empirical", row.value.pct_empirical}};
  const EfficiencyRow rows[] = {row};
  write_outputs(output_dir(run), out,
                {{"efficiency.csv", efficiency_csv(rows)},
                 {"efficiency.json", doc.dump(2) + "\n"}});
  return kOk;
}

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"3D tensor-parallel training: configuration ranking, "
               "simulation and verification"};
  app.name("quadpar");
  app.require_subcommand(1);

  auto common = [&](CLI::App* sub) {
    sub->add_option("--cluster", cfg.cluster_path, "Cluster description (JSON)");
    auto* workers = sub->add_option("--workers", cfg.workers, "Total workers")
                        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", cfg.seed, "Random seed");
    sub->add_option("--out", cfg.out_dir,
                    "Output directory (default $QUADPAR_OUT_DIR or ./quadpar-out)");
    return workers;
  };
  auto model_opts = [&](CLI::App* sub) {
    sub->add_option("--model", cfg.model_path, "Model description (JSON)");
    sub->add_option("--preset", cfg.preset, "GPT preset, e.g. GPT-20B");
    sub->add_option("--batch-rows", cfg.batch_rows,
                    "Rows per batch (batch * sequence) for presets");
    sub->add_option("--blocks", cfg.blocks,
                    "Transformer blocks for presets (default: full depth)");
  };

  auto* rank = app.add_subcommand("rank-configs", "Rank grid configurations");
  common(rank);
  model_opts(rank);

  auto* simulate = app.add_subcommand("simulate", "Simulate training steps");
  common(simulate);
  model_opts(simulate);
  simulate->add_option("--config", cfg.config, "Grid as gx,gy,gz,gdata");
  simulate->add_option("--overlap", cfg.overlap,
                       "Overlap flags for the timeline: oar,ors,oag | all | none");
  simulate->add_option("--iterations", cfg.iterations, "Iterations");
  simulate->add_option("--warmup", cfg.warmup, "Discarded leading iterations");
  simulate->add_option("--jitter", cfg.jitter,
                       "Relative uniform noise on event durations");

  auto* verify = app.add_subcommand("verify", "Check against a serial reference");
  auto* verify_workers = common(verify);
  verify_workers->description("Largest grid to check (default 16)");
  verify->add_option("--layers", cfg.layers, "Layers per random network");
  verify->add_flag("--inject-fault", cfg.inject_fault,
                   "Corrupt one all-reduce (harness self-test)");

  auto* tune = app.add_subcommand("tune", "Pick the fastest local kernel");
  tune->add_option("--seed", cfg.seed, "Random seed");
  tune->add_option("--out", cfg.out_dir, "Output directory");
  tune->add_option("--trials", cfg.trials, "Timed repetitions per mode");
  tune->add_option("--m", cfg.m, "Rows")->check(CLI::PositiveNumber);
  tune->add_option("--k", cfg.k, "Contraction")->check(CLI::PositiveNumber);
  tune->add_option("--n", cfg.n, "Columns")->check(CLI::PositiveNumber);

  auto* flops = app.add_subcommand("flops", "Efficiency against peak");
  common(flops);
  model_opts(flops);
  flops->add_option("--total-pflops", cfg.total_pflops, "Sustained Pflop/s");
  flops->add_option("--seconds", cfg.seconds, "Seconds per batch");
  flops->add_option("--peak", cfg.peak, "a100 | mi250x-gcd | h100");
  flops->add_flag("--recompute", cfg.recompute, "Count activation recomputation");

  std::vector<std::string> argv_store{"quadpar"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }
  if (verify->parsed() && verify_workers->count() == 0) cfg.workers = 16;

  try {
    if (rank->parsed()) return cmd_rank_configs(cfg, out);
    if (simulate->parsed()) return cmd_simulate(cfg, out);
    if (verify->parsed()) return cmd_verify(cfg, out);
    if (tune->parsed()) return cmd_tune(cfg, out);
    return cmd_flops(cfg, out);
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const ShapeError& e) {
    err << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }
}

}  // namespace quadpar::cli
