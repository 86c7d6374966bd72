// Copyright 2026 The quadpar Authors.
// SPDX-License-Identifier: Apache-2.0

#include "quadpar/pmm.hpp"

#include <algorithm>
#include <chrono>
#include <random>
#include <string>

#include "quadpar/error.hpp"

namespace quadpar {

namespace {

using Clock = std::chrono::steady_clock;

int extent_product(const GridConfig& config, std::span<const Axis> axes) {
  int p = 1;
  for (Axis a : axes) p *= config.extent(a);
  return p;
}

int block_index(const Coords& c, const GridConfig& config,
                std::span<const Axis> axes) {
  int idx = 0;
  for (Axis a : axes) idx = idx * config.extent(a) + c.get(a);
  return idx;
}

bool uses_axis(const Distribution& dist, Axis axis) {
  auto in = [axis](const std::vector<Axis>& v) {
    return std::find(v.begin(), v.end(), axis) != v.end();
  };
  return in(dist.row_axes) || in(dist.col_axes) ||
         (dist.flat_axis && *dist.flat_axis == axis);
}

std::string axes_string(std::span<const Axis> axes) {
  std::string s;
  for (Axis a : axes) {
    if (!s.empty()) s += ',';
    s += to_string(a);
  }
  return s.empty() ? "-" : s;
}

std::string describe(const Distribution& dist) {
  std::string s = "rows[" + axes_string(dist.row_axes) + "] cols[" +
                  axes_string(dist.col_axes) + "]";
  if (dist.flat_axis) s += " flat[" + std::string(to_string(*dist.flat_axis)) + "]";
  return s;
}

void check_split(std::size_t extent, std::span<const Axis> axes,
                 const GridConfig& config, const char* what) {
  std::size_t cumulative = 1;
  for (Axis a : axes) {
    cumulative *= static_cast<std::size_t>(config.extent(a));
    if (extent % cumulative != 0) {
      throw ShapeError(std::string(what) + " " + std::to_string(extent) +
                       " cannot be split along axis " +
                       std::string(to_string(a)) + " (extent " +
                       std::to_string(config.extent(a)) + ") of grid " +
                       config.to_string());
    }
  }
}

// Representative copy of `rank`: coordinate 0 on every replicated axis.
int representative(const Grid& grid, const Distribution& dist, int rank) {
  Coords c = grid.coords_of(rank);
  for (Axis a : kHierarchy) {
    if (!uses_axis(dist, a)) c.set(a, 0);
  }
  return grid.rank_of(c);
}

std::vector<double> to_vector(const DenseMatrix& m) {
  auto v = m.values();
  return {v.begin(), v.end()};
}

// Logical A * B where A = a^T if a_t (likewise B), using the kernel `mode`.
DenseMatrix local_product(MatmulMode mode, const DenseMatrix& a, bool a_t,
                          const DenseMatrix& b, bool b_t) {
  switch (mode) {
    case MatmulMode::NN:
      return gemm_nn(a_t ? a.transposed() : a, b_t ? b.transposed() : b);
    case MatmulMode::NT:
      return gemm_nt(a_t ? a.transposed() : a, b_t ? b : b.transposed());
    case MatmulMode::TN:
      return gemm_tn(a_t ? a : a.transposed(), b_t ? b.transposed() : b);
  }
  throw ProtocolError("unknown matmul mode");
}

void reduce_over(Axis axis, const Grid& grid, Transport& transport,
                 std::vector<DenseMatrix>& blocks, const CollectiveTag& tag) {
  if (grid.extent(axis) == 1) return;
  for (const auto& group : grid.groups(axis)) {
    Transport::Buffers in;
    in.reserve(group.members.size());
    for (int r : group.members) {
      in.push_back(to_vector(blocks[static_cast<std::size_t>(r)]));
    }
    auto out = transport.all_reduce(group, in, tag);
    for (std::size_t p = 0; p < group.members.size(); ++p) {
      auto& block = blocks[static_cast<std::size_t>(group.members[p])];
      block = DenseMatrix(block.rows(), block.cols(), std::move(out[p]));
    }
  }
}

}  // namespace

void LayerSpec::check_divisible(const GridConfig& config) const {
  if (m < 1 || k < 1 || n < 1) {
    throw ShapeError("layer dimensions must be >= 1");
  }
  const Axis row_axes[] = {Axis::Data, Axis::Z};
  check_split(m, row_axes, config, "batch rows");
  const Axis contract[] = {contract_axis()};
  check_split(k, contract, config, "contraction dimension");
  const Axis out[] = {output_axis()};
  check_split(n, out, config, "output dimension");
  const std::uint64_t block = (k / static_cast<std::uint64_t>(
                                        config.extent(contract_axis()))) *
                              (n / static_cast<std::uint64_t>(
                                        config.extent(output_axis())));
  if (block % static_cast<std::uint64_t>(config.g_z) != 0) {
    throw ShapeError("weight block of " + std::to_string(block) +
                     " elements cannot be sharded along axis Z (extent " +
                     std::to_string(config.g_z) + ") of grid " +
                     config.to_string());
  }
}

bool LayerSpec::divisible(const GridConfig& config) const {
  try {
    check_divisible(config);
    return true;
  } catch (const ShapeError&) {
    return false;
  }
}

std::vector<LayerSpec> alternate_transposes(std::vector<LayerSpec> net) {
  for (std::size_t l = 0; l < net.size(); ++l) net[l].transposed = (l % 2 == 1);
  return net;
}

std::vector<LayerSpec> make_chain(std::uint64_t m,
                                  std::span<const std::uint64_t> dims) {
  std::vector<LayerSpec> net;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    net.push_back({m, dims[l], dims[l + 1], false});
  }
  return alternate_transposes(std::move(net));
}

Distribution input_distribution(const LayerSpec& layer) {
  return {{Axis::Data, Axis::Z}, {layer.contract_axis()}, std::nullopt};
}

Distribution output_distribution(const LayerSpec& layer) {
  return {{Axis::Data, Axis::Z}, {layer.output_axis()}, std::nullopt};
}

Distribution weight_distribution(const LayerSpec& layer) {
  return {{layer.contract_axis()}, {layer.output_axis()}, Axis::Z};
}

ShardedMatrix ShardedMatrix::distribute(const DenseMatrix& global,
                                        const Grid& grid, Distribution dist) {
  const GridConfig& config = grid.config();
  check_split(global.rows(), dist.row_axes, config, "rows");
  check_split(global.cols(), dist.col_axes, config, "columns");
  const std::size_t br = global.rows() / static_cast<std::size_t>(
                                             extent_product(config, dist.row_axes));
  const std::size_t bc = global.cols() / static_cast<std::size_t>(
                                             extent_product(config, dist.col_axes));
  std::size_t shards = 1;
  if (dist.flat_axis) {
    shards = static_cast<std::size_t>(config.extent(*dist.flat_axis));
    if ((br * bc) % shards != 0) {
      throw ShapeError("block of " + std::to_string(br * bc) +
                       " elements cannot be sharded along axis " +
                       std::string(to_string(*dist.flat_axis)) + " (extent " +
                       std::to_string(shards) + ") of grid " +
                       config.to_string());
    }
  }
  std::vector<DenseMatrix> blocks;
  blocks.reserve(static_cast<std::size_t>(grid.size()));
  for (int rank = 0; rank < grid.size(); ++rank) {
    const Coords c = grid.coords_of(rank);
    DenseMatrix block = global.block(
        static_cast<std::size_t>(block_index(c, config, dist.row_axes)) * br,
        static_cast<std::size_t>(block_index(c, config, dist.col_axes)) * bc,
        br, bc);
    if (dist.flat_axis) {
      const std::size_t len = br * bc / shards;
      const auto first = block.values().begin() +
                         static_cast<std::ptrdiff_t>(
                             len * static_cast<std::size_t>(c.get(*dist.flat_axis)));
      block = DenseMatrix(1, len, std::vector<double>(
                                      first, first + static_cast<std::ptrdiff_t>(len)));
    }
    blocks.push_back(std::move(block));
  }
  return from_blocks(global.rows(), global.cols(), std::move(dist),
                     std::move(blocks));
}

ShardedMatrix ShardedMatrix::from_blocks(std::size_t rows, std::size_t cols,
                                         Distribution dist,
                                         std::vector<DenseMatrix> blocks) {
  ShardedMatrix out;
  out.rows_ = rows;
  out.cols_ = cols;
  out.dist_ = std::move(dist);
  out.blocks_ = std::move(blocks);
  return out;
}

DenseMatrix ShardedMatrix::gather(const Grid& grid) const {
  if (blocks_.size() != static_cast<std::size_t>(grid.size())) {
    throw ProtocolError("sharded matrix has " + std::to_string(blocks_.size()) +
                        " blocks for a grid of " + std::to_string(grid.size()));
  }
  const GridConfig& config = grid.config();
  const auto row_blocks =
      static_cast<std::size_t>(extent_product(config, dist_.row_axes));
  const auto col_blocks =
      static_cast<std::size_t>(extent_product(config, dist_.col_axes));
  const std::size_t br = rows_ / row_blocks;
  const std::size_t bc = cols_ / col_blocks;
  DenseMatrix global(rows_, cols_);
  std::vector<std::vector<double>> flat;
  if (dist_.flat_axis) {
    flat.assign(row_blocks * col_blocks, std::vector<double>(br * bc));
  }
  for (int rank = 0; rank < grid.size(); ++rank) {
    if (representative(grid, dist_, rank) != rank) continue;
    const Coords c = grid.coords_of(rank);
    const auto bi = static_cast<std::size_t>(block_index(c, config, dist_.row_axes));
    const auto bj = static_cast<std::size_t>(block_index(c, config, dist_.col_axes));
    const DenseMatrix& block = blocks_[static_cast<std::size_t>(rank)];
    if (dist_.flat_axis) {
      auto v = block.values();
      const auto offset =
          v.size() * static_cast<std::size_t>(c.get(*dist_.flat_axis));
      std::copy(v.begin(), v.end(),
                flat[bi * col_blocks + bj].begin() +
                    static_cast<std::ptrdiff_t>(offset));
    } else {
      global.set_block(bi * br, bj * bc, block);
    }
  }
  if (dist_.flat_axis) {
    for (std::size_t bi = 0; bi < row_blocks; ++bi) {
      for (std::size_t bj = 0; bj < col_blocks; ++bj) {
        global.set_block(bi * br, bj * bc,
                         DenseMatrix(br, bc, std::move(flat[bi * col_blocks + bj])));
      }
    }
  }
  return global;
}

bool ShardedMatrix::replicas_consistent(const Grid& grid) const {
  for (int rank = 0; rank < grid.size(); ++rank) {
    const int rep = representative(grid, dist_, rank);
    if (!(blocks_[static_cast<std::size_t>(rank)] ==
          blocks_[static_cast<std::size_t>(rep)])) {
      return false;
    }
  }
  return true;
}

ShardedMatrix shard_weight(const DenseMatrix& weight, const Grid& grid,
                           const LayerSpec& layer) {
  if (weight.rows() != layer.k || weight.cols() != layer.n) {
    throw ShapeError("weight is " + std::to_string(weight.rows()) + "x" +
                     std::to_string(weight.cols()) + ", layer expects " +
                     std::to_string(layer.k) + "x" + std::to_string(layer.n));
  }
  layer.check_divisible(grid.config());
  return ShardedMatrix::distribute(weight, grid, weight_distribution(layer));
}

ShardedMatrix shard_input(const DenseMatrix& input, const Grid& grid,
                          const LayerSpec& layer) {
  if (input.rows() != layer.m || input.cols() != layer.k) {
    throw ShapeError("input is " + std::to_string(input.rows()) + "x" +
                     std::to_string(input.cols()) + ", layer expects " +
                     std::to_string(layer.m) + "x" + std::to_string(layer.k));
  }
  layer.check_divisible(grid.config());
  return ShardedMatrix::distribute(input, grid, input_distribution(layer));
}

std::string_view to_string(LayerCollective which) {
  switch (which) {
    case LayerCollective::AllGatherZ: return "ag_z";
    case LayerCollective::AllReduceForward: return "ar_y";
    case LayerCollective::AllReduceBackward: return "ar_x";
    case LayerCollective::ReduceScatterZ: return "rs_z";
    case LayerCollective::AllReduceData: return "ar_data";
  }
  return "?";
}

std::vector<PlannedCollective> plan_layer_collectives(
    const LayerSpec& layer, const GridConfig& config) {
  layer.check_divisible(config);
  const auto gc = static_cast<std::uint64_t>(config.extent(layer.contract_axis()));
  const auto go = static_cast<std::uint64_t>(config.extent(layer.output_axis()));
  const auto gz = static_cast<std::uint64_t>(config.g_z);
  const auto gd = static_cast<std::uint64_t>(config.g_data);
  const std::uint64_t local_rows = layer.m / gd / gz;
  const std::uint64_t block = (layer.k / gc) * (layer.n / go);
  auto padded = [](std::uint64_t n, std::uint64_t p) { return (n + p - 1) / p * p; };

  std::vector<PlannedCollective> out;
  if (gz > 1) {
    out.push_back({LayerCollective::AllGatherZ, CollectiveKind::AllGather,
                   Axis::Z, block});
  }
  if (gc > 1) {
    out.push_back({LayerCollective::AllReduceForward, CollectiveKind::AllReduce,
                   layer.contract_axis(), padded(local_rows * (layer.n / go), gc)});
  }
  if (go > 1) {
    out.push_back({LayerCollective::AllReduceBackward,
                   CollectiveKind::AllReduce, layer.output_axis(),
                   padded(local_rows * (layer.k / gc), go)});
  }
  if (gz > 1) {
    out.push_back({LayerCollective::ReduceScatterZ,
                   CollectiveKind::ReduceScatter, Axis::Z, block});
  }
  if (gd > 1) {
    out.push_back({LayerCollective::AllReduceData, CollectiveKind::AllReduce,
                   Axis::Data, padded(block / gz, gd)});
  }
  return out;
}

ParallelLinear::ParallelLinear(LayerSpec layer, ShardedMatrix weight, int index,
                               KernelModes modes)
    : layer_(layer), weight_(std::move(weight)), index_(index), modes_(modes) {
  if (weight_.distribution() != weight_distribution(layer_) ||
      weight_.rows() != layer_.k || weight_.cols() != layer_.n) {
    throw ProtocolError("layer " + std::to_string(index_) +
                        " weight is laid out as " +
                        describe(weight_.distribution()) + ", expected " +
                        describe(weight_distribution(layer_)));
  }
}

ShardedMatrix ParallelLinear::forward(const ShardedMatrix& input,
                                      const Grid& grid, Transport& transport) {
  if (input.distribution() != input_distribution(layer_) ||
      input.rows() != layer_.m || input.cols() != layer_.k) {
    throw ProtocolError("layer " + std::to_string(index_) + " input is " +
                        std::to_string(input.rows()) + "x" +
                        std::to_string(input.cols()) + " laid out as " +
                        describe(input.distribution()) + ", expected " +
                        std::to_string(layer_.m) + "x" +
                        std::to_string(layer_.k) + " laid out as " +
                        describe(input_distribution(layer_)));
  }
  const auto g = static_cast<std::size_t>(grid.size());
  const std::size_t kb = layer_.k / static_cast<std::size_t>(
                                        grid.extent(layer_.contract_axis()));
  const std::size_t nb = layer_.n / static_cast<std::size_t>(
                                        grid.extent(layer_.output_axis()));
  const CollectiveTag tag{std::string(kForwardPhase), index_};

  std::vector<DenseMatrix> full_weight(g);
  for (const auto& group : grid.groups(Axis::Z)) {
    Transport::Buffers shards;
    for (int r : group.members) shards.push_back(to_vector(weight_.local(r)));
    if (group.size() > 1) shards = transport.all_gather(group, shards, tag);
    for (std::size_t p = 0; p < group.members.size(); ++p) {
      full_weight[static_cast<std::size_t>(group.members[p])] =
          DenseMatrix(kb, nb, std::move(shards[p]));
    }
  }

  std::vector<DenseMatrix> partial(g);
  for (std::size_t r = 0; r < g; ++r) {
    partial[r] = local_product(modes_.forward, input.local(static_cast<int>(r)),
                               false, full_weight[r], false);
  }
  reduce_over(layer_.contract_axis(), grid, transport, partial, tag);

  cached_input_ = input.blocks();
  cached_weight_ = std::move(full_weight);
  return ShardedMatrix::from_blocks(layer_.m, layer_.n,
                                    output_distribution(layer_),
                                    std::move(partial));
}

BackwardResult ParallelLinear::backward(const ShardedMatrix& output_grad,
                                        const Grid& grid,
                                        Transport& transport) {
  if (!has_cache()) {
    throw StateError("layer " + std::to_string(index_) +
                     " backward pass requested before a forward pass");
  }
  if (output_grad.distribution() != output_distribution(layer_) ||
      output_grad.rows() != layer_.m || output_grad.cols() != layer_.n) {
    throw ProtocolError("layer " + std::to_string(index_) +
                        " output gradient laid out as " +
                        describe(output_grad.distribution()) + ", expected " +
                        describe(output_distribution(layer_)));
  }
  const auto g = static_cast<std::size_t>(grid.size());
  const CollectiveTag tag{std::string(kBackwardPhase), index_};

  std::vector<DenseMatrix> input_grad(g);
  for (std::size_t r = 0; r < g; ++r) {
    input_grad[r] = local_product(modes_.input_grad,
                                  output_grad.local(static_cast<int>(r)), false,
                                  cached_weight_[r], true);
  }
  reduce_over(layer_.output_axis(), grid, transport, input_grad, tag);

  std::vector<DenseMatrix> weight_grad(g);
  for (std::size_t r = 0; r < g; ++r) {
    weight_grad[r] = local_product(modes_.weight_grad, cached_input_[r], true,
                                   output_grad.local(static_cast<int>(r)), false);
  }
  for (const auto& group : grid.groups(Axis::Z)) {
    Transport::Buffers partial;
    for (int r : group.members) {
      partial.push_back(to_vector(weight_grad[static_cast<std::size_t>(r)]));
    }
    if (group.size() > 1) partial = transport.reduce_scatter(group, partial, tag);
    for (std::size_t p = 0; p < group.members.size(); ++p) {
      const auto len = partial[p].size();
      weight_grad[static_cast<std::size_t>(group.members[p])] =
          DenseMatrix(1, len, std::move(partial[p]));
    }
  }

  cached_input_.clear();
  cached_weight_.clear();
  return {ShardedMatrix::from_blocks(layer_.m, layer_.k,
                                     input_distribution(layer_),
                                     std::move(input_grad)),
          ShardedMatrix::from_blocks(layer_.k, layer_.n,
                                     weight_distribution(layer_),
                                     std::move(weight_grad))};
}

double mean_square_loss(const DenseMatrix& output) {
  double sum = 0.0;
  for (double v : output.values()) sum += v * v;
  return output.size() ? sum / static_cast<double>(output.size()) : 0.0;
}

void check_chain(std::span<const LayerSpec> net) {
  for (std::size_t l = 0; l + 1 < net.size(); ++l) {
    const auto& a = net[l];
    const auto& b = net[l + 1];
    if (a.n != b.k) {
      throw ShapeError("layer " + std::to_string(l) + " produces " +
                       std::to_string(a.n) + " features but layer " +
                       std::to_string(l + 1) + " consumes " +
                       std::to_string(b.k));
    }
    if (a.m != b.m) {
      throw ShapeError("layers " + std::to_string(l) + " and " +
                       std::to_string(l + 1) + " disagree on batch rows");
    }
    if (a.transposed == b.transposed) {
      throw ShapeError("layers " + std::to_string(l) + " and " +
                       std::to_string(l + 1) +
                       " must alternate transposed weights");
    }
  }
}

StepResult network_step(std::span<const LayerSpec> net,
                        std::span<const DenseMatrix> weights,
                        const DenseMatrix& batch, const Grid& grid,
                        Transport& transport, KernelModes modes) {
  if (net.empty()) throw ShapeError("network has no layers");
  check_chain(net);
  if (weights.size() != net.size()) {
    throw ShapeError(std::to_string(weights.size()) + " weight matrices for " +
                     std::to_string(net.size()) + " layers");
  }
  const TrafficReport before = transport.report();
  const std::size_t log_start = before.log.size();

  std::vector<ParallelLinear> layers;
  layers.reserve(net.size());
  for (std::size_t l = 0; l < net.size(); ++l) {
    layers.emplace_back(net[l], shard_weight(weights[l], grid, net[l]),
                        static_cast<int>(l), modes);
  }

  StepResult result;
  auto t0 = Clock::now();
  ShardedMatrix x = shard_input(batch, grid, net.front());
  for (auto& layer : layers) x = layer.forward(x, grid, transport);
  auto t1 = Clock::now();
  result.wall_time_by_phase[std::string(kForwardPhase)] = t1 - t0;

  result.output = x.gather(grid);
  result.loss = mean_square_loss(result.output);
  const double scale = 2.0 / static_cast<double>(result.output.size());
  std::vector<DenseMatrix> grad_blocks = x.blocks();
  for (auto& block : grad_blocks) {
    for (double& v : block.values()) v *= scale;
  }
  ShardedMatrix grad = ShardedMatrix::from_blocks(
      x.rows(), x.cols(), x.distribution(), std::move(grad_blocks));

  result.weight_grads.resize(layers.size());
  for (std::size_t l = layers.size(); l-- > 0;) {
    auto back = layers[l].backward(grad, grid, transport);
    grad = std::move(back.input_grad);
    result.weight_grads[l] = std::move(back.weight_grad);
  }
  auto t2 = Clock::now();
  result.wall_time_by_phase[std::string(kBackwardPhase)] = t2 - t1;
  result.input_grad = grad.gather(grid);

  if (grid.extent(Axis::Data) > 1) {
    for (std::size_t l = layers.size(); l-- > 0;) {
      auto blocks = result.weight_grads[l].blocks();
      reduce_over(Axis::Data, grid, transport, blocks,
                  {std::string(kDataSyncPhase), static_cast<int>(l)});
      const auto& old = result.weight_grads[l];
      result.weight_grads[l] = ShardedMatrix::from_blocks(
          old.rows(), old.cols(), old.distribution(), std::move(blocks));
    }
  }
  result.wall_time_by_phase[std::string(kDataSyncPhase)] = Clock::now() - t2;

  const TrafficReport& after = transport.report();
  result.traffic.bytes_sent.resize(after.bytes_sent.size());
  for (std::size_t r = 0; r < after.bytes_sent.size(); ++r) {
    result.traffic.bytes_sent[r] = after.bytes_sent[r] - before.bytes_sent[r];
  }
  result.traffic.intra_bytes = after.intra_bytes - before.intra_bytes;
  result.traffic.inter_bytes = after.inter_bytes - before.inter_bytes;
  result.traffic.log.assign(
      after.log.begin() + static_cast<std::ptrdiff_t>(log_start), after.log.end());
  for (std::string_view phase : {kForwardPhase, kBackwardPhase, kDataSyncPhase}) {
    result.bytes_by_phase[std::string(phase)] = 0;
  }
  for (const auto& rec : result.traffic.log) {
    result.bytes_by_phase[rec.tag.phase] += rec.intra_bytes + rec.inter_bytes;
  }
  return result;
}

TuneResult tune_matmul_mode(const MatmulShape& shape, const MatmulTimer& timer,
                            int trials) {
  if (trials < 1) {
    throw ConfigError("tuning needs at least one trial, got " +
                      std::to_string(trials));
  }
  std::array<std::vector<double>, 3> samples;
  for (int t = 0; t < trials; ++t) {
    for (MatmulMode mode : kAllModes) {
      samples[static_cast<std::size_t>(mode)].push_back(timer(mode, shape));
    }
  }
  TuneResult result;
  for (MatmulMode mode : kAllModes) {
    auto& s = samples[static_cast<std::size_t>(mode)];
    std::sort(s.begin(), s.end());
    const std::size_t h = s.size() / 2;
    result.median_seconds[static_cast<std::size_t>(mode)] =
        s.size() % 2 ? s[h] : 0.5 * (s[h - 1] + s[h]);
  }
  for (MatmulMode mode : kAllModes) {
    if (result.median_seconds[static_cast<std::size_t>(mode)] <
        result.median_seconds[static_cast<std::size_t>(result.mode)]) {
      result.mode = mode;
    }
  }
  return result;
}

MatmulTimer wall_clock_timer(std::uint64_t seed) {
  return [seed](MatmulMode mode, const MatmulShape& shape) {
    const DenseMatrix a = DenseMatrix::random(shape.m, shape.k, seed);
    const DenseMatrix b = DenseMatrix::random(shape.k, shape.n, seed + 1);
    DenseMatrix at, bt;
    if (mode == MatmulMode::TN) at = a.transposed();
    if (mode == MatmulMode::NT) bt = b.transposed();
    const auto start = Clock::now();
    DenseMatrix c;
    switch (mode) {
      case MatmulMode::NN: c = gemm_nn(a, b); break;
      case MatmulMode::NT: c = gemm_nt(a, bt); break;
      case MatmulMode::TN: c = gemm_tn(at, b); break;
    }
    const std::chrono::duration<double> elapsed = Clock::now() - start;
    // Keep the product observable so the kernel is not elided.
    volatile double sink = c.size() ? c.values()[0] : 0.0;
    (void)sink;
    return elapsed.count();
  };
}

}  // namespace quadpar
