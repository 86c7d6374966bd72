// Copyright 2026 The quadpar Authors.
// SPDX-License-Identifier: Apache-2.0

#include "quadpar/flops.hpp"

#include <sstream>

#include "quadpar/error.hpp"

namespace quadpar {

bool PeakSpec::plausible() const {
  return advertised > 0.0 && empirical > 0.0 && empirical <= advertised;
}

PeakSpec a100_peak() { return {"a100", 312e12, 280e12}; }
PeakSpec mi250x_gcd_peak() { return {"mi250x-gcd", 191.5e12, 125e12}; }
PeakSpec h100_peak() { return {"h100", 989e12, 813e12}; }

std::optional<PeakSpec> find_peak(std::string_view name) {
  for (const auto& p : {a100_peak(), mi250x_gcd_peak(), h100_peak()}) {
    if (p.name == name) return p;
  }
  return std::nullopt;
}

double network_flops(std::span<const LayerSpec> net, std::uint64_t batch_rows,
                     bool recompute) {
  const double passes = recompute ? 8.0 : 6.0;
  double total = 0.0;
  for (const auto& layer : net) {
    const double m = static_cast<double>(batch_rows ? batch_rows : layer.m);
    total += passes * m * static_cast<double>(layer.k) *
             static_cast<double>(layer.n);
  }
  return total;
}

Efficiency efficiency(double flops, double seconds, int workers,
                      const PeakSpec& peaks) {
  if (!(seconds > 0.0)) throw ConfigError("elapsed time must be positive");
  if (workers < 1) throw ConfigError("worker count must be positive");
  const double rate = flops / seconds;
  const double per_worker = rate / workers;
  return {rate / 1e15, 100.0 * per_worker / peaks.advertised,
          100.0 * per_worker / peaks.empirical};
}

std::string efficiency_csv(std::span<const EfficiencyRow> rows) {
  std::ostringstream os;
  os.precision(17);
  os << "workers,model,total_pflops,pct_advertised,pct_empirical\n";
  for (const auto& r : rows) {
    os << r.workers << ',' << r.model << ',' << r.value.pflops << ','
       << r.value.pct_advertised << ',' << r.value.pct_empirical << '\n';
  }
  return os.str();
}

}  // namespace quadpar
