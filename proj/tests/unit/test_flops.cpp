// Copyright 2026 The quadpar Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "quadpar/error.hpp"
#include "quadpar/flops.hpp"
#include "quadpar/models.hpp"

namespace quadpar {
namespace {

TEST(NetworkFlops, Counting) {
  const LayerSpec tiny[] = {{2, 2, 2, false}};
  EXPECT_EQ(network_flops(tiny), 48.0);
  EXPECT_EQ(network_flops({}), 0.0);
  const LayerSpec net[] = {{8, 16, 32, false}, {8, 32, 4, true}};
  EXPECT_EQ(network_flops(net, 0, true), network_flops(net) * 8 / 6);
  EXPECT_EQ(network_flops(net, 24), 3 * network_flops(net, 8));
  const LayerSpec first[] = {net[0]};
  const LayerSpec second[] = {net[1]};
  EXPECT_EQ(network_flops(net), network_flops(first) + network_flops(second));
}

TEST(Efficiency, FullMachineFixture) {
  // 1381.0 Pflop/s sustained on 32,768 MI250X GCDs.
  const auto e = efficiency(1381.0e15, 1.0, 32768, mi250x_gcd_peak());
  EXPECT_DOUBLE_EQ(e.pflops, 1381.0);
  EXPECT_NEAR(e.pct_advertised, 22.0, 0.1);
  EXPECT_NEAR(e.pct_empirical, 33.8, 0.1);
}

TEST(Efficiency, Ratios) {
  const PeakSpec flat{"flat", 100e12, 100e12};
  const auto e = efficiency(1e18, 10.0, 400, flat);
  EXPECT_DOUBLE_EQ(e.pct_advertised, e.pct_empirical);
  const auto doubled = efficiency(1e18, 10.0, 800, flat);
  EXPECT_DOUBLE_EQ(doubled.pct_advertised, e.pct_advertised / 2);

  const auto h = efficiency(5e18, 3.0, 1024, h100_peak());
  EXPECT_NEAR(h.pct_empirical / h.pct_advertised, 989.0 / 813.0, 1e-12);
  EXPECT_THROW(efficiency(1.0, 0.0, 1, flat), ConfigError);
  EXPECT_THROW(efficiency(1.0, 1.0, 0, flat), ConfigError);
}

TEST(PeakSpec, KnownPeaks) {
  EXPECT_DOUBLE_EQ(a100_peak().advertised, 312e12);
  EXPECT_DOUBLE_EQ(a100_peak().empirical, 280e12);
  EXPECT_DOUBLE_EQ(h100_peak().empirical, 813e12);
  EXPECT_TRUE(find_peak("mi250x-gcd").has_value());
  EXPECT_FALSE(find_peak("tpu").has_value());
  for (const auto& p : {a100_peak(), mi250x_gcd_peak(), h100_peak()}) {
    EXPECT_TRUE(p.plausible());
  }
  EXPECT_FALSE((PeakSpec{"odd", 1.0, 2.0}).plausible());
}

TEST(EfficiencyCsv, Columns) {
  const EfficiencyRow rows[] = {{8, "GPT-5B", {1.5, 20.0, 25.0}}};
  EXPECT_EQ(efficiency_csv(rows),
            "workers,model,total_pflops,pct_advertised,pct_empirical\n"
            "8,GPT-5B,1.5,20,25\n");
}

TEST(Models, Presets) {
  ASSERT_EQ(gpt_presets().size(), 9u);
  const auto p = find_gpt_preset("GPT-80B");
  ASSERT_TRUE(p.has_value());
  EXPECT_EQ(p->layers, 42);
  EXPECT_EQ(p->hidden, 12288u);
  EXPECT_EQ(p->heads, 96);
  EXPECT_FALSE(find_gpt_preset("GPT-1T").has_value());

  const auto fc = transformer_fc_layers(64, 2, 16);
  ASSERT_EQ(fc.size(), 8u);
  EXPECT_EQ(fc[0], (LayerSpec{16, 64, 192, false}));
  EXPECT_EQ(fc[3], (LayerSpec{16, 256, 64, true}));
  for (std::size_t l = 1; l < fc.size(); ++l) {
    EXPECT_NE(fc[l].transposed, fc[l - 1].transposed);
  }
  EXPECT_FALSE((ModelSpec{"fc", fc}).executable());
  EXPECT_TRUE((ModelSpec{"chain", make_chain(4, std::vector<std::uint64_t>{4, 8, 4})})
                  .executable());
  EXPECT_EQ((ModelSpec{"fc", fc}).max_matrix_elements(), 256u * 64u);
}

}  // namespace
}  // namespace quadpar
