// Copyright 2026 The quadpar Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "quadpar/io.hpp"

namespace quadpar::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("quadpar-cli-" + std::string(::testing::UnitTest::GetInstance()
                                             ->current_test_info()
                                             ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int call(std::vector<std::string> args, const std::string& out_sub = "out") {
    args.push_back("--out");
    args.push_back((dir_ / out_sub).string());
    out_.str("");
    err_.str("");
    return run(args, out_, err_);
  }
  std::string file(const std::string& sub, const std::string& name) {
    return read_text_file(dir_ / sub / name);
  }
  std::string write(const std::string& name, const std::string& text) {
    write_text_file(dir_ / name, text);
    return (dir_ / name).string();
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

const char* kChainModel = R"({"name": "chain", "batch_rows": 32, "layers": [
  {"k": 32, "n": 64}, {"k": 64, "n": 32, "transposed": true},
  {"k": 32, "n": 64}, {"k": 64, "n": 32, "transposed": true}]})";

TEST_F(CliTest, RankSingleWorker) {
  ASSERT_EQ(call({"rank-configs", "--workers", "1", "--preset", "GPT-5B",
                  "--blocks", "1"}),
            kOk)
      << err_.str();
  EXPECT_EQ(file("out", "rankings.csv"), "config,predicted_s,rank\n\"1,1,1,1\",0,1\n");
  EXPECT_EQ(json::parse(file("out", "rankings.json")).size(), 1u);
}

TEST_F(CliTest, RankThirtyTwoWorkers) {
  ASSERT_EQ(call({"rank-configs", "--workers", "32", "--preset", "GPT-20B",
                  "--blocks", "1"}),
            kOk);
  const auto rows = json::parse(file("out", "rankings.json"));
  ASSERT_GE(rows.size(), 20u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_LE(rows[i - 1]["predicted_s"].get<double>(),
              rows[i]["predicted_s"].get<double>());
  }
}

TEST_F(CliTest, MalformedClusterIsAUsageError) {
  const auto path = write("bad.json", "{\"g_node\": 4,");
  EXPECT_EQ(call({"rank-configs", "--cluster", path, "--preset", "GPT-5B"}), kUsageError);
  EXPECT_NE(err_.str().find("invalid JSON"), std::string::npos) << err_.str();
  EXPECT_EQ(call({"rank-configs", "--cluster", (dir_ / "missing.json").string(),
                  "--preset", "GPT-5B"}),
            kUsageError);
  EXPECT_EQ(call({"rank-configs", "--preset", "GPT-5B", "--workers", "0"}), kUsageError);
  EXPECT_EQ(call({"frobnicate"}), kUsageError);
  EXPECT_EQ(call({"rank-configs"}), kUsageError);
}

TEST_F(CliTest, InfeasibleIsExitTwo) {
  const auto model = write("m.json", R"({"batch_rows": 1, "layers": [{"k": 1, "n": 1}]})");
  EXPECT_EQ(call({"rank-configs", "--workers", "2", "--model", model}), kInfeasible);
  const auto chain = write("c.json", kChainModel);
  EXPECT_EQ(call({"simulate", "--workers", "3", "--model", chain, "--config", "3,1,1,1"}),
            kInfeasible);
  EXPECT_EQ(call({"simulate", "--workers", "4", "--model", chain, "--config", "2,1,1,1"}),
            kUsageError);
}

TEST_F(CliTest, SimulateSingleWorkerSendsNothing) {
  const auto chain = write("c.json", kChainModel);
  ASSERT_EQ(call({"simulate", "--workers", "1", "--model", chain}), kOk) << err_.str();
  const auto m = json::parse(file("out", "metrics.json"));
  EXPECT_EQ(m["traffic_source"], "executed");
  EXPECT_EQ(m["traffic"]["total_bytes"], 0);
  EXPECT_EQ(m["phases"]["bytes_per_rank"]["total"], 0.0);
}

TEST_F(CliTest, SimulateSixteenWorkersMatchesModelVolumes) {
  const auto chain = write("c.json", kChainModel);
  ASSERT_EQ(call({"simulate", "--workers", "16", "--model", chain, "--config", "2,2,2,2"}),
            kOk)
      << err_.str();
  const auto m = json::parse(file("out", "metrics.json"));
  EXPECT_EQ(m["traffic_source"], "executed");
  EXPECT_TRUE(m["volumes_match_model"].get<bool>());
  EXPECT_EQ(m["phases"]["bytes_per_rank"], m["phases"]["predicted_bytes_per_rank"]);
  EXPECT_GT(m["traffic"]["total_bytes"].get<double>(), 0.0);
  EXPECT_LE(m["overlap"]["oar+ors+oag"]["batch_time_s"].get<double>(),
            m["overlap"]["baseline"]["batch_time_s"].get<double>());
  EXPECT_TRUE(fs::exists(dir_ / "out" / "traffic.json"));
  EXPECT_TRUE(fs::exists(dir_ / "out" / "trace.json"));
  EXPECT_EQ(m["iterations"], 10);
  EXPECT_EQ(m["averaged_iterations"], 8);
}

TEST_F(CliTest, SimulatePlansLargePresets) {
  ASSERT_EQ(call({"simulate", "--workers", "32", "--preset", "GPT-20B", "--overlap",
                  "oar,oag"}),
            kOk)
      << err_.str();
  const auto m = json::parse(file("out", "metrics.json"));
  EXPECT_EQ(m["traffic_source"], "planned");
  EXPECT_EQ(m["config_source"], "top-ranked");
  EXPECT_EQ(m["selected_overlap"], "oar+oag");
  EXPECT_EQ(m["layers"].size(), 128u);
  EXPECT_TRUE(m["volumes_match_model"].get<bool>());
}

TEST_F(CliTest, SimulateIsDeterministic) {
  const auto chain = write("c.json", kChainModel);
  const std::vector<std::string> args = {"simulate", "--workers", "8", "--model", chain,
                                         "--seed", "3", "--jitter", "0.1"};
  ASSERT_EQ(call(args, "a"), kOk);
  ASSERT_EQ(call(args, "b"), kOk);
  for (const char* f : {"metrics.json", "summary.csv", "timeline.json", "trace.json",
                        "traffic.json"}) {
    EXPECT_EQ(file("a", f), file("b", f)) << f;
  }
  ASSERT_EQ(call({"simulate", "--workers", "8", "--model", chain, "--seed", "4",
                  "--jitter", "0.1"},
                 "c"),
            kOk);
  EXPECT_NE(file("a", "metrics.json"), file("c", "metrics.json"));
}

TEST_F(CliTest, VerifyPassesAndCatchesFaults) {
  ASSERT_EQ(call({"verify", "--seed", "42"}), kOk) << out_.str();
  const auto v = json::parse(file("out", "verify.json"));
  EXPECT_EQ(v["failures"], 0);
  EXPECT_GE(v["grids"].size(), 200u);

  EXPECT_EQ(call({"verify", "--seed", "42", "--inject-fault"}), kCheckFailed);
  EXPECT_EQ(call({"verify", "--workers", "1"}), kOk);
  EXPECT_EQ(json::parse(file("out", "verify.json"))["grids"].size(), 1u);
}

TEST_F(CliTest, FlopsFromRateAndFromModel) {
  ASSERT_EQ(call({"flops", "--workers", "32768", "--total-pflops", "1381",
                  "--peak", "mi250x-gcd"}),
            kOk);
  const auto e = json::parse(file("out", "efficiency.json"));
  EXPECT_NEAR(e["pct_advertised"].get<double>(), 22.0, 0.1);
  EXPECT_NEAR(e["pct_empirical"].get<double>(), 33.8, 0.1);
  EXPECT_EQ(file("out", "efficiency.csv").substr(0, 8), "workers,");

  ASSERT_EQ(call({"flops", "--workers", "8", "--preset", "GPT-5B", "--blocks", "1",
                  "--batch-rows", "1024", "--seconds", "2", "--recompute"}),
            kOk);
  EXPECT_EQ(call({"flops", "--workers", "8"}), kUsageError);
}

TEST_F(CliTest, TuneWritesChoice) {
  ASSERT_EQ(call({"tune", "--m", "16", "--k", "16", "--n", "16", "--trials", "1"}), kOk);
  const auto t = json::parse(file("out", "tune.json"));
  EXPECT_TRUE(t["chosen"] == "NN" || t["chosen"] == "NT" || t["chosen"] == "TN");
}

TEST_F(CliTest, EnvironmentChoosesDefaultOutput) {
  ::setenv("QUADPAR_OUT_DIR", (dir_ / "env").string().c_str(), 1);
  std::ostringstream out, err;
  EXPECT_EQ(run({"flops", "--workers", "2", "--total-pflops", "1"}, out, err), kOk);
  ::unsetenv("QUADPAR_OUT_DIR");
  EXPECT_TRUE(fs::exists(dir_ / "env" / "efficiency.csv"));
  RunConfig explicit_out;
  explicit_out.out_dir = "x";
  EXPECT_EQ(output_dir(explicit_out), fs::path("x"));
}

TEST_F(CliTest, HelpExitsCleanly) {
  std::ostringstream out, err;
  EXPECT_EQ(run({"--help"}, out, err), kOk);
  EXPECT_NE(out.str().find("rank-configs"), std::string::npos);
}

}  // namespace
}  // namespace quadpar::cli
