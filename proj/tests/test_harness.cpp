// Copyright 2026 The wcops Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <unistd.h>

#include "wcops/harness.hpp"

namespace wcops {
namespace {

namespace fs = std::filesystem;

json tiny_config(std::size_t T = 40, std::size_t reps = 2) {
  json j = json::parse(R"({
    "name": "tiny", "seed": 3, "delta": 0.05,
    "env": {
      "layers": [1, 2, 1], "actions": 2, "m": 1, "transition_seed": 4,
      "reward": {"kind": "stochastic", "random": {"seed": 1}},
      "constraints": [{"kind": "adversarial", "random": {"seed": 2, "low": -0.5, "high": 0.5}}]
    },
    "algorithms": ["wcops", "greedy", {"name": "optprimaldual", "dual_step": 0.2}]
  })");
  j["T"] = T;
  j["reps"] = reps;
  return j;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path temp_dir(const std::string& name) {
  auto d = fs::temp_directory_path() / ("wcops_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  return d;
}

RunRecord fake_record(const std::string& alg, std::size_t rep, std::vector<double> regret) {
  RunRecord r;
  r.algorithm = alg;
  r.rep = rep;
  r.metrics.regret = regret;
  r.metrics.alpha_regret = regret;
  r.metrics.violation = regret;
  r.metrics.positive_violation = regret;
  return r;
}

TEST(Aggregate, TwoRecordHalfWidth) {
  const auto aggs = aggregate({fake_record("a", 0, {1, 10}), fake_record("a", 1, {1, 14})});
  ASSERT_EQ(aggs.size(), 1u);
  const Band& b = aggs[0].metrics.at("regret");
  // Sample standard deviation of {10, 14} is 2 sqrt(2).
  const double half = 1.96 * (2.0 * std::sqrt(2.0)) / std::sqrt(2.0);
  EXPECT_DOUBLE_EQ(b.mean[1], 12.0);
  EXPECT_NEAR(b.high[1] - b.mean[1], half, 1e-12);
  EXPECT_NEAR(b.mean[1] - b.low[1], half, 1e-12);
  EXPECT_EQ(b.low[0], b.high[0]);
}

TEST(Aggregate, SingleRunHasZeroWidthAndWarning) {
  const auto aggs = aggregate({fake_record("a", 0, {3, 5})});
  EXPECT_EQ(aggs[0].metrics.at("violation").low, aggs[0].metrics.at("violation").high);
  ASSERT_EQ(aggs[0].warnings.size(), 1u);
}

TEST(Aggregate, FailedRunsAreExcludedWithWarning) {
  auto bad = fake_record("a", 1, {});
  bad.error = "boom";
  const auto aggs = aggregate({fake_record("a", 0, {3, 5}), bad, fake_record("a", 2, {5, 7})});
  EXPECT_EQ(aggs[0].runs, 2u);
  EXPECT_EQ(aggs[0].failed, 1u);
  EXPECT_DOUBLE_EQ(aggs[0].metrics.at("regret").mean[1], 6.0);
}

TEST(Aggregate, PermutationInvariant) {
  std::vector<RunRecord> recs;
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-5, 5);
  for (std::size_t k = 0; k < 7; ++k) recs.push_back(fake_record("a", k, {u(rng), u(rng), u(rng)}));
  for (std::size_t k = 0; k < 3; ++k) recs.push_back(fake_record("b", k, {u(rng), u(rng), u(rng)}));
  const auto base = aggregate(recs);
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(recs.begin(), recs.end(), rng);
    auto again = aggregate(recs);
    std::sort(again.begin(), again.end(), [](auto& x, auto& y) { return x.algorithm < y.algorithm; });
    for (std::size_t a = 0; a < 2; ++a)
      for (const auto& name : metric_names()) {
        EXPECT_EQ(again[a].metrics.at(name).mean, base[a].metrics.at(name).mean);
        EXPECT_EQ(again[a].metrics.at(name).high, base[a].metrics.at(name).high);
      }
  }
}

TEST(Config, ParsesAndHashes) {
  const auto c = config_from_json(tiny_config());
  EXPECT_EQ(c.horizon, 40u);
  EXPECT_EQ(c.algorithms.size(), 3u);
  EXPECT_EQ(c.algorithms[2].params.at("dual_step"), 0.2);
  EXPECT_EQ(c.env.constraints[0].kind, ProcessKind::kAdversarial);
  ConfigOverrides o;
  o.output = "elsewhere";
  EXPECT_EQ(config_hash(config_from_json(tiny_config(), o)), config_hash(c));
  o.seed = 9;
  EXPECT_NE(config_hash(config_from_json(tiny_config(), o)), config_hash(c));
}

TEST(Config, RejectsBadDocuments) {
  auto j = tiny_config();
  j["delta"] = 1.5;
  EXPECT_THROW(config_from_json(j), ConfigError);
  j = tiny_config();
  j["reps"] = 0;
  EXPECT_THROW(config_from_json(j), ConfigError);
  j = tiny_config();
  j["env"]["m"] = 2;
  EXPECT_THROW(config_from_json(j), ConfigError);
  j = tiny_config();
  j["env"]["reward"] = {{"values", {0.1, 0.2}}};
  EXPECT_THROW(config_from_json(j), ConfigError);
  j = tiny_config();
  j["env"]["reward"] = {{"values", {0.1, 0.2, 0.3, 0.4, 0.5, 1.7}}};
  EXPECT_THROW(config_from_json(j), ConfigError);
  j = tiny_config();
  j.erase("T");
  EXPECT_THROW(config_from_json(j), ConfigError);
  j = tiny_config();
  j["algorithms"] = json::array({"nope"});
  const auto c = config_from_json(j);
  EXPECT_FALSE(run_single(c, 0, 0).ok());
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Run, SingleEpisodeRecord) {
  const auto c = config_from_json(tiny_config(1, 1));
  const auto r = run_single(c, 0, 0);
  ASSERT_TRUE(r.ok()) << r.error;
  EXPECT_EQ(r.metrics.episodes(), 1u);
  EXPECT_EQ(r.metrics.regret.size(), 1u);
  EXPECT_EQ(r.oracle.rho_source, "realized");
  EXPECT_EQ(r.seed, 3u);
}

TEST(Run, ParallelEqualsSequential) {
  const auto c = config_from_json(tiny_config());
  RunOptions par;
  par.parallel = 4;
  const auto a = run_experiment(c), b = run_experiment(c, par);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    ASSERT_TRUE(a[k].ok()) << a[k].error;
    EXPECT_EQ(record_to_json(a[k]).dump(), record_to_json(b[k]).dump());
  }
}

TEST(Run, AlgorithmsShareEmissionStream) {
  // The realized reward average, hence OPT, depends only on the repetition
  // for stochastic processes.
  auto j = tiny_config();
  j["env"]["constraints"][0]["kind"] = "stochastic";
  const auto c = config_from_json(j);
  const auto recs = run_experiment(c);
  EXPECT_EQ(recs[0].oracle.opt, recs[2].oracle.opt);
  EXPECT_EQ(recs[0].oracle.rho_source, "means");
}

TEST(Outputs, ByteIdenticalReruns) {
  const auto c = config_from_json(tiny_config());
  const auto d1 = temp_dir("a"), d2 = temp_dir("b");
  for (const auto& d : {d1, d2}) {
    const auto recs = run_experiment(c);
    emit_outputs(c, recs, aggregate(recs), d);
  }
  std::size_t compared = 0;
  for (const auto& e : fs::recursive_directory_iterator(d1)) {
    if (!e.is_regular_file() || e.path().filename() == "timing.txt") continue;
    const auto rel = fs::relative(e.path(), d1);
    EXPECT_EQ(slurp(e.path()), slurp(d2 / rel)) << rel;
    ++compared;
  }
  EXPECT_GT(compared, 10u);
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST(Outputs, CsvAndSummaryAgree) {
  const auto c = config_from_json(tiny_config());
  const auto d = temp_dir("csv");
  const auto recs = run_experiment(c);
  const auto summary = emit_outputs(c, recs, aggregate(recs), d);
  for (const auto& alg : summary.at("algorithms")) {
    const auto name = alg.at("name").get<std::string>();
    std::ifstream in(d / (name + ".csv"));
    const auto parsed = parse_aggregate_csv(name, in);
    for (const auto& m : metric_names()) {
      const Band& b = parsed.metrics.at(m);
      ASSERT_EQ(b.mean.size(), c.horizon);
      const auto& fin = alg.at("final").at(m);
      if (fin.at("mean").is_null()) {
        EXPECT_TRUE(std::isnan(b.mean.back()));  // no safe policy on this instance
        continue;
      }
      EXPECT_EQ(fin.at("mean").get<double>(), b.mean.back());
      EXPECT_EQ(fin.at("ci_high").get<double>(), b.high.back());
    }
  }
  const auto reread = json::parse(slurp(d / "summary.json"));
  EXPECT_EQ(reread.at("schema"), 1);
  const auto run = json::parse(slurp(d / "runs" / "wcops_rep1.json"));
  EXPECT_EQ(run.at("seed"), 4);
  EXPECT_FALSE(run.contains("wall_clock"));
  for (const auto& m : metric_names()) EXPECT_TRUE(fs::exists(d / (m + ".svg")));
  fs::remove(d / "regret.svg");
  replot(d);
  EXPECT_TRUE(fs::exists(d / "regret.svg"));
  fs::remove_all(d);
}

TEST(Outputs, UnwritableDirectory) {
  const auto c = config_from_json(tiny_config(2, 1));
  const auto recs = run_experiment(c);
  EXPECT_THROW(emit_outputs(c, recs, aggregate(recs), "/proc/wcops_cannot_write"), ConfigError);
}

TEST(Svg, BarycentricEmbedding) {
  const auto a = svg::simplex_point({1, 0, 0});
  const auto b = svg::simplex_point({0, 1, 0});
  const auto t = svg::simplex_point({0, 0, 1});
  const auto m = svg::simplex_point({1.0 / 3, 1.0 / 3, 1.0 / 3});
  EXPECT_NEAR(std::hypot(a[0] - b[0], a[1] - b[1]), std::hypot(a[0] - t[0], a[1] - t[1]), 1e-9);
  EXPECT_NEAR(std::hypot(b[0] - t[0], b[1] - t[1]), std::hypot(a[0] - b[0], a[1] - b[1]), 1e-9);
  EXPECT_NEAR(m[0], (a[0] + b[0] + t[0]) / 3, 1e-9);
  EXPECT_NEAR(m[1], (a[1] + b[1] + t[1]) / 3, 1e-9);
}

TEST(Svg, SimplexRunWritesTrajectory) {
  auto j = json::parse(R"({
    "name": "simplex", "T": 30, "reps": 1, "seed": 1,
    "env": {"layers": [1, 1], "actions": 3, "m": 1,
            "reward": {"kind": "stochastic", "values": [0.9, 0.3, 0.5]},
            "constraints": [{"kind": "stochastic", "values": [0.5, -0.5, 0.0]}]},
    "algorithms": ["wcops"]})");
  const auto c = config_from_json(j);
  const auto d = temp_dir("simplex");
  const auto recs = run_experiment(c);
  const auto summary = emit_outputs(c, recs, aggregate(recs), d);
  const auto& s = summary.at("simplex");
  EXPECT_EQ(s.at("trajectories").at("wcops").size(), 30u);
  const auto opt = s.at("optimum").get<std::vector<double>>();
  EXPECT_NEAR(opt[0], 0.5, 1e-9);
  EXPECT_NEAR(opt[1], 0.5, 1e-9);
  EXPECT_TRUE(fs::exists(d / "simplex.svg"));
  fs::remove_all(d);
}

}  // namespace
}  // namespace wcops
