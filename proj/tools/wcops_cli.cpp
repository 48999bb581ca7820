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

// Command-line front end: run experiments, replot results, query oracles and
// validate instance files.

#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "wcops/harness.hpp"
#include "wcops/instance_io.hpp"

namespace {

int cmd_run(const std::string& path, const wcops::ConfigOverrides& o, std::size_t parallel,
            bool debug_solver) {
  const auto cfg = wcops::load_config(path, o);
  wcops::RunOptions opt;
  opt.parallel = parallel;
  if (debug_solver) opt.debug_dir = cfg.output + "/solver_debug";
  std::cerr << "running " << cfg.name << ": " << cfg.algorithms.size() << " algorithm(s) x "
            << cfg.repetitions << " rep(s), T=" << cfg.horizon << "\n";
  const auto records = wcops::run_experiment(cfg, opt);
  const auto aggs = wcops::aggregate(records);
  wcops::emit_outputs(cfg, records, aggs, cfg.output);
  for (const auto& a : aggs) {
    std::printf("%-14s runs=%zu failed=%zu", a.algorithm.c_str(), a.runs, a.failed);
    for (const auto& name : wcops::metric_names()) {
      const auto& b = a.metrics.at(name);
      if (!b.mean.empty())
        std::printf("  %s=%.4g [%.4g, %.4g]", name.c_str(), b.mean.back(), b.low.back(), b.high.back());
    }
    std::printf("\n");
    for (const auto& w : a.warnings) std::fprintf(stderr, "warning (%s): %s\n", a.algorithm.c_str(), w.c_str());
  }
  std::cerr << "outputs written to " << cfg.output << "\n";
  std::size_t failed = 0;
  for (const auto& a : aggs) failed += a.failed;
  return failed == 0 ? 0 : 3;
}

int cmd_oracle(const std::string& path) {
  const auto doc = wcops::load_instance(path);
  doc.instance.validate();
  if (!doc.reward_means) throw wcops::ConfigError("oracle needs a \"rewards\" table in the instance");
  const auto& P = doc.instance.transitions;
  const std::size_t np = doc.instance.layout.num_pairs();
  const wcops::CostMatrix g = doc.cost_means.value_or(wcops::CostMatrix{});
  if (!doc.cost_means && doc.instance.num_constraints > 0)
    throw wcops::ConfigError("oracle needs a \"costs\" table when m > 0");
  const auto safe = wcops::safe_optimum(P, g, *doc.reward_means);
  const auto best = wcops::unconstrained_optimum(P, *doc.reward_means);
  const auto rho = wcops::compute_rho(P, wcops::margins_from_means(g, np));
  if (safe.feasible) std::printf("OPT_G  %.12g\n", safe.value);
  else std::printf("OPT_G  infeasible (no safe policy)\n");
  std::printf("OPT    %.12g\n", best.value);
  std::printf("rho    %.12g\n", rho.rho);
  std::printf("alpha  %.12g\n", rho.alpha);
  return 0;
}

int cmd_validate(const std::string& path) {
  const auto doc = wcops::load_instance(path);
  doc.instance.validate();
  const auto& l = doc.instance.layout;
  std::printf("ok: L=%zu |X|=%zu |A|=%zu m=%zu\n", l.num_layers(), l.num_states(), l.num_actions(),
              doc.instance.num_constraints);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained online learning experiments"};
  app.require_subcommand(1);

  std::string config_path, results_dir, instance_path;
  std::uint64_t seed = 0;
  std::size_t reps = 0, parallel = 1;
  std::string out;
  bool debug_solver = false;

  auto* run = app.add_subcommand("run", "Run an experiment config");
  run->add_option("config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  auto* seed_opt = run->add_option("--seed", seed, "Master seed override");
  auto* reps_opt = run->add_option("--reps", reps, "Repetition count override")->check(CLI::PositiveNumber);
  auto* out_opt = run->add_option("--out", out, "Output directory override");
  run->add_option("--parallel", parallel, "Concurrent runs")->check(CLI::PositiveNumber);
  run->add_flag("--debug-solver", debug_solver, "Write per-step solver traces");

  auto* plot = app.add_subcommand("plot", "Regenerate charts from a results directory");
  plot->add_option("dir", results_dir, "Results directory")->required()->check(CLI::ExistingDirectory);

  auto* oracle = app.add_subcommand("oracle", "Print OPT_G, OPT, rho and alpha of an instance");
  oracle->add_option("instance", instance_path, "Instance file (JSON)")->required()->check(CLI::ExistingFile);

  auto* validate = app.add_subcommand("validate", "Check an instance file");
  validate->add_option("instance", instance_path, "Instance file (JSON)")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      wcops::ConfigOverrides o;
      if (*seed_opt) o.seed = seed;
      if (*reps_opt) o.reps = reps;
      if (*out_opt) o.output = out;
      return cmd_run(config_path, o, parallel, debug_solver);
    }
    if (plot->parsed()) {
      wcops::replot(results_dir);
      return 0;
    }
    if (oracle->parsed()) return cmd_oracle(instance_path);
    if (validate->parsed()) return cmd_validate(instance_path);
  } catch (const wcops::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
