// Copyright 2026 DGS contributors
// SPDX-License-Identifier: Apache-2.0
//
// Experiment runner: `dgs run|compare|plot|gradcheck`. Exit codes:
//   0 success, 2 config error, 3 diverged run, 4 check failure.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dgs/experiment.hpp"
#include "dgs/svg.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitCheckFailed = 4;

std::optional<std::uint64_t> seed_from_env() {
  const char* env = std::getenv("DGS_SEED");
  if (!env || !*env) return std::nullopt;
  return std::strtoull(env, nullptr, 10);
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed,
            const std::string& out_dir) {
  std::vector<std::string> warnings;
  dgs::ExperimentConfig cfg = dgs::ExperimentConfig::from_file(config_path, &warnings);
  print_warnings(warnings);
  if (!seed) seed = seed_from_env();
  if (seed) cfg.seed = *seed;

  dgs::Summary s = dgs::run_experiment(cfg, out_dir, "metrics");
  // run_experiment writes metrics.csv; keep the summary under a stable name.
  fs::rename(fs::path(out_dir) / "metrics.summary.json", fs::path(out_dir) / "summary.json");
  std::cout << s.to_json();
  if (s.diverged) {
    std::cerr << "run diverged at step " << s.diverged_step << "; partial outputs written\n";
    return kExitDiverged;
  }
  return kExitOk;
}

int cmd_compare(const std::string& configs_dir, std::optional<std::uint64_t> seed,
                const std::string& out_dir) {
  std::vector<std::pair<std::string, dgs::ExperimentConfig>> configs;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(configs_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const fs::path& f : files) {
    std::vector<std::string> warnings;
    dgs::ExperimentConfig cfg = dgs::ExperimentConfig::from_file(f, &warnings);
    print_warnings(warnings);
    if (seed) cfg.seed = *seed;
    configs.emplace_back(f.stem().string(), cfg);
  }

  std::vector<dgs::RankingRow> rows = dgs::compare_experiments(configs, out_dir);
  std::string csv = dgs::ranking_to_csv(rows);
  std::ofstream(fs::path(out_dir) / "ranking.csv") << csv;
  std::cout << csv;
  return kExitOk;
}

int cmd_plot(const std::vector<std::string>& inputs, const std::string& out_svg,
             const std::string& x, const std::string& y) {
  std::vector<dgs::Series> series;
  for (const std::string& in : inputs) {
    dgs::MetricsTable table = dgs::MetricsTable::from_file(in);
    series.push_back(dgs::series_from_table(table, x, y, fs::path(in).stem().string()));
  }
  std::ofstream out(out_svg);
  if (!out) throw dgs::ConfigError("plot: cannot write " + out_svg);
  out << dgs::render_line_chart(series, x, y);
  return kExitOk;
}

int cmd_gradcheck(const std::string& task_name, std::uint64_t seed, double perturb) {
  std::shared_ptr<const dgs::Task> task;
  if (task_name == "quadratic") {
    dgs::Rng r(seed, 42);
    std::vector<double> opt(16);
    for (double& v : opt) v = r.normal();
    task = dgs::make_quadratic_bowl(16, std::move(opt));
  } else if (task_name == "logistic") {
    task = dgs::make_logistic_task(8, 64, 3.0, seed);
  } else if (task_name == "mlp") {
    task = dgs::make_mlp_task({2, 6, 1}, dgs::Activation::tanh,
                              dgs::make_blobs_dataset(2, 64, 3.0, seed));
  } else {
    throw dgs::ConfigError("gradcheck: unknown task '" + task_name + "'");
  }

  dgs::Rng rng(seed, 1);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    dgs::ParamVector theta = task->initial_params(rng);
    std::span<double> tv = theta.mutable_values();
    for (double& v : tv) v += 0.25 * rng.normal();
    std::vector<std::uint32_t> batch;
    const auto& train = task->dataset().train_indices;
    for (int i = 0; i < 8; ++i)
      batch.push_back(train[rng.uniform_u32(static_cast<std::uint32_t>(train.size()))]);

    double err = dgs::gradcheck(*task, theta, batch, 1e-5);
    if (perturb != 0.0) err += perturb;  // negative-control hook
    worst = std::max(worst, err);
    std::cout << "point " << trial << ": max relative error " << dgs::format_g17(err)
              << "\n";
  }
  std::cout << "worst: " << dgs::format_g17(worst) << " (threshold 1e-6)\n";
  if (worst > 1e-6) {
    std::cerr << "gradcheck failed\n";
    return kExitCheckFailed;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Asynchronous dual-way gradient sparsification simulator"};
  app.require_subcommand(1);

  std::string config_path, out_path, configs_dir;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> plot_inputs;
  std::string plot_x = "step", plot_y = "loss";
  std::string gc_task = "quadratic";
  std::uint64_t gc_seed = 1;
  double gc_perturb = 0.0;

  CLI::App* run = app.add_subcommand("run", "Run one experiment config");
  run->add_option("--config", config_path, "JSON experiment config")->required();
  run->add_option("--seed", seed, "Seed override (falls back to DGS_SEED)");
  run->add_option("--out", out_path, "Output directory")->required();

  CLI::App* compare = app.add_subcommand("compare", "Run a directory of configs and rank them");
  compare->add_option("--configs", configs_dir, "Directory of JSON configs")->required();
  compare->add_option("--seed", seed, "Seed override for all configs");
  compare->add_option("--out", out_path, "Output directory")->required();

  CLI::App* plot = app.add_subcommand("plot", "Render metrics CSVs as an SVG chart");
  plot->add_option("--input", plot_inputs, "Metrics CSV (repeatable, one series each)")
      ->required();
  plot->add_option("--out", out_path, "Output SVG path")->required();
  plot->add_option("--x", plot_x, "X axis: time|step")
      ->check(CLI::IsMember({"time", "step"}));
  plot->add_option("--y", plot_y, "Y axis: loss|accuracy|bytes")
      ->check(CLI::IsMember({"loss", "accuracy", "bytes"}));

  CLI::App* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient check");
  gradcheck->add_option("--task", gc_task, "quadratic|logistic|mlp");
  gradcheck->add_option("--seed", gc_seed, "Seed");
  gradcheck->add_option("--perturb", gc_perturb, "Inject gradient error (negative control)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, seed, out_path);
    if (compare->parsed()) return cmd_compare(configs_dir, seed, out_path);
    if (plot->parsed()) return cmd_plot(plot_inputs, out_path, plot_x, plot_y);
    if (gradcheck->parsed()) return cmd_gradcheck(gc_task, gc_seed, gc_perturb);
  } catch (const dgs::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
