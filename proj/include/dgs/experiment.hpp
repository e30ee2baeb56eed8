// Copyright 2026 DGS contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dgs/sim.hpp"
#include "dgs/svg.hpp"

namespace dgs {

enum class Method { msgd, asgd, gd_async, dgc_async, dgs_residual, dgs_samomentum };

const char* method_name(Method m);
Method method_from_name(const std::string& name);
bool method_uses_momentum(Method m);
bool method_is_dense(Method m);

// A config-file experiment: one method on one task under one schedule.
struct ExperimentConfig {
  Method method = Method::asgd;
  std::uint32_t workers = 1;
  double drop_ratio = 0.0;
  std::optional<double> momentum;
  double learning_rate = 0.1;
  std::vector<LrDecay> lr_schedule;
  std::uint32_t batch_size = 8;
  std::uint32_t epochs = 1;
  std::string task_json;  // canonicalized task object, for compare grouping
  std::shared_ptr<const Task> task;
  DelayModel compute_delay = DelayModel::uniform_ms(8.0, 12.0);
  std::vector<DelayModel> per_worker_compute;
  LinkModel link;
  bool secondary_compression = false;
  double secondary_drop_ratio = 99.0;
  std::uint64_t eval_every = 0;
  std::uint64_t seed = 1;

  // Parses and validates; throws ConfigError with a field-level message.
  // Warnings (ignored fields) are appended to `warnings` when non-null.
  static ExperimentConfig from_json_text(const std::string& text,
                                         std::vector<std::string>* warnings = nullptr);
  static ExperimentConfig from_file(const std::filesystem::path& path,
                                    std::vector<std::string>* warnings = nullptr);

  RunConfig to_run_config() const;
  std::uint32_t steps_per_epoch_per_worker() const;
};

struct Summary {
  std::string method;
  std::uint32_t workers = 0;
  std::uint64_t seed = 0;
  std::uint64_t exchanges = 0;
  double sim_time_ms = 0.0;
  double final_train_loss = 0.0;
  double final_train_accuracy = 0.0;
  double final_test_loss = 0.0;
  double final_test_accuracy = 0.0;
  std::size_t total_bytes_up = 0;
  std::size_t total_bytes_down = 0;
  double mean_staleness = 0.0;
  double compression_ratio_up = 0.0;
  double compression_ratio_down = 0.0;
  bool diverged = false;
  std::uint64_t diverged_step = 0;

  std::string to_json() const;
};

Summary summarize(const ExperimentConfig& config, const RunResult& result);

// Runs one experiment, writing <out_dir>/<stem>.csv and <out_dir>/<stem>.summary.json.
Summary run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                       const std::string& stem);

struct RankingRow {
  std::string config_name;
  std::string method;
  std::uint32_t workers = 0;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  double delta_vs_baseline = 0.0;  // percentage points of train accuracy
};

// Runs every config (they must share task and seed) and produces a ranking
// table sorted by final train accuracy, with deltas against the msgd entry
// (or the first config when no msgd run is present).
std::vector<RankingRow> compare_experiments(
    const std::vector<std::pair<std::string, ExperimentConfig>>& configs,
    const std::filesystem::path& out_dir);

std::string ranking_to_csv(const std::vector<RankingRow>& rows);

// Loaded metrics CSV as column vectors keyed by header name.
struct MetricsTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> data;  // per column

  const std::vector<double>& column(const std::string& name) const;  // throws ConfigError
  static MetricsTable from_file(const std::filesystem::path& path);
};

// Builds one chart series from a metrics table; skips NaN rows.
Series series_from_table(const MetricsTable& table, const std::string& x,
                         const std::string& y, const std::string& label);

}  // namespace dgs
