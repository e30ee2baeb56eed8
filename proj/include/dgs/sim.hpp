// Copyright 2026 DGS contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dgs/server.hpp"
#include "dgs/tasks.hpp"
#include "dgs/worker.hpp"

namespace dgs {

// Compute-time model in simulated milliseconds.
struct DelayModel {
  enum class Kind { fixed, uniform, exponential };
  Kind kind = Kind::fixed;
  double a = 0.0;  // fixed: value; uniform: low; exponential: mean
  double b = 0.0;  // uniform: high

  double sample(Rng& rng) const;

  static DelayModel fixed_ms(double ms);
  static DelayModel uniform_ms(double low, double high);
  static DelayModel exponential_ms(double mean);
};

// transfer_time = latency + bytes / bandwidth.
struct LinkModel {
  double latency_ms = 0.0;
  double bandwidth_bytes_per_ms = 1e12;

  double transfer_time(std::size_t bytes) const {
    return latency_ms + static_cast<double>(bytes) / bandwidth_bytes_per_ms;
  }
};

enum class EventKind { compute_done, arrive_server, arrive_worker };

struct SimEvent {
  double time_ms = 0.0;
  std::uint64_t seq = 0;  // insertion order; total tie-break
  EventKind kind = EventKind::compute_done;
  std::uint32_t worker = 0;
  std::size_t bytes = 0;
};

// One row per processed exchange. loss/acc are NaN except on evaluation
// steps.
struct MetricsRecord {
  double sim_time_ms = 0.0;
  std::uint64_t step = 0;
  std::uint32_t worker = 0;
  std::uint64_t staleness = 0;
  double loss = 0.0;
  double acc = 0.0;
  std::size_t bytes_up = 0;
  std::size_t bytes_down = 0;
  std::size_t cum_bytes_up = 0;
  std::size_t cum_bytes_down = 0;
};

inline constexpr const char* kMetricsCsvHeader =
    "sim_time_ms,step,worker,staleness,loss,acc,bytes_up,bytes_down,"
    "cum_bytes_up,cum_bytes_down";

class MetricsSink {
 public:
  virtual ~MetricsSink() = default;
  virtual void on_record(const MetricsRecord& r) = 0;
};

class CsvSink final : public MetricsSink {
 public:
  explicit CsvSink(std::ostream& out);
  void on_record(const MetricsRecord& r) override;

 private:
  std::ostream& out_;
};

class VectorSink final : public MetricsSink {
 public:
  void on_record(const MetricsRecord& r) override { records.push_back(r); }
  std::vector<MetricsRecord> records;
};

// Test/diagnostic hooks into the event loop; any callback may be empty.
struct SimObserver {
  std::function<void(const SimEvent&)> on_event;
  std::function<void(std::uint32_t worker, const WorkerNode&,
                     std::span<const std::uint32_t> batch)>
      on_compute;
  std::function<void(std::uint32_t worker, const SparseUpdate& up, const SparseUpdate& down,
                     const ServerNode&, std::uint64_t staleness)>
      on_server_exchange;
  std::function<void(std::uint32_t worker, const WorkerNode&)> on_worker_applied;
};

struct RunConfig {
  std::shared_ptr<const Task> task;
  Strategy strategy = Strategy::dense;
  bool single_node = false;  // local momentum SGD, no exchanges
  std::uint32_t workers = 1;
  Hyperparams hp;
  SparsifyConfig cfg;
  std::optional<SparsifyConfig> secondary;
  std::uint32_t batch_size = 1;
  std::uint32_t steps_per_worker = 1;
  std::uint32_t steps_per_epoch = 1;  // lr-schedule boundary, per worker
  DelayModel compute_delay = DelayModel::uniform_ms(8.0, 12.0);
  std::vector<DelayModel> per_worker_compute;  // optional override, size == workers
  LinkModel link;
  std::uint64_t seed = 0;
  std::uint64_t eval_every = 0;  // exchanges between evaluations; 0 = per epoch
};

struct EvalResult {
  double loss = 0.0;
  double accuracy = 0.0;
};

// Full-set mean loss and 0/1 accuracy of a model.
EvalResult evaluate(const Task& task, const ParamVector& theta,
                    std::span<const std::uint32_t> samples);

struct RunResult {
  ParamVector global_model;
  std::vector<ParamVector> worker_models;
  bool diverged = false;
  std::uint64_t diverged_step = 0;
  std::string divergence_reason;
  std::uint64_t exchanges = 0;
  double sim_time_ms = 0.0;
  std::size_t total_bytes_up = 0;
  std::size_t total_bytes_down = 0;
  double mean_staleness = 0.0;
  EvalResult final_train;
  EvalResult final_test;
};

// Executes the event loop to completion. Identical config and seed produce
// an identical metrics stream and final models. A diverged run returns
// partial results with `diverged` set instead of throwing.
RunResult run(const RunConfig& config, MetricsSink* sink = nullptr,
              const SimObserver* observer = nullptr);

std::string format_g17(double v);

}  // namespace dgs
