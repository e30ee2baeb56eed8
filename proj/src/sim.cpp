// Copyright 2026 DGS contributors
// SPDX-License-Identifier: Apache-2.0
#include "dgs/sim.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>

namespace dgs {

double DelayModel::sample(Rng& rng) const {
  switch (kind) {
    case Kind::fixed: return a;
    case Kind::uniform: return rng.uniform(a, b);
    case Kind::exponential: return rng.exponential(a);
  }
  return a;
}

DelayModel DelayModel::fixed_ms(double ms) {
  if (ms < 0.0) throw ConfigError("delay: fixed delay must be >= 0");
  return {Kind::fixed, ms, 0.0};
}

DelayModel DelayModel::uniform_ms(double low, double high) {
  if (low < 0.0 || high < low) throw ConfigError("delay: need 0 <= low <= high");
  return {Kind::uniform, low, high};
}

DelayModel DelayModel::exponential_ms(double mean) {
  if (!(mean >= 0.0)) throw ConfigError("delay: exponential mean must be >= 0");
  return {Kind::exponential, mean, 0.0};
}

std::string format_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvSink::CsvSink(std::ostream& out) : out_(out) { out_ << kMetricsCsvHeader << "\n"; }

void CsvSink::on_record(const MetricsRecord& r) {
  out_ << format_g17(r.sim_time_ms) << ',' << r.step << ',' << r.worker << ','
       << r.staleness << ',' << format_g17(r.loss) << ',' << format_g17(r.acc) << ','
       << r.bytes_up << ',' << r.bytes_down << ',' << r.cum_bytes_up << ','
       << r.cum_bytes_down << "\n";
}

EvalResult evaluate(const Task& task, const ParamVector& theta,
                    std::span<const std::uint32_t> samples) {
  EvalResult r;
  r.loss = task.loss(theta, samples);
  r.accuracy = task.accuracy(theta, samples);
  return r;
}

namespace {

struct EventAfter {
  bool operator()(const SimEvent& a, const SimEvent& b) const {
    if (a.time_ms != b.time_ms) return a.time_ms > b.time_ms;
    return a.seq > b.seq;
  }
};

class EventQueue {
 public:
  void push(double time, EventKind kind, std::uint32_t worker, std::size_t bytes = 0) {
    q_.push(SimEvent{time, next_seq_++, kind, worker, bytes});
  }
  bool empty() const { return q_.empty(); }
  SimEvent pop() {
    SimEvent e = q_.top();
    q_.pop();
    return e;
  }

 private:
  std::priority_queue<SimEvent, std::vector<SimEvent>, EventAfter> q_;
  std::uint64_t next_seq_ = 0;
};

}  // namespace

RunResult run(const RunConfig& config, MetricsSink* sink, const SimObserver* observer) {
  if (!config.task) throw ConfigError("run: no task");
  if (config.workers < 1) throw ConfigError("run: workers must be >= 1");
  if (config.batch_size < 1) throw ConfigError("run: batch size must be >= 1");
  if (config.steps_per_worker < 1) throw ConfigError("run: steps_per_worker must be >= 1");
  if (!config.per_worker_compute.empty() &&
      config.per_worker_compute.size() != config.workers)
    throw ConfigError("run: per_worker_compute must list one model per worker");
  if (config.single_node && (config.workers != 1 || config.strategy != Strategy::dense))
    throw ConfigError("run: single-node mode uses one worker with the dense strategy");
  config.hp.validate();

  const Task& task = *config.task;
  Rng init_rng(config.seed, 0x1117);
  ParamVector theta0 = task.initial_params(init_rng);

  ServerNode server(task.partition(), config.secondary);
  std::vector<WorkerNode> workers;
  std::vector<Rng> delay_rngs;
  workers.reserve(config.workers);
  for (std::uint32_t k = 0; k < config.workers; ++k) {
    workers.emplace_back(k, config.strategy, theta0, config.hp, config.cfg, config.seed,
                         config.steps_per_epoch);
    delay_rngs.emplace_back(config.seed, 2ULL * k + 1);
    server.register_worker(k);
  }

  // Single-node momentum SGD keeps its own velocity; no server traffic.
  VelocityState local_velocity{ParamVector(task.partition()), 0};

  const std::vector<std::uint32_t>& train = task.dataset().train_indices;
  const std::vector<std::uint32_t>& test = task.dataset().test_indices;
  std::uint64_t eval_stride = config.eval_every > 0
                                  ? config.eval_every
                                  : static_cast<std::uint64_t>(config.steps_per_epoch) *
                                        config.workers;
  if (eval_stride == 0) eval_stride = 1;

  RunResult result{ParamVector(task.partition()), {}, false, 0, "", 0, 0.0, 0, 0, 0.0, {}, {}};
  std::uint64_t total_staleness = 0;

  auto compute_delay_for = [&](std::uint32_t k) -> const DelayModel& {
    return config.per_worker_compute.empty() ? config.compute_delay
                                             : config.per_worker_compute[k];
  };

  EventQueue events;
  std::vector<std::uint32_t> steps_done(config.workers, 0);
  // Upward payloads in flight, one slot per worker (a worker blocks on its
  // exchange, so at most one message is pending in each direction).
  std::vector<std::vector<std::uint8_t>> upward(config.workers);
  std::vector<std::vector<std::uint8_t>> downward(config.workers);

  for (std::uint32_t k = 0; k < config.workers; ++k)
    events.push(compute_delay_for(k).sample(delay_rngs[k]), EventKind::compute_done, k);

  double now = 0.0;
  std::uint32_t dim = task.partition().total_size();

  // model_for_eval is only materialized on evaluation rows.
  auto emit = [&](std::uint64_t step, std::uint32_t k, std::uint64_t staleness,
                  std::size_t up_bytes, std::size_t down_bytes, auto&& model_for_eval) {
    MetricsRecord rec;
    rec.sim_time_ms = now;
    rec.step = step;
    rec.worker = k;
    rec.staleness = staleness;
    result.total_bytes_up += up_bytes;
    result.total_bytes_down += down_bytes;
    rec.bytes_up = up_bytes;
    rec.bytes_down = down_bytes;
    rec.cum_bytes_up = result.total_bytes_up;
    rec.cum_bytes_down = result.total_bytes_down;
    if (step % eval_stride == 0) {
      EvalResult ev = evaluate(task, model_for_eval(), train);
      rec.loss = ev.loss;
      rec.acc = ev.accuracy;
    } else {
      rec.loss = std::numeric_limits<double>::quiet_NaN();
      rec.acc = std::numeric_limits<double>::quiet_NaN();
    }
    if (sink) sink->on_record(rec);
  };

  try {
    while (!events.empty()) {
      SimEvent e = events.pop();
      now = e.time_ms;
      if (observer && observer->on_event) observer->on_event(e);

      switch (e.kind) {
        case EventKind::compute_done: {
          WorkerNode& w = workers[e.worker];
          std::vector<std::uint32_t> batch = w.sample_batch(task, config.batch_size);
          if (observer && observer->on_compute) observer->on_compute(e.worker, w, batch);

          if (config.single_node) {
            // Local momentum step: the dense-strategy upward is lr*grad, so
            // feeding it into the velocity gives u' = m*u + lr*grad.
            SparseUpdate up = w.compute_step(task, batch);
            local_velocity.u.scale(config.hp.momentum);
            apply_sparse(local_velocity.u, up, 1.0);
            ++local_velocity.step;
            ParamVector neg = local_velocity.u;
            neg.scale(-1.0);
            w.apply_downward(to_sparse(neg, e.worker, local_velocity.step));
            emit(local_velocity.step, e.worker, 0, 0, 0,
                 [&]() -> const ParamVector& { return w.model(); });
            ++result.exchanges;
            ++steps_done[e.worker];
            if (steps_done[e.worker] < config.steps_per_worker)
              events.push(now + compute_delay_for(e.worker).sample(delay_rngs[e.worker]),
                          EventKind::compute_done, e.worker);
            break;
          }

          SparseUpdate up = w.compute_step(task, batch);
          upward[e.worker] = encode(up);
          events.push(now + config.link.transfer_time(upward[e.worker].size()),
                      EventKind::arrive_server, e.worker, upward[e.worker].size());
          break;
        }

        case EventKind::arrive_server: {
          SparseUpdate up = decode(upward[e.worker], dim);
          ServerNode::ExchangeResult ex = server.on_gradient(e.worker, up);
          downward[e.worker] = encode(ex.down);
          total_staleness += ex.staleness;
          ++result.exchanges;
          if (observer && observer->on_server_exchange)
            observer->on_server_exchange(e.worker, up, ex.down, server, ex.staleness);
          emit(server.timestamp(), e.worker, ex.staleness, upward[e.worker].size(),
               downward[e.worker].size(), [&] { return server.global_model(theta0); });
          events.push(now + config.link.transfer_time(downward[e.worker].size()),
                      EventKind::arrive_worker, e.worker, downward[e.worker].size());
          break;
        }

        case EventKind::arrive_worker: {
          WorkerNode& w = workers[e.worker];
          w.apply_downward(decode(downward[e.worker], dim));
          if (observer && observer->on_worker_applied)
            observer->on_worker_applied(e.worker, w);
          ++steps_done[e.worker];
          if (steps_done[e.worker] < config.steps_per_worker)
            events.push(now + compute_delay_for(e.worker).sample(delay_rngs[e.worker]),
                        EventKind::compute_done, e.worker);
          break;
        }
      }
    }
  } catch (const DivergedError& err) {
    result.diverged = true;
    result.diverged_step = err.step();
    result.divergence_reason = err.what();
  } catch (const NumericError& err) {
    result.diverged = true;
    result.diverged_step = server.timestamp();
    result.divergence_reason = err.what();
  }

  result.sim_time_ms = now;
  result.global_model =
      config.single_node ? workers[0].model() : server.global_model(theta0);
  for (const WorkerNode& w : workers) result.worker_models.push_back(w.model());
  result.mean_staleness = result.exchanges == 0
                              ? 0.0
                              : static_cast<double>(total_staleness) /
                                    static_cast<double>(result.exchanges);
  if (!result.diverged) {
    result.final_train = evaluate(task, result.global_model, train);
    result.final_test = test.empty() ? result.final_train
                                     : evaluate(task, result.global_model, test);
  }
  return result;
}

}  // namespace dgs
