// Copyright 2026 DGS contributors
// SPDX-License-Identifier: Apache-2.0
#include "dgs/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace dgs {

using nlohmann::json;

const char* method_name(Method m) {
  switch (m) {
    case Method::msgd: return "msgd";
    case Method::asgd: return "asgd";
    case Method::gd_async: return "gd_async";
    case Method::dgc_async: return "dgc_async";
    case Method::dgs_residual: return "dgs_residual";
    case Method::dgs_samomentum: return "dgs_samomentum";
  }
  return "?";
}

Method method_from_name(const std::string& name) {
  for (Method m : {Method::msgd, Method::asgd, Method::gd_async, Method::dgc_async,
                   Method::dgs_residual, Method::dgs_samomentum})
    if (name == method_name(m)) return m;
  throw ConfigError("config.method: unknown method '" + name + "'");
}

bool method_uses_momentum(Method m) {
  return m == Method::msgd || m == Method::dgc_async || m == Method::dgs_samomentum;
}

bool method_is_dense(Method m) { return m == Method::msgd || m == Method::asgd; }

namespace {

Strategy strategy_for(Method m) {
  switch (m) {
    case Method::msgd:
    case Method::asgd: return Strategy::dense;
    case Method::gd_async:
    case Method::dgs_residual: return Strategy::residual;
    case Method::dgc_async: return Strategy::dgc;
    case Method::dgs_samomentum: return Strategy::samomentum;
  }
  return Strategy::dense;
}

double require_number(const json& j, const std::string& field) {
  if (!j.contains(field) || !j[field].is_number())
    throw ConfigError("config." + field + ": required number missing");
  return j[field].get<double>();
}

double number_or(const json& j, const std::string& field, double fallback) {
  if (!j.contains(field)) return fallback;
  if (!j[field].is_number()) throw ConfigError("config." + field + ": must be a number");
  return j[field].get<double>();
}

// Integer field with an inclusive range; rejects negatives before they can
// wrap through an unsigned cast.
std::uint32_t u32_or(const json& j, const std::string& field, std::uint32_t fallback,
                     std::uint32_t lo, std::uint32_t hi) {
  double v = number_or(j, field, fallback);
  if (v != std::floor(v) || v < lo || v > hi)
    throw ConfigError("config." + field + ": must be an integer in [" +
                      std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<std::uint32_t>(v);
}

DelayModel parse_delay(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("kind"))
    throw ConfigError(where + ": expected an object with a 'kind'");
  std::string kind = j["kind"].get<std::string>();
  if (kind == "fixed") return DelayModel::fixed_ms(require_number(j, "ms"));
  if (kind == "uniform")
    return DelayModel::uniform_ms(require_number(j, "low"), require_number(j, "high"));
  if (kind == "exponential") return DelayModel::exponential_ms(require_number(j, "mean"));
  throw ConfigError(where + ".kind: unknown delay kind '" + kind + "'");
}

std::shared_ptr<const Task> parse_task(const json& j) {
  if (!j.is_object() || !j.contains("kind"))
    throw ConfigError("config.task: expected an object with a 'kind'");
  std::string kind = j["kind"].get<std::string>();
  if (kind == "quadratic") {
    std::uint32_t dim = u32_or(j, "dim", 100, 1, 50000000);
    std::uint64_t seed = static_cast<std::uint64_t>(number_or(j, "data_seed", 7));
    Rng rng(seed, 42);
    std::vector<double> optimum(dim);
    for (double& v : optimum) v = rng.normal();
    return make_quadratic_bowl(dim, std::move(optimum));
  }
  if (kind == "logistic") {
    return make_logistic_task(u32_or(j, "features", 10, 1, 1000000),
                              u32_or(j, "samples", 200, 5, 10000000),
                              number_or(j, "separation", 3.0),
                              static_cast<std::uint64_t>(number_or(j, "data_seed", 7)),
                              number_or(j, "scale_decay", 1.0));
  }
  if (kind == "mlp") {
    std::vector<std::uint32_t> hidden;
    if (j.contains("hidden")) {
      if (!j["hidden"].is_array())
        throw ConfigError("config.task.hidden: must be an array of layer widths");
      for (const json& h : j["hidden"]) {
        if (!h.is_number_unsigned() || h.get<std::uint64_t>() < 1 ||
            h.get<std::uint64_t>() > 100000)
          throw ConfigError("config.task.hidden: widths must be integers in [1, 100000]");
        hidden.push_back(h.get<std::uint32_t>());
      }
      if (hidden.empty()) throw ConfigError("config.task.hidden: need at least one layer");
    } else {
      hidden = {8};
    }
    Activation act = Activation::tanh;
    if (j.contains("activation")) {
      std::string a = j["activation"].get<std::string>();
      if (a == "tanh") act = Activation::tanh;
      else if (a == "relu") act = Activation::relu;
      else throw ConfigError("config.task.activation: unknown activation '" + a + "'");
    }
    SyntheticDataset ds;
    if (j.contains("dataset") && j["dataset"].is_object() &&
        j["dataset"].value("kind", "blobs") == std::string("xor")) {
      ds = make_xor_dataset();
    } else {
      const json d = j.value("dataset", json::object());
      ds = make_blobs_dataset(u32_or(d, "features", 2, 1, 1000000),
                              u32_or(d, "samples", 200, 5, 10000000),
                              number_or(d, "separation", 3.0),
                              static_cast<std::uint64_t>(number_or(d, "data_seed", 7)));
    }
    std::vector<std::uint32_t> sizes{ds.feature_dim};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(1);
    return make_mlp_task(std::move(sizes), act, std::move(ds));
  }
  throw ConfigError("config.task.kind: unknown task '" + kind + "'");
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text,
                                                  std::vector<std::string>* warnings) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");

  ExperimentConfig c;
  if (!j.contains("method") || !j["method"].is_string())
    throw ConfigError("config.method: required string missing");
  c.method = method_from_name(j["method"].get<std::string>());

  c.workers = u32_or(j, "workers", 1, 1, 4096);
  if (c.method == Method::msgd && c.workers != 1)
    throw ConfigError("config.workers: msgd runs on a single node");

  c.drop_ratio = number_or(j, "drop_ratio", 0.0);
  if (!(c.drop_ratio >= 0.0 && c.drop_ratio < 100.0))
    throw ConfigError("config.drop_ratio: must be in [0, 100)");
  if (method_is_dense(c.method) && c.drop_ratio != 0.0 && warnings)
    warnings->push_back("config.drop_ratio: ignored for dense method " +
                        std::string(method_name(c.method)));

  if (j.contains("momentum")) {
    if (!j["momentum"].is_number()) throw ConfigError("config.momentum: must be a number");
    c.momentum = j["momentum"].get<double>();
  }
  if (method_uses_momentum(c.method) && !c.momentum)
    throw ConfigError("config.momentum: required for method " +
                      std::string(method_name(c.method)));
  if (!method_uses_momentum(c.method) && c.momentum && *c.momentum != 0.0 && warnings)
    warnings->push_back("config.momentum: ignored for method " +
                        std::string(method_name(c.method)));
  if (c.momentum && !(*c.momentum >= 0.0 && *c.momentum < 1.0))
    throw ConfigError("config.momentum: must be in [0, 1)");
  if (c.method == Method::dgs_samomentum && *c.momentum == 0.0)
    throw ConfigError("config.momentum: dgs_samomentum requires momentum in (0, 1)");

  c.learning_rate = number_or(j, "learning_rate", 0.1);
  if (!(c.learning_rate > 0.0)) throw ConfigError("config.learning_rate: must be > 0");

  if (j.contains("lr_schedule")) {
    if (!j["lr_schedule"].is_array())
      throw ConfigError("config.lr_schedule: must be an array of {epoch, factor}");
    for (const json& d : j["lr_schedule"]) {
      if (!d.is_object() || !d.contains("epoch") || !d.contains("factor"))
        throw ConfigError("config.lr_schedule: entries need 'epoch' and 'factor'");
      c.lr_schedule.push_back(
          {d["epoch"].get<std::uint32_t>(), d["factor"].get<double>()});
    }
  }

  c.batch_size = u32_or(j, "batch_size", 8, 1, 1000000);
  c.epochs = u32_or(j, "epochs", 1, 1, 1000000);

  if (!j.contains("task")) throw ConfigError("config.task: required object missing");
  c.task = parse_task(j["task"]);
  c.task_json = j["task"].dump();

  if (j.contains("compute_delay"))
    c.compute_delay = parse_delay(j["compute_delay"], "config.compute_delay");
  if (j.contains("compute_delays")) {
    if (!j["compute_delays"].is_array())
      throw ConfigError("config.compute_delays: must be an array");
    std::size_t i = 0;
    for (const json& d : j["compute_delays"])
      c.per_worker_compute.push_back(
          parse_delay(d, "config.compute_delays[" + std::to_string(i++) + "]"));
    if (c.per_worker_compute.size() != c.workers)
      throw ConfigError("config.compute_delays: need exactly one entry per worker");
  }

  if (j.contains("link")) {
    const json& l = j["link"];
    c.link.latency_ms = number_or(l, "latency_ms", 0.0);
    c.link.bandwidth_bytes_per_ms = number_or(l, "bandwidth_bytes_per_ms", 1e12);
    if (c.link.latency_ms < 0.0) throw ConfigError("config.link.latency_ms: must be >= 0");
    if (!(c.link.bandwidth_bytes_per_ms > 0.0))
      throw ConfigError("config.link.bandwidth_bytes_per_ms: must be > 0");
  }

  if (j.contains("secondary_compression")) {
    if (!j["secondary_compression"].is_boolean())
      throw ConfigError("config.secondary_compression: must be a boolean");
    c.secondary_compression = j["secondary_compression"].get<bool>();
  }
  c.secondary_drop_ratio = number_or(j, "secondary_drop_ratio", c.drop_ratio);
  if (c.secondary_compression &&
      !(c.secondary_drop_ratio >= 0.0 && c.secondary_drop_ratio < 100.0))
    throw ConfigError("config.secondary_drop_ratio: must be in [0, 100)");

  c.eval_every = static_cast<std::uint64_t>(number_or(j, "eval_every", 0));
  c.seed = static_cast<std::uint64_t>(number_or(j, "seed", 1));
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path,
                                             std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str(), warnings);
}

std::uint32_t ExperimentConfig::steps_per_epoch_per_worker() const {
  std::uint64_t n_train = task->dataset().train_indices.size();
  std::uint64_t per_epoch =
      (n_train + static_cast<std::uint64_t>(batch_size) * workers - 1) /
      (static_cast<std::uint64_t>(batch_size) * workers);
  return static_cast<std::uint32_t>(std::max<std::uint64_t>(1, per_epoch));
}

RunConfig ExperimentConfig::to_run_config() const {
  RunConfig rc;
  rc.task = task;
  rc.strategy = strategy_for(method);
  rc.single_node = method == Method::msgd;
  rc.workers = workers;
  rc.hp.learning_rate = learning_rate;
  rc.hp.momentum = method_uses_momentum(method) ? *momentum : 0.0;
  rc.hp.lr_schedule = lr_schedule;
  rc.cfg = method_is_dense(method) ? SparsifyConfig(0.0) : SparsifyConfig(drop_ratio);
  if (secondary_compression) rc.secondary = SparsifyConfig(secondary_drop_ratio);
  rc.batch_size = batch_size;
  rc.steps_per_epoch = steps_per_epoch_per_worker();
  rc.steps_per_worker = rc.steps_per_epoch * epochs;
  rc.compute_delay = compute_delay;
  rc.per_worker_compute = per_worker_compute;
  rc.link = link;
  rc.seed = seed;
  rc.eval_every = eval_every;
  return rc;
}

namespace {

std::size_t dense_message_bytes(std::uint32_t dim) {
  return kWireHeaderBytes + 8ULL * dim;  // one f64 per component, no indices
}

}  // namespace

Summary summarize(const ExperimentConfig& config, const RunResult& result) {
  Summary s;
  s.method = method_name(config.method);
  s.workers = config.workers;
  s.seed = config.seed;
  s.exchanges = result.exchanges;
  s.sim_time_ms = result.sim_time_ms;
  s.final_train_loss = result.final_train.loss;
  s.final_train_accuracy = result.final_train.accuracy;
  s.final_test_loss = result.final_test.loss;
  s.final_test_accuracy = result.final_test.accuracy;
  s.total_bytes_up = result.total_bytes_up;
  s.total_bytes_down = result.total_bytes_down;
  s.mean_staleness = result.mean_staleness;
  double dense_total = static_cast<double>(result.exchanges) *
                       static_cast<double>(dense_message_bytes(config.task->partition().total_size()));
  if (dense_total > 0.0) {
    s.compression_ratio_up = static_cast<double>(result.total_bytes_up) / dense_total;
    s.compression_ratio_down = static_cast<double>(result.total_bytes_down) / dense_total;
  }
  s.diverged = result.diverged;
  s.diverged_step = result.diverged_step;
  return s;
}

std::string Summary::to_json() const {
  json j;
  j["method"] = method;
  j["workers"] = workers;
  j["seed"] = seed;
  j["exchanges"] = exchanges;
  j["sim_time_ms"] = sim_time_ms;
  j["final_train_loss"] = final_train_loss;
  j["final_train_accuracy"] = final_train_accuracy;
  j["final_test_loss"] = final_test_loss;
  j["final_test_accuracy"] = final_test_accuracy;
  j["total_bytes_up"] = total_bytes_up;
  j["total_bytes_down"] = total_bytes_down;
  j["mean_staleness"] = mean_staleness;
  j["compression_ratio_up"] = compression_ratio_up;
  j["compression_ratio_down"] = compression_ratio_down;
  j["diverged"] = diverged;
  if (diverged) j["diverged_step"] = diverged_step;
  return j.dump(2) + "\n";
}

Summary run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                       const std::string& stem) {
  std::filesystem::create_directories(out_dir);
  std::ofstream csv(out_dir / (stem + ".csv"));
  if (!csv) throw ConfigError("out: cannot write to " + out_dir.string());
  CsvSink sink(csv);
  RunResult result = run(config.to_run_config(), &sink);
  Summary s = summarize(config, result);
  std::ofstream sj(out_dir / (stem + ".summary.json"));
  sj << s.to_json();
  return s;
}

std::vector<RankingRow> compare_experiments(
    const std::vector<std::pair<std::string, ExperimentConfig>>& configs,
    const std::filesystem::path& out_dir) {
  if (configs.size() < 2) throw ConfigError("compare: need at least two configs");
  for (const auto& [name, c] : configs) {
    if (c.task_json != configs.front().second.task_json)
      throw ConfigError("compare: config '" + name + "' uses a different task");
    if (c.seed != configs.front().second.seed)
      throw ConfigError("compare: config '" + name + "' uses a different seed");
  }

  std::vector<RankingRow> rows;
  std::optional<double> baseline;
  for (const auto& [name, c] : configs) {
    Summary s = run_experiment(c, out_dir, name);
    RankingRow r;
    r.config_name = name;
    r.method = s.method;
    r.workers = s.workers;
    r.train_accuracy = s.final_train_accuracy;
    r.test_accuracy = s.final_test_accuracy;
    rows.push_back(r);
    if (c.method == Method::msgd && !baseline) baseline = s.final_train_accuracy;
  }
  double base = baseline.value_or(rows.front().train_accuracy);
  for (RankingRow& r : rows) r.delta_vs_baseline = 100.0 * (r.train_accuracy - base);
  std::stable_sort(rows.begin(), rows.end(), [](const RankingRow& a, const RankingRow& b) {
    return a.train_accuracy > b.train_accuracy;
  });
  return rows;
}

std::string ranking_to_csv(const std::vector<RankingRow>& rows) {
  std::ostringstream out;
  out << "config,method,workers,train_accuracy,test_accuracy,delta_pp_vs_baseline\n";
  for (const RankingRow& r : rows)
    out << r.config_name << ',' << r.method << ',' << r.workers << ','
        << format_g17(r.train_accuracy) << ',' << format_g17(r.test_accuracy) << ','
        << format_g17(r.delta_vs_baseline) << "\n";
  return out.str();
}

const std::vector<double>& MetricsTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return data[i];
  throw ConfigError("metrics: unknown column '" + name + "'");
}

MetricsTable MetricsTable::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("metrics: cannot open " + path.string());
  MetricsTable t;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("metrics: empty file");
  std::stringstream header(line);
  std::string cell;
  while (std::getline(header, cell, ',')) t.columns.push_back(cell);
  t.data.resize(t.columns.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::size_t i = 0;
    while (std::getline(row, cell, ',') && i < t.columns.size())
      t.data[i++].push_back(std::strtod(cell.c_str(), nullptr));
    if (i != t.columns.size())
      throw ConfigError("metrics: row with wrong number of cells in " + path.string());
  }
  return t;
}

Series series_from_table(const MetricsTable& table, const std::string& x,
                         const std::string& y, const std::string& label) {
  std::string xcol = x == "time" ? "sim_time_ms" : x;
  std::string ycol = y;
  if (y == "accuracy") ycol = "acc";
  if (y == "bytes") ycol = "cum_bytes_up";
  const std::vector<double>& xs = table.column(xcol);
  const std::vector<double>& ys = table.column(ycol);
  Series s;
  s.label = label;
  double extra = 0.0;
  const std::vector<double>* down = nullptr;
  if (y == "bytes") down = &table.column("cum_bytes_down");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double yv = ys[i];
    if (down) {
      extra = (*down)[i];
      yv += extra;
    }
    if (std::isnan(xs[i]) || std::isnan(yv)) continue;
    s.points.emplace_back(xs[i], yv);
  }
  return s;
}

}  // namespace dgs
