// Copyright 2026 DGS contributors
// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "dgs/experiment.hpp"
#include "dgs/svg.hpp"

using namespace dgs;
namespace fs = std::filesystem;

namespace {

const char* kMinimalMsgd = R"({
  "method": "msgd",
  "momentum": 0.7,
  "task": {"kind": "logistic", "features": 4, "samples": 40, "separation": 3.0}
})";

fs::path temp_dir(const char* name) {
  fs::path p = fs::temp_directory_path() / "dgs_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("minimal config parses with defaults") {
  ExperimentConfig c = ExperimentConfig::from_json_text(kMinimalMsgd);
  CHECK(c.method == Method::msgd);
  CHECK(c.workers == 1);
  CHECK(c.momentum == 0.7);
  CHECK(c.seed == 1);
  CHECK(c.task->partition().total_size() == 5);
}

TEST_CASE("config validation produces field-level errors") {
  auto error_of = [](const std::string& text) {
    try {
      ExperimentConfig::from_json_text(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };

  CHECK(error_of("{") .find("invalid JSON") != std::string::npos);
  CHECK(error_of(R"({"task": {"kind": "logistic"}})").find("config.method") !=
        std::string::npos);
  CHECK(error_of(R"({"method": "nope", "task": {"kind": "logistic"}})")
            .find("config.method") != std::string::npos);
  CHECK(error_of(R"({"method": "asgd"})").find("config.task") != std::string::npos);
  CHECK(error_of(R"({"method": "asgd", "drop_ratio": 100,
                     "task": {"kind": "logistic"}})")
            .find("config.drop_ratio") != std::string::npos);
  CHECK(error_of(R"({"method": "dgc_async", "task": {"kind": "logistic"}})")
            .find("config.momentum") != std::string::npos);
  CHECK(error_of(R"({"method": "dgs_samomentum", "momentum": 0.0,
                     "task": {"kind": "logistic"}})")
            .find("config.momentum") != std::string::npos);
  CHECK(error_of(R"({"method": "msgd", "momentum": 0.7, "workers": 4,
                     "task": {"kind": "logistic"}})")
            .find("config.workers") != std::string::npos);
  CHECK(error_of(R"({"method": "asgd", "learning_rate": -1,
                     "task": {"kind": "logistic"}})")
            .find("config.learning_rate") != std::string::npos);
  // negative or fractional counts must not wrap through the unsigned cast
  CHECK(error_of(R"({"method": "asgd", "workers": -3,
                     "task": {"kind": "logistic"}})")
            .find("config.workers") != std::string::npos);
  CHECK(error_of(R"({"method": "asgd", "batch_size": 2.5,
                     "task": {"kind": "logistic"}})")
            .find("config.batch_size") != std::string::npos);
  CHECK(error_of(R"({"method": "asgd",
                     "task": {"kind": "quadratic", "dim": -5}})")
            .find("config.dim") != std::string::npos);
  CHECK(error_of(R"({"method": "asgd",
                     "task": {"kind": "mlp", "hidden": [0]}})")
            .find("config.task.hidden") != std::string::npos);
}

TEST_CASE("ignored fields warn instead of failing") {
  std::vector<std::string> warnings;
  ExperimentConfig::from_json_text(R"({
    "method": "asgd", "drop_ratio": 50, "momentum": 0.5,
    "task": {"kind": "logistic", "features": 4, "samples": 40}
  })", &warnings);
  REQUIRE(warnings.size() == 2);
  CHECK(warnings[0].find("drop_ratio") != std::string::npos);
  CHECK(warnings[1].find("momentum") != std::string::npos);
}

TEST_CASE("method table maps onto strategies and momentum use") {
  CHECK(method_from_name("dgs_samomentum") == Method::dgs_samomentum);
  CHECK(method_name(Method::gd_async) == std::string("gd_async"));
  CHECK(method_uses_momentum(Method::msgd));
  CHECK(method_uses_momentum(Method::dgc_async));
  CHECK(!method_uses_momentum(Method::gd_async));
  CHECK(method_is_dense(Method::asgd));
  CHECK(!method_is_dense(Method::dgs_residual));
}

TEST_CASE("run_experiment writes csv and summary") {
  fs::path out = temp_dir("run");
  ExperimentConfig c = ExperimentConfig::from_json_text(kMinimalMsgd);
  Summary s = run_experiment(c, out, "metrics");
  CHECK(!s.diverged);
  CHECK(s.exchanges > 0);
  CHECK(fs::exists(out / "metrics.csv"));
  CHECK(fs::exists(out / "metrics.summary.json"));

  std::ifstream csv(out / "metrics.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == kMetricsCsvHeader);
  std::string first_row;
  CHECK(std::getline(csv, first_row));
  CHECK(!first_row.empty());
}

TEST_CASE("compare requires matching tasks and ranks by accuracy") {
  fs::path out = temp_dir("compare");
  const char* tmpl = R"({
    "method": "%s", "workers": 2, "drop_ratio": 90, %s
    "epochs": 2, "learning_rate": 0.3, "batch_size": 4, "seed": 9,
    "task": {"kind": "logistic", "features": 4, "samples": 40, "separation": 3.0}
  })";
  auto render = [&](const char* m, const char* extra) {
    char buf[512];
    std::snprintf(buf, sizeof buf, tmpl, m, extra);
    return ExperimentConfig::from_json_text(buf);
  };

  std::vector<std::pair<std::string, ExperimentConfig>> configs;
  configs.emplace_back("a_asgd", render("asgd", ""));
  configs.emplace_back("b_samo", render("dgs_samomentum", "\"momentum\": 0.5,"));
  configs.emplace_back("c_asgd_again", render("asgd", ""));

  std::vector<RankingRow> rows = compare_experiments(configs, out);
  REQUIRE(rows.size() == 3);
  for (std::size_t i = 1; i < rows.size(); ++i)
    CHECK(rows[i - 1].train_accuracy >= rows[i].train_accuracy);

  // identical configs produce identical metrics
  RankingRow* first = nullptr;
  RankingRow* second = nullptr;
  for (RankingRow& r : rows) {
    if (r.config_name == "a_asgd") first = &r;
    if (r.config_name == "c_asgd_again") second = &r;
  }
  REQUIRE(first);
  REQUIRE(second);
  CHECK(first->train_accuracy == second->train_accuracy);
  CHECK(first->test_accuracy == second->test_accuracy);

  std::string csv = ranking_to_csv(rows);
  CHECK(csv.find("config,method,workers,") == 0);

  SUBCASE("a mismatched task is rejected") {
    ExperimentConfig other = render("asgd", "");
    other.task_json = "{\"kind\":\"quadratic\"}";
    configs.emplace_back("d_other", other);
    CHECK_THROWS_AS(compare_experiments(configs, out), ConfigError);
  }
}

TEST_CASE("99% sparsified momentum keeps upward traffic under 2.2% of dense") {
  ExperimentConfig c = ExperimentConfig::from_json_text(R"({
    "method": "dgs_samomentum", "workers": 2, "drop_ratio": 99, "momentum": 0.7,
    "learning_rate": 0.05, "batch_size": 1, "epochs": 8, "seed": 3,
    "eval_every": 1000000000,
    "task": {"kind": "quadratic", "dim": 100000}
  })");
  Summary s = summarize(c, run(c.to_run_config()));
  CHECK(!s.diverged);
  CHECK(s.compression_ratio_up <= 0.022);
}

TEST_CASE("logistic task configs accept a feature scale profile") {
  ExperimentConfig c = ExperimentConfig::from_json_text(R"({
    "method": "asgd",
    "task": {"kind": "logistic", "features": 6, "samples": 40, "separation": 3.0,
             "scale_decay": 0.8}
  })");
  CHECK(c.task->partition().total_size() == 7);
  CHECK_THROWS_AS(ExperimentConfig::from_json_text(R"({
    "method": "asgd",
    "task": {"kind": "logistic", "scale_decay": 0.0}
  })"),
                  ConfigError);
}

TEST_CASE("summary reports compression ratios against dense transmission") {
  fs::path out = temp_dir("summary");
  ExperimentConfig c = ExperimentConfig::from_json_text(R"({
    "method": "dgs_residual", "workers": 2, "drop_ratio": 90,
    "epochs": 1, "batch_size": 4, "seed": 3,
    "task": {"kind": "logistic", "features": 9, "samples": 40, "separation": 3.0}
  })");
  Summary s = run_experiment(c, out, "m");
  // dim 10: a dense message is 16 + 80 bytes; sparse sends ~1+1 entries
  CHECK(s.compression_ratio_up > 0.0);
  CHECK(s.compression_ratio_up < 1.0);
  CHECK(s.compression_ratio_down > 0.0);
  std::string j = s.to_json();
  CHECK(j.find("\"compression_ratio_up\"") != std::string::npos);
  CHECK(j.find("\"mean_staleness\"") != std::string::npos);
}

TEST_CASE("metrics tables load and feed chart series") {
  fs::path dir = temp_dir("table");
  {
    std::ofstream out(dir / "m.csv");
    out << kMetricsCsvHeader << "\n";
    out << "1,1,0,0,0.5,0.75,40,40,40,40\n";
    out << "2,2,0,0,nan,nan,40,40,80,80\n";
    out << "3,3,0,0,0.25,0.8,40,40,120,120\n";
  }
  MetricsTable t = MetricsTable::from_file(dir / "m.csv");
  CHECK(t.columns.size() == 10);
  CHECK(t.column("loss").size() == 3);
  CHECK_THROWS_AS(t.column("nope"), ConfigError);

  Series loss = series_from_table(t, "step", "loss", "m");
  REQUIRE(loss.points.size() == 2);  // the nan row is skipped
  CHECK(loss.points[0] == std::pair<double, double>{1.0, 0.5});
  CHECK(loss.points[1] == std::pair<double, double>{3.0, 0.25});

  Series bytes = series_from_table(t, "time", "bytes", "m");
  REQUIRE(bytes.points.size() == 3);
  CHECK(bytes.points[2].second == 240.0);

  SUBCASE("charts render deterministically with a legend per series") {
    std::string svg1 = render_line_chart({loss, bytes}, "step", "loss");
    std::string svg2 = render_line_chart({loss, bytes}, "step", "loss");
    CHECK(svg1 == svg2);
    CHECK(svg1.find("<svg") == 0);
    CHECK(svg1.find("polyline") != std::string::npos);
    std::size_t legends = 0;
    for (std::size_t at = svg1.find("class=\"legend\""); at != std::string::npos;
         at = svg1.find("class=\"legend\"", at + 1))
      ++legends;
    CHECK(legends == 4);  // one line + one text per series
  }

  SUBCASE("an empty table still renders axes") {
    Series empty{"none", {}};
    std::string svg = render_line_chart({empty}, "step", "loss");
    CHECK(svg.find("<svg") == 0);
    CHECK(svg.find("<line") != std::string::npos);
    CHECK(svg.find("polyline") == std::string::npos);
  }
}
