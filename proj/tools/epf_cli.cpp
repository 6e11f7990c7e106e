// Copyright 2026 The EPF Authors. All Rights Reserved.
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

// Command-line front end: synth, train, run, eval.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "epf/checkpoint.hpp"
#include "epf/config.hpp"
#include "epf/csv.hpp"
#include "epf/error.hpp"
#include "epf/eval.hpp"
#include "epf/online.hpp"
#include "epf/pipeline.hpp"
#include "epf/synth.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Misuse detected after parsing (missing inputs and the like).
struct UsageError : epf::Error {
  using epf::Error::Error;
};

struct CommonOptions {
  std::string config_file;
  std::vector<std::string> overrides;
  std::string out;
  std::string prices;
  std::string weather;
  std::string fuel_mix;
  std::string seed;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool data_flags) {
  cmd->add_option("-c,--config", o.config_file, "INI config file ([section] key = value)");
  cmd->add_option("-s,--set", o.overrides, "Override a key: section.key=value (repeatable)");
  cmd->add_option("-o,--out", o.out, "Output directory (run.output)");
  cmd->add_option("--seed", o.seed, "Run seed (run.seed)");
  if (data_flags) {
    cmd->add_option("--prices", o.prices, "Price CSV (data.prices)");
    cmd->add_option("--weather", o.weather, "Daily weather CSV (data.weather)");
    cmd->add_option("--fuel-mix", o.fuel_mix, "Hourly fuel-mix CSV (data.fuel_mix)");
  }
}

epf::Config load_config(const CommonOptions& o) {
  epf::Config cfg;
  if (!o.config_file.empty()) cfg.load_file(o.config_file);
  if (!o.prices.empty()) cfg.set("data.prices", o.prices);
  if (!o.weather.empty()) cfg.set("data.weather", o.weather);
  if (!o.fuel_mix.empty()) cfg.set("data.fuel_mix", o.fuel_mix);
  if (!o.out.empty()) cfg.set("run.output", o.out);
  if (!o.seed.empty()) cfg.set("run.seed", o.seed);
  for (const auto& s : o.overrides) cfg.set_assignment(s);
  return cfg;
}

void persist_config(const epf::Config& cfg, const fs::path& dir) {
  fs::create_directories(dir);
  std::ofstream out(dir / "config.ini", std::ios::binary);
  if (!out) throw epf::DataError("cannot write '" + (dir / "config.ini").string() + "'");
  out << cfg.to_ini();
}

void require_inputs(const epf::RunConfig& rc) {
  if (rc.data.prices.empty()) throw UsageError("no price CSV given (--prices or data.prices)");
  auto check = [](const fs::path& p) {
    if (!fs::exists(p)) throw UsageError("input file not found: " + p.string());
  };
  check(rc.data.prices);
  if (rc.data.weather) check(*rc.data.weather);
  if (rc.data.fuel_mix) check(*rc.data.fuel_mix);
}

epf::PreparedData load_data(const epf::RunConfig& rc) {
  require_inputs(rc);
  epf::CsvSchema schema;
  schema.feature_columns = rc.feature_columns;
  epf::CleanReport report;
  const epf::RawTable clean = epf::clean_hours(epf::ingest_csv(rc.data, schema), &report);
  std::cerr << "cleaned: " << report.hour25_rows_removed << " hour-25 rows removed, " << report.values_filled
            << " values filled, " << report.dropped_days.size() << " days dropped\n";
  epf::PipelineConfig pc;
  pc.features = rc.features;
  pc.window = rc.window;
  pc.train_days = rc.split.train_days;
  pc.val_days = rc.split.val_days;
  return epf::prepare_data(clean, pc);
}

int cmd_synth(const epf::Config& cfg) {
  const epf::RunConfig rc = epf::resolve(cfg);
  rc.synth.validate();
  const epf::SynthMarket market = epf::synth_market(rc.synth);
  const epf::CsvSources src = epf::write_synth_csv(market, rc.output);
  persist_config(cfg, rc.output);
  std::cout << "wrote " << src.prices.string() << ", " << src.weather->string() << ", "
            << src.fuel_mix->string() << " (" << rc.synth.days << " days)\n";
  return kExitOk;
}

int cmd_train(const epf::Config& cfg) {
  const epf::RunConfig rc = epf::resolve(cfg);
  rc.train.validate();
  const epf::PreparedData data = load_data(rc);
  persist_config(cfg, rc.output);
  std::cerr << "samples: " << data.split.train.size() << " train, " << data.split.validation.size()
            << " validation, " << data.split.stream.size() << " stream; " << data.input_size << " features\n";

  const epf::TrainResult result = epf::train_on_split(data, rc.model, rc.train);
  epf::write_history_csv(result.history, rc.output / "history.csv");
  epf::save_checkpoint(result.best, data.stats, cfg.values(), rc.output / "model.ckpt");
  const auto& best = result.history[result.best_epoch - 1];
  std::cout << "trained " << result.history.size() << " epochs, best epoch " << result.best_epoch
            << " (train " << epf::format_double(best.train_loss) << ", val " << epf::format_double(best.val_loss)
            << "); checkpoint " << (rc.output / "model.ckpt").string() << '\n';
  return kExitOk;
}

void write_report(const epf::MetricsReport& report, const fs::path& dir) {
  const std::vector<epf::ComparisonRow> row = epf::compare_report(std::span(&report, 1));
  epf::write_comparison_csv(row, dir / ("metrics_" + report.label + ".csv"));
  epf::write_residuals_csv(report, dir / ("residuals_" + report.label + ".csv"));
  epf::write_per_day_csv(report, dir / ("per_day_" + report.label + ".csv"));
  epf::write_price_days(report.predicted, dir / ("predictions_" + report.label + ".csv"));
}

int cmd_run(const epf::Config& cfg, const std::vector<std::string>& regimes, const std::string& checkpoint) {
  for (const auto& r : regimes) {
    if (r != "static" && r != "dynamic" && r != "online") {
      throw UsageError("unknown regime '" + r + "' (expected static, dynamic or online)");
    }
  }
  const epf::RunConfig rc = epf::resolve(cfg);
  const epf::PreparedData data = load_data(rc);
  persist_config(cfg, rc.output);

  std::optional<epf::Checkpoint> ck;
  auto model0 = [&]() -> const epf::ModelParams& {
    if (!ck) {
      if (checkpoint.empty()) throw UsageError("regimes static and online need --checkpoint");
      if (!fs::exists(checkpoint)) throw UsageError("checkpoint not found: " + checkpoint);
      epf::ModelSpec spec = rc.model;
      spec.input_size = data.input_size;
      ck = epf::load_checkpoint(checkpoint, spec);
      if (ck->stats.feature_names != data.stats.feature_names) {
        throw epf::DataError("checkpoint was trained on different features than this configuration yields");
      }
    }
    return ck->params;
  };

  std::vector<epf::MetricsReport> reports;
  for (const auto& regime : regimes) {
    std::vector<epf::Prediction> predictions;
    if (regime == "static") {
      predictions = epf::run_static(model0(), data.split);
    } else if (regime == "online") {
      const epf::OnlineResult res = epf::run_online(model0(), data.split, rc.online, rc.train.loss);
      epf::write_audit_csv(res.audit, rc.output / "audit.csv");
      predictions = res.predictions;
      std::size_t accepted = 0;
      for (const auto& a : res.audit) accepted += a.accepted ? 1 : 0;
      std::cerr << "online: " << accepted << " of " << res.audit.size() << " batches accepted\n";
    } else {
      epf::DynamicConfig dc;
      dc.spec = rc.model;
      dc.spec.input_size = data.input_size;
      dc.train = rc.train;
      dc.train.epochs = rc.dynamic_epochs;
      dc.val_days = rc.split.val_days;
      predictions = epf::run_dynamic(dc, data.split);
    }
    reports.push_back(epf::regime_report(predictions, data, regime));
    write_report(reports.back(), rc.output);
  }
  const auto rows = epf::compare_report(reports);
  epf::write_comparison_csv(rows, rc.output / "comparison.csv");
  std::cout << "config,mse,mae,rmse\n";
  for (const auto& r : rows) {
    std::cout << r.config << ',' << epf::format_double(r.mse) << ',' << epf::format_double(r.mae) << ','
              << epf::format_double(r.rmse) << '\n';
  }
  return kExitOk;
}

int cmd_eval(const std::string& pred_csv, const std::string& actual_csv, const std::string& out) {
  for (const auto& p : {pred_csv, actual_csv}) {
    if (!fs::exists(p)) throw UsageError("input file not found: " + p);
  }
  const auto pred = epf::read_price_days(pred_csv);
  const auto actual = epf::read_price_days(actual_csv);
  const epf::MetricsReport report = epf::metrics(pred, actual, "eval");
  const std::vector<epf::ComparisonRow> row = epf::compare_report(std::span(&report, 1));
  if (!out.empty()) {
    fs::create_directories(out);
    epf::write_comparison_csv(row, fs::path(out) / "metrics.csv");
    epf::write_residuals_csv(report, fs::path(out) / "residuals.csv");
  }
  std::cout << "mse,mae,rmse\n"
            << epf::format_double(report.mse) << ',' << epf::format_double(report.mae) << ','
            << epf::format_double(report.rmse) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Day-ahead electricity price forecasting with a two-layer LSTM"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "epf 1.0");
  app.footer("Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.\n"
             "Kernel ISA can be forced with EPF_SIMD=scalar|avx2|neon.");

  CommonOptions synth_opts, train_opts, run_opts;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic market as CSV files");
  add_common(synth, synth_opts, false);
  std::string days, drift_day;
  synth->add_option("--days", days, "Number of days (synth.days, >= 60)");
  synth->add_option("--drift-day", drift_day, "First day of the second regime (synth.drift_day)");

  auto* train = app.add_subcommand("train", "Preprocess, train and write a checkpoint");
  add_common(train, train_opts, true);

  auto* run = app.add_subcommand("run", "Run regimes over the test stream and write reports");
  add_common(run, run_opts, true);
  std::vector<std::string> regimes;
  std::string checkpoint;
  run->add_option("-r,--regime", regimes, "static, dynamic or online (repeatable or comma separated)")
      ->required()
      ->delimiter(',');
  run->add_option("--checkpoint", checkpoint, "Checkpoint for the static and online regimes");

  auto* eval = app.add_subcommand("eval", "Metrics of a prediction CSV against an actual-price CSV");
  std::string pred_csv, actual_csv, eval_out;
  eval->add_option("--pred", pred_csv, "Predictions (date,hour_ending,price)")->required();
  eval->add_option("--actual", actual_csv, "Actual prices (date,hour_ending,price)")->required();
  eval->add_option("-o,--out", eval_out, "Directory for metrics.csv and residuals.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*synth) {
      epf::Config cfg = load_config(synth_opts);
      if (!days.empty()) cfg.set("synth.days", days);
      if (!drift_day.empty()) cfg.set("synth.drift_day", drift_day);
      return cmd_synth(cfg);
    }
    if (*train) return cmd_train(load_config(train_opts));
    if (*run) return cmd_run(load_config(run_opts), regimes, checkpoint);
    if (*eval) return cmd_eval(pred_csv, actual_csv, eval_out);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const epf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
