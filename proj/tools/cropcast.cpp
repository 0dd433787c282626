#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cropcast/error.hpp"
#include "cropcast/pipeline.hpp"

namespace {

using cropcast::pipeline::RunConfig;

struct ThresholdFlags {
  double rainfall = 0.0, temperature = 0.0, low = 0.0, high = 0.0;
  std::vector<CLI::Option*> triggers;  // one --rainfall-split per subcommand

  bool given() const {
    for (const auto* o : triggers) {
      if (o->count() > 0) return true;
    }
    return false;
  }
};

void add_input(CLI::App* cmd, RunConfig& config) {
  cmd->add_option("-i,--input", config.input, "CSV file (raw or labelled)")->required();
}

void add_hmm(CLI::App* cmd, RunConfig& config) {
  cmd->add_option("--max-iter", config.hmm.max_iterations, "Baum-Welch iteration cap")
      ->capture_default_str();
  cmd->add_option("--tol", config.hmm.tolerance, "stop when |delta log-likelihood| is below this")
      ->capture_default_str();
  cmd->add_option("--smoothing", config.hmm.smoothing, "add-kappa pseudo-counts")
      ->capture_default_str();
  cmd->add_flag("--update-initial", config.hmm.update_initial,
                "re-estimate the initial distribution too");
}

void add_lstm(CLI::App* cmd, RunConfig& config) {
  auto& l = config.lstm;
  cmd->add_option("--hidden", l.hidden_size, "LSTM hidden units")->capture_default_str();
  cmd->add_option("--window", l.window_length, "input window length")->capture_default_str();
  cmd->add_option("--epochs", l.epochs)->capture_default_str();
  cmd->add_option("--batch-size", l.batch_size, "samples per update, 0 = full batch")
      ->capture_default_str();
  cmd->add_option("--dense", l.dense_size, "tanh dense layer width, 0 = none")
      ->capture_default_str();
  cmd->add_option("--learning-rate", l.learning_rate)->capture_default_str();
  cmd->add_option("--lstm-seed", l.seed, "weight initialisation seed")->capture_default_str();
  cmd->add_option("--train-fraction", l.train_fraction)->capture_default_str();
  cmd->add_flag("--with-climate", config.lstm_use_climate,
                "raw input: add rainfall and temperature as LSTM features");
}

void add_thresholds(CLI::App* cmd, ThresholdFlags& t) {
  CLI::Option* all[] = {
      cmd->add_option("--rainfall-split", t.rainfall, "fixed cut instead of the median"),
      cmd->add_option("--temperature-split", t.temperature, "fixed cut instead of the median"),
      cmd->add_option("--yield-low-cut", t.low, "fixed lower yield tercile cut"),
      cmd->add_option("--yield-high-cut", t.high, "fixed upper yield tercile cut"),
  };
  // All four or none.
  for (auto* a : all) {
    for (auto* b : all) {
      if (a != b) a->needs(b);
    }
  }
  t.triggers.push_back(all[0]);
}

void add_out(CLI::App* cmd, RunConfig& config) {
  cmd->add_option("-o,--out", config.out_dir, "output directory")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maize yield forecasting with a discrete HMM and an LSTM baseline"};
  app.set_config("--config", "", "TOML/INI file with option values");
  app.require_subcommand(1);

  RunConfig config;
  ThresholdFlags thresholds;

  auto* ingest = app.add_subcommand("ingest", "load and discretise a CSV, write series.csv");
  auto* train_hmm = app.add_subcommand("train-hmm", "count estimates then Baum-Welch");
  auto* train_lstm = app.add_subcommand("train-lstm", "train the LSTM on the 80/20 split");
  auto* compare = app.add_subcommand("compare", "held-out metrics for both models");
  auto* forecast = app.add_subcommand("forecast", "forecast from the trained HMM archive");
  auto* steady = app.add_subcommand("steady-state", "stationary vectors of both A matrices");
  auto* plot = app.add_subcommand("plot", "write plot-ready CSV files");

  for (auto* cmd : {ingest, train_hmm, train_lstm, compare}) {
    add_input(cmd, config);
    add_thresholds(cmd, thresholds);
  }
  for (auto* cmd : {train_hmm, compare}) add_hmm(cmd, config);
  for (auto* cmd : {train_lstm, compare}) add_lstm(cmd, config);
  for (auto* cmd : {ingest, train_hmm, train_lstm, compare, forecast, steady, plot}) {
    add_out(cmd, config);
  }
  forecast->add_option("--horizon", config.horizon, "years to forecast")->capture_default_str();
  forecast->add_flag("--sample", config.sample, "sample instead of taking the argmax");
  forecast->add_option("--seed", config.seed, "seed for --sample")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cropcast::exit_code(cropcast::ErrorKind::kConfig);
  }

  if (thresholds.given()) {
    config.thresholds = cropcast::estimation::Thresholds{thresholds.rainfall, thresholds.temperature,
                                                         thresholds.low, thresholds.high};
  }

  namespace p = cropcast::pipeline;
  try {
    std::string text;
    if (*ingest) text = p::cmd_ingest(config);
    else if (*train_hmm) text = p::cmd_train_hmm(config);
    else if (*train_lstm) text = p::cmd_train_lstm(config);
    else if (*compare) text = p::cmd_compare(config);
    else if (*forecast) text = p::cmd_forecast(config);
    else if (*steady) text = p::cmd_steady_state(config);
    else if (*plot) text = p::cmd_plot(config);
    std::cout << text;
    return 0;
  } catch (const cropcast::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cropcast::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cropcast::exit_code(cropcast::ErrorKind::kInput);
  }
}
