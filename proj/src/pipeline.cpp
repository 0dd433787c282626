#include "cropcast/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cropcast/csv_io.hpp"

namespace cropcast::pipeline {

namespace fs = std::filesystem;

namespace {

std::string fixed4(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.4f", value);
  return buffer;
}

std::string full(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

std::string vector_text(const std::vector<double>& values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? ", " : "") + fixed4(values[i]);
  return out + "]";
}

std::string matrix_text(const Matrix& m, const std::vector<std::string>& rows,
                        const std::vector<std::string>& cols) {
  std::string out = "     ";
  for (const auto& c : cols) out += "  " + std::string(6 - std::min<std::size_t>(6, c.size()), ' ') + c;
  out += '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    out += "  " + rows[r] + std::string(3 - std::min<std::size_t>(3, rows[r].size()), ' ');
    for (std::size_t c = 0; c < m.cols(); ++c) out += "  " + fixed4(m(r, c));
    out += '\n';
  }
  return out;
}

const std::vector<std::string>& state_names() { return estimation::climate_states().labels(); }
const std::vector<std::string>& symbol_names() { return estimation::yield_levels().labels(); }

void ensure_out_dir(const RunConfig& config) {
  run_stage("write", [&] {
    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (ec) throw InputError("cannot create output directory " + config.out_dir.string());
  });
}

void write_text(const fs::path& path, const std::string& text) {
  run_stage("write", [&] {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << text;
    if (!out) throw InputError("failed writing " + path.string());
  });
}

archive::ModelArchive load_archive(const RunConfig& config, const char* name,
                                   const char* prerequisite) {
  return run_stage("archive", [&] {
    const fs::path path = config.out_dir / name;
    if (!fs::exists(path)) {
      throw InputError("missing " + path.string() + "; run `cropcast " + prerequisite +
                       "` with the same --out first");
    }
    return archive::load(path);
  });
}

hmm::HmmParams count_start(const hmm::HmmParams& count_based) {
  hmm::HmmParams start = count_based;
  start.pi.assign(count_based.num_states(), 1.0 / static_cast<double>(count_based.num_states()));
  return start;
}

}  // namespace

void rethrow_labelled(ErrorKind kind, const std::string& message) {
  switch (kind) {
    case ErrorKind::kInput: throw InputError(message);
    case ErrorKind::kNumeric: throw NumericError(message);
    case ErrorKind::kConfig: throw ConfigError(message);
  }
  throw Error(kind, message);
}

void RunConfig::validate() const {
  if (hmm.max_iterations == 0) throw ConfigError("max-iter must be at least 1");
  if (!(hmm.tolerance >= 0.0) || !std::isfinite(hmm.tolerance)) {
    throw ConfigError("tol must be a finite non-negative number");
  }
  if (!(hmm.smoothing >= 0.0) || !std::isfinite(hmm.smoothing)) {
    throw ConfigError("smoothing must be a finite non-negative number");
  }
  if (horizon == 0) throw ConfigError("horizon must be at least 1");
  lstm.validate();
}

LoadedSeries load_series(const RunConfig& config) {
  auto table = run_stage("load", [&] {
    if (config.input.empty()) throw ConfigError("no --input file given");
    return io::load_csv(config.input);
  });
  LoadedSeries data;
  run_stage("discretize", [&] {
    if (auto* records = std::get_if<std::vector<estimation::ClimateYieldRecord>>(&table)) {
      data.records = std::move(*records);
      data.series = estimation::discretize(data.records, {config.thresholds});
    } else {
      if (config.thresholds) {
        throw ConfigError("threshold overrides need raw input; this file is already labelled");
      }
      data.series = std::get<estimation::DiscretizedSeries>(std::move(table));
      estimation::check_series(data.series);
    }
  });
  return data;
}

std::vector<double> symbol_values(const LoadedSeries& data, std::size_t rows) {
  const std::size_t m = estimation::yield_levels().size();
  if (!data.raw()) {
    std::vector<double> values(m);
    for (std::size_t k = 0; k < m; ++k) values[k] = static_cast<double>(k + 1);
    return values;
  }
  const auto& cuts = *data.series.thresholds;
  std::vector<double> values = {cuts.yield_low_cut, 0.5 * (cuts.yield_low_cut + cuts.yield_high_cut),
                                cuts.yield_high_cut};
  std::vector<double> total(m, 0.0);
  std::vector<std::size_t> count(m, 0);
  for (std::size_t t = 0; t < std::min(rows, data.records.size()); ++t) {
    total[data.series.observations[t]] += data.records[t].maize_yield;
    ++count[data.series.observations[t]];
  }
  for (std::size_t k = 0; k < m; ++k) {
    if (count[k] > 0) values[k] = total[k] / static_cast<double>(count[k]);
  }
  return values;
}

archive::HmmSnapshot fit_hmm(const LoadedSeries& data, std::size_t length,
                             const hmm::BaumWelchOptions& options) {
  archive::HmmSnapshot snap;
  snap.states = state_names();
  snap.symbols = symbol_names();
  snap.series = data.series.prefix(length);
  snap.symbol_values = symbol_values(data, length);
  snap.options = options;

  run_stage("estimate", [&] {
    snap.counts = estimation::count_estimates(snap.series);
    snap.count_based = estimation::estimate_initial_params(snap.counts, options.smoothing).params;
    snap.initial = count_start(snap.count_based);
  });
  run_stage("baum-welch", [&] {
    auto report = hmm::baum_welch(snap.initial, snap.series.observations, options);
    if (report.iterations == 0 && !report.converged) {
      throw NumericError("the observations are impossible under the starting model");
    }
    snap.trained = std::move(report.params);
    snap.log_likelihood_trace = std::move(report.log_likelihood_trace);
    snap.iterations = report.iterations;
    snap.converged = report.converged;
    snap.frozen_transition_rows = std::move(report.frozen_transition_rows);
    snap.frozen_emission_rows = std::move(report.frozen_emission_rows);
    const auto violations = hmm::validate_params(snap.trained);
    if (!violations.empty()) throw NumericError("trained model is invalid: " + violations.front());
  });
  return snap;
}

std::vector<double> hmm_predict(const hmm::HmmParams& params,
                                const hmm::ObservationSequence& observations, std::size_t first,
                                const std::vector<double>& values) {
  const std::size_t n = params.num_states();
  const std::size_t m = params.num_symbols();
  std::vector<double> prior = params.pi;  // state distribution for step t
  std::vector<double> next(n);
  std::vector<double> out;
  for (std::size_t t = 0; t < observations.size(); ++t) {
    if (t >= first) {
      double expected = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        double pk = 0.0;
        for (std::size_t i = 0; i < n; ++i) pk += prior[i] * params.B(i, k);
        expected += pk * values[k];
      }
      out.push_back(expected);
    }
    // Condition on the observation; an impossible one leaves the prior alone.
    std::vector<double> post(n);
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      post[i] = prior[i] * params.B(i, observations[t]);
      norm += post[i];
    }
    if (norm > 0.0) {
      for (auto& p : post) p /= norm;
    } else {
      post = prior;
    }
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) next[j] += post[i] * params.A(i, j);
    }
    prior = next;
  }
  return out;
}

namespace {

struct LstmData {
  std::vector<std::vector<double>> features;  // column 0 is the target
  std::vector<double> targets;
};

LstmData lstm_data(const LoadedSeries& data, bool use_climate) {
  LstmData out;
  const std::size_t t_len = data.series.size();
  for (std::size_t t = 0; t < t_len; ++t) {
    if (data.raw()) {
      const auto& r = data.records[t];
      out.targets.push_back(r.maize_yield);
      if (use_climate) {
        out.features.push_back({r.maize_yield, r.rainfall_mm, r.temperature_c});
      } else {
        out.features.push_back({r.maize_yield});
      }
    } else {
      const double level = static_cast<double>(data.series.observations[t] + 1);
      out.targets.push_back(level);
      out.features.push_back({level});
    }
  }
  return out;
}

}  // namespace

archive::LstmSnapshot fit_lstm(const LoadedSeries& data, const RunConfig& config) {
  archive::LstmSnapshot snap;
  snap.use_climate = config.lstm_use_climate && data.raw();
  const auto raw = lstm_data(data, snap.use_climate);
  snap.config = config.lstm;
  snap.config.input_size = raw.features.front().size();

  const std::size_t window = snap.config.window_length;
  run_stage("lstm-train", [&] {
    if (raw.features.size() < window + 2) {
      throw InputError("series has " + std::to_string(raw.features.size()) +
                       " rows; the LSTM needs at least window length + 2 = " +
                       std::to_string(window + 2));
    }
    snap.split = lstm::split_sizes(raw.features.size() - window, snap.config.train_fraction);
    // Scale on the rows the training samples can see.
    const std::vector<std::vector<double>> seen(
        raw.features.begin(), raw.features.begin() + static_cast<long>(snap.split.train + window));
    snap.scaler = lstm::MinMaxScaler::fit(seen);
    const auto scaled = snap.scaler.transform(raw.features);
    std::vector<double> targets(raw.targets.size());
    for (std::size_t t = 0; t < targets.size(); ++t) {
      targets[t] = snap.scaler.transform(0, raw.targets[t]);
    }
    const auto samples = lstm::make_windows(scaled, targets, window);
    auto result = lstm::train(samples, snap.config);

    snap.params = std::move(result.params);
    snap.train_loss = std::move(result.train_loss);
    snap.validation_loss = std::move(result.validation_loss);
    snap.split = result.split;
    for (std::size_t k = 0; k < result.test_predictions.size(); ++k) {
      const std::size_t t = window + snap.split.train + k;
      snap.test_years.push_back(data.series.years[t]);
      snap.test_targets.push_back(raw.targets[t]);
      snap.test_predictions.push_back(snap.scaler.inverse(0, result.test_predictions[k]));
    }
  });
  return snap;
}

Comparison compare(const LoadedSeries& data, const RunConfig& config) {
  const auto lstm_snap = fit_lstm(data, config);
  const std::size_t first_test = lstm_snap.config.window_length + lstm_snap.split.train;
  const auto hmm_snap = fit_hmm(data, first_test, config.hmm);

  Comparison result;
  result.years = lstm_snap.test_years;
  result.actual = lstm_snap.test_targets;
  result.lstm_predicted = lstm_snap.test_predictions;
  run_stage("evaluate", [&] {
    result.hmm_predicted = hmm_predict(hmm_snap.trained, data.series.observations, first_test,
                                       hmm_snap.symbol_values);
    result.hmm = metrics::evaluate(result.actual, result.hmm_predicted);
    result.lstm = metrics::evaluate(result.actual, result.lstm_predicted);
  });
  result.best = result.hmm.rmse <= result.lstm.rmse ? "HMM" : "LSTM";
  return result;
}

std::string comparison_table(const Comparison& result) {
  std::string out = std::string(metrics::kTableHeader) + "\n";
  out += metrics::table_row("HMM", result.hmm) + "\n";
  out += metrics::table_row("LSTM", result.lstm) + "\n";
  out += "best=" + result.best + " by RMSE\n";
  return out;
}

std::string cmd_ingest(const RunConfig& config) {
  config.validate();
  const auto data = load_series(config);
  ensure_out_dir(config);
  std::ostringstream csv;
  io::write_series_csv(csv, data.series);
  write_text(config.out_dir / "series.csv", csv.str());

  std::ostringstream out;
  out << "rows " << data.series.size() << " (" << data.series.years.front() << "-"
      << data.series.years.back() << "), " << (data.raw() ? "raw" : "labelled") << " input\n";
  if (const auto& t = data.series.thresholds) {
    out << "thresholds rainfall_split=" << full(t->rainfall_split)
        << " temperature_split=" << full(t->temperature_split)
        << " yield_low_cut=" << full(t->yield_low_cut)
        << " yield_high_cut=" << full(t->yield_high_cut) << '\n';
  }
  out << "wrote " << (config.out_dir / "series.csv").string() << '\n';
  return out.str();
}

std::string cmd_train_hmm(const RunConfig& config) {
  config.validate();
  const auto data = load_series(config);
  auto snap = fit_hmm(data, data.series.size(), config.hmm);

  const auto decoded = run_stage("decode", [&] {
    return hmm::viterbi(snap.trained, snap.series.observations).states;
  });
  published::DiagnosticLog log = published::count_diagnostics(snap.counts, snap.count_based);
  auto more = published::trained_diagnostics(snap.trained);
  log.insert(log.end(), more.begin(), more.end());
  more = published::decode_diagnostics(decoded, snap.series.states);
  log.insert(log.end(), more.begin(), more.end());

  ensure_out_dir(config);
  archive::ModelArchive model{archive::kFormatVersion, archive::utc_timestamp(), snap};
  run_stage("archive", [&] { archive::save(config.out_dir / kHmmArchive, model); });
  const std::string diagnostics = published::format(log);
  write_text(config.out_dir / "diagnostics_train-hmm.txt", diagnostics);

  std::ostringstream out;
  out << "count-based pi " << vector_text(snap.count_based.pi) << '\n';
  out << "count-based A\n" << matrix_text(snap.count_based.A, snap.states, snap.states);
  out << "count-based B\n" << matrix_text(snap.count_based.B, snap.states, snap.symbols);
  out << "baum-welch iterations " << snap.iterations << (snap.converged ? " (converged)" : " (cap reached)")
      << ", log-likelihood " << fixed4(snap.log_likelihood_trace.front()) << " -> "
      << fixed4(snap.log_likelihood_trace.back()) << '\n';
  if (!snap.frozen_transition_rows.empty() || !snap.frozen_emission_rows.empty()) {
    out << "frozen rows: transitions " << snap.frozen_transition_rows.size() << ", emissions "
        << snap.frozen_emission_rows.size() << '\n';
  }
  out << "trained pi " << vector_text(snap.trained.pi) << '\n';
  out << "trained A\n" << matrix_text(snap.trained.A, snap.states, snap.states);
  out << "trained B\n" << matrix_text(snap.trained.B, snap.states, snap.symbols);
  out << "match fraction (decoded vs recorded) "
      << fixed4(hmm::match_fraction(decoded, snap.series.states)) << '\n';
  out << "diagnostics:\n" << diagnostics;
  out << "wrote " << (config.out_dir / kHmmArchive).string() << '\n';
  return out.str();
}

namespace {

std::string loss_csv(const archive::LstmSnapshot& snap) {
  std::string out = "epoch,train_loss,validation_loss\n";
  for (std::size_t e = 0; e < snap.train_loss.size(); ++e) {
    out += std::to_string(e + 1) + "," + full(snap.train_loss[e]) + "," +
           full(snap.validation_loss[e]) + "\n";
  }
  return out;
}

}  // namespace

std::string cmd_train_lstm(const RunConfig& config) {
  config.validate();
  const auto data = load_series(config);
  const auto snap = fit_lstm(data, config);

  ensure_out_dir(config);
  archive::ModelArchive model{archive::kFormatVersion, archive::utc_timestamp(), snap};
  run_stage("archive", [&] { archive::save(config.out_dir / kLstmArchive, model); });
  write_text(config.out_dir / "lstm_loss.csv", loss_csv(snap));

  std::ostringstream out;
  out << "samples " << snap.split.train + snap.split.test << ": " << snap.split.train
      << " train, " << snap.split.test << " test\n";
  out << "epochs " << snap.train_loss.size() << ", loss " << fixed4(snap.train_loss.front())
      << " -> " << fixed4(snap.train_loss.back()) << ", validation loss "
      << fixed4(snap.validation_loss.back()) << '\n';
  out << "wrote " << (config.out_dir / kLstmArchive).string() << " and "
      << (config.out_dir / "lstm_loss.csv").string() << '\n';
  return out.str();
}

std::string cmd_compare(const RunConfig& config) {
  config.validate();
  const auto data = load_series(config);
  const auto result = compare(data, config);

  const std::string table = comparison_table(result);
  std::string predictions = "year,actual,hmm,lstm\n";
  for (std::size_t k = 0; k < result.years.size(); ++k) {
    predictions += std::to_string(result.years[k]) + "," + full(result.actual[k]) + "," +
                   full(result.hmm_predicted[k]) + "," + full(result.lstm_predicted[k]) + "\n";
  }
  ensure_out_dir(config);
  write_text(config.out_dir / "compare.csv", table);
  write_text(config.out_dir / "compare_predictions.csv", predictions);
  return table;
}

std::string cmd_forecast(const RunConfig& config) {
  config.validate();
  const auto model = load_archive(config, kHmmArchive, "train-hmm");
  const auto& snap = run_stage("archive", [&]() -> const archive::HmmSnapshot& {
    return archive::expect_hmm(model);
  });

  const auto result = run_stage("forecast", [&] {
    if (snap.series.size() == 0) throw InputError("archive holds an empty series");
    hmm::ForecastRequest request;
    request.last_state = snap.series.states.back();
    request.last_year = snap.series.years.back();
    request.horizon = config.horizon;
    request.mode = config.sample ? hmm::ForecastMode::kSample : hmm::ForecastMode::kArgmax;
    request.seed = config.seed;
    return hmm::forecast(snap.trained, hmm::StateSpace(snap.states),
                         hmm::ObservationAlphabet(snap.symbols), request);
  });

  std::string table = "year,state,state_label,observation,observation_label\n";
  for (const auto& step : result.steps) {
    table += std::to_string(step.year) + "," + std::to_string(step.state + 1) + "," +
             step.state_label + "," + std::to_string(step.observation + 1) + "," +
             step.observation_label + "\n";
  }
  const std::string diagnostics = published::format(published::forecast_diagnostics(result));
  ensure_out_dir(config);
  write_text(config.out_dir / "forecast.csv", table);
  write_text(config.out_dir / "diagnostics_forecast.txt", diagnostics);
  return table + "diagnostics:\n" + diagnostics;
}

std::string cmd_steady_state(const RunConfig& config) {
  const auto model = load_archive(config, kHmmArchive, "train-hmm");
  const auto& snap = run_stage("archive", [&]() -> const archive::HmmSnapshot& {
    return archive::expect_hmm(model);
  });

  std::ostringstream out;
  std::vector<std::vector<double>> vectors;
  run_stage("steady-state", [&] {
    for (const auto& [name, A] : {std::pair<const char*, const Matrix*>{"count-based A", &snap.count_based.A},
                                  {"trained A", &snap.trained.A}}) {
      const auto s = hmm::steady_state(*A);
      out << name << ": " << vector_text(s.distribution) << "  (" << s.iterations
          << " iterations, residual " << full(s.residual) << ")\n";
      if (const auto direct = hmm::steady_state_direct(*A)) {
        double gap = 0.0;
        for (std::size_t i = 0; i < direct->size(); ++i) {
          gap = std::max(gap, std::abs((*direct)[i] - s.distribution[i]));
        }
        out << "  direct solve agrees to " << full(gap) << '\n';
      } else {
        out << "  stationary distribution is not unique; power iteration from uniform shown\n";
      }
      vectors.push_back(s.distribution);
    }
  });
  const std::string diagnostics =
      published::format(published::steady_state_diagnostics(vectors[0], vectors[1]));
  out << "diagnostics:\n" << diagnostics;
  ensure_out_dir(config);
  write_text(config.out_dir / "steady_state.txt", out.str());
  return out.str();
}

std::string cmd_plot(const RunConfig& config) {
  const auto hmm_model = load_archive(config, kHmmArchive, "train-hmm");
  const auto lstm_model = load_archive(config, kLstmArchive, "train-lstm");
  const auto& snap = run_stage("archive", [&]() -> const archive::HmmSnapshot& {
    return archive::expect_hmm(hmm_model);
  });
  const auto& lstm_snap = run_stage("archive", [&]() -> const archive::LstmSnapshot& {
    return archive::expect_lstm(lstm_model);
  });

  const auto decoded = run_stage("decode", [&] {
    return hmm::viterbi(snap.trained, snap.series.observations).states;
  });
  const auto& states = snap.states;
  const auto& symbols = snap.symbols;

  std::string fig2 = "year,actual_level,model_level,actual_label,model_label\n";
  std::string fig3 = "year,recorded_state,decoded_state,recorded_label,decoded_label\n";
  for (std::size_t t = 0; t < snap.series.size(); ++t) {
    const std::size_t actual = snap.series.observations[t];
    const std::size_t modelled = argmax(snap.trained.B.row(decoded[t]));
    fig2 += std::to_string(snap.series.years[t]) + "," + std::to_string(actual + 1) + "," +
            std::to_string(modelled + 1) + "," + symbols[actual] + "," + symbols[modelled] + "\n";
    fig3 += std::to_string(snap.series.years[t]) + "," +
            std::to_string(snap.series.states[t] + 1) + "," + std::to_string(decoded[t] + 1) +
            "," + states[snap.series.states[t]] + "," + states[decoded[t]] + "\n";
  }
  ensure_out_dir(config);
  write_text(config.out_dir / "fig2.csv", fig2);
  write_text(config.out_dir / "fig3.csv", fig3);
  write_text(config.out_dir / "lstm_loss.csv", loss_csv(lstm_snap));

  std::ostringstream out;
  out << "match_fraction=" << fixed4(hmm::match_fraction(decoded, snap.series.states)) << '\n';
  out << "wrote fig2.csv, fig3.csv and lstm_loss.csv under " << config.out_dir.string() << '\n';
  return out.str();
}

}  // namespace cropcast::pipeline
