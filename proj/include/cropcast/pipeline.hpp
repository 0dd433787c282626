#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cropcast/archive.hpp"
#include "cropcast/error.hpp"
#include "cropcast/estimation.hpp"
#include "cropcast/lstm.hpp"
#include "cropcast/metrics.hpp"
#include "cropcast/published.hpp"

namespace cropcast::pipeline {

struct RunConfig {
  std::filesystem::path input;
  std::filesystem::path out_dir = "out";
  std::optional<estimation::Thresholds> thresholds;

  hmm::BaumWelchOptions hmm;
  lstm::LstmConfig lstm;
  // Raw mode only: feed rainfall and temperature to the LSTM next to yield.
  bool lstm_use_climate = false;

  std::size_t horizon = 4;
  bool sample = false;
  std::uint64_t seed = 0;

  // Throws ConfigError on an invalid setting.
  void validate() const;
};

[[noreturn]] void rethrow_labelled(ErrorKind kind, const std::string& message);

// Runs `body`, relabelling any failure as "[stage] message" with its kind
// kept. A message that already names a stage passes through untouched.
template <typename F>
auto run_stage(const std::string& stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Error& e) {
    const std::string what = e.what();
    if (!what.empty() && what.front() == '[') throw;
    rethrow_labelled(e.kind(), "[" + stage + "] " + what);
  } catch (const std::exception& e) {
    rethrow_labelled(ErrorKind::kInput, "[" + stage + "] " + e.what());
  }
}

struct LoadedSeries {
  estimation::DiscretizedSeries series;
  std::vector<estimation::ClimateYieldRecord> records;  // empty in labelled mode
  bool raw() const noexcept { return !records.empty(); }
};

LoadedSeries load_series(const RunConfig& config);

// Value each symbol stands for when a model predicts a level. Labelled data
// uses 1, 2, 3; raw data uses the mean yield of the first `rows` records in
// each bin, falling back to the cut points for an empty bin.
std::vector<double> symbol_values(const LoadedSeries& data, std::size_t rows);

// count -> initial estimate -> Baum-Welch on the first `length` years. The
// starting point keeps the counted A and B with a uniform initial
// distribution.
archive::HmmSnapshot fit_hmm(const LoadedSeries& data, std::size_t length,
                             const hmm::BaumWelchOptions& options);

// Expected symbol value for year t given the observations before it, for
// every t in [first, observations.size()).
std::vector<double> hmm_predict(const hmm::HmmParams& params,
                                const hmm::ObservationSequence& observations, std::size_t first,
                                const std::vector<double>& values);

archive::LstmSnapshot fit_lstm(const LoadedSeries& data, const RunConfig& config);

struct Comparison {
  std::vector<int> years;
  std::vector<double> actual;
  std::vector<double> hmm_predicted;
  std::vector<double> lstm_predicted;
  metrics::MetricsReport hmm;
  metrics::MetricsReport lstm;
  std::string best;
};

Comparison compare(const LoadedSeries& data, const RunConfig& config);

std::string comparison_table(const Comparison& result);

// Each command writes its artifacts under config.out_dir and returns the
// text meant for standard output.
std::string cmd_ingest(const RunConfig& config);
std::string cmd_train_hmm(const RunConfig& config);
std::string cmd_train_lstm(const RunConfig& config);
std::string cmd_compare(const RunConfig& config);
std::string cmd_forecast(const RunConfig& config);
std::string cmd_steady_state(const RunConfig& config);
std::string cmd_plot(const RunConfig& config);

inline constexpr const char* kHmmArchive = "hmm_model.json";
inline constexpr const char* kLstmArchive = "lstm_model.json";

}  // namespace cropcast::pipeline
