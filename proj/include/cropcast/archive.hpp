#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "cropcast/estimation.hpp"
#include "cropcast/hmm.hpp"
#include "cropcast/lstm.hpp"

namespace cropcast::archive {

inline constexpr int kFormatVersion = 1;

enum class ModelKind { kHmm, kLstm };

const char* to_string(ModelKind kind);

struct HmmSnapshot {
  std::vector<std::string> states;
  std::vector<std::string> symbols;
  estimation::CountEstimates counts;
  hmm::HmmParams count_based;  // straight from the counts
  hmm::HmmParams initial;      // Baum-Welch starting point
  hmm::HmmParams trained;
  estimation::DiscretizedSeries series;
  // Numeric value of each symbol used when the HMM predicts a level.
  std::vector<double> symbol_values;

  hmm::BaumWelchOptions options;
  std::vector<double> log_likelihood_trace;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<std::size_t> frozen_transition_rows;
  std::vector<std::size_t> frozen_emission_rows;
};

struct LstmSnapshot {
  lstm::LstmConfig config;
  lstm::LstmParams params;
  lstm::MinMaxScaler scaler;
  bool use_climate = false;
  std::vector<double> train_loss;
  std::vector<double> validation_loss;
  lstm::SplitSizes split;
  std::vector<int> test_years;
  std::vector<double> test_targets;      // target units
  std::vector<double> test_predictions;  // target units
};

struct ModelArchive {
  int format_version = kFormatVersion;
  std::string created_utc;
  std::variant<HmmSnapshot, LstmSnapshot> payload;

  ModelKind kind() const noexcept;
};

// Versioned JSON text. Doubles are written with enough digits to round-trip
// exactly; non-finite values (an impossible log-likelihood) become null.
std::string dump(const ModelArchive& archive);
ModelArchive parse(const std::string& text);

// The payload alone, serialised canonically. Excludes the timestamp.
std::string payload_bytes(const ModelArchive& archive);

void save(const std::filesystem::path& path, const ModelArchive& archive);
ModelArchive load(const std::filesystem::path& path);

// Throws ConfigError naming both kinds when the archive holds the other one.
const HmmSnapshot& expect_hmm(const ModelArchive& archive);
const LstmSnapshot& expect_lstm(const ModelArchive& archive);

std::string utc_timestamp();

}  // namespace cropcast::archive
