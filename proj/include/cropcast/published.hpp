#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cropcast/estimation.hpp"
#include "cropcast/hmm.hpp"
#include "cropcast/matrix.hpp"
#include "cropcast/metrics.hpp"

// Reference figures for the bundled fixture as previously printed, kept for
// side-by-side comparison. Nothing is fitted to these; they only feed the
// diagnostic log.
namespace cropcast::published {

// Matrices print to four decimals, so anything within half a unit in the
// last place counts as a match.
inline constexpr double kPrintTolerance = 5e-5;

Matrix count_transitions();            // LL, LH, HL, HH rows
estimation::CountMatrix emission_tally();  // printed count table, L M H header
Matrix count_emissions();              // printed probabilities, L M H header
std::vector<double> count_initial();
std::vector<double> trained_initial();
Matrix trained_transitions();
Matrix trained_emissions();
// One-based states as printed (30 entries).
std::vector<std::size_t> decoded_states();
inline constexpr double kMatchFraction = 0.3125;
std::vector<double> steady_state();

inline constexpr int kForecastFirstYear = 2022;
inline constexpr std::size_t kForecastHorizon = 4;
inline constexpr std::size_t kForecastState = 1;   // zero-based (LH)
inline constexpr std::size_t kForecastSymbol = 2;  // H

struct MetricsRow {
  std::string model;
  double mape, rmse, corr, sem, mse;
};
std::vector<MetricsRow> metrics_table();

struct LstmRun {
  std::size_t hidden_layers, units, epochs;
  double loss, validation_loss, test_accuracy;
};
LstmRun lstm_run();

struct Diagnostic {
  std::string topic;
  std::string message;
};
using DiagnosticLog = std::vector<Diagnostic>;

// One entry per cell differing by more than tolerance.
DiagnosticLog compare_matrix(const std::string& topic, const Matrix& ours,
                             const Matrix& printed, const std::vector<std::string>& row_labels,
                             const std::vector<std::string>& col_labels,
                             double tolerance = kPrintTolerance);

// Column order that turns `ours` into `printed` (printed column k equals our
// column perm[k]) when it is not the identity and every entry agrees.
std::optional<std::vector<std::size_t>> column_permutation(const Matrix& ours,
                                                           const Matrix& printed,
                                                           double tolerance = kPrintTolerance);

DiagnosticLog count_diagnostics(const estimation::CountEstimates& counts,
                                const hmm::HmmParams& count_based);
DiagnosticLog trained_diagnostics(const hmm::HmmParams& trained);
DiagnosticLog decode_diagnostics(const hmm::StateSequence& decoded,
                                 const hmm::StateSequence& recorded);
DiagnosticLog steady_state_diagnostics(const std::vector<double>& from_counts,
                                       const std::vector<double>& from_trained);
DiagnosticLog forecast_diagnostics(const hmm::ForecastResult& result);
// Rounding-interval checks on the printed metrics table: RMSE squared must
// be able to round to the printed MSE.
DiagnosticLog metrics_table_diagnostics();
bool rmse_mse_consistent(double rmse, double mse, double half_unit = 0.005);

std::string format(const DiagnosticLog& log);

}  // namespace cropcast::published
