#include "cropcast/published.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "cropcast/error.hpp"

namespace cropcast::published {

namespace {

std::string fixed4(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.4f", value);
  return buffer;
}

std::string vector_text(const std::vector<double>& values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    out += (i ? ", " : "") + fixed4(values[i]);
  }
  return out + "]";
}

Matrix tally_matrix(const estimation::CountMatrix& counts) {
  Matrix m(counts.size(), counts.empty() ? 0 : counts.front().size());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = static_cast<double>(counts[r][c]);
  }
  return m;
}

Matrix row_vector(const std::vector<double>& v) { return Matrix::from_rows({v}); }

const std::vector<std::string>& state_names() { return estimation::climate_states().labels(); }
const std::vector<std::string>& symbol_names() { return estimation::yield_levels().labels(); }

void append(DiagnosticLog& log, DiagnosticLog more) {
  log.insert(log.end(), std::make_move_iterator(more.begin()),
             std::make_move_iterator(more.end()));
}

void permutation_note(DiagnosticLog& log, const std::string& topic, const Matrix& ours,
                      const Matrix& printed, double tolerance) {
  const auto perm = column_permutation(ours, printed, tolerance);
  if (!perm) return;
  std::string order;
  for (std::size_t k = 0; k < perm->size(); ++k) {
    order += (k ? " " : "") + symbol_names().at((*perm)[k]);
  }
  log.push_back({topic, "printed columns headed L M H actually hold our " + order +
                            " columns; the figures agree once reordered"});
}

}  // namespace

Matrix count_transitions() {
  return {{0.3000, 0.1000, 0.4000, 0.2000},
          {0.1250, 0.3750, 0.3750, 0.1250},
          {0.5000, 0.3750, 0.1250, 0.0000},
          {0.2000, 0.2000, 0.0000, 0.6000}};
}

estimation::CountMatrix emission_tally() {
  return {{2, 1, 7}, {1, 1, 6}, {0, 1, 7}, {5, 0, 1}};
}

Matrix count_emissions() {
  return {{0.2000, 0.1000, 0.7000},
          {0.1250, 0.1250, 0.7500},
          {0.0000, 0.1250, 0.8750},
          {0.8333, 0.0000, 0.1667}};
}

std::vector<double> count_initial() { return {0.3125, 0.2500, 0.2500, 0.1875}; }

std::vector<double> trained_initial() { return {0.25, 0.25, 0.25, 0.25}; }

Matrix trained_transitions() {
  return {{1.0000, 0.0000, 0.0000, 0.0000},
          {0.0924, 0.8076, 0.0000, 0.1000},
          {0.0000, 0.2246, 0.7754, 0.0000},
          {0.0000, 0.0000, 0.2052, 0.7948}};
}

Matrix trained_emissions() {
  return {{0.0000, 0.0000, 1.0000},
          {0.0000, 1.0000, 0.7809},
          {0.0000, 1.0000, 0.0000},
          {0.5272, 0.4728, 0.0000}};
}

std::vector<std::size_t> decoded_states() {
  return {3, 1, 3, 1, 3, 1, 1, 3, 1, 1, 3, 1, 3, 1, 3,
          1, 3, 1, 3, 1, 3, 1, 3, 1, 3, 1, 3, 1, 3, 1};
}

std::vector<double> steady_state() { return {0.7738, 0.1310, 0.0952, 0.0000}; }

std::vector<MetricsRow> metrics_table() {
  return {{"HMM", 1.26, 0.37, -0.85, 0.18, 0.13}, {"LSTM", 12.98, 1.21, -0.85, 4.19, 0.87}};
}

LstmRun lstm_run() { return {1, 32, 200, 0.7100, 0.1055, 0.5813}; }

DiagnosticLog compare_matrix(const std::string& topic, const Matrix& ours, const Matrix& printed,
                             const std::vector<std::string>& row_labels,
                             const std::vector<std::string>& col_labels, double tolerance) {
  if (ours.rows() != printed.rows() || ours.cols() != printed.cols()) {
    return {{topic, "shape " + std::to_string(ours.rows()) + "x" + std::to_string(ours.cols()) +
                        " differs from printed " + std::to_string(printed.rows()) + "x" +
                        std::to_string(printed.cols())}};
  }
  DiagnosticLog log;
  for (std::size_t r = 0; r < ours.rows(); ++r) {
    for (std::size_t c = 0; c < ours.cols(); ++c) {
      if (std::abs(ours(r, c) - printed(r, c)) <= tolerance) continue;
      const std::string where = (r < row_labels.size() ? row_labels[r] : std::to_string(r)) +
                                "," + (c < col_labels.size() ? col_labels[c] : std::to_string(c));
      log.push_back({topic, where + ": computed " + fixed4(ours(r, c)) + " vs printed " +
                                fixed4(printed(r, c))});
    }
  }
  return log;
}

std::optional<std::vector<std::size_t>> column_permutation(const Matrix& ours,
                                                           const Matrix& printed,
                                                           double tolerance) {
  if (ours.rows() != printed.rows() || ours.cols() != printed.cols()) return std::nullopt;
  std::vector<std::size_t> perm(ours.cols());
  std::iota(perm.begin(), perm.end(), 0);
  do {
    bool identity = true;
    for (std::size_t k = 0; k < perm.size(); ++k) identity = identity && perm[k] == k;
    if (identity) continue;
    bool all = true;
    for (std::size_t r = 0; r < ours.rows() && all; ++r) {
      for (std::size_t k = 0; k < perm.size() && all; ++k) {
        all = std::abs(ours(r, perm[k]) - printed(r, k)) <= tolerance;
      }
    }
    if (all) return perm;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::nullopt;
}

DiagnosticLog count_diagnostics(const estimation::CountEstimates& counts,
                                const hmm::HmmParams& count_based) {
  DiagnosticLog log;
  append(log, compare_matrix("count pi", row_vector(count_based.pi), row_vector(count_initial()),
                             {"pi"}, state_names()));
  append(log, compare_matrix("count A", count_based.A, count_transitions(), state_names(),
                             state_names()));

  const Matrix tally = tally_matrix(counts.emissions);
  auto tally_log = compare_matrix("emission counts", tally, tally_matrix(emission_tally()),
                                  state_names(), symbol_names(), 0.0);
  if (!tally_log.empty()) {
    append(log, std::move(tally_log));
    permutation_note(log, "emission counts", tally, tally_matrix(emission_tally()), 0.0);
  }
  auto b_log = compare_matrix("count B", count_based.B, count_emissions(), state_names(),
                              symbol_names());
  if (!b_log.empty()) {
    append(log, std::move(b_log));
    permutation_note(log, "count B", count_based.B, count_emissions(), kPrintTolerance);
  }
  if (log.empty()) log.push_back({"count estimates", "all count-based figures match"});
  return log;
}

DiagnosticLog trained_diagnostics(const hmm::HmmParams& trained) {
  DiagnosticLog log;
  append(log, compare_matrix("trained pi", row_vector(trained.pi), row_vector(trained_initial()),
                             {"pi"}, state_names()));
  append(log, compare_matrix("trained A", trained.A, trained_transitions(), state_names(),
                             state_names()));
  append(log, compare_matrix("trained B", trained.B, trained_emissions(), state_names(),
                             symbol_names()));

  const hmm::HmmParams printed{trained_initial(), trained_transitions(), trained_emissions()};
  // The printed matrices are rounded, so only flag departures beyond rounding.
  for (const auto& violation : hmm::validate_params(printed, 4 * kPrintTolerance)) {
    log.push_back({"printed trained model", "not a valid HMM: " + violation});
  }
  return log;
}

DiagnosticLog decode_diagnostics(const hmm::StateSequence& decoded,
                                 const hmm::StateSequence& recorded) {
  DiagnosticLog log;
  auto printed = decoded_states();
  for (auto& s : printed) s -= 1;

  if (printed.size() != recorded.size()) {
    log.push_back({"decode", "printed decode has " + std::to_string(printed.size()) +
                                 " entries but the series has " +
                                 std::to_string(recorded.size()) +
                                 "; the printed agreement figure cannot be recomputed as printed"});
  }
  const std::size_t common = std::min(printed.size(), recorded.size());
  const hmm::StateSequence head(recorded.begin(), recorded.begin() + common);
  const hmm::StateSequence printed_head(printed.begin(), printed.begin() + common);
  log.push_back({"decode", "printed decode vs recorded states over the first " +
                               std::to_string(common) + " years: " +
                               fixed4(hmm::match_fraction(printed_head, head))});

  if (decoded.size() == recorded.size()) {
    const double ours = hmm::match_fraction(decoded, recorded);
    log.push_back({"decode", "computed match fraction " + fixed4(ours) + " vs printed " +
                                 fixed4(kMatchFraction)});
  }
  if (decoded.size() >= common) {
    const hmm::StateSequence ours_head(decoded.begin(), decoded.begin() + common);
    log.push_back({"decode", "computed decode vs printed decode over the first " +
                                 std::to_string(common) + " years: " +
                                 fixed4(hmm::match_fraction(ours_head, printed_head))});
  }
  return log;
}

DiagnosticLog steady_state_diagnostics(const std::vector<double>& from_counts,
                                       const std::vector<double>& from_trained) {
  DiagnosticLog log;
  const auto printed = steady_state();
  const auto compare = [&](const std::string& name, const std::vector<double>& ours) {
    auto diffs =
        compare_matrix(name, row_vector(ours), row_vector(printed), {"s"}, state_names());
    if (diffs.empty()) {
      log.push_back({name, "matches printed steady state " + vector_text(printed)});
    } else {
      log.push_back({name, vector_text(ours) + " vs printed " + vector_text(printed)});
    }
  };
  compare("steady state (count A)", from_counts);
  compare("steady state (trained A)", from_trained);

  const auto from_printed = hmm::steady_state(trained_transitions());
  log.push_back({"steady state (printed trained A)",
                 "the printed trained A is absorbing in LL and gives " +
                     vector_text(from_printed.distribution) +
                     ", so the printed steady state did not come from it"});
  return log;
}

DiagnosticLog forecast_diagnostics(const hmm::ForecastResult& result) {
  DiagnosticLog log;
  const auto& states = estimation::climate_states();
  const auto& symbols = estimation::yield_levels();
  std::size_t agree = 0;
  const std::size_t n = std::min(result.steps.size(), kForecastHorizon);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& step = result.steps[k];
    const int year = kForecastFirstYear + static_cast<int>(k);
    if (step.year == year && step.state == kForecastState && step.observation == kForecastSymbol) {
      ++agree;
      continue;
    }
    log.push_back({"forecast", std::to_string(step.year) + ": computed " + step.state_label +
                                   "/" + step.observation_label + " vs printed " +
                                   states.label(kForecastState) + "/" +
                                   symbols.label(kForecastSymbol) + " in " +
                                   std::to_string(year)});
  }
  log.push_back({"forecast", std::to_string(agree) + " of " + std::to_string(n) +
                                 " steps agree with the printed path"});
  const Matrix printed_b = trained_emissions();
  log.push_back({"forecast", "the printed trained B gives " + states.label(kForecastState) +
                                 " emission probabilities " +
                                 vector_text({printed_b(kForecastState, 0),
                                              printed_b(kForecastState, 1),
                                              printed_b(kForecastState, 2)}) +
                                 ", so an H emission from that state is not its mode"});
  return log;
}

bool rmse_mse_consistent(double rmse, double mse, double half_unit) {
  const double lo = std::max(0.0, rmse - half_unit);
  const double hi = rmse + half_unit;
  return lo * lo <= mse + half_unit && hi * hi >= mse - half_unit;
}

DiagnosticLog metrics_table_diagnostics() {
  DiagnosticLog log;
  for (const auto& row : metrics_table()) {
    const bool ok = rmse_mse_consistent(row.rmse, row.mse);
    char buffer[160];
    std::snprintf(buffer, sizeof buffer, "RMSE %.2f squared is %.4f, printed MSE %.2f: %s",
                  row.rmse, row.rmse * row.rmse, row.mse,
                  ok ? "consistent within rounding" : "inconsistent");
    log.push_back({"metrics table " + row.model, buffer});
  }
  return log;
}

std::string format(const DiagnosticLog& log) {
  std::ostringstream out;
  for (const auto& d : log) out << "[" << d.topic << "] " << d.message << '\n';
  return out.str();
}

}  // namespace cropcast::published
