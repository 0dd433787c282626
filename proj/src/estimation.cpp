#include "cropcast/estimation.hpp"

#include <algorithm>
#include <cmath>

#include "cropcast/error.hpp"

namespace cropcast::estimation {

namespace {

void check_records(const std::vector<ClimateYieldRecord>& records) {
  if (records.size() < 3) {
    throw InputError("discretization needs at least 3 records, got " +
                     std::to_string(records.size()));
  }
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (r > 0 && rec.year <= records[r - 1].year) {
      throw InputError("year " + std::to_string(rec.year) + " at record " +
                       std::to_string(r + 1) + " is not after " +
                       std::to_string(records[r - 1].year));
    }
    if (!std::isfinite(rec.rainfall_mm) || !std::isfinite(rec.temperature_c) ||
        !std::isfinite(rec.maize_yield)) {
      throw InputError("record " + std::to_string(r + 1) + " has a non-finite value");
    }
    if (rec.rainfall_mm < 0.0) {
      throw InputError("record " + std::to_string(r + 1) + " has negative rainfall");
    }
    if (rec.maize_yield < 0.0) {
      throw InputError("record " + std::to_string(r + 1) + " has negative maize yield");
    }
  }
}

std::vector<double> column(const std::vector<ClimateYieldRecord>& records,
                           double ClimateYieldRecord::*field, const char* name) {
  std::vector<double> values;
  values.reserve(records.size());
  for (const auto& rec : records) values.push_back(rec.*field);
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) {
    throw InputError(std::string("column ") + name +
                     " is constant; cannot place a threshold");
  }
  return values;
}

}  // namespace

const hmm::StateSpace& climate_states() {
  static const hmm::StateSpace states({"LL", "LH", "HL", "HH"});
  return states;
}

const hmm::ObservationAlphabet& yield_levels() {
  static const hmm::ObservationAlphabet symbols({"L", "M", "H"});
  return symbols;
}

DiscretizedSeries DiscretizedSeries::prefix(std::size_t length) const {
  if (length > size()) throw ConfigError("prefix longer than series");
  DiscretizedSeries out;
  out.years.assign(years.begin(), years.begin() + static_cast<std::ptrdiff_t>(length));
  out.states.assign(states.begin(), states.begin() + static_cast<std::ptrdiff_t>(length));
  out.observations.assign(observations.begin(),
                          observations.begin() + static_cast<std::ptrdiff_t>(length));
  out.thresholds = thresholds;
  return out;
}

void check_series(const DiscretizedSeries& series) {
  if (series.states.size() != series.size() ||
      series.observations.size() != series.size()) {
    throw InputError("series columns have different lengths");
  }
  for (std::size_t t = 0; t < series.size(); ++t) {
    if (t > 0 && series.years[t] <= series.years[t - 1]) {
      throw InputError("year " + std::to_string(series.years[t]) + " at row " +
                       std::to_string(t + 1) + " is not after " +
                       std::to_string(series.years[t - 1]));
    }
    if (series.states[t] >= climate_states().size()) {
      throw InputError("state index out of range at row " + std::to_string(t + 1));
    }
    if (series.observations[t] >= yield_levels().size()) {
      throw InputError("observation index out of range at row " + std::to_string(t + 1));
    }
  }
}

double quantile(std::vector<double> values, double probability) {
  if (values.empty()) throw ConfigError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double position = probability * static_cast<double>(values.size() - 1);
  const auto lower = static_cast<std::size_t>(std::floor(position));
  const std::size_t upper = std::min(lower + 1, values.size() - 1);
  const double weight = position - static_cast<double>(lower);
  return values[lower] + weight * (values[upper] - values[lower]);
}

Thresholds fit_thresholds(const std::vector<ClimateYieldRecord>& records) {
  check_records(records);
  const auto rain = column(records, &ClimateYieldRecord::rainfall_mm, "rainfall_mm");
  const auto temp = column(records, &ClimateYieldRecord::temperature_c, "temperature_c");
  const auto yield = column(records, &ClimateYieldRecord::maize_yield, "maize_yield");

  Thresholds cuts;
  cuts.rainfall_split = quantile(rain, 0.5);
  cuts.temperature_split = quantile(temp, 0.5);
  cuts.yield_low_cut = quantile(yield, 1.0 / 3.0);
  cuts.yield_high_cut = quantile(yield, 2.0 / 3.0);
  return cuts;
}

std::size_t climate_state(double rainfall_mm, double temperature_c, const Thresholds& cuts) {
  const bool wet = rainfall_mm > cuts.rainfall_split;
  const bool hot = temperature_c > cuts.temperature_split;
  return (wet ? 2u : 0u) + (hot ? 1u : 0u);
}

std::size_t yield_level(double maize_yield, const Thresholds& cuts) {
  if (maize_yield <= cuts.yield_low_cut) return kLow;
  if (maize_yield <= cuts.yield_high_cut) return kModerate;
  return kHigh;
}

DiscretizedSeries discretize(const std::vector<ClimateYieldRecord>& records,
                             const ThresholdPolicy& policy) {
  check_records(records);
  const Thresholds cuts = policy.fixed ? *policy.fixed : fit_thresholds(records);
  if (cuts.yield_low_cut > cuts.yield_high_cut) {
    throw ConfigError("yield cuts are out of order");
  }

  DiscretizedSeries series;
  series.thresholds = cuts;
  for (const auto& rec : records) {
    series.years.push_back(rec.year);
    series.states.push_back(climate_state(rec.rainfall_mm, rec.temperature_c, cuts));
    series.observations.push_back(yield_level(rec.maize_yield, cuts));
  }
  return series;
}

CountEstimates count_estimates(const DiscretizedSeries& series, std::size_t num_states,
                               std::size_t num_symbols) {
  if (series.size() < 2) throw InputError("counting needs a series of at least 2 years");
  CountEstimates counts;
  counts.length = series.size();
  counts.transitions.assign(num_states, std::vector<std::size_t>(num_states, 0));
  counts.emissions.assign(num_states, std::vector<std::size_t>(num_symbols, 0));
  counts.state_counts.assign(num_states, 0);

  for (std::size_t t = 0; t < series.size(); ++t) {
    const std::size_t s = series.states[t];
    const std::size_t o = series.observations[t];
    if (s >= num_states || o >= num_symbols) {
      throw InputError("label out of range at position " + std::to_string(t + 1));
    }
    ++counts.state_counts[s];
    ++counts.emissions[s][o];
    if (t + 1 < series.size()) ++counts.transitions[s][series.states[t + 1]];
  }
  return counts;
}

namespace {

std::vector<std::size_t> normalise_rows(const CountMatrix& counts, double kappa,
                                        Matrix& out) {
  std::vector<std::size_t> uniform_rows;
  const std::size_t cols = counts.empty() ? 0 : counts.front().size();
  out = Matrix(counts.size(), cols);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    double total = kappa * static_cast<double>(cols);
    for (std::size_t c : counts[i]) total += static_cast<double>(c);
    if (total == 0.0) {
      uniform_rows.push_back(i);
      for (std::size_t j = 0; j < cols; ++j) out(i, j) = 1.0 / static_cast<double>(cols);
      continue;
    }
    for (std::size_t j = 0; j < cols; ++j) {
      out(i, j) = (static_cast<double>(counts[i][j]) + kappa) / total;
    }
  }
  return uniform_rows;
}

}  // namespace

InitialEstimate estimate_initial_params(const CountEstimates& counts, double smoothing) {
  if (!(smoothing >= 0.0)) throw ConfigError("smoothing must be non-negative");
  if (counts.length == 0) throw ConfigError("counts describe an empty series");

  InitialEstimate estimate;
  estimate.uniform_transition_rows =
      normalise_rows(counts.transitions, smoothing, estimate.params.A);
  estimate.uniform_emission_rows =
      normalise_rows(counts.emissions, smoothing, estimate.params.B);
  estimate.params.pi.resize(counts.state_counts.size());
  for (std::size_t i = 0; i < counts.state_counts.size(); ++i) {
    estimate.params.pi[i] =
        static_cast<double>(counts.state_counts[i]) / static_cast<double>(counts.length);
  }
  return estimate;
}

}  // namespace cropcast::estimation
