#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "cropcast/hmm.hpp"

namespace cropcast::estimation {

struct ClimateYieldRecord {
  int year = 0;
  double rainfall_mm = 0.0;
  double temperature_c = 0.0;
  double maize_yield = 0.0;
};

// Climate states: first letter rainfall level, second temperature level.
enum ClimateState : std::size_t { kLL = 0, kLH = 1, kHL = 2, kHH = 3 };
enum YieldLevel : std::size_t { kLow = 0, kModerate = 1, kHigh = 2 };

const hmm::StateSpace& climate_states();
const hmm::ObservationAlphabet& yield_levels();

// Cut points. A value equal to a cut falls in the lower bin.
struct Thresholds {
  double rainfall_split = 0.0;
  double temperature_split = 0.0;
  double yield_low_cut = 0.0;
  double yield_high_cut = 0.0;

  bool operator==(const Thresholds&) const = default;
};

// Default: median split for the climate columns and terciles for yield,
// fitted on the series itself. `fixed` overrides both.
struct ThresholdPolicy {
  std::optional<Thresholds> fixed;
};

struct DiscretizedSeries {
  std::vector<int> years;
  hmm::StateSequence states;
  hmm::ObservationSequence observations;
  // Absent when the labels were supplied directly rather than derived.
  std::optional<Thresholds> thresholds;

  std::size_t size() const noexcept { return years.size(); }
  DiscretizedSeries prefix(std::size_t length) const;

  bool operator==(const DiscretizedSeries&) const = default;
};

// Validates that a pre-labelled series is aligned and in range.
void check_series(const DiscretizedSeries& series);

// Quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double probability);

Thresholds fit_thresholds(const std::vector<ClimateYieldRecord>& records);

DiscretizedSeries discretize(const std::vector<ClimateYieldRecord>& records,
                             const ThresholdPolicy& policy = {});

std::size_t climate_state(double rainfall_mm, double temperature_c, const Thresholds& cuts);
std::size_t yield_level(double maize_yield, const Thresholds& cuts);

using CountMatrix = std::vector<std::vector<std::size_t>>;

struct CountEstimates {
  CountMatrix transitions;  // N x N
  CountMatrix emissions;    // N x M
  std::vector<std::size_t> state_counts;
  std::size_t length = 0;
};

CountEstimates count_estimates(const DiscretizedSeries& series,
                               std::size_t num_states = 4, std::size_t num_symbols = 3);

struct InitialEstimate {
  hmm::HmmParams params;
  // Rows with no counts (and kappa == 0) are set uniform and listed here.
  std::vector<std::size_t> uniform_transition_rows;
  std::vector<std::size_t> uniform_emission_rows;
};

InitialEstimate estimate_initial_params(const CountEstimates& counts, double smoothing = 0.0);

}  // namespace cropcast::estimation
