#include <algorithm>

#include "doctest.h"
#include "oracles.hpp"
#include "cropcast/estimation.hpp"
#include "cropcast/published.hpp"

using namespace cropcast;

namespace {

estimation::DiscretizedSeries fixture_series() {
  estimation::DiscretizedSeries s;
  for (std::size_t t = 0; t < testing::kFixtureStates.size(); ++t) {
    s.years.push_back(1990 + static_cast<int>(t));
  }
  s.states = testing::kFixtureStates;
  s.observations = testing::kFixtureObservations;
  return s;
}

bool mentions(const published::DiagnosticLog& log, const std::string& topic,
              const std::string& text) {
  return std::any_of(log.begin(), log.end(), [&](const published::Diagnostic& d) {
    return d.topic == topic && d.message.find(text) != std::string::npos;
  });
}

}  // namespace

TEST_CASE("printed reference figures are internally sized") {
  CHECK(published::decoded_states().size() == 30);
  CHECK(published::count_transitions().rows() == 4);
  CHECK(published::trained_emissions().cols() == 3);
  CHECK(published::metrics_table().size() == 2);
  CHECK(published::lstm_run().epochs == 200);
}

TEST_CASE("compare_matrix reports only cells outside rounding") {
  const Matrix ours = {{0.30004, 0.69996}, {0.5, 0.5}};
  const Matrix printed = {{0.3000, 0.7000}, {0.4, 0.6}};
  const auto log = published::compare_matrix("x", ours, printed, {"a", "b"}, {"c", "d"});
  REQUIRE(log.size() == 2);
  CHECK(log[0].message == "b,c: computed 0.5000 vs printed 0.4000");
  CHECK(published::compare_matrix("x", ours, Matrix(1, 2), {}, {}).size() == 1);
}

TEST_CASE("column_permutation") {
  const Matrix ours = {{1, 2, 3}, {4, 5, 6}};
  const Matrix printed = {{3, 1, 2}, {6, 4, 5}};
  const auto perm = published::column_permutation(ours, printed, 0.0);
  REQUIRE(perm.has_value());
  CHECK(*perm == std::vector<std::size_t>{2, 0, 1});
  CHECK_FALSE(published::column_permutation(ours, ours, 0.0).has_value());
  CHECK_FALSE(published::column_permutation(ours, Matrix{{9, 9, 9}, {9, 9, 9}}, 0.0));
}

TEST_CASE("count diagnostics on the fixture") {
  const auto series = fixture_series();
  const auto counts = estimation::count_estimates(series);
  const auto params = estimation::estimate_initial_params(counts).params;
  const auto log = published::count_diagnostics(counts, params);

  // pi and A agree with the printed figures, so nothing is reported for them.
  CHECK_FALSE(std::any_of(log.begin(), log.end(), [](const auto& d) {
    return d.topic == "count pi" || d.topic == "count A";
  }));
  CHECK(mentions(log, "emission counts", "LL,L: computed 1.0000 vs printed 2.0000"));
  CHECK(mentions(log, "emission counts", "hold our H L M columns"));
  CHECK(mentions(log, "count B", "hold our H L M columns"));
}

TEST_CASE("printed trained model fails validation") {
  const auto series = fixture_series();
  const auto counts = estimation::count_estimates(series);
  const auto params = estimation::estimate_initial_params(counts).params;
  const auto log = published::trained_diagnostics(params);
  CHECK(mentions(log, "printed trained model", "B row 2 sums to 1.7809"));
}

TEST_CASE("decode diagnostics note the length gap") {
  const auto log = published::decode_diagnostics(testing::kFixtureStates, testing::kFixtureStates);
  CHECK(mentions(log, "decode", "printed decode has 30 entries but the series has 32"));
  CHECK(mentions(log, "decode", "computed match fraction 1.0000 vs printed 0.3125"));
}

TEST_CASE("steady state diagnostics") {
  const auto log = published::steady_state_diagnostics({0.7738, 0.1310, 0.0952, 0.0},
                                                       {1.0, 0.0, 0.0, 0.0});
  CHECK(mentions(log, "steady state (count A)", "matches printed steady state"));
  CHECK(mentions(log, "steady state (trained A)", "vs printed [0.7738"));
  CHECK(mentions(log, "steady state (printed trained A)", "[1.0000, 0.0000, 0.0000, 0.0000]"));
}

TEST_CASE("forecast diagnostics count agreeing steps") {
  hmm::ForecastResult result;
  result.steps = {{2022, 1, "LH", 2, "H"}, {2023, 3, "HH", 2, "H"}};
  const auto log = published::forecast_diagnostics(result);
  CHECK(mentions(log, "forecast", "1 of 2 steps agree"));
  CHECK(mentions(log, "forecast", "2023: computed HH/H vs printed LH/H"));
}

TEST_CASE("metrics table rounding consistency") {
  CHECK(published::rmse_mse_consistent(0.37, 0.13));
  CHECK_FALSE(published::rmse_mse_consistent(1.21, 0.87));
  CHECK(published::rmse_mse_consistent(1.21, 1.46));
  const auto log = published::metrics_table_diagnostics();
  CHECK(mentions(log, "metrics table HMM", "consistent within rounding"));
  CHECK(mentions(log, "metrics table LSTM", "inconsistent"));
}
