#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "cropcast/error.hpp"
#include "cropcast/hmm.hpp"

using namespace cropcast;
using namespace cropcast::hmm;

namespace {

double stationarity_residual(const std::vector<double>& s, const Matrix& A) {
  double worst = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    double flow = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) flow += s[i] * A(i, j);
    worst = std::max(worst, std::abs(flow - s[j]));
  }
  return worst;
}

const StateSpace kTwo({"a", "b"});
const ObservationAlphabet kSymbols({"x", "y"});

}  // namespace

TEST_CASE("steady_state analytic cases") {
  const SteadyState half = steady_state(Matrix{{0.5, 0.5}, {0.5, 0.5}});
  CHECK(half.distribution[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(half.distribution[1] == doctest::Approx(0.5).epsilon(1e-12));

  const Matrix A{{0.9, 0.1}, {0.2, 0.8}};
  const SteadyState s = steady_state(A);
  CHECK(std::abs(s.distribution[0] - 2.0 / 3.0) <= 1e-10);
  CHECK(std::abs(s.distribution[1] - 1.0 / 3.0) <= 1e-10);
  CHECK(s.residual <= 1e-10);

  const auto direct = steady_state_direct(A);
  REQUIRE(direct.has_value());
  CHECK(std::abs((*direct)[0] - 2.0 / 3.0) <= 1e-14);
}

TEST_CASE("absorbing state collects all mass") {
  const Matrix A{{1.0, 0.0, 0.0}, {0.3, 0.7, 0.0}, {0.0, 0.4, 0.6}};
  const SteadyState s = steady_state(A);
  CHECK(s.distribution[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(s.distribution[2] == doctest::Approx(0.0));
  const auto direct = steady_state_direct(A);
  REQUIRE(direct.has_value());
  CHECK((*direct)[0] == doctest::Approx(1.0));
}

TEST_CASE("periodic chain does not converge") {
  const Matrix A{{0.0, 1.0, 0.0}, {0.5, 0.0, 0.5}, {0.0, 1.0, 0.0}};
  CHECK_THROWS_WITH_AS(steady_state(A, 1e-12, 5000), doctest::Contains("5000"), NumericError);
  const auto direct = steady_state_direct(A);
  REQUIRE(direct.has_value());
  CHECK((*direct)[1] == doctest::Approx(0.5));
}

TEST_CASE("reducible chain has no unique direct solution") {
  CHECK_FALSE(steady_state_direct(Matrix{{1.0, 0.0}, {0.0, 1.0}}).has_value());
}

TEST_CASE("stationarity holds for random chains") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + trial % 4;
    const HmmParams p = testing::random_model(rng, n, 1);
    const SteadyState s = steady_state(p.A);
    CHECK(stationarity_residual(s.distribution, p.A) <= 1e-10);
    CHECK(std::abs(sum(s.distribution) - 1.0) <= 1e-12);
    const auto direct = steady_state_direct(p.A);
    REQUIRE(direct.has_value());
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs((*direct)[i] - s.distribution[i]) <= 1e-9);
    }
  }
}

TEST_CASE("forecast argmax") {
  SUBCASE("single state") {
    HmmParams p;
    p.pi = {1.0};
    p.A = Matrix{{1.0}};
    p.B = Matrix{{0.2, 0.8}};
    const ForecastResult r =
        forecast(p, StateSpace({"only"}), kSymbols, {0, 2021, 4, ForecastMode::kArgmax, 0});
    REQUIRE(r.steps.size() == 4);
    for (std::size_t h = 0; h < 4; ++h) {
      CHECK(r.steps[h].state == 0);
      CHECK(r.steps[h].observation == 1);
      CHECK(r.steps[h].year == 2022 + static_cast<int>(h));
      CHECK(r.steps[h].observation_label == "y");
    }
  }
  SUBCASE("two-state example stays in its self loop") {
    const ForecastResult r = forecast(testing::two_state_example(), kTwo, kSymbols,
                                      {0, 2000, 3, ForecastMode::kArgmax, 0});
    for (const auto& step : r.steps) {
      CHECK(step.state == 0);
      CHECK(step.observation == 0);
    }
  }
  SUBCASE("preconditions") {
    const auto p = testing::two_state_example();
    CHECK_THROWS_AS(forecast(p, kTwo, kSymbols, {2, 2000, 3, ForecastMode::kArgmax, 0}),
                    ConfigError);
    CHECK_THROWS_AS(forecast(p, kTwo, kSymbols, {0, 2000, 0, ForecastMode::kArgmax, 0}),
                    ConfigError);
  }
}

TEST_CASE("forecast sampling is seeded") {
  const auto p = testing::two_state_example();
  const ForecastRequest request{1, 2000, 50, ForecastMode::kSample, 1234};
  const ForecastResult a = forecast(p, kTwo, kSymbols, request);
  const ForecastResult b = forecast(p, kTwo, kSymbols, request);
  REQUIRE(a.steps.size() == 50);
  bool any_switch = false;
  for (std::size_t h = 0; h < 50; ++h) {
    CHECK(a.steps[h].state == b.steps[h].state);
    CHECK(a.steps[h].observation == b.steps[h].observation);
    if (a.steps[h].state != a.steps[0].state) any_switch = true;
  }
  CHECK(any_switch);

  HmmParams deterministic = p;
  deterministic.A = Matrix{{0.0, 1.0}, {1.0, 0.0}};
  const ForecastResult flip = forecast(deterministic, kTwo, kSymbols,
                                       {0, 2000, 4, ForecastMode::kSample, 9});
  CHECK(flip.steps[0].state == 1);
  CHECK(flip.steps[1].state == 0);
}
