#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "cropcast/error.hpp"
#include "cropcast/hmm.hpp"

using namespace cropcast;
using namespace cropcast::hmm;
using cropcast::testing::two_state_example;

namespace {

HmmParams single_state() {
  HmmParams p;
  p.pi = {1.0};
  p.A = Matrix{{1.0}};
  p.B = Matrix{{0.5, 0.5}};
  return p;
}

HmmParams uniform_model(std::size_t n, std::size_t m) {
  HmmParams p;
  p.pi.assign(n, 1.0 / n);
  p.A = Matrix(n, n, 1.0 / n);
  p.B = Matrix(n, m, 1.0 / m);
  return p;
}

}  // namespace

TEST_CASE("label sets reject duplicates and empties") {
  CHECK_THROWS_AS(LabelSet(std::vector<std::string>{}), ConfigError);
  CHECK_THROWS_AS(LabelSet({"LL", "LL"}), ConfigError);
  LabelSet s({"LL", "LH"});
  CHECK(s.index_of("LH") == 1u);
  CHECK_FALSE(s.index_of("HH").has_value());
}

TEST_CASE("validate_params") {
  SUBCASE("symmetric model is clean") {
    HmmParams p = uniform_model(2, 2);
    CHECK(validate_params(p).empty());
  }
  SUBCASE("shape mismatch is structural") {
    HmmParams p = uniform_model(2, 3);
    CHECK_THROWS_AS(validate_params(p, 3, 3), StructuralError);
    p.A = Matrix(2, 3, 1.0 / 3);
    CHECK_THROWS_AS(validate_params(p), StructuralError);
  }
  SUBCASE("names the offending row") {
    HmmParams p = uniform_model(4, 3);
    p.B(1, 0) = 0.0;
    p.B(1, 1) = 1.0;
    p.B(1, 2) = 0.7809;
    const auto report = validate_params(p);
    REQUIRE(report.size() == 1);
    CHECK(report[0] == "B row 2 sums to 1.7809");
  }
  SUBCASE("out of range entries") {
    HmmParams p = uniform_model(2, 2);
    p.A(0, 0) = 1.5;
    p.A(0, 1) = -0.5;
    const auto report = validate_params(p);
    CHECK(report.size() == 2);
  }
}

TEST_CASE("brute-force likelihood") {
  CHECK(likelihood_bruteforce(single_state(), {0, 0, 0}) == doctest::Approx(0.125));
  CHECK(likelihood_bruteforce(two_state_example(), {0, 1}) ==
        doctest::Approx(0.0945 + 0.0315 + 0.0030 + 0.0360).epsilon(1e-14));

  HmmParams impossible = two_state_example();
  impossible.B = Matrix{{1.0, 0.0}, {1.0, 0.0}};
  CHECK(likelihood_bruteforce(impossible, {0, 1, 0}) == 0.0);

  std::vector<std::size_t> too_long(24, 0);
  CHECK_THROWS_AS(likelihood_bruteforce(two_state_example(), too_long), ConfigError);
}

TEST_CASE("forward") {
  SUBCASE("two-state example") {
    const Trellis tr = forward(two_state_example(), {0, 1});
    CHECK(tr.log_likelihood == doctest::Approx(std::log(0.165)).epsilon(1e-12));
    CHECK(tr.log_likelihood == doctest::Approx(-1.8018).epsilon(1e-4));
  }
  SUBCASE("single state") {
    const Trellis tr = forward(single_state(), {0, 0, 0});
    CHECK(tr.log_likelihood == doctest::Approx(3.0 * std::log(0.5)));
  }
  SUBCASE("rows normalised and scale identity") {
    std::mt19937_64 rng(7);
    const HmmParams p = testing::random_model(rng, 3, 3);
    const auto obs = testing::random_observations(rng, 3, 40);
    const Trellis tr = forward(p, obs);
    double from_scales = 0.0;
    for (std::size_t t = 0; t < obs.size(); ++t) {
      CHECK(sum(tr.alpha_hat.row(t)) == doctest::Approx(1.0).epsilon(1e-12));
      from_scales -= std::log(tr.scales[t]);
    }
    CHECK(tr.log_likelihood == doctest::Approx(from_scales).epsilon(1e-12));
  }
  SUBCASE("impossible observation gives -inf, not a crash") {
    HmmParams p = two_state_example();
    p.B = Matrix{{1.0, 0.0}, {1.0, 0.0}};
    const Trellis tr = forward(p, {0, 1, 0});
    CHECK(tr.impossible());
    CHECK(std::isinf(tr.log_likelihood));
    CHECK(tr.log_likelihood < 0);
  }
  SUBCASE("rejects symbols outside the alphabet") {
    CHECK_THROWS_AS(forward(two_state_example(), {0, 2}), ConfigError);
    CHECK_THROWS_AS(forward(two_state_example(), {}), ConfigError);
  }
  SUBCASE("long sequences do not underflow") {
    std::mt19937_64 rng(3);
    const HmmParams p = testing::random_model(rng, 3, 3);
    const auto obs = testing::random_observations(rng, 3, 5000);
    const Trellis tr = forward(p, obs);
    CHECK(std::isfinite(tr.log_likelihood));
    CHECK(tr.log_likelihood < -1000.0);
  }
}

TEST_CASE("backward") {
  SUBCASE("last row is all ones") {
    const Matrix beta = backward(two_state_example(), {0, 1, 1});
    CHECK(beta(2, 0) == 1.0);
    CHECK(beta(2, 1) == 1.0);
  }
  SUBCASE("unscaled products equal the likelihood at every t") {
    const HmmParams p = two_state_example();
    const Matrix alpha = testing::raw_alpha(p, {0, 1});
    const Matrix beta = testing::raw_beta(p, {0, 1});
    for (std::size_t t = 0; t < 2; ++t) {
      const double total = alpha(t, 0) * beta(t, 0) + alpha(t, 1) * beta(t, 1);
      CHECK(total == doctest::Approx(0.165).epsilon(1e-14));
    }
    CHECK(beta(0, 0) == doctest::Approx(0.9 * 0.3 + 0.1 * 0.9));
  }
  SUBCASE("scaled products are constant in t") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
      const HmmParams p = testing::random_model(rng, 3, 2);
      const auto obs = testing::random_observations(rng, 2, 30);
      const Trellis tr = forward(p, obs);
      const Matrix beta = backward(p, obs, tr);
      for (std::size_t t = 0; t < obs.size(); ++t) {
        double total = 0.0;
        for (std::size_t i = 0; i < 3; ++i) total += tr.alpha_hat(t, i) * beta(t, i);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
      }
    }
  }
  SUBCASE("uniform model: identical across states") {
    const HmmParams p = uniform_model(3, 2);
    const Matrix beta = backward(p, {0, 1, 1, 0});
    for (std::size_t t = 0; t < 4; ++t) {
      CHECK(beta(t, 0) == beta(t, 1));
      CHECK(beta(t, 1) == beta(t, 2));
    }
  }
}

TEST_CASE("viterbi") {
  SUBCASE("two-state example") {
    const ViterbiPath v = viterbi(two_state_example(), {0, 1});
    CHECK(v.states == StateSequence{0, 0});
    CHECK(std::exp(v.log_probability) == doctest::Approx(0.0945).epsilon(1e-12));
  }
  SUBCASE("deterministic model recovers its generating path") {
    HmmParams p;
    p.pi = {0.0, 1.0, 0.0};
    p.A = Matrix{{0, 0, 1}, {1, 0, 0}, {0, 1, 0}};
    p.B = Matrix{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    const ViterbiPath v = viterbi(p, {1, 0, 2, 1, 0});
    CHECK(v.states == StateSequence{1, 0, 2, 1, 0});
    CHECK(v.log_probability == 0.0);
  }
  SUBCASE("ties go to the lowest index") {
    const ViterbiPath v = viterbi(uniform_model(3, 2), {0, 1, 0});
    CHECK(v.states == StateSequence{0, 0, 0});
  }
  SUBCASE("impossible sequence yields -inf with the all-zero path") {
    HmmParams p = two_state_example();
    p.B = Matrix{{1.0, 0.0}, {1.0, 0.0}};
    const ViterbiPath v = viterbi(p, {0, 1});
    CHECK(std::isinf(v.log_probability));
    CHECK(v.states == StateSequence{0, 0});
  }
  SUBCASE("matches exhaustive search") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t n = 1 + trial % 3;
      const HmmParams p = testing::random_model(rng, n, 3);
      const auto obs = testing::random_observations(rng, 3, 1 + trial % 7);
      const auto best = testing::exhaustive_viterbi(p, obs);
      const ViterbiPath v = viterbi(p, obs);
      CHECK(v.states == best.path);
      CHECK(testing::relative_error(std::exp(v.log_probability), best.probability) <= 1e-12);
    }
  }
}

TEST_CASE("posteriors") {
  SUBCASE("single state") {
    const Posteriors post = posteriors(single_state(), {0, 1, 0});
    for (std::size_t t = 0; t < 3; ++t) CHECK(post.gamma(t, 0) == doctest::Approx(1.0));
    for (const auto& slice : post.xi) CHECK(slice(0, 0) == doctest::Approx(1.0));
  }
  SUBCASE("two-state hand value") {
    const Posteriors post = posteriors(two_state_example(), {0, 1});
    // Paths starting in state 0 carry 0.0945 + 0.0315 of the 0.165 total.
    CHECK(post.gamma(0, 0) == doctest::Approx((0.0945 + 0.0315) / 0.165).epsilon(1e-12));
    CHECK(post.gamma(0, 0) == doctest::Approx(0.35 * 0.36 / 0.165).epsilon(1e-12));
  }
  SUBCASE("normalisation and gamma = sum_j xi") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 30; ++trial) {
      const HmmParams p = testing::random_model(rng, 4, 3);
      const auto obs = testing::random_observations(rng, 3, 25);
      const Posteriors post = posteriors(p, obs);
      for (std::size_t t = 0; t < obs.size(); ++t) {
        CHECK(std::abs(sum(post.gamma.row(t)) - 1.0) <= 1e-9);
      }
      for (std::size_t t = 0; t + 1 < obs.size(); ++t) {
        CHECK(std::abs(sum(post.xi[t].data()) - 1.0) <= 1e-9);
        for (std::size_t i = 0; i < 4; ++i) {
          CHECK(std::abs(post.gamma(t, i) - sum(post.xi[t].row(i))) <= 1e-9);
        }
      }
    }
  }
  SUBCASE("impossible observations propagate") {
    HmmParams p = two_state_example();
    p.B = Matrix{{1.0, 0.0}, {1.0, 0.0}};
    CHECK_THROWS_AS(posteriors(p, {0, 1}), NumericError);
  }
}

TEST_CASE("match_fraction") {
  CHECK(match_fraction({0, 1, 2}, {0, 1, 2}) == 1.0);
  CHECK(match_fraction({0, 0, 0}, {1, 1, 1}) == 0.0);
  CHECK(match_fraction({0, 1, 0, 1}, {0, 0, 0, 0}) == 0.5);
  CHECK_THROWS_AS(match_fraction({0, 1}, {0, 1, 2}), ConfigError);
}
