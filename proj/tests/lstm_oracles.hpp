#pragma once

#include <algorithm>
#include <cmath>
#include <random>

#include "cropcast/lstm.hpp"

namespace cropcast::testing {

// Squared error of one window, evaluated through the public forward pass.
inline double window_loss(const lstm::LstmParams& params, const lstm::Window& window,
                          double target) {
  const double r = lstm::predict(params, window) - target;
  return r * r;
}

// Central difference (L(theta + h) - L(theta - h)) / 2h for every parameter.
inline std::vector<double> finite_difference_gradient(const lstm::LstmParams& params,
                                                      const lstm::Window& window,
                                                      double target, double h = 1e-5) {
  lstm::LstmParams probe = params;
  std::vector<double> grad(params.size());
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double original = probe.values()[k];
    probe.values()[k] = original + h;
    const double up = window_loss(probe, window, target);
    probe.values()[k] = original - h;
    const double down = window_loss(probe, window, target);
    probe.values()[k] = original;
    grad[k] = (up - down) / (2.0 * h);
  }
  return grad;
}

struct GradientCheckCase {
  lstm::LstmConfig config;
  lstm::LstmParams params;
  lstm::Window window;
  double target = 0.0;
};

// Small random configuration with non-trivial biases so every gate is
// away from its symmetric point.
inline GradientCheckCase random_gradient_case(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> hidden(1, 4), window(1, 3), input(1, 2),
      dense(0, 3);
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  GradientCheckCase c;
  c.config.hidden_size = hidden(rng);
  c.config.window_length = window(rng);
  c.config.input_size = input(rng);
  c.config.dense_size = dense(rng);
  c.config.seed = rng();
  c.params = lstm::init_params(c.config);
  for (double& v : c.params.values()) v += 0.3 * value(rng);
  for (std::size_t t = 0; t < c.config.window_length; ++t) {
    std::vector<double> x(c.config.input_size);
    for (double& v : x) v = value(rng);
    c.window.push_back(std::move(x));
  }
  c.target = 2.0 * value(rng);
  return c;
}

// Relative error with a floor on the denominator so gradients that are
// zero up to finite-difference noise do not dominate.
inline double gradient_relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / scale;
}

}  // namespace cropcast::testing
