#include <algorithm>
#include <cmath>
#include <limits>

#include "cropcast/error.hpp"
#include "cropcast/hmm.hpp"

namespace cropcast::hmm {

namespace {

void flag_row(std::vector<std::size_t>& rows, std::size_t row) {
  if (std::find(rows.begin(), rows.end(), row) == rows.end()) rows.push_back(row);
}

// One M-step from the posteriors of `current`.
HmmParams reestimate(const HmmParams& current, const ObservationSequence& obs,
                     const Posteriors& post, const BaumWelchOptions& options,
                     TrainingReport& report) {
  const std::size_t n = current.num_states();
  const std::size_t m = current.num_symbols();
  const std::size_t length = obs.size();
  const double kappa = options.smoothing;

  HmmParams next = current;

  for (std::size_t i = 0; i < n; ++i) {
    double visits = 0.0;
    std::vector<double> flow(n, 0.0);
    for (std::size_t t = 0; t + 1 < length; ++t) {
      for (std::size_t j = 0; j < n; ++j) flow[j] += post.xi[t](i, j);
      visits += post.gamma(t, i);
    }
    const double denominator = visits + kappa * static_cast<double>(n);
    if (!(denominator > 0.0)) {
      flag_row(report.frozen_transition_rows, i);
      continue;
    }
    for (std::size_t j = 0; j < n; ++j) next.A(i, j) = (flow[j] + kappa) / denominator;
  }

  for (std::size_t i = 0; i < n; ++i) {
    double visits = 0.0;
    std::vector<double> emitted(m, 0.0);
    for (std::size_t t = 0; t < length; ++t) {
      emitted[obs[t]] += post.gamma(t, i);
      visits += post.gamma(t, i);
    }
    const double denominator = visits + kappa * static_cast<double>(m);
    if (!(denominator > 0.0)) {
      flag_row(report.frozen_emission_rows, i);
      continue;
    }
    for (std::size_t k = 0; k < m; ++k) next.B(i, k) = (emitted[k] + kappa) / denominator;
  }

  if (options.update_initial) {
    for (std::size_t i = 0; i < n; ++i) next.pi[i] = post.gamma(0, i);
  }
  return next;
}

}  // namespace

double TrainingReport::final_log_likelihood() const {
  return log_likelihood_trace.empty() ? -std::numeric_limits<double>::infinity()
                                      : log_likelihood_trace.back();
}

TrainingReport baum_welch(const HmmParams& init, const ObservationSequence& obs,
                          const BaumWelchOptions& options) {
  if (options.max_iterations < 1) throw ConfigError("max_iterations must be at least 1");
  if (!(options.tolerance >= 0.0)) throw ConfigError("tolerance must be non-negative");
  if (!(options.smoothing >= 0.0)) throw ConfigError("smoothing must be non-negative");
  if (const auto problems = validate_params(init); !problems.empty()) {
    throw ConfigError("initial model is not stochastic: " + problems.front());
  }
  check_observations(init, obs);

  TrainingReport report;
  report.params = init;

  if (forward(init, obs).impossible()) {
    report.log_likelihood_trace.push_back(-std::numeric_limits<double>::infinity());
    return report;
  }

  Posteriors post = posteriors(report.params, obs);
  report.log_likelihood_trace.push_back(post.log_likelihood);

  for (std::size_t iteration = 1; iteration <= options.max_iterations; ++iteration) {
    HmmParams next = reestimate(report.params, obs, post, options, report);
    Posteriors next_post = posteriors(next, obs);
    const double delta = next_post.log_likelihood - post.log_likelihood;

    report.params = std::move(next);
    post = std::move(next_post);
    report.log_likelihood_trace.push_back(post.log_likelihood);
    report.iterations = iteration;
    if (std::abs(delta) < options.tolerance) {
      report.converged = true;
      break;
    }
  }
  std::sort(report.frozen_transition_rows.begin(), report.frozen_transition_rows.end());
  std::sort(report.frozen_emission_rows.begin(), report.frozen_emission_rows.end());
  return report;
}

}  // namespace cropcast::hmm
