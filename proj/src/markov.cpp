#include <cmath>
#include <random>

#include "cropcast/error.hpp"
#include "cropcast/hmm.hpp"

namespace cropcast::hmm {

namespace {

void check_square(const Matrix& A) {
  if (A.rows() == 0 || A.rows() != A.cols()) {
    throw StructuralError("transition matrix must be square and non-empty");
  }
}

std::vector<double> step(const std::vector<double>& s, const Matrix& A) {
  std::vector<double> next(s.size(), 0.0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) next[j] += s[i] * A(i, j);
  }
  return next;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

// Inverse-CDF draw from a probability row. The uniform variate is built
// from the top 53 bits of the engine so results do not depend on the
// standard library's distribution implementations.
std::size_t draw(std::span<const double> row, std::mt19937_64& rng) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < row.size(); ++k) {
    if (row[k] <= 0.0) continue;
    last_positive = k;
    cumulative += row[k];
    if (u < cumulative) return k;
  }
  return last_positive;
}

}  // namespace

SteadyState steady_state(const Matrix& A, double tolerance, std::size_t max_iterations) {
  check_square(A);
  const std::size_t n = A.rows();
  std::vector<double> s(n, 1.0 / static_cast<double>(n));

  for (std::size_t iteration = 1; iteration <= max_iterations; ++iteration) {
    std::vector<double> next = step(s, A);
    const double total = sum(next);
    for (double& v : next) v /= total;
    const double change = max_abs_diff(next, s);
    s = std::move(next);
    if (change < tolerance) {
      SteadyState result;
      result.residual = max_abs_diff(step(s, A), s);
      result.distribution = std::move(s);
      result.iterations = iteration;
      return result;
    }
  }
  throw NumericError("steady state did not converge within " +
                     std::to_string(max_iterations) +
                     " power iterations (periodic chain?)");
}

std::optional<std::vector<double>> steady_state_direct(const Matrix& A) {
  check_square(A);
  const std::size_t n = A.rows();
  // Rows of (A^T - I), last equation replaced by sum(s) = 1.
  Matrix system(n, n + 1, 0.0);
  for (std::size_t r = 0; r + 1 < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) system(r, c) = A(c, r) - (r == c ? 1.0 : 0.0);
  }
  for (std::size_t c = 0; c < n; ++c) system(n - 1, c) = 1.0;
  system(n - 1, n) = 1.0;

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(system(r, col)) > std::abs(system(pivot, col))) pivot = r;
    }
    if (std::abs(system(pivot, col)) < 1e-12) return std::nullopt;
    if (pivot != col) {
      for (std::size_t c = 0; c <= n; ++c) std::swap(system(pivot, c), system(col, c));
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double factor = system(r, col) / system(col, col);
      if (factor == 0.0) continue;
      for (std::size_t c = col; c <= n; ++c) system(r, c) -= factor * system(col, c);
    }
  }
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = system(i, n) / system(i, i);
  return s;
}

ForecastResult forecast(const HmmParams& params, const StateSpace& states,
                        const ObservationAlphabet& symbols,
                        const ForecastRequest& request) {
  validate_params(params, states.size(), symbols.size());
  if (request.horizon < 1) throw ConfigError("forecast horizon must be at least 1");
  if (request.last_state >= params.num_states()) {
    throw ConfigError("last state index " + std::to_string(request.last_state) +
                      " is outside the state space");
  }

  std::mt19937_64 rng(request.seed);
  ForecastResult result;
  std::size_t state = request.last_state;
  for (std::size_t h = 1; h <= request.horizon; ++h) {
    ForecastStep item;
    if (request.mode == ForecastMode::kArgmax) {
      state = argmax(params.A.row(state));
      item.observation = argmax(params.B.row(state));
    } else {
      state = draw(params.A.row(state), rng);
      item.observation = draw(params.B.row(state), rng);
    }
    item.year = request.last_year + static_cast<int>(h);
    item.state = state;
    item.state_label = states.label(state);
    item.observation_label = symbols.label(item.observation);
    result.steps.push_back(std::move(item));
  }
  return result;
}

}  // namespace cropcast::hmm
