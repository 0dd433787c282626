#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "cropcast/error.hpp"
#include "cropcast/hmm.hpp"

namespace cropcast::hmm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string format_number(double value) {
  std::ostringstream out;
  out.precision(6);
  out << value;
  return out.str();
}

void check_probability_row(std::span<const double> row, const std::string& name,
                           double tolerance, std::vector<std::string>& report) {
  for (std::size_t k = 0; k < row.size(); ++k) {
    if (!(row[k] >= 0.0 && row[k] <= 1.0)) {
      report.push_back(name + " entry " + std::to_string(k + 1) + " = " +
                       format_number(row[k]) + " is outside [0, 1]");
    }
  }
  const double total = sum(row);
  if (!(std::abs(total - 1.0) <= tolerance)) {
    report.push_back(name + " sums to " + format_number(total));
  }
}

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

}  // namespace

LabelSet::LabelSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) throw ConfigError("label set must not be empty");
  std::set<std::string> seen;
  for (const auto& label : labels_) {
    if (!seen.insert(label).second) throw ConfigError("duplicate label '" + label + "'");
  }
}

std::optional<std::size_t> LabelSet::index_of(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels_.begin());
}

std::vector<std::string> validate_params(const HmmParams& params,
                                         std::size_t num_states,
                                         std::size_t num_symbols, double tolerance) {
  if (num_states == 0 || num_symbols == 0) {
    throw StructuralError("state and symbol counts must be positive");
  }
  if (params.pi.size() != num_states) {
    throw StructuralError("pi has length " + std::to_string(params.pi.size()) +
                          ", expected " + std::to_string(num_states));
  }
  if (params.A.rows() != num_states || params.A.cols() != num_states) {
    throw StructuralError("A is " + std::to_string(params.A.rows()) + "x" +
                          std::to_string(params.A.cols()) + ", expected " +
                          std::to_string(num_states) + "x" + std::to_string(num_states));
  }
  if (params.B.rows() != num_states || params.B.cols() != num_symbols) {
    throw StructuralError("B is " + std::to_string(params.B.rows()) + "x" +
                          std::to_string(params.B.cols()) + ", expected " +
                          std::to_string(num_states) + "x" + std::to_string(num_symbols));
  }

  std::vector<std::string> report;
  check_probability_row(params.pi, "pi", tolerance, report);
  for (std::size_t i = 0; i < num_states; ++i) {
    check_probability_row(params.A.row(i), "A row " + std::to_string(i + 1), tolerance,
                          report);
  }
  for (std::size_t i = 0; i < num_states; ++i) {
    check_probability_row(params.B.row(i), "B row " + std::to_string(i + 1), tolerance,
                          report);
  }
  return report;
}

std::vector<std::string> validate_params(const HmmParams& params, double tolerance) {
  return validate_params(params, params.pi.size(), params.B.cols(), tolerance);
}

void check_observations(const HmmParams& params, const ObservationSequence& obs) {
  if (obs.empty()) throw ConfigError("observation sequence is empty");
  for (std::size_t t = 0; t < obs.size(); ++t) {
    if (obs[t] >= params.num_symbols()) {
      throw ConfigError("observation " + std::to_string(t) + " has symbol index " +
                        std::to_string(obs[t]) + " outside alphabet of size " +
                        std::to_string(params.num_symbols()));
    }
  }
}

double likelihood_bruteforce(const HmmParams& params, const ObservationSequence& obs) {
  check_observations(params, obs);
  const std::size_t n = params.num_states();
  const std::size_t length = obs.size();

  std::uint64_t paths = 1;
  for (std::size_t t = 0; t < length; ++t) {
    if (paths > kMaxBruteForcePaths / n) {
      throw ConfigError("brute-force likelihood refuses " + std::to_string(n) + "^" +
                        std::to_string(length) + " paths (limit " +
                        std::to_string(kMaxBruteForcePaths) + ")");
    }
    paths *= n;
  }

  std::vector<std::size_t> path(length, 0);
  double total = 0.0;
  for (std::uint64_t p = 0; p < paths; ++p) {
    double joint = params.pi[path[0]] * params.B(path[0], obs[0]);
    for (std::size_t t = 1; t < length && joint > 0.0; ++t) {
      joint *= params.A(path[t - 1], path[t]) * params.B(path[t], obs[t]);
    }
    total += joint;
    for (std::size_t t = length; t-- > 0;) {
      if (++path[t] < n) break;
      path[t] = 0;
    }
  }
  return total;
}

bool Trellis::impossible() const noexcept {
  return log_likelihood == kNegInf;
}

Trellis forward(const HmmParams& params, const ObservationSequence& obs) {
  check_observations(params, obs);
  const std::size_t n = params.num_states();
  const std::size_t length = obs.size();

  Trellis trellis;
  trellis.alpha_hat = Matrix(length, n);
  trellis.scales.assign(length, std::numeric_limits<double>::infinity());
  trellis.log_likelihood = 0.0;

  std::vector<double> next(n);
  for (std::size_t t = 0; t < length; ++t) {
    for (std::size_t j = 0; j < n; ++j) {
      double incoming = 0.0;
      if (t == 0) {
        incoming = params.pi[j];
      } else {
        for (std::size_t i = 0; i < n; ++i) {
          incoming += trellis.alpha_hat(t - 1, i) * params.A(i, j);
        }
      }
      next[j] = incoming * params.B(j, obs[t]);
    }
    const double normaliser = sum(next);
    if (!(normaliser > 0.0)) {
      trellis.log_likelihood = kNegInf;
      return trellis;
    }
    for (std::size_t j = 0; j < n; ++j) trellis.alpha_hat(t, j) = next[j] / normaliser;
    trellis.scales[t] = 1.0 / normaliser;
    trellis.log_likelihood += std::log(normaliser);
  }
  return trellis;
}

Matrix backward(const HmmParams& params, const ObservationSequence& obs,
                const Trellis& trellis) {
  check_observations(params, obs);
  const std::size_t n = params.num_states();
  const std::size_t length = obs.size();
  if (trellis.scales.size() != length || trellis.alpha_hat.cols() != n) {
    throw StructuralError("trellis does not match the observation sequence");
  }

  Matrix beta(length, n, 0.0);
  if (trellis.impossible()) return beta;
  for (std::size_t i = 0; i < n; ++i) beta(length - 1, i) = 1.0;
  for (std::size_t t = length - 1; t-- > 0;) {
    const std::size_t symbol = obs[t + 1];
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        acc += params.A(i, j) * params.B(j, symbol) * beta(t + 1, j);
      }
      beta(t, i) = acc * trellis.scales[t + 1];
    }
  }
  return beta;
}

Matrix backward(const HmmParams& params, const ObservationSequence& obs) {
  return backward(params, obs, forward(params, obs));
}

ViterbiPath viterbi(const HmmParams& params, const ObservationSequence& obs) {
  check_observations(params, obs);
  const std::size_t n = params.num_states();
  const std::size_t length = obs.size();

  Matrix score(length, n, kNegInf);
  std::vector<std::size_t> back(length * n, 0);

  for (std::size_t i = 0; i < n; ++i) {
    score(0, i) = safe_log(params.pi[i]) + safe_log(params.B(i, obs[0]));
  }
  for (std::size_t t = 1; t < length; ++t) {
    for (std::size_t j = 0; j < n; ++j) {
      double best = kNegInf;
      std::size_t best_from = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double candidate = score(t - 1, i) + safe_log(params.A(i, j));
        if (candidate > best) {
          best = candidate;
          best_from = i;
        }
      }
      score(t, j) = best + safe_log(params.B(j, obs[t]));
      back[t * n + j] = best_from;
    }
  }

  ViterbiPath path;
  path.states.assign(length, 0);
  std::size_t last = argmax(score.row(length - 1));
  path.log_probability = score(length - 1, last);
  path.states[length - 1] = last;
  for (std::size_t t = length - 1; t > 0; --t) {
    last = back[t * n + last];
    path.states[t - 1] = last;
  }
  return path;
}

Posteriors posteriors(const HmmParams& params, const ObservationSequence& obs) {
  const Trellis trellis = forward(params, obs);
  if (trellis.impossible()) {
    throw NumericError("observation sequence has zero probability under the model");
  }
  const Matrix beta = backward(params, obs, trellis);
  const std::size_t n = params.num_states();
  const std::size_t length = obs.size();

  Posteriors post;
  post.log_likelihood = trellis.log_likelihood;
  post.gamma = Matrix(length, n);
  post.xi.assign(length - 1, Matrix(n, n));

  for (std::size_t t = 0; t + 1 < length; ++t) {
    Matrix& slice = post.xi[t];
    const std::size_t symbol = obs[t + 1];
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        slice(i, j) = trellis.alpha_hat(t, i) * params.A(i, j) * params.B(j, symbol) *
                      beta(t + 1, j);
        total += slice(i, j);
      }
    }
    for (double& v : slice.data()) v /= total;
    for (std::size_t i = 0; i < n; ++i) post.gamma(t, i) = sum(slice.row(i));
  }

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    post.gamma(length - 1, i) = trellis.alpha_hat(length - 1, i) * beta(length - 1, i);
    total += post.gamma(length - 1, i);
  }
  for (double& v : post.gamma.row(length - 1)) v /= total;
  return post;
}

double match_fraction(const StateSequence& decoded, const StateSequence& reference) {
  if (decoded.size() != reference.size()) {
    throw ConfigError("cannot compare state sequences of length " +
                      std::to_string(decoded.size()) + " and " +
                      std::to_string(reference.size()));
  }
  if (decoded.empty()) throw ConfigError("cannot compare empty state sequences");
  std::size_t agree = 0;
  for (std::size_t t = 0; t < decoded.size(); ++t) {
    if (decoded[t] == reference[t]) ++agree;
  }
  return static_cast<double>(agree) / static_cast<double>(decoded.size());
}

}  // namespace cropcast::hmm
