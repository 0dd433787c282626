#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cropcast/matrix.hpp"

namespace cropcast::hmm {

// Ordered, unique labels. Position is the canonical matrix index.
class LabelSet {
 public:
  LabelSet() = default;
  explicit LabelSet(std::vector<std::string> labels);

  std::size_t size() const noexcept { return labels_.size(); }
  const std::string& label(std::size_t index) const { return labels_.at(index); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::optional<std::size_t> index_of(const std::string& label) const;

  bool operator==(const LabelSet&) const = default;

 private:
  std::vector<std::string> labels_;
};

using StateSpace = LabelSet;
using ObservationAlphabet = LabelSet;

using ObservationSequence = std::vector<std::size_t>;
using StateSequence = std::vector<std::size_t>;

// lambda = (A, B, pi). B is stored one row per state, one column per symbol.
struct HmmParams {
  std::vector<double> pi;
  Matrix A;
  Matrix B;

  std::size_t num_states() const noexcept { return pi.size(); }
  std::size_t num_symbols() const noexcept { return B.cols(); }

  bool operator==(const HmmParams&) const = default;
};

inline constexpr double kStochasticTolerance = 1e-9;

// Returns one message per violated invariant, empty when the model is a
// proper HMM. Shape mismatches throw StructuralError instead.
std::vector<std::string> validate_params(const HmmParams& params,
                                         std::size_t num_states,
                                         std::size_t num_symbols,
                                         double tolerance = kStochasticTolerance);
std::vector<std::string> validate_params(const HmmParams& params,
                                         double tolerance = kStochasticTolerance);

// Throws ConfigError when an observation index is outside the alphabet or
// the sequence is empty.
void check_observations(const HmmParams& params, const ObservationSequence& obs);

// Exhaustive sum over every state path. Test oracle for small instances.
inline constexpr std::uint64_t kMaxBruteForcePaths = 10'000'000;
double likelihood_bruteforce(const HmmParams& params, const ObservationSequence& obs);

// Scaled forward trellis. Row t of alpha_hat is alpha_t normalised to sum to
// one and scales[t] is the reciprocal of that normaliser, so
// log P(obs) = -sum_t log(scales[t]).
//
// An observation impossible under the model leaves log_likelihood at -inf;
// rows from that step on are zero and their scales are +inf.
struct Trellis {
  Matrix alpha_hat;
  std::vector<double> scales;
  double log_likelihood = 0.0;

  bool impossible() const noexcept;
};

Trellis forward(const HmmParams& params, const ObservationSequence& obs);

// Scaled backward variables sharing the forward scales: the last row is all
// ones and sum_i alpha_hat[t][i] * beta_hat[t][i] == 1 for every t.
Matrix backward(const HmmParams& params, const ObservationSequence& obs,
                const Trellis& trellis);
Matrix backward(const HmmParams& params, const ObservationSequence& obs);

struct ViterbiPath {
  StateSequence states;
  double log_probability = 0.0;
};

// Log-space decode. Ties go to the lowest state index, so a trellis column
// that is entirely -inf yields state 0 at that step. Among equally likely
// paths this picks the smallest one read from the last step backwards.
ViterbiPath viterbi(const HmmParams& params, const ObservationSequence& obs);

struct Posteriors {
  Matrix gamma;             // T x N
  std::vector<Matrix> xi;   // T-1 slices of N x N
  double log_likelihood = 0.0;
};

// E-step. Throws NumericError when the observations are impossible.
Posteriors posteriors(const HmmParams& params, const ObservationSequence& obs);

struct BaumWelchOptions {
  std::size_t max_iterations = 1000;
  // Stop once |delta log-likelihood| falls below this; 0 runs to the cap.
  double tolerance = 1e-6;
  // Add-kappa pseudo-counts on every re-estimated numerator.
  double smoothing = 0.0;
  // The initial distribution is held fixed unless this is set.
  bool update_initial = false;
};

struct TrainingReport {
  HmmParams params;
  std::vector<double> log_likelihood_trace;
  std::size_t iterations = 0;
  bool converged = false;
  // States whose transition or emission row had no expected visits in some
  // iteration and therefore kept its previous value.
  std::vector<std::size_t> frozen_transition_rows;
  std::vector<std::size_t> frozen_emission_rows;

  double final_log_likelihood() const;
};

TrainingReport baum_welch(const HmmParams& init, const ObservationSequence& obs,
                          const BaumWelchOptions& options = {});

struct SteadyState {
  std::vector<double> distribution;
  std::size_t iterations = 0;
  double residual = 0.0;  // max_j |(sA)_j - s_j|
};

// Power iteration from the uniform vector. Throws NumericError naming the
// cap when successive iterates still differ after max_iterations.
SteadyState steady_state(const Matrix& A, double tolerance = 1e-12,
                         std::size_t max_iterations = 1'000'000);

// Solves s(A - I) = 0 with sum(s) = 1 by Gaussian elimination. Empty when
// the stationary distribution is not unique.
std::optional<std::vector<double>> steady_state_direct(const Matrix& A);

enum class ForecastMode { kArgmax, kSample };

struct ForecastStep {
  int year = 0;
  std::size_t state = 0;
  std::string state_label;
  std::size_t observation = 0;
  std::string observation_label;
};

struct ForecastResult {
  std::vector<ForecastStep> steps;
};

struct ForecastRequest {
  std::size_t last_state = 0;
  int last_year = 0;
  std::size_t horizon = 1;
  ForecastMode mode = ForecastMode::kArgmax;
  std::uint64_t seed = 0;
};

ForecastResult forecast(const HmmParams& params, const StateSpace& states,
                        const ObservationAlphabet& symbols,
                        const ForecastRequest& request);

// Fraction of positions where the two paths agree. Throws ConfigError on a
// length mismatch.
double match_fraction(const StateSequence& decoded, const StateSequence& reference);

}  // namespace cropcast::hmm
