#include "cropcast/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "cropcast/error.hpp"

namespace cropcast::lstm {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Uniform draw on [-limit, limit) from the top 53 bits of the engine.
double uniform(std::mt19937_64& rng, double limit) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return (2.0 * u - 1.0) * limit;
}

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw NumericError(std::string("non-finite ") + what);
  }
}

}  // namespace

void LstmConfig::validate() const {
  if (hidden_size < 1) throw ConfigError("hidden size must be at least 1");
  if (input_size < 1) throw ConfigError("input size must be at least 1");
  if (window_length < 1) throw ConfigError("window length must be at least 1");
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw ConfigError("ADAM betas must lie in [0, 1)");
  }
  if (!(adam_epsilon > 0.0)) throw ConfigError("ADAM epsilon must be positive");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train fraction must lie strictly between 0 and 1");
  }
}

LstmParams::LstmParams(std::size_t hidden_size, std::size_t input_size,
                       std::size_t dense_size)
    : hidden_(hidden_size), input_(input_size), dense_(dense_size) {
  r_offset_ = kNumGates * hidden_ * input_;
  b_offset_ = r_offset_ + kNumGates * hidden_ * hidden_;
  dense_w_offset_ = b_offset_ + kNumGates * hidden_;
  dense_b_offset_ = dense_w_offset_ + dense_ * hidden_;
  head_w_offset_ = dense_b_offset_ + dense_;
  values_.assign(head_w_offset_ + head_size() + 1, 0.0);
}

LstmParams init_params(const LstmConfig& config) {
  config.validate();
  LstmParams params(config.hidden_size, config.input_size, config.dense_size);
  std::mt19937_64 rng(config.seed);
  const double limit = 1.0 / std::sqrt(static_cast<double>(config.hidden_size));

  const std::size_t h = config.hidden_size;
  for (std::size_t gate = 0; gate < kNumGates; ++gate) {
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t c = 0; c < config.input_size; ++c) params.W(gate, r, c) = uniform(rng, limit);
      for (std::size_t c = 0; c < h; ++c) params.R(gate, r, c) = uniform(rng, limit);
      params.b(gate, r) = gate == kForgetGate ? 1.0 : 0.0;
    }
  }
  for (std::size_t r = 0; r < config.dense_size; ++r) {
    for (std::size_t c = 0; c < h; ++c) params.dense_W(r, c) = uniform(rng, limit);
  }
  for (std::size_t k = 0; k < params.head_size(); ++k) params.output_weight(k) = uniform(rng, limit);
  return params;
}

StepResult cell_step(const LstmParams& params, const LstmState& state,
                     std::span<const double> x) {
  const std::size_t h = params.hidden_size();
  if (x.size() != params.input_size()) {
    throw ConfigError("input has width " + std::to_string(x.size()) + ", expected " +
                      std::to_string(params.input_size()));
  }
  if (state.C.size() != h || state.H.size() != h) {
    throw ConfigError("state width does not match hidden size");
  }
  require_finite(x, "LSTM input");

  StepResult out;
  auto& gates = out.gates;
  gates.i.resize(h);
  gates.f.resize(h);
  gates.g.resize(h);
  gates.o.resize(h);
  out.state.C.resize(h);
  out.state.H.resize(h);

  std::vector<double>* blocks[kNumGates] = {&gates.i, &gates.f, &gates.g, &gates.o};
  for (std::size_t gate = 0; gate < kNumGates; ++gate) {
    for (std::size_t r = 0; r < h; ++r) {
      double z = params.b(gate, r);
      for (std::size_t c = 0; c < x.size(); ++c) z += params.W(gate, r, c) * x[c];
      for (std::size_t c = 0; c < h; ++c) z += params.R(gate, r, c) * state.H[c];
      (*blocks[gate])[r] = gate == kCellGate ? std::tanh(z) : sigmoid(z);
    }
  }
  for (std::size_t r = 0; r < h; ++r) {
    out.state.C[r] = gates.f[r] * state.C[r] + gates.i[r] * gates.g[r];
    out.state.H[r] = gates.o[r] * std::tanh(out.state.C[r]);
  }
  return out;
}

ForwardCache forward_sequence(const LstmParams& params, const Window& window) {
  if (window.empty()) throw ConfigError("window must contain at least one step");
  ForwardCache cache;
  cache.steps.reserve(window.size());
  LstmState state = LstmState::zeros(params.hidden_size());
  for (const auto& x : window) {
    StepResult step = cell_step(params, state, x);
    StepCache entry;
    entry.x = x;
    entry.previous = std::move(state);
    entry.tanh_c.resize(step.state.C.size());
    for (std::size_t r = 0; r < step.state.C.size(); ++r) {
      entry.tanh_c[r] = std::tanh(step.state.C[r]);
    }
    entry.gates = std::move(step.gates);
    entry.next = step.state;
    state = std::move(step.state);
    cache.steps.push_back(std::move(entry));
  }

  const std::size_t h = params.hidden_size();
  if (params.dense_size() > 0) {
    cache.head_input.resize(params.dense_size());
    for (std::size_t r = 0; r < params.dense_size(); ++r) {
      double z = params.dense_b(r);
      for (std::size_t c = 0; c < h; ++c) z += params.dense_W(r, c) * state.H[c];
      cache.head_input[r] = std::tanh(z);
    }
  } else {
    cache.head_input = state.H;
  }
  cache.prediction = params.output_bias();
  for (std::size_t k = 0; k < cache.head_input.size(); ++k) {
    cache.prediction += params.output_weight(k) * cache.head_input[k];
  }
  return cache;
}

double predict(const LstmParams& params, const Window& window) {
  return forward_sequence(params, window).prediction;
}

double loss_mse(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.size() != targets.size()) {
    throw ConfigError("loss inputs differ in length");
  }
  if (predictions.empty()) throw ConfigError("loss of an empty batch");
  double total = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double r = predictions[i] - targets[i];
    total += r * r;
  }
  return total / static_cast<double>(predictions.size());
}

LstmParams backprop(const LstmParams& params, const ForwardCache& cache, double target,
                    double weight) {
  LstmParams grad = params.zeros_like();
  const std::size_t h = params.hidden_size();
  const double d_pred = 2.0 * weight * (cache.prediction - target);

  grad.output_bias() = d_pred;
  for (std::size_t k = 0; k < cache.head_input.size(); ++k) {
    grad.output_weight(k) = d_pred * cache.head_input[k];
  }

  const LstmState& last = cache.steps.back().next;
  std::vector<double> dh(h, 0.0);
  if (params.dense_size() > 0) {
    for (std::size_t r = 0; r < params.dense_size(); ++r) {
      const double z = cache.head_input[r];
      const double da = d_pred * params.output_weight(r) * (1.0 - z * z);
      grad.dense_b(r) = da;
      for (std::size_t c = 0; c < h; ++c) {
        grad.dense_W(r, c) = da * last.H[c];
        dh[c] += params.dense_W(r, c) * da;
      }
    }
  } else {
    for (std::size_t c = 0; c < h; ++c) dh[c] = d_pred * params.output_weight(c);
  }

  std::vector<double> dc_carry(h, 0.0);
  std::vector<double> pre[kNumGates];
  for (auto& block : pre) block.resize(h);

  for (std::size_t t = cache.steps.size(); t-- > 0;) {
    const StepCache& step = cache.steps[t];
    const GateActivations& g = step.gates;
    for (std::size_t r = 0; r < h; ++r) {
      const double d_o = dh[r] * step.tanh_c[r];
      const double dc =
          dc_carry[r] + dh[r] * g.o[r] * (1.0 - step.tanh_c[r] * step.tanh_c[r]);
      const double d_i = dc * g.g[r];
      const double d_g = dc * g.i[r];
      const double d_f = dc * step.previous.C[r];
      dc_carry[r] = dc * g.f[r];
      pre[kInputGate][r] = d_i * g.i[r] * (1.0 - g.i[r]);
      pre[kForgetGate][r] = d_f * g.f[r] * (1.0 - g.f[r]);
      pre[kCellGate][r] = d_g * (1.0 - g.g[r] * g.g[r]);
      pre[kOutputGate][r] = d_o * g.o[r] * (1.0 - g.o[r]);
    }

    std::fill(dh.begin(), dh.end(), 0.0);
    for (std::size_t gate = 0; gate < kNumGates; ++gate) {
      for (std::size_t r = 0; r < h; ++r) {
        const double d = pre[gate][r];
        if (d == 0.0) continue;
        grad.b(gate, r) += d;
        for (std::size_t c = 0; c < step.x.size(); ++c) grad.W(gate, r, c) += d * step.x[c];
        for (std::size_t c = 0; c < h; ++c) {
          grad.R(gate, r, c) += d * step.previous.H[c];
          dh[c] += params.R(gate, r, c) * d;
        }
      }
    }
  }
  return grad;
}

void adam_update(LstmParams& params, const LstmParams& grads, AdamState& state,
                 const LstmConfig& config) {
  if (grads.size() != params.size() || state.first_moment.size() != params.size() ||
      state.second_moment.size() != params.size()) {
    throw ConfigError("ADAM state does not match parameter shape");
  }
  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double correction1 = 1.0 - std::pow(config.adam_beta1, t);
  const double correction2 = 1.0 - std::pow(config.adam_beta2, t);

  auto values = params.values();
  auto g = grads.values();
  for (std::size_t k = 0; k < values.size(); ++k) {
    state.first_moment[k] = config.adam_beta1 * state.first_moment[k] +
                            (1.0 - config.adam_beta1) * g[k];
    state.second_moment[k] = config.adam_beta2 * state.second_moment[k] +
                             (1.0 - config.adam_beta2) * g[k] * g[k];
    const double m_hat = state.first_moment[k] / correction1;
    const double v_hat = state.second_moment[k] / correction2;
    values[k] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.adam_epsilon);
  }
}

SplitSizes split_sizes(std::size_t num_samples, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train fraction must lie strictly between 0 and 1");
  }
  SplitSizes split;
  split.train = static_cast<std::size_t>(
      std::floor(train_fraction * static_cast<double>(num_samples)));
  split.test = num_samples - split.train;
  if (split.train == 0 || split.test == 0) {
    throw InputError("cannot split " + std::to_string(num_samples) +
                     " samples into non-empty train and test sets");
  }
  return split;
}

std::vector<Sample> make_windows(const std::vector<std::vector<double>>& features,
                                 std::span<const double> targets, std::size_t window_length) {
  if (features.size() != targets.size()) {
    throw ConfigError("feature and target columns differ in length");
  }
  if (window_length < 1) throw ConfigError("window length must be at least 1");
  std::vector<Sample> samples;
  for (std::size_t k = 0; k + window_length < features.size(); ++k) {
    Sample sample;
    sample.window.assign(features.begin() + static_cast<std::ptrdiff_t>(k),
                         features.begin() + static_cast<std::ptrdiff_t>(k + window_length));
    sample.target = targets[k + window_length];
    samples.push_back(std::move(sample));
  }
  return samples;
}

MinMaxScaler MinMaxScaler::fit(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw ConfigError("cannot fit a scaler on no rows");
  std::vector<double> lo = rows.front();
  std::vector<double> hi = rows.front();
  for (const auto& row : rows) {
    if (row.size() != lo.size()) throw ConfigError("ragged rows passed to scaler");
    for (std::size_t c = 0; c < row.size(); ++c) {
      lo[c] = std::min(lo[c], row[c]);
      hi[c] = std::max(hi[c], row[c]);
    }
  }
  return MinMaxScaler(std::move(lo), std::move(hi));
}

double MinMaxScaler::transform(std::size_t column, double value) const {
  const double range = max_.at(column) - min_.at(column);
  return range > 0.0 ? (value - min_[column]) / range : 0.0;
}

double MinMaxScaler::inverse(std::size_t column, double scaled) const {
  const double range = max_.at(column) - min_.at(column);
  return min_[column] + scaled * range;
}

std::vector<std::vector<double>> MinMaxScaler::transform(
    const std::vector<std::vector<double>>& rows) const {
  std::vector<std::vector<double>> out = rows;
  for (auto& row : out) {
    for (std::size_t c = 0; c < row.size(); ++c) row[c] = transform(c, row[c]);
  }
  return out;
}

TrainResult train(const std::vector<Sample>& samples, const LstmConfig& config) {
  config.validate();
  if (samples.size() < 2) {
    throw InputError("LSTM training needs at least 2 supervised samples (series length >= "
                     "window length + 2), got " + std::to_string(samples.size()));
  }
  for (const auto& sample : samples) {
    if (sample.window.size() != config.window_length) {
      throw ConfigError("sample window length does not match the configuration");
    }
  }

  TrainResult result;
  result.split = split_sizes(samples.size(), config.train_fraction);
  result.params = init_params(config);
  AdamState adam = AdamState::for_params(result.params);

  const std::size_t n_train = result.split.train;
  const std::size_t batch = config.batch_size == 0 ? n_train : std::min(config.batch_size, n_train);

  auto mean_loss = [&](std::size_t begin, std::size_t end) {
    double total = 0.0;
    for (std::size_t k = begin; k < end; ++k) {
      const double r = predict(result.params, samples[k].window) - samples[k].target;
      total += r * r;
    }
    return total / static_cast<double>(end - begin);
  };

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t start = 0; start < n_train; start += batch) {
      const std::size_t stop = std::min(start + batch, n_train);
      const double weight = 1.0 / static_cast<double>(stop - start);
      LstmParams grads = result.params.zeros_like();
      for (std::size_t k = start; k < stop; ++k) {
        const ForwardCache cache = forward_sequence(result.params, samples[k].window);
        const LstmParams g = backprop(result.params, cache, samples[k].target, weight);
        auto acc = grads.values();
        auto part = g.values();
        for (std::size_t p = 0; p < acc.size(); ++p) acc[p] += part[p];
      }
      adam_update(result.params, grads, adam, config);
    }
    const double train_loss = mean_loss(0, n_train);
    const double validation_loss = mean_loss(n_train, samples.size());
    if (!std::isfinite(train_loss) || !std::isfinite(validation_loss)) {
      throw NumericError("LSTM loss became non-finite at epoch " + std::to_string(epoch + 1));
    }
    result.train_loss.push_back(train_loss);
    result.validation_loss.push_back(validation_loss);
  }

  for (std::size_t k = n_train; k < samples.size(); ++k) {
    result.test_predictions.push_back(predict(result.params, samples[k].window));
    result.test_targets.push_back(samples[k].target);
  }
  return result;
}

}  // namespace cropcast::lstm
