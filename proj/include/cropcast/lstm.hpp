#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cropcast::lstm {

struct LstmConfig {
  std::size_t hidden_size = 32;
  std::size_t input_size = 1;
  std::size_t window_length = 4;
  std::size_t epochs = 200;
  // Samples per ADAM step; 0 means one full-batch step per epoch.
  std::size_t batch_size = 1;
  // Width of an optional tanh dense layer between the LSTM and the output
  // unit; 0 feeds the hidden state straight into the output unit.
  std::size_t dense_size = 0;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 42;
  double train_fraction = 0.8;

  // Throws ConfigError on any invalid field.
  void validate() const;
};

// Gate blocks are stacked in this order in W, R and b.
enum Gate : std::size_t { kInputGate = 0, kForgetGate = 1, kCellGate = 2, kOutputGate = 3 };
inline constexpr std::size_t kNumGates = 4;

// All trainable values in one flat buffer so the optimiser and the gradient
// checks can treat them uniformly. Layout: W (4H x I), R (4H x H), b (4H),
// dense weights (D x H), dense bias (D), output weights, output bias.
class LstmParams {
 public:
  LstmParams() = default;
  LstmParams(std::size_t hidden_size, std::size_t input_size, std::size_t dense_size = 0);

  std::size_t hidden_size() const noexcept { return hidden_; }
  std::size_t input_size() const noexcept { return input_; }
  std::size_t dense_size() const noexcept { return dense_; }
  // Width of the vector that feeds the output unit.
  std::size_t head_size() const noexcept { return dense_ > 0 ? dense_ : hidden_; }

  double& W(std::size_t gate, std::size_t row, std::size_t col) {
    return values_[(gate * hidden_ + row) * input_ + col];
  }
  double W(std::size_t gate, std::size_t row, std::size_t col) const {
    return values_[(gate * hidden_ + row) * input_ + col];
  }
  double& R(std::size_t gate, std::size_t row, std::size_t col) {
    return values_[r_offset_ + (gate * hidden_ + row) * hidden_ + col];
  }
  double R(std::size_t gate, std::size_t row, std::size_t col) const {
    return values_[r_offset_ + (gate * hidden_ + row) * hidden_ + col];
  }
  double& b(std::size_t gate, std::size_t row) { return values_[b_offset_ + gate * hidden_ + row]; }
  double b(std::size_t gate, std::size_t row) const {
    return values_[b_offset_ + gate * hidden_ + row];
  }
  double& dense_W(std::size_t row, std::size_t col) {
    return values_[dense_w_offset_ + row * hidden_ + col];
  }
  double dense_W(std::size_t row, std::size_t col) const {
    return values_[dense_w_offset_ + row * hidden_ + col];
  }
  double& dense_b(std::size_t row) { return values_[dense_b_offset_ + row]; }
  double dense_b(std::size_t row) const { return values_[dense_b_offset_ + row]; }
  double& output_weight(std::size_t k) { return values_[head_w_offset_ + k]; }
  double output_weight(std::size_t k) const { return values_[head_w_offset_ + k]; }
  double& output_bias() { return values_.back(); }
  double output_bias() const { return values_.back(); }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }

  // Same shape, all zeros.
  LstmParams zeros_like() const { return LstmParams(hidden_, input_, dense_); }

  bool operator==(const LstmParams&) const = default;

 private:
  std::size_t hidden_ = 0;
  std::size_t input_ = 0;
  std::size_t dense_ = 0;
  std::size_t r_offset_ = 0;
  std::size_t b_offset_ = 0;
  std::size_t dense_w_offset_ = 0;
  std::size_t dense_b_offset_ = 0;
  std::size_t head_w_offset_ = 0;
  std::vector<double> values_;
};

struct LstmState {
  std::vector<double> C;
  std::vector<double> H;

  static LstmState zeros(std::size_t hidden_size) {
    return {std::vector<double>(hidden_size, 0.0), std::vector<double>(hidden_size, 0.0)};
  }
};

struct GateActivations {
  std::vector<double> i, f, g, o;
};

struct StepResult {
  LstmState state;
  GateActivations gates;
};

// Uniform(-1/sqrt(H), 1/sqrt(H)) weights, forget-gate bias 1, other biases 0.
LstmParams init_params(const LstmConfig& config);

StepResult cell_step(const LstmParams& params, const LstmState& state,
                     std::span<const double> x);

using Window = std::vector<std::vector<double>>;

struct StepCache {
  std::vector<double> x;
  LstmState previous;
  GateActivations gates;
  std::vector<double> tanh_c;
  LstmState next;
};

struct ForwardCache {
  std::vector<StepCache> steps;
  std::vector<double> head_input;  // H_T, or the dense activation
  double prediction = 0.0;
};

// Runs the window from a zero state. Throws ConfigError when the window is
// empty or a step has the wrong width.
ForwardCache forward_sequence(const LstmParams& params, const Window& window);
double predict(const LstmParams& params, const Window& window);

double loss_mse(std::span<const double> predictions, std::span<const double> targets);

// Gradient of weight * (prediction - target)^2 for one cached window. A
// batch of n samples uses weight 1/n, so summed gradients are the gradient
// of the batch MSE.
LstmParams backprop(const LstmParams& params, const ForwardCache& cache, double target,
                    double weight = 1.0);

struct AdamState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::uint64_t step_count = 0;

  static AdamState for_params(const LstmParams& params) {
    return {std::vector<double>(params.size(), 0.0),
            std::vector<double>(params.size(), 0.0), 0};
  }
};

void adam_update(LstmParams& params, const LstmParams& grads, AdamState& state,
                 const LstmConfig& config);

struct Sample {
  Window window;
  double target = 0.0;
};

struct SplitSizes {
  std::size_t train = 0;
  std::size_t test = 0;
};

// Chronological split: train = floor(fraction * n), the rest is held out.
// Throws ConfigError when either side would be empty.
SplitSizes split_sizes(std::size_t num_samples, double train_fraction);

// Sample k reads feature rows k..k+window-1 and targets row k+window.
std::vector<Sample> make_windows(const std::vector<std::vector<double>>& features,
                                 std::span<const double> targets, std::size_t window_length);

// Per-column min-max scaling to [0, 1]. Constant columns map to 0.
class MinMaxScaler {
 public:
  MinMaxScaler() = default;
  MinMaxScaler(std::vector<double> minimum, std::vector<double> maximum)
      : min_(std::move(minimum)), max_(std::move(maximum)) {}

  static MinMaxScaler fit(const std::vector<std::vector<double>>& rows);

  double transform(std::size_t column, double value) const;
  double inverse(std::size_t column, double scaled) const;
  std::vector<std::vector<double>> transform(const std::vector<std::vector<double>>& rows) const;

  const std::vector<double>& minimum() const noexcept { return min_; }
  const std::vector<double>& maximum() const noexcept { return max_; }

 private:
  std::vector<double> min_;
  std::vector<double> max_;
};

struct TrainResult {
  LstmParams params;
  std::vector<double> train_loss;       // per epoch, after the epoch's updates
  std::vector<double> validation_loss;  // per epoch, on the held-out samples
  std::vector<double> test_predictions;
  std::vector<double> test_targets;
  SplitSizes split;
};

TrainResult train(const std::vector<Sample>& samples, const LstmConfig& config);

}  // namespace cropcast::lstm
