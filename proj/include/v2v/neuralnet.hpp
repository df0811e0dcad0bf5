#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace v2v {

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

// Fully connected network: ReLU on hidden layers, linear output.
struct MlpParams {
  std::vector<DenseLayer> layers;

  std::vector<int> layer_sizes() const;
  int input_size() const { return static_cast<int>(layers.front().weight.cols()); }
  int output_size() const { return static_cast<int>(layers.back().weight.rows()); }
  std::size_t parameter_count() const;
  bool all_finite() const;
  bool operator==(const MlpParams& other) const;
};

// Gradients share the parameter layout.
using GradientSet = MlpParams;

double relu(double x);

// He initialisation: N(0, 2/fan_in) weights, zero biases.
MlpParams init_params(std::span<const int> layer_sizes, std::uint64_t seed);
MlpParams zeros_like(const MlpParams& params);

Eigen::VectorXd forward(const MlpParams& params, std::span<const double> input);
// Inputs are columns; returns output_size x batch.
Eigen::MatrixXd forward_batch(const MlpParams& params, const Eigen::MatrixXd& inputs);

struct BackwardResult {
  GradientSet grads;
  double loss = 0.0;
};

// loss = sum_i (target_i - Q(s_i, a_i))^2; only the taken action's output carries gradient.
BackwardResult backward(const MlpParams& params, const Eigen::MatrixXd& states, std::span<const int> actions,
                        std::span<const double> targets);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  bool operator==(const AdamConfig&) const = default;
};

struct AdamState {
  AdamConfig config;
  GradientSet first_moment;
  GradientSet second_moment;
  long step = 0;

  static AdamState for_params(const MlpParams& params, AdamConfig config);
};

void adam_step(MlpParams& params, AdamState& state, const GradientSet& grads);

// Text checkpoint: "mlp-v1 <n_sizes> <sizes...>" then one line per tensor
// (W0, b0, W1, b1, ...), row-major, 17 significant digits.
void save_checkpoint(const MlpParams& params, std::ostream& out);
MlpParams load_checkpoint(std::istream& in);
void save_checkpoint_file(const MlpParams& params, const std::string& path);
MlpParams load_checkpoint_file(const std::string& path);

}  // namespace v2v
