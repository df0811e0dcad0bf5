#include "v2v/neuralnet.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "v2v/errors.hpp"
#include "v2v/rng.hpp"

namespace v2v {

std::vector<int> MlpParams::layer_sizes() const {
  std::vector<int> sizes;
  if (layers.empty()) return sizes;
  sizes.push_back(static_cast<int>(layers.front().weight.cols()));
  for (const DenseLayer& l : layers) sizes.push_back(static_cast<int>(l.weight.rows()));
  return sizes;
}

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (const DenseLayer& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

bool MlpParams::all_finite() const {
  for (const DenseLayer& l : layers) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

bool MlpParams::operator==(const MlpParams& other) const {
  if (layers.size() != other.layers.size()) return false;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const DenseLayer& a = layers[i];
    const DenseLayer& b = other.layers[i];
    if (a.weight.rows() != b.weight.rows() || a.weight.cols() != b.weight.cols() || a.bias.size() != b.bias.size())
      return false;
    if (a.weight != b.weight || a.bias != b.bias) return false;
  }
  return true;
}

double relu(double x) { return x > 0.0 ? x : 0.0; }

MlpParams init_params(std::span<const int> layer_sizes, std::uint64_t seed) {
  if (layer_sizes.size() < 2) throw ConfigError("a network needs at least an input and an output layer");
  for (int s : layer_sizes) {
    if (s < 1) throw ConfigError("layer widths must be >= 1");
  }
  Rng rng(derive_seed(seed, Stream::kInit));
  MlpParams params;
  for (std::size_t i = 0; i + 1 < layer_sizes.size(); ++i) {
    const int fan_in = layer_sizes[i];
    const int fan_out = layer_sizes[i + 1];
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
    DenseLayer layer{Eigen::MatrixXd(fan_out, fan_in), Eigen::VectorXd::Zero(fan_out)};
    // Row-major fill so the draw order matches the checkpoint layout.
    for (int r = 0; r < fan_out; ++r) {
      for (int c = 0; c < fan_in; ++c) layer.weight(r, c) = dist(rng);
    }
    params.layers.push_back(std::move(layer));
  }
  return params;
}

MlpParams zeros_like(const MlpParams& params) {
  MlpParams z;
  for (const DenseLayer& l : params.layers) {
    z.layers.push_back(DenseLayer{Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()),
                                  Eigen::VectorXd::Zero(l.bias.size())});
  }
  return z;
}

Eigen::MatrixXd forward_batch(const MlpParams& params, const Eigen::MatrixXd& inputs) {
  if (params.layers.empty()) throw ContractViolation("network has no layers");
  if (inputs.rows() != params.input_size()) throw ContractViolation("input width does not match the network");
  Eigen::MatrixXd a = inputs;
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    const DenseLayer& l = params.layers[i];
    Eigen::MatrixXd z = l.weight * a;
    z.colwise() += l.bias;
    if (i + 1 < params.layers.size()) z = z.cwiseMax(0.0);
    a = std::move(z);
  }
  return a;
}

Eigen::VectorXd forward(const MlpParams& params, std::span<const double> input) {
  Eigen::Map<const Eigen::VectorXd> x(input.data(), static_cast<Eigen::Index>(input.size()));
  return forward_batch(params, Eigen::MatrixXd(x)).col(0);
}

BackwardResult backward(const MlpParams& params, const Eigen::MatrixXd& states, std::span<const int> actions,
                        std::span<const double> targets) {
  const Eigen::Index batch = states.cols();
  if (batch == 0) throw ContractViolation("backward needs a non-empty batch");
  if (actions.size() != static_cast<std::size_t>(batch) || targets.size() != static_cast<std::size_t>(batch))
    throw ContractViolation("actions/targets must match the batch size");
  if (states.rows() != params.input_size()) throw ContractViolation("input width does not match the network");

  const std::size_t depth = params.layers.size();
  // activations[i] is the input to layer i; activations[depth] is the output.
  std::vector<Eigen::MatrixXd> activations;
  activations.reserve(depth + 1);
  activations.push_back(states);
  for (std::size_t i = 0; i < depth; ++i) {
    const DenseLayer& l = params.layers[i];
    Eigen::MatrixXd z = l.weight * activations.back();
    z.colwise() += l.bias;
    if (i + 1 < depth) z = z.cwiseMax(0.0);
    activations.push_back(std::move(z));
  }

  const Eigen::MatrixXd& q = activations.back();
  Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(q.rows(), batch);
  BackwardResult result;
  for (Eigen::Index s = 0; s < batch; ++s) {
    const int a = actions[static_cast<std::size_t>(s)];
    if (a < 0 || a >= q.rows()) throw ContractViolation("action index outside the output layer");
    const double err = targets[static_cast<std::size_t>(s)] - q(a, s);
    result.loss += err * err;
    delta(a, s) = -2.0 * err;
  }

  result.grads.layers.resize(depth);
  for (std::size_t i = depth; i-- > 0;) {
    const DenseLayer& l = params.layers[i];
    DenseLayer& g = result.grads.layers[i];
    g.weight.noalias() = delta * activations[i].transpose();
    g.bias = delta.rowwise().sum();
    if (i > 0) {
      Eigen::MatrixXd prev = l.weight.transpose() * delta;
      // ReLU derivative: the stored activation is positive exactly where the pre-activation was.
      delta = prev.cwiseProduct((activations[i].array() > 0.0).cast<double>().matrix());
    }
  }
  return result;
}

AdamState AdamState::for_params(const MlpParams& params, AdamConfig config) {
  return AdamState{config, zeros_like(params), zeros_like(params), 0};
}

void adam_step(MlpParams& params, AdamState& state, const GradientSet& grads) {
  if (grads.layers.size() != params.layers.size() || state.first_moment.layers.size() != params.layers.size())
    throw ContractViolation("gradient/optimizer shapes do not match the parameters");
  ++state.step;
  const AdamConfig& c = state.config;
  const double bias1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    if (param.size() != g.size()) throw ContractViolation("gradient shape does not match the parameters");
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
    param.array() -= c.learning_rate * (m.array() / bias1) / ((v.array() / bias2).sqrt() + c.epsilon);
  };
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    update(params.layers[i].weight, state.first_moment.layers[i].weight, state.second_moment.layers[i].weight,
           grads.layers[i].weight);
    update(params.layers[i].bias, state.first_moment.layers[i].bias, state.second_moment.layers[i].bias,
           grads.layers[i].bias);
  }
}

namespace {

void write_value(std::ostream& out, double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  out.write(buf, res.ptr - buf);
}

double parse_value(const std::string& token) {
  double v = 0.0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size())
    throw ConfigError("checkpoint: bad number '" + token + "'");
  return v;
}

void read_tensor_line(std::istream& in, double* data, Eigen::Index rows, Eigen::Index cols, bool row_major_matrix) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("checkpoint: truncated file");
  std::istringstream ls(line);
  std::string token;
  Eigen::Index count = 0;
  while (ls >> token) {
    if (count >= rows * cols) throw ConfigError("checkpoint: tensor line too long");
    const double v = parse_value(token);
    if (row_major_matrix) {
      data[(count % cols) * rows + count / cols] = v;  // column-major storage
    } else {
      data[count] = v;
    }
    ++count;
  }
  if (count != rows * cols) throw ConfigError("checkpoint: tensor line too short");
}

}  // namespace

void save_checkpoint(const MlpParams& params, std::ostream& out) {
  const auto sizes = params.layer_sizes();
  out << "mlp-v1 " << sizes.size();
  for (int s : sizes) out << ' ' << s;
  out << '\n';
  for (const DenseLayer& l : params.layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) {
        if (r != 0 || c != 0) out << ' ';
        write_value(out, l.weight(r, c));
      }
    }
    out << '\n';
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) {
      if (r != 0) out << ' ';
      write_value(out, l.bias(r));
    }
    out << '\n';
  }
}

MlpParams load_checkpoint(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("checkpoint: empty file");
  std::istringstream header(line);
  std::string magic;
  std::size_t n_sizes = 0;
  header >> magic >> n_sizes;
  if (magic != "mlp-v1" || !header || n_sizes < 2) throw ConfigError("checkpoint: bad header '" + line + "'");
  std::vector<int> sizes(n_sizes);
  for (int& s : sizes) {
    header >> s;
    if (!header || s < 1) throw ConfigError("checkpoint: bad layer sizes in header");
  }
  MlpParams params;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    DenseLayer l{Eigen::MatrixXd(sizes[i + 1], sizes[i]), Eigen::VectorXd(sizes[i + 1])};
    read_tensor_line(in, l.weight.data(), l.weight.rows(), l.weight.cols(), true);
    read_tensor_line(in, l.bias.data(), l.bias.size(), 1, false);
    params.layers.push_back(std::move(l));
  }
  return params;
}

void save_checkpoint_file(const MlpParams& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write checkpoint '" + path + "'");
  save_checkpoint(params, out);
  if (!out) throw ConfigError("failed writing checkpoint '" + path + "'");
}

MlpParams load_checkpoint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("checkpoint not found: '" + path + "'");
  return load_checkpoint(in);
}

}  // namespace v2v
