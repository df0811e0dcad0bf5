#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "v2v/environment.hpp"
#include "v2v/mdp.hpp"
#include "v2v/metrics.hpp"
#include "v2v/neuralnet.hpp"
#include "v2v/policy.hpp"
#include "v2v/replay_memory.hpp"

namespace v2v {

// Index of the largest value; ties resolve to the lowest index.
int argmax(std::span<const double> values);

// Epsilon-greedy: greedy with probability 1 - epsilon, otherwise uniform.
int select_action(std::span<const double> q_values, double epsilon, Rng& rng);

// y = r for terminal transitions, else r + beta * max_a Q_old(s', a).
double compute_target(const Transition& transition, const MlpParams& old_params, double beta);

struct NetConfig {
  std::vector<int> hidden_layers{500, 250, 120};
  bool operator==(const NetConfig&) const = default;
};

struct TrainerConfig {
  double beta = 0.5;
  double epsilon_start = 1.0;
  double epsilon_end = 0.02;
  double epsilon_decay_fraction = 0.8;  // linear decay over this share of the steps
  int batch_size = 256;
  int memory_capacity = 100000;
  int target_sync_interval = 500;  // in network updates
  long total_steps = 20000;
  std::uint64_t seed = 1;
  AdamConfig adam;
  double lr_decay_factor = 0.1;
  std::vector<double> lr_decay_points{0.5, 0.8};  // fractions of total_steps
  int log_interval = 100;

  bool operator==(const TrainerConfig&) const = default;
  void validate() const;
  double epsilon_at(long step) const;
  double learning_rate_at(long step) const;
};

struct TrainLogRow {
  long step = 0;
  double epsilon = 0.0;
  double loss = 0.0;                 // mean squared TD error per sample since the previous row
  double mean_episode_reward = 0.0;  // undiscounted, per agent, over episodes finished since the previous row
};

struct TrainResult {
  MlpParams params;
  std::vector<TrainLogRow> log;
  long episodes = 0;
  long updates = 0;
};

// Deep Q-learning with experience replay and a periodically synced old-weights
// network. One training step is one environment slot: every active agent acts
// (epsilon-greedy on the shared network), the transitions enter the replay
// memory, then one mini-batch update runs once the memory holds a batch.
TrainResult train(const EnvFactory& make_env, const TrainerConfig& cfg, const NetConfig& net,
                  const std::function<void(const TrainLogRow&)>& on_log = {});

std::vector<int> network_layout(int observation_size, int num_actions, const NetConfig& net);

// Greedy (epsilon = 0) action from the shared Q-network.
class DqnPolicy : public AllocationPolicy {
 public:
  explicit DqnPolicy(std::shared_ptr<const MlpParams> params);
  std::string name() const override { return "dqn"; }
  std::vector<Action> act(const V2VEnvironment& env, std::span<const int> agents, Rng& rng) override;

 private:
  std::shared_ptr<const MlpParams> params_;
};

// Greedy evaluation; zero episodes yields a record with valid = false.
MetricsRecord evaluate(const MlpParams& params, const EnvConfig& env, int episodes, std::uint64_t seed,
                       int threads = 0);

}  // namespace v2v
