#include "v2v/dqn_agent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "v2v/errors.hpp"

namespace v2v {

int argmax(std::span<const double> values) {
  if (values.empty()) throw ContractViolation("argmax of an empty vector");
  int best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

int select_action(std::span<const double> q_values, double epsilon, Rng& rng) {
  if (q_values.empty()) throw ContractViolation("select_action needs at least one Q-value");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ContractViolation("epsilon must lie in [0, 1]");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (epsilon > 0.0 && unit(rng) < epsilon) {
    std::uniform_int_distribution<int> pick(0, static_cast<int>(q_values.size()) - 1);
    return pick(rng);
  }
  return argmax(q_values);
}

double compute_target(const Transition& t, const MlpParams& old_params, double beta) {
  if (t.terminal) return t.reward;
  const Eigen::VectorXd q = forward(old_params, t.next_state);
  return t.reward + beta * q.maxCoeff();
}

void TrainerConfig::validate() const {
  if (!(beta >= 0.0 && beta < 1.0)) throw ConfigError("discount beta must lie in [0, 1)");
  for (double e : {epsilon_start, epsilon_end}) {
    if (!(e >= 0.0 && e <= 1.0)) throw ConfigError("epsilon values must lie in [0, 1]");
  }
  if (!(epsilon_decay_fraction >= 0.0 && epsilon_decay_fraction <= 1.0))
    throw ConfigError("epsilon_decay_fraction must lie in [0, 1]");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (memory_capacity < 1) throw ConfigError("memory_capacity must be >= 1");
  if (target_sync_interval < 1) throw ConfigError("target_sync_interval must be >= 1");
  if (total_steps < 0) throw ConfigError("total_steps must be >= 0");
  if (log_interval < 1) throw ConfigError("log_interval must be >= 1");
  if (!(adam.learning_rate >= 0.0) || !(adam.beta1 >= 0.0 && adam.beta1 < 1.0) ||
      !(adam.beta2 >= 0.0 && adam.beta2 < 1.0) || !(adam.epsilon > 0.0))
    throw ConfigError("invalid Adam hyperparameters");
  if (!(lr_decay_factor > 0.0)) throw ConfigError("lr_decay_factor must be positive");
}

double TrainerConfig::epsilon_at(long step) const {
  const double horizon = epsilon_decay_fraction * static_cast<double>(total_steps);
  if (horizon <= 0.0) return epsilon_end;
  const double frac = std::min(1.0, static_cast<double>(step) / horizon);
  return epsilon_start + (epsilon_end - epsilon_start) * frac;
}

double TrainerConfig::learning_rate_at(long step) const {
  double lr = adam.learning_rate;
  for (double point : lr_decay_points) {
    if (static_cast<double>(step) >= point * static_cast<double>(total_steps)) lr *= lr_decay_factor;
  }
  return lr;
}

std::vector<int> network_layout(int observation_size, int num_actions, const NetConfig& net) {
  std::vector<int> sizes{observation_size};
  sizes.insert(sizes.end(), net.hidden_layers.begin(), net.hidden_layers.end());
  sizes.push_back(num_actions);
  return sizes;
}

TrainResult train(const EnvFactory& make_env, const TrainerConfig& cfg, const NetConfig& net,
                  const std::function<void(const TrainLogRow&)>& on_log) {
  cfg.validate();
  std::unique_ptr<MultiAgentEnv> env = make_env();
  const int obs_size = env->observation_size();
  const int n_agents = env->num_agents();
  const auto layout = network_layout(obs_size, env->num_actions(), net);

  TrainResult result;
  result.params = init_params(layout, cfg.seed);
  if (cfg.total_steps == 0) return result;

  MlpParams& params = result.params;
  MlpParams target = params;
  AdamState adam = AdamState::for_params(params, cfg.adam);
  ReplayMemory memory(static_cast<std::size_t>(cfg.memory_capacity));
  Rng explore_rng = make_rng(cfg.seed, Stream::kExploration);
  Rng replay_rng = make_rng(cfg.seed, Stream::kReplay);

  std::vector<double> episode_reward(static_cast<std::size_t>(n_agents), 0.0);
  double finished_reward_sum = 0.0;
  long finished_count = 0;
  double loss_sum = 0.0;
  long loss_samples = 0;

  auto start_episode = [&] {
    env->reset(derive_seed(cfg.seed, Stream::kEpisode, static_cast<std::uint64_t>(result.episodes)));
    std::fill(episode_reward.begin(), episode_reward.end(), 0.0);
  };
  auto finish_episode = [&] {
    finished_reward_sum += std::accumulate(episode_reward.begin(), episode_reward.end(), 0.0) / n_agents;
    ++finished_count;
    ++result.episodes;
  };
  auto has_active = [&] {
    for (int k = 0; k < n_agents; ++k) {
      if (env->agent_active(k)) return true;
    }
    return false;
  };

  start_episode();
  std::vector<int> order;
  Eigen::MatrixXd obs_batch;
  Eigen::MatrixXd states(obs_size, cfg.batch_size);
  Eigen::MatrixXd next_states(obs_size, cfg.batch_size);
  std::vector<int> actions(static_cast<std::size_t>(cfg.batch_size));
  std::vector<double> targets(static_cast<std::size_t>(cfg.batch_size));

  for (long step = 0; step < cfg.total_steps; ++step) {
    for (int guard = 0; env->episode_over() || !has_active(); ++guard) {
      if (guard > 1000) throw ContractViolation("environment produced no actionable slots");
      finish_episode();
      start_episode();
    }
    const double epsilon = cfg.epsilon_at(step);
    adam.config.learning_rate = cfg.learning_rate_at(step);

    order.clear();
    for (int k = 0; k < n_agents; ++k) {
      if (env->agent_active(k)) order.push_back(k);
    }
    std::shuffle(order.begin(), order.end(), explore_rng);
    obs_batch.resize(obs_size, static_cast<Eigen::Index>(order.size()));
    for (std::size_t i = 0; i < order.size(); ++i) {
      env->observe_into(order[i], std::span<double>(obs_batch.col(static_cast<Eigen::Index>(i)).data(),
                                                    static_cast<std::size_t>(obs_size)));
    }
    const Eigen::MatrixXd q = forward_batch(params, obs_batch);
    std::vector<int> chosen(static_cast<std::size_t>(n_agents), -1);
    std::vector<std::size_t> column(static_cast<std::size_t>(n_agents), 0);
    for (std::size_t i = 0; i < order.size(); ++i) {
      const auto col = static_cast<Eigen::Index>(i);
      const int a = select_action(std::span<const double>(q.col(col).data(), static_cast<std::size_t>(q.rows())),
                                  epsilon, explore_rng);
      chosen[static_cast<std::size_t>(order[i])] = a;
      column[static_cast<std::size_t>(order[i])] = i;
      env->submit(order[i], a);
    }

    for (const AgentStep& s : env->advance()) {
      const auto ki = static_cast<std::size_t>(s.agent);
      Transition t;
      const auto col = static_cast<Eigen::Index>(column[ki]);
      t.state.assign(obs_batch.col(col).data(), obs_batch.col(col).data() + obs_size);
      t.action = chosen[ki];
      t.reward = s.reward;
      t.next_state.resize(static_cast<std::size_t>(obs_size));
      env->observe_into(s.agent, t.next_state);
      t.terminal = s.terminal;
      episode_reward[ki] += s.reward;
      memory.push(std::move(t));
    }

    if (memory.size() >= static_cast<std::size_t>(cfg.batch_size)) {
      const auto picks = memory.sample_indices(static_cast<std::size_t>(cfg.batch_size), replay_rng);
      for (std::size_t i = 0; i < picks.size(); ++i) {
        const Transition& t = memory.at(picks[i]);
        const auto col = static_cast<Eigen::Index>(i);
        states.col(col) = Eigen::Map<const Eigen::VectorXd>(t.state.data(), obs_size);
        next_states.col(col) = Eigen::Map<const Eigen::VectorXd>(t.next_state.data(), obs_size);
        actions[i] = t.action;
      }
      const Eigen::MatrixXd next_q = forward_batch(target, next_states);
      for (std::size_t i = 0; i < picks.size(); ++i) {
        const Transition& t = memory.at(picks[i]);
        targets[i] = t.terminal ? t.reward
                                : t.reward + cfg.beta * next_q.col(static_cast<Eigen::Index>(i)).maxCoeff();
      }
      BackwardResult br = backward(params, states, actions, targets);
      adam_step(params, adam, br.grads);
      loss_sum += br.loss;
      loss_samples += cfg.batch_size;
      ++result.updates;
      if (result.updates % cfg.target_sync_interval == 0) target = params;
    }

    if ((step + 1) % cfg.log_interval == 0 || step + 1 == cfg.total_steps) {
      TrainLogRow row;
      row.step = step + 1;
      row.epsilon = epsilon;
      row.loss = loss_samples > 0 ? loss_sum / static_cast<double>(loss_samples)
                                  : std::numeric_limits<double>::quiet_NaN();
      row.mean_episode_reward = finished_count > 0 ? finished_reward_sum / static_cast<double>(finished_count)
                                                   : std::numeric_limits<double>::quiet_NaN();
      result.log.push_back(row);
      if (on_log) on_log(row);
      loss_sum = 0.0;
      loss_samples = 0;
      finished_reward_sum = 0.0;
      finished_count = 0;
    }
  }
  return result;
}

DqnPolicy::DqnPolicy(std::shared_ptr<const MlpParams> params) : params_(std::move(params)) {
  if (!params_ || params_->layers.empty()) throw ContractViolation("DQN policy needs a network");
}

std::vector<Action> DqnPolicy::act(const V2VEnvironment& env, std::span<const int> agents, Rng& /*rng*/) {
  std::vector<Action> out;
  if (agents.empty()) return out;
  const int obs_size = env.observation_size();
  if (params_->input_size() != obs_size || params_->output_size() != env.num_actions())
    throw ContractViolation("network shape does not match the environment");
  Eigen::MatrixXd obs(obs_size, static_cast<Eigen::Index>(agents.size()));
  for (std::size_t i = 0; i < agents.size(); ++i) {
    env.observe_into(agents[i], std::span<double>(obs.col(static_cast<Eigen::Index>(i)).data(),
                                                  static_cast<std::size_t>(obs_size)));
  }
  const Eigen::MatrixXd q = forward_batch(*params_, obs);
  out.reserve(agents.size());
  for (Eigen::Index i = 0; i < q.cols(); ++i) {
    out.push_back(Action::from_flat(argmax(std::span<const double>(q.col(i).data(), static_cast<std::size_t>(q.rows())))));
  }
  return out;
}

MetricsRecord evaluate(const MlpParams& params, const EnvConfig& env, int episodes, std::uint64_t seed, int threads) {
  auto shared = std::make_shared<const MlpParams>(params);
  PolicyFactory factory = [shared] { return std::make_unique<DqnPolicy>(shared); };
  const auto outcomes = evaluate_policy(env, factory, episodes, seed, threads);
  return summarize(outcomes, env.num_links, "dqn", seed);
}

}  // namespace v2v
