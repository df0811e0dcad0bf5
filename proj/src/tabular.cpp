#include "v2v/tabular.hpp"

#include <algorithm>
#include <cmath>

#include "v2v/dqn_agent.hpp"
#include "v2v/errors.hpp"

namespace v2v {

void FiniteMdp::validate() const {
  if (num_states < 1 || num_actions < 1) throw ConfigError("MDP needs at least one state and one action");
  const auto pairs = static_cast<std::size_t>(num_states * num_actions);
  if (reward.size() != pairs || next.size() != pairs) throw ConfigError("MDP tables have the wrong size");
  for (const auto& outcomes : next) {
    double total = 0.0;
    for (const Outcome& o : outcomes) {
      if (o.next_state < 0 || o.next_state >= num_states || o.probability < 0.0)
        throw ConfigError("MDP transition out of range");
      total += o.probability;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("MDP transition probabilities must sum to 1");
  }
}

FiniteMdp make_chain_mdp(int num_states, double left_reward, double right_reward) {
  if (num_states < 2) throw ConfigError("chain needs at least two states");
  FiniteMdp mdp;
  mdp.num_states = num_states;
  mdp.num_actions = 2;
  for (int s = 0; s < num_states; ++s) {
    mdp.reward.push_back(s == 0 ? left_reward : 0.0);
    mdp.next.push_back({{1.0, std::max(0, s - 1)}});
    mdp.reward.push_back(s == num_states - 1 ? right_reward : 0.0);
    mdp.next.push_back({{1.0, std::min(num_states - 1, s + 1)}});
  }
  return mdp;
}

FiniteMdp make_random_mdp(int num_states, int num_actions, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> reward(0.0, 1.0);
  std::uniform_int_distribution<int> state(0, num_states - 1);
  FiniteMdp mdp;
  mdp.num_states = num_states;
  mdp.num_actions = num_actions;
  for (int i = 0; i < num_states * num_actions; ++i) {
    mdp.reward.push_back(reward(rng));
    mdp.next.push_back({{1.0, state(rng)}});
  }
  return mdp;
}

std::vector<int> TabularQ::greedy_policy() const {
  std::vector<int> policy;
  for (int s = 0; s < num_states; ++s) {
    policy.push_back(argmax(std::span<const double>(q.data() + static_cast<std::size_t>(s * num_actions),
                                                     static_cast<std::size_t>(num_actions))));
  }
  return policy;
}

namespace {

TabularQ empty_table(const FiniteMdp& mdp) {
  TabularQ t;
  t.num_states = mdp.num_states;
  t.num_actions = mdp.num_actions;
  t.q.assign(static_cast<std::size_t>(mdp.num_states * mdp.num_actions), 0.0);
  t.visits.assign(t.q.size(), 0);
  return t;
}

double state_max(const TabularQ& t, int s) {
  const auto* row = t.q.data() + static_cast<std::size_t>(s * t.num_actions);
  return *std::max_element(row, row + t.num_actions);
}

}  // namespace

TabularQ value_iteration(const FiniteMdp& mdp, double beta, double tolerance, int max_sweeps) {
  mdp.validate();
  if (!(beta >= 0.0 && beta < 1.0)) throw ConfigError("discount must lie in [0, 1)");
  TabularQ q = empty_table(mdp);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    TabularQ next = q;
    double change = 0.0;
    for (int s = 0; s < mdp.num_states; ++s) {
      for (int a = 0; a < mdp.num_actions; ++a) {
        double v = mdp.r(s, a);
        for (const auto& o : mdp.p(s, a)) v += beta * o.probability * state_max(q, o.next_state);
        const auto i = static_cast<std::size_t>(s * mdp.num_actions + a);
        change = std::max(change, std::abs(v - q.q[i]));
        next.q[i] = v;
      }
    }
    q = std::move(next);
    if (change < tolerance) break;
  }
  return q;
}

TabularQ tabular_q_oracle(const FiniteMdp& mdp, const AlphaSchedule& alpha, double beta, long steps, Rng& rng,
                          int restart_every) {
  mdp.validate();
  TabularQ t = empty_table(mdp);
  std::uniform_int_distribution<int> any_state(0, mdp.num_states - 1);
  std::uniform_int_distribution<int> any_action(0, mdp.num_actions - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int s = any_state(rng);
  for (long step = 0; step < steps; ++step) {
    if (restart_every > 0 && step % restart_every == 0) s = any_state(rng);
    const int a = any_action(rng);
    const auto& outcomes = mdp.p(s, a);
    int s_next = outcomes.back().next_state;
    double u = unit(rng);
    for (const auto& o : outcomes) {
      if (u < o.probability) {
        s_next = o.next_state;
        break;
      }
      u -= o.probability;
    }
    const auto i = static_cast<std::size_t>(s * mdp.num_actions + a);
    const long visit = ++t.visits[i];
    const double td = mdp.r(s, a) + beta * state_max(t, s_next) - t.q[i];
    t.q[i] += alpha(visit) * td;
    s = s_next;
  }
  return t;
}

double max_abs_difference(const TabularQ& a, const TabularQ& b) {
  if (a.q.size() != b.q.size()) throw ContractViolation("Q tables differ in shape");
  double m = 0.0;
  for (std::size_t i = 0; i < a.q.size(); ++i) m = std::max(m, std::abs(a.q[i] - b.q[i]));
  return m;
}

FiniteMdpEnv::FiniteMdpEnv(FiniteMdp mdp, int episode_length) : mdp_(std::move(mdp)), episode_length_(episode_length) {
  mdp_.validate();
  if (episode_length < 1) throw ConfigError("episode length must be >= 1");
}

void FiniteMdpEnv::reset(std::uint64_t seed) {
  rng_.seed(seed);
  std::uniform_int_distribution<int> any_state(0, mdp_.num_states - 1);
  state_ = any_state(rng_);
  step_ = 0;
  pending_ = -1;
}

void FiniteMdpEnv::observe_into(int agent, std::span<double> out) const {
  if (agent != 0 || out.size() != static_cast<std::size_t>(mdp_.num_states))
    throw ContractViolation("bad observation request");
  std::fill(out.begin(), out.end(), 0.0);
  out[static_cast<std::size_t>(state_)] = 1.0;
}

void FiniteMdpEnv::submit(int agent, int flat_action) {
  if (agent != 0 || flat_action < 0 || flat_action >= mdp_.num_actions) throw ContractViolation("bad action");
  if (episode_over()) throw ContractViolation("episode is over");
  pending_ = flat_action;
}

std::vector<AgentStep> FiniteMdpEnv::advance() {
  if (pending_ < 0) throw ContractViolation("agent has not acted");
  const double reward = mdp_.r(state_, pending_);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double u = unit(rng_);
  const auto& outcomes = mdp_.p(state_, pending_);
  int s_next = outcomes.back().next_state;
  for (const auto& o : outcomes) {
    if (u < o.probability) {
      s_next = o.next_state;
      break;
    }
    u -= o.probability;
  }
  state_ = s_next;
  pending_ = -1;
  ++step_;
  return {AgentStep{0, reward, false}};
}

}  // namespace v2v
