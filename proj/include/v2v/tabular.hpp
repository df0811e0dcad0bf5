#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "v2v/mdp.hpp"
#include "v2v/rng.hpp"

namespace v2v {

// Finite MDP with expected rewards R[s][a] and transition lists P[s][a].
struct FiniteMdp {
  struct Outcome {
    double probability = 1.0;
    int next_state = 0;
  };
  int num_states = 0;
  int num_actions = 0;
  std::vector<double> reward;                // [s * A + a]
  std::vector<std::vector<Outcome>> next;    // [s * A + a]

  double r(int s, int a) const { return reward[static_cast<std::size_t>(s * num_actions + a)]; }
  const std::vector<Outcome>& p(int s, int a) const { return next[static_cast<std::size_t>(s * num_actions + a)]; }
  void validate() const;
};

// Deterministic chain 0..n-1; action 0 steps left, 1 steps right (clamped at the ends).
// Pressing left in state 0 pays `left_reward`, pressing right in state n-1 pays `right_reward`.
FiniteMdp make_chain_mdp(int num_states = 5, double left_reward = 0.7, double right_reward = 1.0);

// Random MDP with deterministic transitions and rewards in [0, 1).
FiniteMdp make_random_mdp(int num_states, int num_actions, std::uint64_t seed);

struct TabularQ {
  int num_states = 0;
  int num_actions = 0;
  std::vector<double> q;             // [s * A + a]
  std::vector<long> visits;          // update counts per entry

  double at(int s, int a) const { return q[static_cast<std::size_t>(s * num_actions + a)]; }
  std::vector<int> greedy_policy() const;
};

// Q* by value iteration on the Bellman optimality operator.
TabularQ value_iteration(const FiniteMdp& mdp, double beta, double tolerance = 1e-12, int max_sweeps = 100000);

// Learning rate as a function of how often the (s, a) entry has been updated (1-based).
using AlphaSchedule = std::function<double(long visit)>;

// Q(s,a) += alpha * (r + beta * max_a' Q(s',a') - Q(s,a)) along a uniformly
// random behaviour trajectory that restarts from a uniform state every
// `restart_every` steps, so every pair keeps being visited.
TabularQ tabular_q_oracle(const FiniteMdp& mdp, const AlphaSchedule& alpha, double beta, long steps, Rng& rng,
                          int restart_every = 20);

double max_abs_difference(const TabularQ& a, const TabularQ& b);

// Single-agent adapter: one-hot observations, fixed-length episodes that are
// truncated (never terminal) and start from a uniformly random state.
class FiniteMdpEnv : public MultiAgentEnv {
 public:
  FiniteMdpEnv(FiniteMdp mdp, int episode_length);

  void reset(std::uint64_t seed) override;
  int num_agents() const override { return 1; }
  int observation_size() const override { return mdp_.num_states; }
  int num_actions() const override { return mdp_.num_actions; }
  bool agent_active(int agent) const override { return agent == 0 && !episode_over(); }
  bool episode_over() const override { return step_ >= episode_length_; }
  void observe_into(int agent, std::span<double> out) const override;
  void submit(int agent, int flat_action) override;
  std::vector<AgentStep> advance() override;

  int state() const { return state_; }

 private:
  FiniteMdp mdp_;
  int episode_length_;
  Rng rng_;
  int state_ = 0;
  int step_ = 0;
  int pending_ = -1;
};

}  // namespace v2v
