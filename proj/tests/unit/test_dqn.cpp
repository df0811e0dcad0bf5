#include <cmath>
#include <random>

#include "doctest.h"
#include "v2v/dqn_agent.hpp"
#include "v2v/errors.hpp"
#include "v2v/replay_memory.hpp"
#include "v2v/tabular.hpp"

using namespace v2v;

namespace {

Transition numbered(int i) {
  Transition t;
  t.state = {static_cast<double>(i)};
  t.action = i % 3;
  t.reward = static_cast<double>(i);
  t.next_state = {static_cast<double>(i) + 0.5};
  t.terminal = i % 7 == 0;
  return t;
}

}  // namespace

TEST_CASE("select_action: greedy, ties, invariance, uniform exploration") {
  Rng rng(1);
  const std::vector<double> q{1.0, 3.0, 2.0};
  CHECK(select_action(q, 0.0, rng) == 1);
  const std::vector<double> tie{5.0, 5.0, 1.0};
  CHECK(select_action(tie, 0.0, rng) == 0);
  std::vector<double> transformed;
  for (double v : q) transformed.push_back(std::exp(v) * 4.0 - 7.0);
  CHECK(select_action(transformed, 0.0, rng) == 1);
  CHECK_THROWS_AS(select_action(q, 1.5, rng), ContractViolation);
  CHECK_THROWS_AS(select_action(std::vector<double>{}, 0.0, rng), ContractViolation);

  const int draws = 10000;
  const std::vector<double> q4{0.0, 9.0, 0.0, 0.0};
  std::vector<int> counts(4, 0);
  for (int i = 0; i < draws; ++i) ++counts[static_cast<std::size_t>(select_action(q4, 1.0, rng))];
  const double p = 0.25;
  const double sigma = std::sqrt(draws * p * (1 - p));
  for (int c : counts) CHECK(std::abs(c - draws * p) < 3.0 * sigma);
}

TEST_CASE("compute_target") {
  MlpParams net = init_params(std::vector<int>{1, 2}, 3);
  net.layers[0].weight.setZero();
  net.layers[0].bias << 2.0, -1.0;
  Transition t;
  t.state = {0.0};
  t.next_state = {0.0};
  t.reward = 1.0;
  CHECK(compute_target(t, net, 0.9) == doctest::Approx(2.8).epsilon(1e-15));
  CHECK(compute_target(t, net, 0.0) == 1.0);
  t.terminal = true;
  t.reward = -20.0;
  CHECK(compute_target(t, net, 0.9) == -20.0);
}

TEST_CASE("replay memory keeps the newest transitions in order") {
  for (std::size_t capacity : {1u, 5u, 64u}) {
    ReplayMemory mem(capacity);
    for (int i = 0; i < static_cast<int>(10 * capacity); ++i) {
      mem.push(numbered(i));
      REQUIRE(mem.size() <= capacity);
    }
    REQUIRE(mem.size() == capacity);
    for (std::size_t i = 0; i < capacity; ++i) {
      CHECK(mem.at(i) == numbered(static_cast<int>(9 * capacity + i)));
    }
  }
  ReplayMemory partial(10);
  for (int i = 0; i < 4; ++i) partial.push(numbered(i));
  CHECK(partial.size() == 4);
  CHECK(partial.at(3) == numbered(3));
  CHECK_THROWS(partial.at(4));
  Rng rng(2);
  for (std::size_t idx : partial.sample_indices(100, rng)) CHECK(idx < 4);
  partial.clear();
  CHECK(partial.empty());
  CHECK_THROWS(ReplayMemory(0));
}

TEST_CASE("trainer schedules") {
  TrainerConfig cfg;
  cfg.total_steps = 1000;
  CHECK(cfg.epsilon_at(0) == 1.0);
  CHECK(cfg.epsilon_at(400) == doctest::Approx(0.51));
  CHECK(cfg.epsilon_at(800) == doctest::Approx(0.02));
  CHECK(cfg.epsilon_at(999) == doctest::Approx(0.02));
  CHECK(cfg.learning_rate_at(0) == doctest::Approx(1e-3));
  CHECK(cfg.learning_rate_at(500) == doctest::Approx(1e-4));
  CHECK(cfg.learning_rate_at(800) == doctest::Approx(1e-5));
  CHECK(cfg.beta == 0.5);
  CHECK(cfg.batch_size == 256);
  CHECK(cfg.memory_capacity == 100000);
  CHECK(cfg.target_sync_interval == 500);
  TrainerConfig bad;
  bad.beta = 1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK(network_layout(18, 12, NetConfig{}) == std::vector<int>{18, 500, 250, 120, 12});
}

TEST_CASE("zero training steps return the initial network") {
  const FiniteMdp mdp = make_chain_mdp();
  EnvFactory factory = [mdp] { return std::make_unique<FiniteMdpEnv>(mdp, 20); };
  TrainerConfig cfg;
  cfg.total_steps = 0;
  NetConfig net{{8}};
  const TrainResult r = train(factory, cfg, net);
  CHECK(r.params == init_params(network_layout(5, 2, net), cfg.seed));
  CHECK(r.updates == 0);
  CHECK(r.log.empty());
}

TEST_CASE("updates wait for a full batch and training is deterministic") {
  const FiniteMdp mdp = make_chain_mdp();
  EnvFactory factory = [mdp] { return std::make_unique<FiniteMdpEnv>(mdp, 20); };
  TrainerConfig cfg;
  cfg.total_steps = 300;
  cfg.batch_size = 100;
  cfg.log_interval = 50;
  NetConfig net{{8}};
  const TrainResult a = train(factory, cfg, net);
  CHECK(a.updates == 300 - 99);
  CHECK(a.log.size() == 6);
  CHECK(std::isnan(a.log[0].loss));
  CHECK(a.params.all_finite());
  const TrainResult b = train(factory, cfg, net);
  CHECK(a.params == b.params);
}

TEST_CASE("tabular oracle: trivial schedules and closed form") {
  const FiniteMdp chain = make_chain_mdp();
  Rng rng(3);
  const TabularQ frozen = tabular_q_oracle(chain, [](long) { return 0.0; }, 0.9, 1000, rng);
  for (double q : frozen.q) CHECK(q == 0.0);

  FiniteMdp bandit;
  bandit.num_states = 1;
  bandit.num_actions = 2;
  bandit.reward = {1.0, 0.0};
  bandit.next = {{{1.0, 0}}, {{1.0, 0}}};
  const TabularQ q = tabular_q_oracle(bandit, [](long n) { return 1.0 / static_cast<double>(n); }, 0.0, 2000, rng);
  CHECK(q.at(0, 0) == doctest::Approx(1.0));
  CHECK(q.at(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("tabular oracle matches value iteration on the chain and random MDPs") {
  const FiniteMdp chain = make_chain_mdp();
  const TabularQ exact = value_iteration(chain, 0.9);
  CHECK(exact.greedy_policy() == std::vector<int>{0, 1, 1, 1, 1});
  // Closed form: right-pressing in state 4 earns 1/(1-0.9).
  CHECK(exact.at(4, 1) == doctest::Approx(10.0).epsilon(1e-9));
  Rng rng(4);
  const TabularQ learned = tabular_q_oracle(chain, [](long) { return 0.5; }, 0.9, 200000, rng);
  CHECK(max_abs_difference(exact, learned) < 1e-3);

  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const FiniteMdp mdp = make_random_mdp(6, 3, seed);
    const TabularQ star = value_iteration(mdp, 0.8);
    Rng r(seed);
    const TabularQ q = tabular_q_oracle(mdp, [](long) { return 0.5; }, 0.8, 300000, r);
    CHECK(max_abs_difference(star, q) < 1e-3);
  }
}

TEST_CASE("DQN learns the optimal chain policy") {
  const FiniteMdp chain = make_chain_mdp();
  const double beta = 0.9;
  EnvFactory factory = [chain] { return std::make_unique<FiniteMdpEnv>(chain, 20); };
  TrainerConfig cfg;
  cfg.beta = beta;
  cfg.total_steps = 6000;
  cfg.batch_size = 32;
  cfg.memory_capacity = 5000;
  cfg.target_sync_interval = 100;
  NetConfig net{{32, 32}};
  const TrainResult r = train(factory, cfg, net);
  const auto optimal = value_iteration(chain, beta).greedy_policy();
  for (int s = 0; s < chain.num_states; ++s) {
    std::vector<double> one_hot(5, 0.0);
    one_hot[static_cast<std::size_t>(s)] = 1.0;
    const Eigen::VectorXd q = forward(r.params, one_hot);
    CHECK(argmax(std::span<const double>(q.data(), 2)) == optimal[static_cast<std::size_t>(s)]);
  }
}
