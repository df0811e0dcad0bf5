#include "v2v/policy.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "v2v/errors.hpp"

namespace v2v {

EpisodeOutcome run_episode(V2VEnvironment& env, AllocationPolicy& policy, Rng& policy_rng,
                           std::vector<TraceRow>* trace) {
  policy.begin_episode(env, policy_rng);
  EpisodeOutcome outcome;
  outcome.links = env.num_agents();
  double rate_sum = 0.0;
  int slots = 0;
  std::vector<int> order;
  while (!env.episode_over()) {
    order.clear();
    for (int k = 0; k < env.num_agents(); ++k) {
      if (env.agent_active(k)) order.push_back(k);
    }
    std::shuffle(order.begin(), order.end(), policy_rng);
    const std::vector<Action> actions = policy.act(env, order, policy_rng);
    if (actions.size() != order.size()) throw ContractViolation("policy returned the wrong number of actions");
    for (std::size_t i = 0; i < order.size(); ++i) env.submit(order[i], actions[i]);
    env.step_slot();
    const SlotRecord& rec = *env.last_slot();
    rate_sum += rec.sum_cue_capacity_bps / static_cast<double>(rec.cue_capacity_bps.size());
    ++slots;
    for (const SlotAgentRecord& a : rec.agents) {
      outcome.total_reward += a.reward;
      if (trace) {
        trace->push_back(TraceRow{rec.slot, a.agent, a.action.sub_band, a.action.power_level, a.reward, a.sinr,
                                  a.remaining_bits});
      }
    }
  }
  outcome.mean_v2i_rate_bps = slots > 0 ? rate_sum / slots : 0.0;
  for (int k = 0; k < env.num_agents(); ++k) outcome.delivered += env.load(k).delivered ? 1 : 0;
  return outcome;
}

int default_thread_count() {
  if (const char* env = std::getenv("SIM_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

std::vector<EpisodeOutcome> evaluate_policy(const EnvConfig& cfg, const PolicyFactory& factory, int episodes,
                                            std::uint64_t master_seed, int threads) {
  if (episodes <= 0) return {};
  std::vector<EpisodeOutcome> out(static_cast<std::size_t>(episodes));
  const int workers = std::clamp(threads > 0 ? threads : default_thread_count(), 1, episodes);

  auto run_range = [&](int worker) {
    V2VEnvironment env(cfg);
    auto policy = factory();
    for (int e = worker; e < episodes; e += workers) {
      env.reset(derive_seed(master_seed, Stream::kEpisode, static_cast<std::uint64_t>(e)));
      Rng rng = make_rng(master_seed, Stream::kPolicy, static_cast<std::uint64_t>(e));
      out[static_cast<std::size_t>(e)] = run_episode(env, *policy, rng);
    }
  };

  if (workers == 1) {
    run_range(0);
    return out;
  }
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        run_range(w);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace v2v
