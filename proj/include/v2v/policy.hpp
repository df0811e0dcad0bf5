#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "v2v/environment.hpp"
#include "v2v/metrics.hpp"

namespace v2v {

// A decision rule shared by all agents of one episode.
class AllocationPolicy {
 public:
  virtual ~AllocationPolicy() = default;
  virtual std::string name() const = 0;
  virtual void begin_episode(const V2VEnvironment& /*env*/, Rng& /*rng*/) {}
  // One action per listed agent, in the same order.
  virtual std::vector<Action> act(const V2VEnvironment& env, std::span<const int> agents, Rng& rng) = 0;
};

using PolicyFactory = std::function<std::unique_ptr<AllocationPolicy>()>;

// One CSV row per slot per acting agent.
struct TraceRow {
  int slot = 0;
  int agent = 0;
  int sub_band = 0;
  int power_level = 0;
  double reward = 0.0;
  double sinr_v2v = 0.0;
  double remaining_bits = 0.0;
};

// Runs the current episode of `env` (already reset) to its deadline. Agents act
// in a freshly shuffled order each slot.
EpisodeOutcome run_episode(V2VEnvironment& env, AllocationPolicy& policy, Rng& policy_rng,
                           std::vector<TraceRow>* trace = nullptr);

// Evaluates `episodes` episodes. Episode e uses environment seed
// derive_seed(master, kEpisode, e) and policy stream derive_seed(master, kPolicy, e),
// so every policy sees the same drops and fading (common random numbers).
std::vector<EpisodeOutcome> evaluate_policy(const EnvConfig& cfg, const PolicyFactory& factory, int episodes,
                                            std::uint64_t master_seed, int threads = 0);

// SIM_THREADS if set and positive, otherwise hardware concurrency.
int default_thread_count();

}  // namespace v2v
