#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace v2v {

// Result handed back to one agent after the slot it acted in is resolved.
struct AgentStep {
  int agent = 0;
  double reward = 0.0;
  bool terminal = false;
};

// Minimal multi-agent episodic interface the DQN trainer runs against. Agents
// act one at a time through submit(); advance() resolves the slot once every
// active agent has submitted.
class MultiAgentEnv {
 public:
  virtual ~MultiAgentEnv() = default;

  virtual void reset(std::uint64_t seed) = 0;
  virtual int num_agents() const = 0;
  virtual int observation_size() const = 0;
  virtual int num_actions() const = 0;
  virtual bool agent_active(int agent) const = 0;
  virtual bool episode_over() const = 0;
  virtual void observe_into(int agent, std::span<double> out) const = 0;
  virtual void submit(int agent, int flat_action) = 0;
  virtual std::vector<AgentStep> advance() = 0;
};

using EnvFactory = std::function<std::unique_ptr<MultiAgentEnv>()>;

}  // namespace v2v
