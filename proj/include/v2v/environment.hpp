#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "v2v/channel.hpp"
#include "v2v/geometry.hpp"
#include "v2v/mdp.hpp"
#include "v2v/rng.hpp"

namespace v2v {

inline constexpr int kPowerLevels = 3;

struct EnvConfig {
  int num_cues = 20;        // M
  int num_subbands = 20;    // N_RB, one per CUE
  int num_links = 20;       // K agents
  double bandwidth_hz = 10e6;  // split evenly over the sub-bands
  double cue_power_dbm = 23.0;
  std::array<double, kPowerLevels> power_levels_dbm{23.0, 10.0, 5.0};
  double noise_dbm = -114.0;  // per sub-band
  int deadline_ms = 100;
  int slot_ms = 1;
  double payload_bits = 16960.0;
  double penalty = -20.0;
  double lambda_v2i = 1e-6;

  // Vehicle drop and motion.
  RoadGrid grid;
  double vehicle_density = 0.004;  // vehicles per meter of lane
  double speed_mps = kDefaultSpeedMps;
  TurnProbabilities turns;
  int max_drop_attempts = 100;

  ChannelConfig channel;

  // Observation scaling: value_db -> (value_db - ref) / scale.
  double obs_gain_ref_db = -80.0;
  double obs_gain_scale_db = 20.0;
  double obs_bs_gain_ref_db = -100.0;
  double obs_bs_gain_scale_db = 20.0;
  double obs_interference_ref_dbm = -90.0;
  double obs_interference_scale_db = 30.0;

  bool operator==(const EnvConfig&) const = default;

  void validate() const;
  double subband_bandwidth_hz() const { return bandwidth_hz / num_subbands; }
  int episode_slots() const { return deadline_ms / slot_ms; }
  int observation_size() const { return 4 * num_subbands + 2; }
  int num_actions() const { return kPowerLevels * num_subbands; }
  double noise_watts() const { return dbm_to_watts(noise_dbm); }
  double cue_power_watts() const { return dbm_to_watts(cue_power_dbm); }
  double power_watts(int level) const { return dbm_to_watts(power_levels_dbm[static_cast<std::size_t>(level)]); }
};

struct Action {
  int sub_band = 0;
  int power_level = 0;  // 0 is the highest power

  int flat() const { return sub_band * kPowerLevels + power_level; }
  static Action from_flat(int flat) { return Action{flat / kPowerLevels, flat % kPowerLevels}; }
  bool operator==(const Action&) const = default;
};

// s_t = [g_t, I_{t-1}, h_t, S_{t-1}, L_t, R_t]
struct Observation {
  std::vector<double> own_gain;      // own V2V gain per sub-band, scaled dB
  std::vector<double> interference;  // received co-channel power last slot, scaled dBm
  std::vector<double> bs_gain;       // own transmitter -> BS gain per sub-band, scaled dB
  std::vector<double> neighbor_use;  // neighbors on each sub-band last slot, divided by 3
  double remaining_load = 0.0;       // in [0, 1]
  double remaining_time = 0.0;       // in [0, 1]

  std::vector<double> flatten() const;
  void flatten_into(std::span<double> out) const;
};

struct LinkLoadState {
  double remaining_bits = 0.0;
  int remaining_ms = 0;
  bool failed = false;
  bool delivered = false;

  bool terminal() const { return failed || delivered; }
};

struct StepOutcome {
  int agent = 0;
  double reward = 0.0;
  bool terminal = false;
  Observation next_observation;
};

// Sub-band per link; -1 marks a link that is not transmitting.
using Allocation = std::vector<int>;

// Uplink SINR of every CUE (CUE m owns sub-band m).
std::vector<double> cue_sinr(const LinkGainMatrix& gains, std::span<const int> allocation,
                             std::span<const double> v2v_power_w, double cue_power_w, double noise_w);

double cue_capacity(double sinr, double bandwidth_hz);

// SINR at the receiver of link k on its allocated sub-band.
double v2v_sinr(const LinkGainMatrix& gains, std::span<const int> allocation, std::span<const double> v2v_power_w,
                int link, double cue_power_w, double noise_w);

// Per-slot reward: lambda * sum(C_m) while the latency constraint holds, penalty on the breach slot.
double slot_reward(bool satisfied, std::span<const double> cue_capacities, const EnvConfig& cfg);

struct SlotAgentRecord {
  int agent = 0;
  Action action;
  double reward = 0.0;
  double sinr = 0.0;
  double capacity_bps = 0.0;
  double remaining_bits = 0.0;
  bool terminal = false;
};

struct SlotRecord {
  int slot = 0;
  std::vector<double> cue_sinr;
  std::vector<double> cue_capacity_bps;
  double sum_cue_capacity_bps = 0.0;
  std::vector<SlotAgentRecord> agents;  // in submission order
};

// One cell with M CUEs and K V2V links. Fresh vehicle drop, topology and
// large-scale fading on every reset; fast fading redrawn every slot.
class V2VEnvironment : public MultiAgentEnv {
 public:
  explicit V2VEnvironment(EnvConfig cfg);
  V2VEnvironment(EnvConfig cfg, std::uint64_t seed);

  void reset(std::uint64_t seed) override;
  int num_agents() const override { return cfg_.num_links; }
  int observation_size() const override { return cfg_.observation_size(); }
  int num_actions() const override { return cfg_.num_actions(); }
  bool agent_active(int agent) const override;
  bool episode_over() const override { return slot_ >= cfg_.episode_slots(); }
  void observe_into(int agent, std::span<double> out) const override;
  void submit(int agent, int flat_action) override;
  std::vector<AgentStep> advance() override;

  Observation observe(int agent) const;
  void submit(int agent, Action action);
  // Resolves the slot and returns outcomes for the agents that acted.
  std::vector<StepOutcome> step_slot();
  // Convenience: submit actions for all active agents (indexed by agent) and resolve the slot.
  std::vector<StepOutcome> step(std::span<const Action> actions);

  const EnvConfig& config() const { return cfg_; }
  int slot() const { return slot_; }
  bool all_terminal() const;
  const LinkLoadState& load(int agent) const { return loads_.at(static_cast<std::size_t>(agent)); }
  const LinkGainMatrix& gains() const { return gains_; }
  const LargeScaleState& large_scale() const { return large_scale_; }
  const LinkPlacement& placement() const { return placement_; }
  const std::vector<Vehicle>& vehicles() const { return vehicles_; }
  const std::vector<Vehicle>& cues() const { return cues_; }
  const std::vector<V2VLink>& links() const { return links_; }
  const std::vector<std::vector<int>>& neighbors() const { return neighbors_; }
  // Interference at each receiver in the previous slot, watts, [k][b].
  const std::vector<std::vector<double>>& previous_interference() const { return prev_interference_; }
  const std::optional<SlotRecord>& last_slot() const { return last_slot_; }
  std::vector<Point> link_midpoints() const;

 private:
  void refresh_gains();

  EnvConfig cfg_;
  std::uint64_t seed_ = 0;
  Rng fading_rng_;
  Rng mobility_rng_;
  std::vector<Vehicle> vehicles_;
  std::vector<Vehicle> cues_;
  std::vector<V2VLink> links_;
  std::vector<std::vector<int>> neighbors_;
  LinkPlacement placement_;
  LargeScaleState large_scale_;
  FastFadingSample fading_;
  LinkGainMatrix gains_;
  std::vector<LinkLoadState> loads_;
  std::vector<std::optional<Action>> pending_;
  std::vector<int> submit_order_;
  std::vector<std::vector<double>> prev_interference_;
  std::vector<std::vector<int>> prev_neighbor_counts_;
  std::optional<SlotRecord> last_slot_;
  int slot_ = 0;
};

}  // namespace v2v
