#include "v2v/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <tuple>

#include "v2v/errors.hpp"

namespace v2v {

void EnvConfig::validate() const {
  if (num_cues < 1 || num_subbands < 1) throw ConfigError("need at least one CUE and one sub-band");
  if (num_cues != num_subbands) throw ConfigError("each CUE owns one sub-band: num_cues must equal num_subbands");
  if (num_links < 1) throw ConfigError("need at least one V2V link");
  if (!(bandwidth_hz > 0.0)) throw ConfigError("bandwidth must be positive");
  if (slot_ms < 1 || deadline_ms < slot_ms) throw ConfigError("need 1 <= slot_ms <= deadline_ms");
  if (deadline_ms % slot_ms != 0) throw ConfigError("deadline_ms must be a multiple of slot_ms");
  if (!(payload_bits >= 0.0) || !std::isfinite(payload_bits)) throw ConfigError("payload_bits must be >= 0");
  if (!(penalty < 0.0)) throw ConfigError("latency penalty must be negative");
  if (!(lambda_v2i >= 0.0)) throw ConfigError("lambda_v2i must be >= 0");
  if (!(vehicle_density >= 0.0)) throw ConfigError("vehicle density must be >= 0");
  if (!(speed_mps >= 0.0)) throw ConfigError("speed must be >= 0");
  if (max_drop_attempts < 1) throw ConfigError("max_drop_attempts must be >= 1");
  if (!(obs_gain_scale_db > 0.0) || !(obs_bs_gain_scale_db > 0.0) || !(obs_interference_scale_db > 0.0))
    throw ConfigError("observation scales must be positive");
  grid.validate();
  turns.validate();
  channel.validate();
}

std::vector<double> Observation::flatten() const {
  std::vector<double> out(own_gain.size() * 4 + 2);
  flatten_into(out);
  return out;
}

void Observation::flatten_into(std::span<double> out) const {
  const std::size_t n = own_gain.size();
  if (out.size() != 4 * n + 2) throw ContractViolation("observation buffer has the wrong length");
  std::copy(own_gain.begin(), own_gain.end(), out.begin());
  std::copy(interference.begin(), interference.end(), out.begin() + static_cast<std::ptrdiff_t>(n));
  std::copy(bs_gain.begin(), bs_gain.end(), out.begin() + static_cast<std::ptrdiff_t>(2 * n));
  std::copy(neighbor_use.begin(), neighbor_use.end(), out.begin() + static_cast<std::ptrdiff_t>(3 * n));
  out[4 * n] = remaining_load;
  out[4 * n + 1] = remaining_time;
}

std::vector<double> cue_sinr(const LinkGainMatrix& gains, std::span<const int> allocation,
                             std::span<const double> v2v_power_w, double cue_power_w, double noise_w) {
  const int m_count = gains.num_cues();
  std::vector<double> interference(static_cast<std::size_t>(m_count), 0.0);
  for (int k = 0; k < gains.num_links(); ++k) {
    const int band = allocation[static_cast<std::size_t>(k)];
    if (band < 0 || band >= m_count) continue;
    interference[static_cast<std::size_t>(band)] += v2v_power_w[static_cast<std::size_t>(k)] * gains.h_tilde(k, band);
  }
  std::vector<double> out(static_cast<std::size_t>(m_count));
  for (int m = 0; m < m_count; ++m) {
    out[static_cast<std::size_t>(m)] = cue_power_w * gains.h(m, m) / (noise_w + interference[static_cast<std::size_t>(m)]);
  }
  return out;
}

double cue_capacity(double sinr, double bandwidth_hz) { return bandwidth_hz * std::log2(1.0 + sinr); }

double v2v_sinr(const LinkGainMatrix& gains, std::span<const int> allocation, std::span<const double> v2v_power_w,
                int link, double cue_power_w, double noise_w) {
  const int band = allocation[static_cast<std::size_t>(link)];
  if (band < 0) return 0.0;
  double interference = noise_w;
  if (band < gains.num_cues()) interference += cue_power_w * gains.cue_to_v2v(band, link, band);
  for (int j = 0; j < gains.num_links(); ++j) {
    if (j == link || allocation[static_cast<std::size_t>(j)] != band) continue;
    interference += v2v_power_w[static_cast<std::size_t>(j)] * gains.v2v_to_v2v(j, link, band);
  }
  return v2v_power_w[static_cast<std::size_t>(link)] * gains.g(link, band) / interference;
}

double slot_reward(bool satisfied, std::span<const double> cue_capacities, const EnvConfig& cfg) {
  if (!satisfied) return cfg.penalty;
  double total = 0.0;
  for (double c : cue_capacities) total += c;
  return cfg.lambda_v2i * total;
}

V2VEnvironment::V2VEnvironment(EnvConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

V2VEnvironment::V2VEnvironment(EnvConfig cfg, std::uint64_t seed) : V2VEnvironment(std::move(cfg)) { reset(seed); }

void V2VEnvironment::reset(std::uint64_t seed) {
  seed_ = seed;
  const auto k_count = static_cast<std::size_t>(cfg_.num_links);
  const int n = cfg_.num_subbands;

  V2VTopology topo;
  bool dropped = false;
  for (int attempt = 0; attempt < cfg_.max_drop_attempts && !dropped; ++attempt) {
    vehicles_ = spawn_vehicles(cfg_.grid, cfg_.vehicle_density, derive_seed(seed, Stream::kDrop, attempt),
                               cfg_.speed_mps);
    if (vehicles_.size() < 2) continue;
    topo = build_topology(vehicles_);
    dropped = topo.links.size() >= k_count;
  }
  if (!dropped) {
    throw ConfigError("vehicle density " + std::to_string(cfg_.vehicle_density) + " cannot supply " +
                      std::to_string(cfg_.num_links) + " V2V links");
  }

  Rng select_rng = make_rng(seed, Stream::kLinkSelect);
  links_.clear();
  std::sample(topo.links.begin(), topo.links.end(), std::back_inserter(links_), static_cast<std::ptrdiff_t>(k_count),
              select_rng);

  Rng cue_rng = make_rng(seed, Stream::kCueDrop);
  cues_ = place_vehicles(cfg_.grid, cfg_.num_cues, cue_rng, cfg_.speed_mps);

  placement_ = LinkPlacement{};
  placement_.base_station = Point{cfg_.grid.width() / 2.0, cfg_.grid.height() / 2.0};
  for (const Vehicle& c : cues_) placement_.cue.push_back(c.position);
  for (const V2VLink& l : links_) {
    placement_.v2v_tx.push_back(vehicles_[static_cast<std::size_t>(l.tx)].position);
    placement_.v2v_rx.push_back(vehicles_[static_cast<std::size_t>(l.rx)].position);
  }

  // Nearest other links by transmitter distance, lower index on ties.
  neighbors_.assign(k_count, {});
  const std::size_t neighbor_count = std::min<std::size_t>(kNeighborsPerVehicle, k_count - 1);
  for (std::size_t k = 0; k < k_count; ++k) {
    std::vector<std::pair<double, int>> cand;
    for (std::size_t j = 0; j < k_count; ++j) {
      if (j != k) cand.emplace_back(distance(placement_.v2v_tx[k], placement_.v2v_tx[j]), static_cast<int>(j));
    }
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(neighbor_count), cand.end());
    for (std::size_t c = 0; c < neighbor_count; ++c) neighbors_[k].push_back(cand[c].second);
  }

  Rng large_rng = make_rng(seed, Stream::kLargeScale);
  large_scale_ = compute_large_scale(placement_, cfg_.grid, cfg_.channel, large_rng);

  fading_rng_ = make_rng(seed, Stream::kFading);
  mobility_rng_ = make_rng(seed, Stream::kMobility);
  fading_ = sample_fast_fading(cfg_.num_cues, cfg_.num_links, n, fading_rng_);
  refresh_gains();

  loads_.assign(k_count, LinkLoadState{});
  for (LinkLoadState& load : loads_) {
    load.remaining_bits = cfg_.payload_bits;
    load.remaining_ms = cfg_.deadline_ms;
    load.delivered = cfg_.payload_bits <= 0.0;
  }
  pending_.assign(k_count, std::nullopt);
  submit_order_.clear();
  prev_interference_.assign(k_count, std::vector<double>(static_cast<std::size_t>(n), cfg_.noise_watts()));
  prev_neighbor_counts_.assign(k_count, std::vector<int>(static_cast<std::size_t>(n), 0));
  last_slot_.reset();
  slot_ = 0;
}

void V2VEnvironment::refresh_gains() { gains_ = assemble_gains(large_scale_, fading_); }

bool V2VEnvironment::agent_active(int agent) const {
  return !episode_over() && !loads_.at(static_cast<std::size_t>(agent)).terminal();
}

bool V2VEnvironment::all_terminal() const {
  return std::all_of(loads_.begin(), loads_.end(), [](const LinkLoadState& l) { return l.terminal(); });
}

Observation V2VEnvironment::observe(int agent) const {
  if (agent < 0 || agent >= cfg_.num_links) throw ContractViolation("agent index out of range");
  const auto k = static_cast<std::size_t>(agent);
  const int n = cfg_.num_subbands;
  Observation obs;
  obs.own_gain.resize(static_cast<std::size_t>(n));
  obs.interference.resize(static_cast<std::size_t>(n));
  obs.bs_gain.resize(static_cast<std::size_t>(n));
  obs.neighbor_use.resize(static_cast<std::size_t>(n));
  for (int b = 0; b < n; ++b) {
    const auto bi = static_cast<std::size_t>(b);
    obs.own_gain[bi] = (linear_to_db(gains_.g(agent, b)) - cfg_.obs_gain_ref_db) / cfg_.obs_gain_scale_db;
    obs.interference[bi] =
        (watts_to_dbm(prev_interference_[k][bi]) - cfg_.obs_interference_ref_dbm) / cfg_.obs_interference_scale_db;
    obs.bs_gain[bi] = (linear_to_db(gains_.h_tilde(agent, b)) - cfg_.obs_bs_gain_ref_db) / cfg_.obs_bs_gain_scale_db;
    obs.neighbor_use[bi] = prev_neighbor_counts_[k][bi] / static_cast<double>(kNeighborsPerVehicle);
  }
  const LinkLoadState& load = loads_[k];
  obs.remaining_load = cfg_.payload_bits > 0.0 ? std::clamp(load.remaining_bits / cfg_.payload_bits, 0.0, 1.0) : 0.0;
  obs.remaining_time = std::clamp(static_cast<double>(load.remaining_ms) / cfg_.deadline_ms, 0.0, 1.0);
  return obs;
}

void V2VEnvironment::observe_into(int agent, std::span<double> out) const { observe(agent).flatten_into(out); }

void V2VEnvironment::submit(int agent, Action action) {
  if (agent < 0 || agent >= cfg_.num_links) throw ContractViolation("agent index out of range");
  if (action.sub_band < 0 || action.sub_band >= cfg_.num_subbands || action.power_level < 0 ||
      action.power_level >= kPowerLevels)
    throw ContractViolation("action out of range");
  if (!agent_active(agent)) throw ContractViolation("agent " + std::to_string(agent) + " is terminal");
  auto& slot = pending_[static_cast<std::size_t>(agent)];
  if (slot.has_value()) throw ContractViolation("agent already acted this slot");
  slot = action;
  submit_order_.push_back(agent);
}

void V2VEnvironment::submit(int agent, int flat_action) {
  if (flat_action < 0 || flat_action >= cfg_.num_actions()) throw ContractViolation("action out of range");
  submit(agent, Action::from_flat(flat_action));
}

std::vector<StepOutcome> V2VEnvironment::step_slot() {
  if (episode_over()) throw ContractViolation("episode is over; call reset()");
  const int k_count = cfg_.num_links;
  const int n = cfg_.num_subbands;
  for (int k = 0; k < k_count; ++k) {
    if (agent_active(k) && !pending_[static_cast<std::size_t>(k)].has_value())
      throw ContractViolation("agent " + std::to_string(k) + " has not acted this slot");
  }

  Allocation allocation(static_cast<std::size_t>(k_count), -1);
  std::vector<double> power_w(static_cast<std::size_t>(k_count), 0.0);
  for (int k = 0; k < k_count; ++k) {
    const auto& a = pending_[static_cast<std::size_t>(k)];
    if (!a) continue;
    allocation[static_cast<std::size_t>(k)] = a->sub_band;
    power_w[static_cast<std::size_t>(k)] = cfg_.power_watts(a->power_level);
  }
  const double noise = cfg_.noise_watts();
  const double cue_power = cfg_.cue_power_watts();
  const double w = cfg_.subband_bandwidth_hz();

  SlotRecord record;
  record.slot = slot_;
  record.cue_sinr = cue_sinr(gains_, allocation, power_w, cue_power, noise);
  for (double s : record.cue_sinr) record.cue_capacity_bps.push_back(cue_capacity(s, w));
  record.sum_cue_capacity_bps = std::accumulate(record.cue_capacity_bps.begin(), record.cue_capacity_bps.end(), 0.0);

  // Received co-channel power (noise + CUE + other transmitting links) at every receiver.
  for (int k = 0; k < k_count; ++k) {
    auto& row = prev_interference_[static_cast<std::size_t>(k)];
    for (int b = 0; b < n; ++b) row[static_cast<std::size_t>(b)] = noise + cue_power * gains_.cue_to_v2v(b, k, b);
    for (int j = 0; j < k_count; ++j) {
      const int band = allocation[static_cast<std::size_t>(j)];
      if (j == k || band < 0) continue;
      row[static_cast<std::size_t>(band)] += power_w[static_cast<std::size_t>(j)] * gains_.v2v_to_v2v(j, k, band);
    }
    auto& counts = prev_neighbor_counts_[static_cast<std::size_t>(k)];
    std::fill(counts.begin(), counts.end(), 0);
    for (int j : neighbors_[static_cast<std::size_t>(k)]) {
      const int band = allocation[static_cast<std::size_t>(j)];
      if (band >= 0) ++counts[static_cast<std::size_t>(band)];
    }
  }

  std::vector<double> agent_sinr(static_cast<std::size_t>(k_count), 0.0);
  std::vector<double> agent_capacity(static_cast<std::size_t>(k_count), 0.0);
  std::vector<bool> failed_now(static_cast<std::size_t>(k_count), false);
  for (int k : submit_order_) {
    const auto ki = static_cast<std::size_t>(k);
    agent_sinr[ki] = v2v_sinr(gains_, allocation, power_w, k, cue_power, noise);
    agent_capacity[ki] = cue_capacity(agent_sinr[ki], w);
    LinkLoadState& load = loads_[ki];
    load.remaining_bits = std::max(0.0, load.remaining_bits - agent_capacity[ki] * cfg_.slot_ms / 1000.0);
    load.remaining_ms -= cfg_.slot_ms;
    if (load.remaining_bits <= 0.0) {
      load.delivered = true;
    } else if (load.remaining_ms <= 0) {
      load.failed = true;
      failed_now[ki] = true;
    }
  }

  for (int k : submit_order_) {
    const auto ki = static_cast<std::size_t>(k);
    SlotAgentRecord rec;
    rec.agent = k;
    rec.action = *pending_[ki];
    rec.reward = slot_reward(!failed_now[ki], record.cue_capacity_bps, cfg_);
    rec.sinr = agent_sinr[ki];
    rec.capacity_bps = agent_capacity[ki];
    rec.remaining_bits = loads_[ki].remaining_bits;
    rec.terminal = loads_[ki].terminal();
    record.agents.push_back(rec);
  }

  ++slot_;
  std::fill(pending_.begin(), pending_.end(), std::nullopt);
  submit_order_.clear();
  resample_fast_fading(fading_, fading_rng_);
  refresh_gains();
  vehicles_ = step_mobility(std::move(vehicles_), cfg_.grid, cfg_.slot_ms / 1000.0, cfg_.turns, mobility_rng_);

  std::vector<StepOutcome> outcomes;
  outcomes.reserve(record.agents.size());
  for (const SlotAgentRecord& rec : record.agents) {
    outcomes.push_back(StepOutcome{rec.agent, rec.reward, rec.terminal, observe(rec.agent)});
  }
  last_slot_ = std::move(record);
  return outcomes;
}

std::vector<AgentStep> V2VEnvironment::advance() {
  std::vector<AgentStep> out;
  for (const StepOutcome& o : step_slot()) out.push_back(AgentStep{o.agent, o.reward, o.terminal});
  return out;
}

std::vector<StepOutcome> V2VEnvironment::step(std::span<const Action> actions) {
  if (actions.size() != static_cast<std::size_t>(cfg_.num_links))
    throw ContractViolation("need one action per agent");
  for (int k = 0; k < cfg_.num_links; ++k) {
    if (agent_active(k)) submit(k, actions[static_cast<std::size_t>(k)]);
  }
  return step_slot();
}

std::vector<Point> V2VEnvironment::link_midpoints() const {
  std::vector<Point> out;
  for (std::size_t k = 0; k < placement_.v2v_tx.size(); ++k) {
    out.push_back(Point{(placement_.v2v_tx[k].x + placement_.v2v_rx[k].x) / 2.0,
                        (placement_.v2v_tx[k].y + placement_.v2v_rx[k].y) / 2.0});
  }
  return out;
}

}  // namespace v2v
