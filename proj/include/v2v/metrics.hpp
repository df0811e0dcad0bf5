#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace v2v {

struct EpisodeOutcome {
  int links = 0;
  int delivered = 0;
  double mean_v2i_rate_bps = 0.0;  // per-CUE capacity averaged over the episode's slots
  double total_reward = 0.0;       // summed over agents and slots
};

struct MetricsRecord {
  int num_links = 0;  // K
  std::string policy;
  double mean_v2i_rate_bps = 0.0;
  double success_prob = 0.0;
  int episodes = 0;
  std::uint64_t seed = 0;
  bool valid = false;
  // Standard errors across episodes; not written to CSV.
  double v2i_rate_stderr = 0.0;
  double success_stderr = 0.0;
};

// Delivered link-episodes over all link-episodes.
double success_probability(std::span<const EpisodeOutcome> outcomes);

MetricsRecord summarize(std::span<const EpisodeOutcome> outcomes, int num_links, std::string policy,
                        std::uint64_t seed);

}  // namespace v2v
