#include "v2v/metrics.hpp"

#include <cmath>

#include "v2v/errors.hpp"

namespace v2v {

double success_probability(std::span<const EpisodeOutcome> outcomes) {
  if (outcomes.empty()) throw MetricsError("success probability needs at least one episode outcome");
  long delivered = 0;
  long total = 0;
  for (const EpisodeOutcome& o : outcomes) {
    delivered += o.delivered;
    total += o.links;
  }
  if (total == 0) throw MetricsError("episode outcomes contain no links");
  return static_cast<double>(delivered) / static_cast<double>(total);
}

namespace {

double standard_error(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
}

}  // namespace

MetricsRecord summarize(std::span<const EpisodeOutcome> outcomes, int num_links, std::string policy,
                        std::uint64_t seed) {
  MetricsRecord rec;
  rec.num_links = num_links;
  rec.policy = std::move(policy);
  rec.seed = seed;
  rec.episodes = static_cast<int>(outcomes.size());
  if (outcomes.empty()) return rec;
  std::vector<double> rates, fractions;
  for (const EpisodeOutcome& o : outcomes) {
    rates.push_back(o.mean_v2i_rate_bps);
    fractions.push_back(o.links > 0 ? static_cast<double>(o.delivered) / o.links : 0.0);
    rec.mean_v2i_rate_bps += o.mean_v2i_rate_bps;
  }
  rec.mean_v2i_rate_bps /= static_cast<double>(outcomes.size());
  rec.success_prob = success_probability(outcomes);
  rec.v2i_rate_stderr = standard_error(rates);
  rec.success_stderr = standard_error(fractions);
  rec.valid = true;
  return rec;
}

}  // namespace v2v
