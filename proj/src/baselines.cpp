#include "v2v/baselines.hpp"

#include <algorithm>
#include <limits>

#include "v2v/errors.hpp"

namespace v2v {

Action random_policy(int num_subbands, Rng& rng) {
  if (num_subbands < 1) throw ContractViolation("need at least one sub-band");
  std::uniform_int_distribution<int> pick(0, num_subbands - 1);
  return Action{pick(rng), 0};
}

std::vector<double> allocation_sinr(const LinkGainMatrix& gains, std::span<const int> allocation,
                                    std::span<const double> power_w, double cue_power_w, double noise_w) {
  std::vector<double> out(allocation.size());
  for (std::size_t k = 0; k < allocation.size(); ++k) {
    out[k] = v2v_sinr(gains, allocation, power_w, static_cast<int>(k), cue_power_w, noise_w);
  }
  return out;
}

namespace {

std::vector<std::vector<int>> kmeans_groups(std::span<const Point> pts, int groups) {
  const int n = static_cast<int>(pts.size());
  // Farthest-point seeding from link 0 keeps the result deterministic.
  std::vector<Point> centers{pts[0]};
  while (static_cast<int>(centers.size()) < groups) {
    int best = 0;
    double best_d = -1.0;
    for (int i = 0; i < n; ++i) {
      double d = std::numeric_limits<double>::infinity();
      for (const Point& c : centers) d = std::min(d, distance(pts[static_cast<std::size_t>(i)], c));
      if (d > best_d) {
        best_d = d;
        best = i;
      }
    }
    centers.push_back(pts[static_cast<std::size_t>(best)]);
  }

  std::vector<int> label(static_cast<std::size_t>(n), -1);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int g = 0; g < groups; ++g) {
        const double d = distance(pts[static_cast<std::size_t>(i)], centers[static_cast<std::size_t>(g)]);
        if (d < best_d) {
          best_d = d;
          best = g;
        }
      }
      if (label[static_cast<std::size_t>(i)] != best) {
        label[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<Point> sum(static_cast<std::size_t>(groups));
    std::vector<int> count(static_cast<std::size_t>(groups), 0);
    for (int i = 0; i < n; ++i) {
      const auto g = static_cast<std::size_t>(label[static_cast<std::size_t>(i)]);
      sum[g].x += pts[static_cast<std::size_t>(i)].x;
      sum[g].y += pts[static_cast<std::size_t>(i)].y;
      ++count[g];
    }
    for (std::size_t g = 0; g < centers.size(); ++g) {
      if (count[g] > 0) centers[g] = Point{sum[g].x / count[g], sum[g].y / count[g]};
    }
  }

  std::vector<std::vector<int>> out(static_cast<std::size_t>(groups));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(label[static_cast<std::size_t>(i)])].push_back(i);
  // Drop empty groups (possible only with coincident midpoints).
  out.erase(std::remove_if(out.begin(), out.end(), [](const auto& g) { return g.empty(); }), out.end());
  return out;
}

double min_over(const std::vector<double>& sinr, const std::vector<int>& members) {
  double m = std::numeric_limits<double>::infinity();
  for (int k : members) m = std::min(m, sinr[static_cast<std::size_t>(k)]);
  return m;
}

double min_all(const std::vector<double>& sinr) {
  return sinr.empty() ? 0.0 : *std::min_element(sinr.begin(), sinr.end());
}

}  // namespace

ClusterAssignment cluster_allocate(std::span<const Point> link_positions, const LinkGainMatrix& gains,
                                   std::span<const double> power_w, double cue_power_w, double noise_w,
                                   int num_subbands, int max_iters) {
  if (num_subbands < 1) throw ContractViolation("need at least one sub-band");
  if (max_iters < 0) throw ContractViolation("max_iters must be >= 0");
  const int k_count = static_cast<int>(link_positions.size());
  if (k_count != gains.num_links() || power_w.size() != link_positions.size())
    throw ContractViolation("link positions, gains and powers disagree on the link count");
  ClusterAssignment out;
  if (k_count == 0) return out;

  out.clusters = kmeans_groups(link_positions, std::min(num_subbands, k_count));
  out.rb_of_link.assign(static_cast<std::size_t>(k_count), 0);
  for (std::size_t g = 0; g < out.clusters.size(); ++g) {
    for (std::size_t i = 0; i < out.clusters[g].size(); ++i) {
      out.rb_of_link[static_cast<std::size_t>(out.clusters[g][i])] = static_cast<int>((g + i) % num_subbands);
    }
  }

  std::vector<int>& alloc = out.rb_of_link;
  std::vector<double> sinr = allocation_sinr(gains, alloc, power_w, cue_power_w, noise_w);
  for (int iter = 0; iter < max_iters; ++iter) {
    bool improved = false;
    for (const std::vector<int>& group : out.clusters) {
      const double group_min = min_over(sinr, group);
      const double global_min = min_all(sinr);
      double best_value = group_min;
      std::vector<int> best_alloc;
      std::vector<double> best_sinr;
      auto consider = [&](std::vector<int> candidate) {
        std::vector<double> s = allocation_sinr(gains, candidate, power_w, cue_power_w, noise_w);
        const double gm = min_over(s, group);
        if (gm > best_value && min_all(s) >= global_min) {
          best_value = gm;
          best_alloc = std::move(candidate);
          best_sinr = std::move(s);
        }
      };
      for (std::size_t a = 0; a < group.size(); ++a) {
        const auto la = static_cast<std::size_t>(group[a]);
        for (std::size_t b = a + 1; b < group.size(); ++b) {
          const auto lb = static_cast<std::size_t>(group[b]);
          if (alloc[la] == alloc[lb]) continue;
          std::vector<int> candidate = alloc;
          std::swap(candidate[la], candidate[lb]);
          consider(std::move(candidate));
        }
        for (int band = 0; band < num_subbands; ++band) {
          const bool used = std::any_of(group.begin(), group.end(),
                                        [&](int k) { return alloc[static_cast<std::size_t>(k)] == band; });
          if (used) continue;
          std::vector<int> candidate = alloc;
          candidate[la] = band;
          consider(std::move(candidate));
        }
      }
      if (!best_alloc.empty()) {
        alloc = std::move(best_alloc);
        sinr = std::move(best_sinr);
        ++out.moves_applied;
        improved = true;
      }
    }
    out.iterations = iter + 1;
    if (!improved) break;
  }
  return out;
}

std::vector<Action> RandomPolicy::act(const V2VEnvironment& env, std::span<const int> agents, Rng& rng) {
  std::vector<Action> out;
  out.reserve(agents.size());
  for (std::size_t i = 0; i < agents.size(); ++i) out.push_back(random_policy(env.config().num_subbands, rng));
  return out;
}

void ClusterPolicy::begin_episode(const V2VEnvironment& env, Rng& /*rng*/) {
  const EnvConfig& cfg = env.config();
  const LinkGainMatrix expected =
      assemble_gains(env.large_scale(), FastFadingSample::unit(cfg.num_cues, cfg.num_links, cfg.num_subbands));
  const std::vector<double> power(static_cast<std::size_t>(cfg.num_links), cfg.power_watts(0));
  const std::vector<Point> mids = env.link_midpoints();
  assignment_ = cluster_allocate(mids, expected, power, cfg.cue_power_watts(), cfg.noise_watts(), cfg.num_subbands,
                                 max_iters_);
}

std::vector<Action> ClusterPolicy::act(const V2VEnvironment& /*env*/, std::span<const int> agents, Rng& /*rng*/) {
  std::vector<Action> out;
  out.reserve(agents.size());
  for (int k : agents) out.push_back(Action{assignment_.rb_of_link.at(static_cast<std::size_t>(k)), 0});
  return out;
}

}  // namespace v2v
