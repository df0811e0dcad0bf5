#pragma once

#include <span>
#include <vector>

#include "v2v/channel.hpp"
#include "v2v/environment.hpp"
#include "v2v/geometry.hpp"
#include "v2v/policy.hpp"

namespace v2v {

// Uniform sub-band, maximum power.
Action random_policy(int num_subbands, Rng& rng);

struct ClusterAssignment {
  std::vector<std::vector<int>> clusters;  // disjoint cover of the links, members ascending
  std::vector<int> rb_of_link;
  int iterations = 0;
  int moves_applied = 0;
};

// Position-based clustering allocator with intra-group refinement:
//  1. k-means on link midpoints into min(N_RB, K) groups;
//  2. round-robin sub-bands inside each group (group g starts at band g);
//  3. per iteration, each group applies its best move (exchange the bands of two
//     members, or move one member to a band unused by its group) provided the
//     group's minimum V2V SINR strictly increases and the network-wide minimum
//     does not drop. Stops at a local optimum or after max_iters iterations.
// SINRs use the supplied gains with every link transmitting at `power_w`.
ClusterAssignment cluster_allocate(std::span<const Point> link_positions, const LinkGainMatrix& gains,
                                   std::span<const double> power_w, double cue_power_w, double noise_w,
                                   int num_subbands, int max_iters);

// Per-link V2V SINR for a full allocation.
std::vector<double> allocation_sinr(const LinkGainMatrix& gains, std::span<const int> allocation,
                                    std::span<const double> power_w, double cue_power_w, double noise_w);

class RandomPolicy : public AllocationPolicy {
 public:
  std::string name() const override { return "random"; }
  std::vector<Action> act(const V2VEnvironment& env, std::span<const int> agents, Rng& rng) override;
};

// Allocates once per episode from large-scale (fading-averaged) gains.
class ClusterPolicy : public AllocationPolicy {
 public:
  explicit ClusterPolicy(int max_iters = 50) : max_iters_(max_iters) {}
  std::string name() const override { return "cluster"; }
  void begin_episode(const V2VEnvironment& env, Rng& rng) override;
  std::vector<Action> act(const V2VEnvironment& env, std::span<const int> agents, Rng& rng) override;
  const ClusterAssignment& assignment() const { return assignment_; }

 private:
  int max_iters_;
  ClusterAssignment assignment_;
};

}  // namespace v2v
