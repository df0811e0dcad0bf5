#pragma once

#include <cstddef>
#include <vector>

#include "v2v/geometry.hpp"
#include "v2v/rng.hpp"

namespace v2v {

// Parametric channel constants. Pathloss models:
//   V2I: intercept + slope*log10(d_km), floored at free-space loss at 1 m.
//   V2V LOS: intercept + slope*log10(d) + freq_coeff*log10(f_GHz).
//   V2V NLOS: LOS loss along the Manhattan (corner) path + nlos_penalty_db.
struct ChannelConfig {
  double carrier_ghz = 2.0;
  double v2i_intercept_db = 128.1;
  double v2i_slope_db = 37.6;
  double v2v_intercept_db = 38.77;
  double v2v_slope_db = 16.7;
  double v2v_freq_coeff_db = 18.2;
  double nlos_penalty_db = 12.5;
  double shadow_std_v2i_db = 8.0;
  double shadow_std_v2v_db = 3.0;
  double bs_antenna_gain_dbi = 8.0;
  double bs_antenna_height_m = 25.0;
  double vehicle_antenna_gain_dbi = 3.0;
  double vehicle_antenna_height_m = 1.5;
  // Floor applied to V2V distances (a vehicle can be both a transmitter and a receiver).
  double min_distance_m = 1.0;

  bool operator==(const ChannelConfig&) const = default;
  void validate() const;
};

enum class LinkClass { kV2I, kV2V };

double db_to_linear(double db);
double linear_to_db(double linear);
double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

double free_space_loss_db(double distance_m, double carrier_ghz);
double pathloss_v2i(double distance_m, const ChannelConfig& cfg = {});
// For NLOS pass the corner-path (Manhattan) distance.
double pathloss_v2v(double distance_m, bool los, const ChannelConfig& cfg = {});
double sample_shadowing(LinkClass link_class, const ChannelConfig& cfg, Rng& rng);

struct LinkLoss {
  double pathloss_db = 0.0;
  double shadowing_db = 0.0;
  double antenna_gain_db = 0.0;

  double gain_db() const { return antenna_gain_db - pathloss_db - shadowing_db; }
  bool operator==(const LinkLoss&) const = default;
};

// Positions of every transmitter/receiver in one episode.
struct LinkPlacement {
  Point base_station;
  std::vector<Point> cue;     // M cellular users
  std::vector<Point> v2v_tx;  // K
  std::vector<Point> v2v_rx;  // K
};

// Large-scale fading for every directed path; constant within an episode.
struct LargeScaleState {
  int num_cues = 0;
  int num_links = 0;
  std::vector<LinkLoss> cue_bs;   // [m]
  std::vector<LinkLoss> v2v_bs;   // [k]
  std::vector<LinkLoss> cue_v2v;  // [m * K + k]: CUE m -> receiver of link k
  std::vector<LinkLoss> v2v_v2v;  // [j * K + k]: transmitter of link j -> receiver of link k

  bool operator==(const LargeScaleState&) const = default;
};

LargeScaleState compute_large_scale(const LinkPlacement& placement, const RoadGrid& grid,
                                    const ChannelConfig& cfg, Rng& rng);

// Unit-mean exponential power gains, one per path per sub-band; redrawn every slot.
struct FastFadingSample {
  int num_cues = 0;
  int num_links = 0;
  int num_subbands = 0;
  std::vector<double> cue_bs;   // [m][b]
  std::vector<double> v2v_bs;   // [k][b]
  std::vector<double> cue_v2v;  // [m][k][b]
  std::vector<double> v2v_v2v;  // [j][k][b]

  static FastFadingSample unit(int num_cues, int num_links, int num_subbands);
};

FastFadingSample sample_fast_fading(int num_cues, int num_links, int num_subbands, Rng& rng);
void resample_fast_fading(FastFadingSample& fading, Rng& rng);

// Linear power gains for every path and sub-band.
class LinkGainMatrix {
 public:
  LinkGainMatrix() = default;
  LinkGainMatrix(int num_cues, int num_links, int num_subbands);

  int num_cues() const { return num_cues_; }
  int num_links() const { return num_links_; }
  int num_subbands() const { return num_subbands_; }

  // CUE m -> BS on sub-band b.
  double h(int m, int b) const { return cue_bs_[idx2(m, b)]; }
  // V2V transmitter k -> BS (interference into the V2I uplink).
  double h_tilde(int k, int b) const { return v2v_bs_[idx2(k, b)]; }
  // Own V2V link k.
  double g(int k, int b) const { return v2v_to_v2v(k, k, b); }
  double cue_to_v2v(int m, int k, int b) const {
    return cue_v2v_[(static_cast<std::size_t>(m) * num_links_ + k) * num_subbands_ + b];
  }
  double v2v_to_v2v(int j, int k, int b) const {
    return v2v_v2v_[(static_cast<std::size_t>(j) * num_links_ + k) * num_subbands_ + b];
  }

  double& h(int m, int b) { return cue_bs_[idx2(m, b)]; }
  double& h_tilde(int k, int b) { return v2v_bs_[idx2(k, b)]; }
  double& cue_to_v2v(int m, int k, int b) {
    return cue_v2v_[(static_cast<std::size_t>(m) * num_links_ + k) * num_subbands_ + b];
  }
  double& v2v_to_v2v(int j, int k, int b) {
    return v2v_v2v_[(static_cast<std::size_t>(j) * num_links_ + k) * num_subbands_ + b];
  }

  bool all_finite_nonnegative() const;

 private:
  std::size_t idx2(int a, int b) const { return static_cast<std::size_t>(a) * num_subbands_ + b; }

  int num_cues_ = 0;
  int num_links_ = 0;
  int num_subbands_ = 0;
  std::vector<double> cue_bs_;
  std::vector<double> v2v_bs_;
  std::vector<double> cue_v2v_;
  std::vector<double> v2v_v2v_;
};

// gain = 10^((antenna - pathloss - shadowing)/10) * fading for every entry.
LinkGainMatrix assemble_gains(const LargeScaleState& large_scale, const FastFadingSample& fading);

}  // namespace v2v
