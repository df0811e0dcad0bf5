#include "v2v/channel.hpp"

#include <cmath>
#include <numbers>

#include "v2v/errors.hpp"

namespace v2v {

void ChannelConfig::validate() const {
  if (!(carrier_ghz > 0.0)) throw ConfigError("carrier frequency must be positive");
  if (shadow_std_v2i_db < 0.0 || shadow_std_v2v_db < 0.0) throw ConfigError("shadowing std must be >= 0");
  if (nlos_penalty_db < 0.0) throw ConfigError("NLOS penalty must be >= 0");
  if (!(v2i_slope_db > 0.0) || !(v2v_slope_db > 0.0)) throw ConfigError("pathloss slopes must be positive");
  if (!(min_distance_m > 0.0)) throw ConfigError("min_distance_m must be positive");
  if (bs_antenna_height_m < 0.0 || vehicle_antenna_height_m < 0.0) throw ConfigError("antenna heights must be >= 0");
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double linear) { return 10.0 * std::log10(linear); }
double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

double free_space_loss_db(double distance_m, double carrier_ghz) {
  constexpr double kSpeedOfLight = 299792458.0;
  return 20.0 * std::log10(4.0 * std::numbers::pi * distance_m * carrier_ghz * 1e9 / kSpeedOfLight);
}

double pathloss_v2i(double distance_m, const ChannelConfig& cfg) {
  if (!(distance_m > 0.0)) throw DomainError("pathloss distance must be positive");
  const double model = cfg.v2i_intercept_db + cfg.v2i_slope_db * std::log10(distance_m / 1000.0);
  return std::max(model, free_space_loss_db(1.0, cfg.carrier_ghz));
}

double pathloss_v2v(double distance_m, bool los, const ChannelConfig& cfg) {
  if (!(distance_m > 0.0)) throw DomainError("pathloss distance must be positive");
  const double los_db = cfg.v2v_intercept_db + cfg.v2v_slope_db * std::log10(distance_m) +
                        cfg.v2v_freq_coeff_db * std::log10(cfg.carrier_ghz);
  return los ? los_db : los_db + cfg.nlos_penalty_db;
}

double sample_shadowing(LinkClass link_class, const ChannelConfig& cfg, Rng& rng) {
  const double sigma = link_class == LinkClass::kV2I ? cfg.shadow_std_v2i_db : cfg.shadow_std_v2v_db;
  if (sigma == 0.0) return 0.0;
  std::normal_distribution<double> dist(0.0, sigma);
  return dist(rng);
}

namespace {

LinkLoss v2i_loss(Point vehicle, Point bs, const ChannelConfig& cfg, Rng& rng) {
  const double dh = cfg.bs_antenna_height_m - cfg.vehicle_antenna_height_m;
  const double d3 = std::hypot(distance(vehicle, bs), dh);
  return LinkLoss{pathloss_v2i(std::max(d3, cfg.min_distance_m), cfg), sample_shadowing(LinkClass::kV2I, cfg, rng),
                  cfg.bs_antenna_gain_dbi + cfg.vehicle_antenna_gain_dbi};
}

LinkLoss v2v_loss(Point tx, Point rx, const RoadGrid& grid, const ChannelConfig& cfg, Rng& rng) {
  const bool los = share_street(tx, rx, grid);
  const double d = los ? distance(tx, rx) : std::abs(tx.x - rx.x) + std::abs(tx.y - rx.y);
  return LinkLoss{pathloss_v2v(std::max(d, cfg.min_distance_m), los, cfg),
                  sample_shadowing(LinkClass::kV2V, cfg, rng), 2.0 * cfg.vehicle_antenna_gain_dbi};
}

}  // namespace

LargeScaleState compute_large_scale(const LinkPlacement& placement, const RoadGrid& grid,
                                    const ChannelConfig& cfg, Rng& rng) {
  if (placement.v2v_tx.size() != placement.v2v_rx.size())
    throw InternalError("V2V transmitter and receiver lists differ in length");
  LargeScaleState ls;
  ls.num_cues = static_cast<int>(placement.cue.size());
  ls.num_links = static_cast<int>(placement.v2v_tx.size());
  for (const Point& c : placement.cue) ls.cue_bs.push_back(v2i_loss(c, placement.base_station, cfg, rng));
  for (const Point& t : placement.v2v_tx) ls.v2v_bs.push_back(v2i_loss(t, placement.base_station, cfg, rng));
  for (const Point& c : placement.cue) {
    for (const Point& r : placement.v2v_rx) ls.cue_v2v.push_back(v2v_loss(c, r, grid, cfg, rng));
  }
  for (const Point& t : placement.v2v_tx) {
    for (const Point& r : placement.v2v_rx) ls.v2v_v2v.push_back(v2v_loss(t, r, grid, cfg, rng));
  }
  return ls;
}

FastFadingSample FastFadingSample::unit(int num_cues, int num_links, int num_subbands) {
  FastFadingSample f;
  f.num_cues = num_cues;
  f.num_links = num_links;
  f.num_subbands = num_subbands;
  const auto m = static_cast<std::size_t>(num_cues);
  const auto k = static_cast<std::size_t>(num_links);
  const auto n = static_cast<std::size_t>(num_subbands);
  f.cue_bs.assign(m * n, 1.0);
  f.v2v_bs.assign(k * n, 1.0);
  f.cue_v2v.assign(m * k * n, 1.0);
  f.v2v_v2v.assign(k * k * n, 1.0);
  return f;
}

void resample_fast_fading(FastFadingSample& fading, Rng& rng) {
  std::exponential_distribution<double> exp1(1.0);
  for (auto* vec : {&fading.cue_bs, &fading.v2v_bs, &fading.cue_v2v, &fading.v2v_v2v}) {
    for (double& x : *vec) x = exp1(rng);
  }
}

FastFadingSample sample_fast_fading(int num_cues, int num_links, int num_subbands, Rng& rng) {
  FastFadingSample f = FastFadingSample::unit(num_cues, num_links, num_subbands);
  resample_fast_fading(f, rng);
  return f;
}

LinkGainMatrix::LinkGainMatrix(int num_cues, int num_links, int num_subbands)
    : num_cues_(num_cues), num_links_(num_links), num_subbands_(num_subbands) {
  const auto m = static_cast<std::size_t>(num_cues);
  const auto k = static_cast<std::size_t>(num_links);
  const auto n = static_cast<std::size_t>(num_subbands);
  cue_bs_.assign(m * n, 0.0);
  v2v_bs_.assign(k * n, 0.0);
  cue_v2v_.assign(m * k * n, 0.0);
  v2v_v2v_.assign(k * k * n, 0.0);
}

bool LinkGainMatrix::all_finite_nonnegative() const {
  for (const auto* vec : {&cue_bs_, &v2v_bs_, &cue_v2v_, &v2v_v2v_}) {
    for (double x : *vec) {
      if (!std::isfinite(x) || x < 0.0) return false;
    }
  }
  return true;
}

LinkGainMatrix assemble_gains(const LargeScaleState& ls, const FastFadingSample& fading) {
  const int m_count = ls.num_cues;
  const int k_count = ls.num_links;
  const int n = fading.num_subbands;
  const auto mk = static_cast<std::size_t>(m_count) * static_cast<std::size_t>(k_count);
  const auto kk = static_cast<std::size_t>(k_count) * static_cast<std::size_t>(k_count);
  const bool consistent = fading.num_cues == m_count && fading.num_links == k_count && n >= 0 &&
                          ls.cue_bs.size() == static_cast<std::size_t>(m_count) &&
                          ls.v2v_bs.size() == static_cast<std::size_t>(k_count) && ls.cue_v2v.size() == mk &&
                          ls.v2v_v2v.size() == kk &&
                          fading.cue_bs.size() == static_cast<std::size_t>(m_count) * n &&
                          fading.v2v_bs.size() == static_cast<std::size_t>(k_count) * n &&
                          fading.cue_v2v.size() == mk * n && fading.v2v_v2v.size() == kk * n;
  if (!consistent) throw InternalError("large-scale and fast-fading link sets do not match");

  LinkGainMatrix out(m_count, k_count, n);
  for (int m = 0; m < m_count; ++m) {
    const double base = db_to_linear(ls.cue_bs[static_cast<std::size_t>(m)].gain_db());
    for (int b = 0; b < n; ++b) out.h(m, b) = base * fading.cue_bs[static_cast<std::size_t>(m) * n + b];
  }
  for (int k = 0; k < k_count; ++k) {
    const double base = db_to_linear(ls.v2v_bs[static_cast<std::size_t>(k)].gain_db());
    for (int b = 0; b < n; ++b) out.h_tilde(k, b) = base * fading.v2v_bs[static_cast<std::size_t>(k) * n + b];
  }
  for (int m = 0; m < m_count; ++m) {
    for (int k = 0; k < k_count; ++k) {
      const std::size_t pair = static_cast<std::size_t>(m) * k_count + k;
      const double base = db_to_linear(ls.cue_v2v[pair].gain_db());
      for (int b = 0; b < n; ++b) out.cue_to_v2v(m, k, b) = base * fading.cue_v2v[pair * n + b];
    }
  }
  for (int j = 0; j < k_count; ++j) {
    for (int k = 0; k < k_count; ++k) {
      const std::size_t pair = static_cast<std::size_t>(j) * k_count + k;
      const double base = db_to_linear(ls.v2v_v2v[pair].gain_db());
      for (int b = 0; b < n; ++b) out.v2v_to_v2v(j, k, b) = base * fading.v2v_v2v[pair * n + b];
    }
  }
  return out;
}

}  // namespace v2v
