#include <cmath>
#include <sstream>

#include "doctest.h"
#include "v2v/config.hpp"
#include "v2v/errors.hpp"
#include "v2v/metrics.hpp"
#include "v2v/runner.hpp"
#include "v2v/selftest.hpp"

using namespace v2v;

namespace {

RunConfig quick_config() {
  RunConfig cfg = desk_profile();
  cfg.env.num_links = 4;
  cfg.run.episodes = 4;
  cfg.run.k_list = {4, 8};
  cfg.run.policies = {"random", "cluster"};
  return cfg;
}

std::string sweep_csv(const RunConfig& cfg) {
  std::ostringstream out;
  const auto records = run_sweep(cfg);
  write_metrics_csv(out, records);
  return out.str();
}

}  // namespace

TEST_CASE("config defaults follow the table values") {
  const RunConfig cfg;
  CHECK(cfg.env.num_cues == 20);
  CHECK(cfg.env.num_subbands == 20);
  CHECK(cfg.env.bandwidth_hz == 10e6);
  CHECK(cfg.env.power_levels_dbm[0] == 23.0);
  CHECK(cfg.env.noise_dbm == -114.0);
  CHECK(cfg.env.deadline_ms == 100);
  CHECK(cfg.env.penalty == -20.0);
  CHECK(cfg.env.channel.bs_antenna_gain_dbi == 8.0);
  CHECK(cfg.env.channel.bs_antenna_height_m == 25.0);
  CHECK(cfg.env.speed_mps == 10.0);
  CHECK(cfg.env.grid.block_rows * cfg.env.grid.block_cols == 9);
  CHECK(cfg.net.hidden_layers == std::vector<int>{500, 250, 120});
}

TEST_CASE("config round-trip") {
  RunConfig cfg = desk_profile();
  cfg.env.lambda_v2i = 3.3e-7;
  cfg.env.channel.nlos_penalty_db = 0.1 + 0.2;
  cfg.trainer.lr_decay_points = {0.25};
  cfg.run.k_list = {4, 12};
  cfg.run.checkpoint = "nets/a.mlp";
  const RunConfig back = parse_config_string(serialize_config(cfg));
  CHECK(back == cfg);
  CHECK(serialize_config(back) == serialize_config(cfg));
  CHECK(parse_config_string(serialize_config(RunConfig{})) == RunConfig{});
}

TEST_CASE("config parsing: partial files, comments and errors") {
  const RunConfig cfg = parse_config_string("# comment\n[env]\nnum_links = 7\n\n[run]\npolicies = random\n");
  CHECK(cfg.env.num_links == 7);
  CHECK(cfg.run.policies == std::vector<std::string>{"random"});
  CHECK(cfg.env.num_cues == RunConfig{}.env.num_cues);

  CHECK_THROWS_WITH_AS(parse_config_string("[env]\nbogus = 1\n"), doctest::Contains("line 2"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("[nowhere]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("num_links = 4\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("[env]\nnum_links = 4\nnum_links = 5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("[env]\nnum_links = four\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("[env]\npower_levels_dbm = 23,10\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("[run]\npolicies = greedy\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("[env]\npenalty = 5\n"), ConfigError);
  CHECK_THROWS_AS(load_config_file("/nonexistent/x.conf"), ConfigError);
}

TEST_CASE("success probability") {
  const std::vector<EpisodeOutcome> all{{4, 4, 0.0, 0.0}};
  CHECK(success_probability(all) == 1.0);
  const std::vector<EpisodeOutcome> three{{4, 3, 0.0, 0.0}};
  CHECK(success_probability(three) == 0.75);
  const std::vector<EpisodeOutcome> none{{4, 0, 0.0, 0.0}, {2, 0, 0.0, 0.0}};
  CHECK(success_probability(none) == 0.0);
  CHECK_THROWS_AS(success_probability(std::vector<EpisodeOutcome>{}), MetricsError);
  const MetricsRecord empty = summarize(std::vector<EpisodeOutcome>{}, 4, "random", 1);
  CHECK_FALSE(empty.valid);
  const std::vector<EpisodeOutcome> two{{4, 4, 10.0, 0.0}, {4, 2, 20.0, 0.0}};
  const MetricsRecord rec = summarize(two, 4, "random", 1);
  CHECK(rec.valid);
  CHECK(rec.episodes == 2);
  CHECK(rec.success_prob == 0.75);
  CHECK(rec.mean_v2i_rate_bps == 15.0);
}

TEST_CASE("sweep: cardinality, order, determinism") {
  const RunConfig cfg = quick_config();
  const auto records = run_sweep(cfg);
  REQUIRE(records.size() == 4);
  CHECK(records[0].num_links == 4);
  CHECK(records[0].policy == "random");
  CHECK(records[1].policy == "cluster");
  CHECK(records[3].num_links == 8);
  for (const auto& r : records) {
    CHECK(r.valid);
    CHECK(r.success_prob >= 0.0);
    CHECK(r.success_prob <= 1.0);
  }
  const std::string a = sweep_csv(cfg);
  CHECK(a.rfind("K,policy,mean_v2i_rate,success_prob,episodes,seed\n", 0) == 0);
  CHECK(a == sweep_csv(cfg));
  RunConfig threaded = cfg;
  threaded.run.threads = 3;
  CHECK(a == sweep_csv(threaded));
}

TEST_CASE("sweep: missing checkpoint is named in the error") {
  RunConfig cfg = quick_config();
  cfg.run.policies = {"dqn"};
  cfg.run.checkpoint = "/nonexistent/dir/net.mlp";
  CHECK_THROWS_WITH_AS(run_sweep(cfg), doctest::Contains("/nonexistent/dir/net.mlp"), ConfigError);
}

TEST_CASE("evaluation with zero payload succeeds everywhere") {
  RunConfig cfg = quick_config();
  cfg.env.payload_bits = 0.0;
  for (const std::string policy : {"random", "cluster"}) CHECK(run_eval(cfg, policy).success_prob == 1.0);
  const MlpParams net = init_params(network_layout(cfg.env.observation_size(), cfg.env.num_actions(), NetConfig{{8}}), 1);
  CHECK(evaluate(net, cfg.env, 3, 5).success_prob == 1.0);
  CHECK_FALSE(evaluate(net, cfg.env, 0, 5).valid);
}

TEST_CASE("common random numbers: policies see the same drops") {
  RunConfig cfg = quick_config();
  cfg.env.payload_bits = 5e5;
  const auto rows_random = run_trace(cfg, "random");
  const auto rows_cluster = run_trace(cfg, "cluster");
  REQUIRE(!rows_random.empty());
  REQUIRE(!rows_cluster.empty());
  // The payload is identical at the first slot for every agent.
  CHECK(rows_random.front().slot == 0);
  V2VEnvironment a(cfg.env, derive_seed(cfg.run.seed, Stream::kEpisode, 0));
  V2VEnvironment b(cfg.env, derive_seed(cfg.run.seed, Stream::kEpisode, 0));
  CHECK(a.large_scale() == b.large_scale());
}

TEST_CASE("trace CSV has the documented header") {
  RunConfig cfg = quick_config();
  cfg.env.payload_bits = 5e5;
  std::ostringstream out;
  write_trace_csv(out, run_trace(cfg, "random"));
  CHECK(out.str().rfind("t,agent,sub_band,power_level,reward,gamma_v2v,remaining_bits\n", 0) == 0);
}

TEST_CASE("random policy congestion: success drops from K = 4 to K = 16") {
  RunConfig cfg = desk_profile();
  cfg.env.payload_bits = 5e5;
  cfg.run.episodes = 200;
  cfg.run.k_list = {4, 16};
  cfg.run.policies = {"random"};
  const auto records = run_sweep(cfg);
  REQUIRE(records.size() == 2);
  const double margin = 2.0 * std::hypot(records[0].success_stderr, records[1].success_stderr);
  CHECK(records[1].success_prob + margin < records[0].success_prob);
}

TEST_CASE("selftest passes and detects injected faults") {
  CHECK(run_selftest().all_passed());
  SelftestFaults grad;
  grad.gradient_perturbation = 1e-3;
  CHECK_FALSE(check_gradients(grad).passed);
  SelftestFaults noise;
  noise.noise_offset_db = 0.5;
  CHECK_FALSE(check_sinr_equivalence(noise).passed);
  CHECK(check_sinr_equivalence().passed);
}
