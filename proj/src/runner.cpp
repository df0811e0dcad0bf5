#include "v2v/runner.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <ostream>

#include "v2v/baselines.hpp"
#include "v2v/errors.hpp"

namespace v2v {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::shared_ptr<const MlpParams> load_network(const std::string& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("dqn policy needs a checkpoint; not found: '" + path + "'");
  return std::make_shared<const MlpParams>(load_checkpoint_file(path));
}

PolicyFactory make_policy_factory(const std::string& name, const RunConfig& cfg,
                                  std::shared_ptr<const MlpParams> params) {
  if (name == "random") return [] { return std::make_unique<RandomPolicy>(); };
  if (name == "cluster") {
    const int iters = cfg.run.cluster_max_iters;
    return [iters] { return std::make_unique<ClusterPolicy>(iters); };
  }
  if (name == "dqn") {
    if (!params) params = load_network(cfg.checkpoint_path());
    return [params] { return std::make_unique<DqnPolicy>(params); };
  }
  throw ConfigError("unknown policy '" + name + "' (expected dqn, random or cluster)");
}

TrainResult run_training(const RunConfig& cfg, const std::function<void(const TrainLogRow&)>& on_log) {
  cfg.validate();
  const EnvConfig env = cfg.env;
  EnvFactory factory = [env] { return std::make_unique<V2VEnvironment>(env); };
  return train(factory, cfg.trainer, cfg.net, on_log);
}

MetricsRecord run_eval(const RunConfig& cfg, const std::string& policy, std::shared_ptr<const MlpParams> params) {
  cfg.validate();
  const PolicyFactory factory = make_policy_factory(policy, cfg, std::move(params));
  const auto outcomes = evaluate_policy(cfg.env, factory, cfg.run.episodes, cfg.run.seed, cfg.run.threads);
  return summarize(outcomes, cfg.env.num_links, policy, cfg.run.seed);
}

std::vector<MetricsRecord> run_sweep(const RunConfig& cfg, std::shared_ptr<const MlpParams> params) {
  cfg.validate();
  bool needs_network = false;
  for (const auto& p : cfg.run.policies) needs_network = needs_network || p == "dqn";
  if (needs_network && !params) params = load_network(cfg.checkpoint_path());

  std::vector<MetricsRecord> records;
  for (int k : cfg.run.k_list) {
    RunConfig at_k = cfg;
    at_k.env.num_links = k;
    for (const auto& policy : cfg.run.policies) records.push_back(run_eval(at_k, policy, params));
  }
  return records;
}

std::vector<TraceRow> run_trace(const RunConfig& cfg, const std::string& policy,
                                std::shared_ptr<const MlpParams> params) {
  cfg.validate();
  const PolicyFactory factory = make_policy_factory(policy, cfg, std::move(params));
  V2VEnvironment env(cfg.env, derive_seed(cfg.run.seed, Stream::kEpisode, 0));
  auto p = factory();
  Rng rng = make_rng(cfg.run.seed, Stream::kPolicy, 0);
  std::vector<TraceRow> rows;
  run_episode(env, *p, rng, &rows);
  return rows;
}

void write_metrics_csv(std::ostream& out, std::span<const MetricsRecord> records) {
  out << "K,policy,mean_v2i_rate,success_prob,episodes,seed\n";
  for (const MetricsRecord& r : records) {
    out << r.num_links << ',' << r.policy << ',' << format_number(r.mean_v2i_rate_bps) << ','
        << format_number(r.success_prob) << ',' << r.episodes << ',' << r.seed << '\n';
  }
}

void write_training_log_csv(std::ostream& out, std::span<const TrainLogRow> rows) {
  out << "step,epsilon,loss,mean_episode_reward\n";
  for (const TrainLogRow& r : rows) {
    out << r.step << ',' << format_number(r.epsilon) << ',' << format_number(r.loss) << ','
        << format_number(r.mean_episode_reward) << '\n';
  }
}

void write_trace_csv(std::ostream& out, std::span<const TraceRow> rows) {
  out << "t,agent,sub_band,power_level,reward,gamma_v2v,remaining_bits\n";
  for (const TraceRow& r : rows) {
    out << r.slot << ',' << r.agent << ',' << r.sub_band << ',' << r.power_level << ',' << format_number(r.reward)
        << ',' << format_number(r.sinr_v2v) << ',' << format_number(r.remaining_bits) << '\n';
  }
}

}  // namespace v2v
