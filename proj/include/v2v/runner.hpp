#pragma once

#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "v2v/config.hpp"
#include "v2v/dqn_agent.hpp"
#include "v2v/metrics.hpp"
#include "v2v/policy.hpp"

namespace v2v {

// Builds a factory for "dqn", "random" or "cluster". `params` is required for dqn.
PolicyFactory make_policy_factory(const std::string& name, const RunConfig& cfg,
                                  std::shared_ptr<const MlpParams> params = nullptr);

TrainResult run_training(const RunConfig& cfg, const std::function<void(const TrainLogRow&)>& on_log = {});

// Evaluates one policy at cfg.env.num_links.
MetricsRecord run_eval(const RunConfig& cfg, const std::string& policy, std::shared_ptr<const MlpParams> params = nullptr);

// One record per (K, policy), K-major in k_list order. All policies at a given K
// share the episode seed schedule. The dqn network is loaded from
// cfg.checkpoint_path() when `params` is null.
std::vector<MetricsRecord> run_sweep(const RunConfig& cfg, std::shared_ptr<const MlpParams> params = nullptr);

// Single traced episode (episode index 0 of the evaluation schedule).
std::vector<TraceRow> run_trace(const RunConfig& cfg, const std::string& policy,
                                std::shared_ptr<const MlpParams> params = nullptr);

std::shared_ptr<const MlpParams> load_network(const std::string& path);

std::string format_number(double v);

// CSV writers: header row + fixed column order.
void write_metrics_csv(std::ostream& out, std::span<const MetricsRecord> records);
void write_training_log_csv(std::ostream& out, std::span<const TrainLogRow> rows);
void write_trace_csv(std::ostream& out, std::span<const TraceRow> rows);

}  // namespace v2v
