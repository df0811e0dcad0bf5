#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "v2v/config.hpp"
#include "v2v/errors.hpp"
#include "v2v/runner.hpp"
#include "v2v/selftest.hpp"

namespace fs = std::filesystem;

namespace {

v2v::RunConfig load(const std::string& path) {
  return path.empty() ? v2v::desk_profile() : v2v::load_config_file(path);
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw v2v::ConfigError("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"V2V spectrum sharing simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string checkpoint;
  std::string policy = "dqn";
  std::string trace_path;
  std::vector<int> k_list;
  bool quiet = false;
  v2v::SelftestFaults faults;

  auto* train = app.add_subcommand("train", "train the shared Q-network");
  train->add_option("--config", config_path, "config file (default: desk profile)");
  train->add_option("--out", out_dir, "output directory");
  train->add_flag("--quiet", quiet, "suppress progress lines");

  auto* eval = app.add_subcommand("eval", "evaluate one policy at the configured K");
  eval->add_option("--config", config_path, "config file (default: desk profile)");
  eval->add_option("--checkpoint", checkpoint, "network checkpoint (dqn only)");
  eval->add_option("--policy", policy, "dqn, random or cluster")->check(CLI::IsMember({"dqn", "random", "cluster"}));
  eval->add_option("--out", out_dir, "output directory");
  eval->add_option("--trace", trace_path, "write a per-slot trace of episode 0 to this CSV");

  auto* sweep = app.add_subcommand("sweep", "evaluate every policy over a list of K");
  sweep->add_option("--config", config_path, "config file (default: desk profile)");
  sweep->add_option("--k-list", k_list, "comma-separated K values")->delimiter(',');
  sweep->add_option("--checkpoint", checkpoint, "network checkpoint");
  sweep->add_option("--out", out_dir, "output directory");

  auto* selftest = app.add_subcommand("selftest", "run the built-in consistency checks");
  selftest->add_option("--inject-gradient-bug", faults.gradient_perturbation, "perturb one weight gradient")
      ->group("");
  selftest->add_option("--inject-noise-offset-db", faults.noise_offset_db, "offset the simulator noise power")
      ->group("");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*selftest) {
      const auto report = v2v::run_selftest(faults);
      v2v::print_report(std::cout, report);
      return report.all_passed() ? 0 : 1;
    }

    v2v::RunConfig cfg = load(config_path);
    if (!out_dir.empty()) cfg.run.output_dir = out_dir;
    if (!checkpoint.empty()) cfg.run.checkpoint = checkpoint;
    if (!k_list.empty()) cfg.run.k_list = k_list;
    cfg.validate();
    const fs::path out = cfg.run.output_dir;

    if (*train) {
      const auto result = v2v::run_training(cfg, [&](const v2v::TrainLogRow& row) {
        if (!quiet) {
          std::cerr << "step " << row.step << " eps " << row.epsilon << " loss " << row.loss << " reward "
                    << row.mean_episode_reward << '\n';
        }
      });
      auto log = open_output(out / "train_log.csv");
      v2v::write_training_log_csv(log, result.log);
      const std::string ckpt = cfg.checkpoint_path();
      if (fs::path(ckpt).has_parent_path()) fs::create_directories(fs::path(ckpt).parent_path());
      v2v::save_checkpoint_file(result.params, ckpt);
      std::cout << "wrote " << ckpt << " after " << result.updates << " updates\n";
    } else if (*eval) {
      const auto record = v2v::run_eval(cfg, policy);
      const std::vector<v2v::MetricsRecord> records{record};
      auto csv = open_output(out / ("metrics_" + policy + ".csv"));
      v2v::write_metrics_csv(csv, records);
      v2v::write_metrics_csv(std::cout, records);
      if (!trace_path.empty()) {
        auto trace = open_output(trace_path);
        v2v::write_trace_csv(trace, v2v::run_trace(cfg, policy));
      }
    } else if (*sweep) {
      const auto records = v2v::run_sweep(cfg);
      auto csv = open_output(out / "sweep.csv");
      v2v::write_metrics_csv(csv, records);
      v2v::write_metrics_csv(std::cout, records);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
