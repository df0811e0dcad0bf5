// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "v2v/config.hpp"
#include "v2v/dqn_agent.hpp"
#include "v2v/environment.hpp"
#include "v2v/neuralnet.hpp"
#include "v2v/replay_memory.hpp"
#include "v2v/runner.hpp"
#include "v2v/tabular.hpp"

namespace fs = std::filesystem;
using namespace v2v;

namespace {

struct Verdict {
  bool passed = false;
  std::string detail;
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

// ---- 1: gradient oracle ----------------------------------------------------

double masked_loss(const MlpParams& p, const Eigen::MatrixXd& x, const std::vector<int>& a,
                   const std::vector<double>& y) {
  const Eigen::MatrixXd q = forward_batch(p, x);
  double loss = 0.0;
  for (Eigen::Index s = 0; s < x.cols(); ++s) {
    const double e = y[static_cast<std::size_t>(s)] - q(a[static_cast<std::size_t>(s)], s);
    loss += e * e;
  }
  return loss;
}

Verdict gradient_oracle() {
  const double h = 1e-5;
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> width(1, 8);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0.0;
  long entries = 0;
  const int nets = 40;
  for (int n = 0; n < nets; ++n) {
    std::vector<int> sizes{width(rng), width(rng), width(rng), width(rng), width(rng)};
    MlpParams p = init_params(sizes, static_cast<std::uint64_t>(n) + 100);
    for (auto& l : p.layers) {
      for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias(i) = 0.1 * normal(rng);
    }
    const int batch = 1 + n % 5;
    Eigen::MatrixXd x(sizes.front(), batch);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
    std::vector<int> actions;
    std::vector<double> targets;
    std::uniform_int_distribution<int> pick(0, sizes.back() - 1);
    for (int s = 0; s < batch; ++s) {
      actions.push_back(pick(rng));
      targets.push_back(normal(rng));
    }
    const BackwardResult br = backward(p, x, actions, targets);
    for (std::size_t li = 0; li < p.layers.size(); ++li) {
      auto probe = [&](double& param, double analytic) {
        const double saved = param;
        param = saved + h;
        const double up = masked_loss(p, x, actions, targets);
        param = saved - h;
        const double down = masked_loss(p, x, actions, targets);
        param = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-3});
        worst = std::max(worst, std::abs(analytic - numeric) / scale);
        ++entries;
      };
      auto& l = p.layers[li];
      const auto& g = br.grads.layers[li];
      for (Eigen::Index i = 0; i < l.weight.size(); ++i) probe(l.weight.data()[i], g.weight.data()[i]);
      for (Eigen::Index i = 0; i < l.bias.size(); ++i) probe(l.bias.data()[i], g.bias.data()[i]);
    }
  }
  return {worst < 1e-5, std::to_string(nets) + " nets, " + std::to_string(entries) + " entries, max rel err " +
                            fmt(worst) + " (< 1e-5)"};
}

// ---- 2: Q-learning oracle --------------------------------------------------

Verdict q_learning_oracle() {
  const FiniteMdp chain = make_chain_mdp();
  const double beta = 0.9;
  const TabularQ exact = value_iteration(chain, beta);
  Rng rng(derive_seed(2024, Stream::kExploration));
  const TabularQ learned = tabular_q_oracle(chain, [](long) { return 0.5; }, beta, 200000, rng);
  const double diff = max_abs_difference(exact, learned);

  EnvFactory factory = [chain] { return std::make_unique<FiniteMdpEnv>(chain, 20); };
  TrainerConfig cfg;
  cfg.beta = beta;
  cfg.total_steps = 6000;
  cfg.batch_size = 32;
  cfg.memory_capacity = 5000;
  cfg.target_sync_interval = 100;
  const TrainResult trained = train(factory, cfg, NetConfig{{32, 32}});
  const auto optimal = exact.greedy_policy();
  int matches = 0;
  for (int s = 0; s < chain.num_states; ++s) {
    std::vector<double> one_hot(static_cast<std::size_t>(chain.num_states), 0.0);
    one_hot[static_cast<std::size_t>(s)] = 1.0;
    const Eigen::VectorXd q = forward(trained.params, one_hot);
    matches += argmax(std::span<const double>(q.data(), static_cast<std::size_t>(q.size()))) ==
               optimal[static_cast<std::size_t>(s)];
  }
  return {diff < 1e-3 && matches == chain.num_states,
          "tabular max|Q-Q*| " + fmt(diff) + " (< 1e-3); DQN greedy policy matches on " + std::to_string(matches) +
              "/" + std::to_string(chain.num_states) + " states"};
}

// ---- 3: physics oracle -----------------------------------------------------

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

Verdict physics_oracle() {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> size(1, 6);
  double worst = 0.0;
  long compared = 0;
  for (int trial = 0; trial < 100; ++trial) {
    EnvConfig cfg;
    cfg.num_cues = cfg.num_subbands = size(rng);
    cfg.num_links = size(rng);
    cfg.payload_bits = 1e12;
    V2VEnvironment env(cfg, rng());
    std::uniform_int_distribution<int> band(0, cfg.num_subbands - 1);
    std::uniform_int_distribution<int> level(0, 2);
    std::vector<Action> actions;
    for (int k = 0; k < cfg.num_links; ++k) actions.push_back({band(rng), level(rng)});
    const LinkGainMatrix g = env.gains();
    env.step(actions);
    const SlotRecord& rec = *env.last_slot();

    const double noise = std::pow(10.0, (cfg.noise_dbm - 30.0) / 10.0);
    const double pc = std::pow(10.0, (cfg.cue_power_dbm - 30.0) / 10.0);
    const double w = cfg.bandwidth_hz / cfg.num_subbands;
    auto pd = [&](int k) {
      return std::pow(10.0, (cfg.power_levels_dbm[static_cast<std::size_t>(actions[static_cast<std::size_t>(k)].power_level)] - 30.0) / 10.0);
    };
    for (int m = 0; m < cfg.num_cues; ++m) {
      double denom = noise;
      for (int k = 0; k < cfg.num_links; ++k) {
        const double rho = actions[static_cast<std::size_t>(k)].sub_band == m ? 1.0 : 0.0;
        denom += rho * pd(k) * g.h_tilde(k, m);
      }
      const double sinr = pc * g.h(m, m) / denom;
      worst = std::max(worst, rel(sinr, rec.cue_sinr[static_cast<std::size_t>(m)]));
      worst = std::max(worst, rel(w * std::log2(1.0 + sinr), rec.cue_capacity_bps[static_cast<std::size_t>(m)]));
      compared += 2;
    }
    for (const SlotAgentRecord& a : rec.agents) {
      const int k = a.agent;
      const int b = actions[static_cast<std::size_t>(k)].sub_band;
      double denom = noise + pc * g.cue_to_v2v(b, k, b);
      for (int j = 0; j < cfg.num_links; ++j) {
        if (j != k && actions[static_cast<std::size_t>(j)].sub_band == b) denom += pd(j) * g.v2v_to_v2v(j, k, b);
      }
      worst = std::max(worst, rel(pd(k) * g.g(k, b) / denom, a.sinr));
      ++compared;
    }
  }
  return {worst < 1e-12, "100 instances, " + std::to_string(compared) + " values, max rel err " + fmt(worst) +
                             " (< 1e-12)"};
}

// ---- 4: reward contract ----------------------------------------------------

Verdict reward_contract(const RunConfig& desk) {
  EnvConfig cfg = desk.env;
  std::mt19937_64 rng(4);
  long slots = 0, checked = 0, breaches = 0, bad = 0;
  const double noise = std::pow(10.0, (cfg.noise_dbm - 30.0) / 10.0);
  const double pc = std::pow(10.0, (cfg.cue_power_dbm - 30.0) / 10.0);
  const double w = cfg.bandwidth_hz / cfg.num_subbands;
  for (std::uint64_t episode = 0; slots < 10000; ++episode) {
    V2VEnvironment env(cfg, derive_seed(99, Stream::kEpisode, episode));
    std::uniform_int_distribution<int> band(0, cfg.num_subbands - 1);
    std::uniform_int_distribution<int> level(0, 2);
    while (!env.episode_over() && slots < 10000) {
      std::vector<Action> actions;
      std::vector<bool> was_failed;
      for (int k = 0; k < cfg.num_links; ++k) {
        actions.push_back({band(rng), level(rng)});
        was_failed.push_back(env.load(k).failed);
      }
      const LinkGainMatrix g = env.gains();
      std::vector<bool> active;
      for (int k = 0; k < cfg.num_links; ++k) active.push_back(env.agent_active(k));
      env.step(actions);
      ++slots;
      double sum_c = 0.0;
      for (int m = 0; m < cfg.num_cues; ++m) {
        double denom = noise;
        for (int k = 0; k < cfg.num_links; ++k) {
          if (active[static_cast<std::size_t>(k)] && actions[static_cast<std::size_t>(k)].sub_band == m)
            denom += std::pow(10.0, (cfg.power_levels_dbm[static_cast<std::size_t>(actions[static_cast<std::size_t>(k)].power_level)] - 30.0) / 10.0) *
                     g.h_tilde(k, m);
        }
        sum_c += w * std::log2(1.0 + pc * g.h(m, m) / denom);
      }
      for (const SlotAgentRecord& a : env.last_slot()->agents) {
        ++checked;
        const bool breach = env.load(a.agent).failed && !was_failed[static_cast<std::size_t>(a.agent)];
        if (breach) {
          ++breaches;
          bad += a.reward != -20.0;
        } else {
          bad += !(rel(a.reward, cfg.lambda_v2i * sum_c) < 1e-12) || a.reward < 0.0;
        }
      }
    }
  }
  return {bad == 0 && breaches > 0, std::to_string(slots) + " slots, " + std::to_string(checked) +
                                        " agent rewards, " + std::to_string(breaches) + " breaches, " +
                                        std::to_string(bad) + " unexpected values"};
}

// ---- 5 and 6: learning and trend -------------------------------------------

std::shared_ptr<const MlpParams> g_trained;
double g_train_seconds = -1.0;

// Trains on the desk profile and leaves <net> and <net>.seconds behind.
void train_network(const RunConfig& desk, const std::string& net) {
  const auto t0 = std::chrono::steady_clock::now();
  const TrainResult trained = run_training(desk);
  g_train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  g_trained = std::make_shared<const MlpParams>(trained.params);
  if (net.empty()) return;
  save_checkpoint_file(trained.params, net);
  std::ofstream(net + ".seconds") << std::setprecision(17) << g_train_seconds << "\n";
}

void ensure_network(const RunConfig& desk, const std::string& net) {
  if (g_trained) return;
  if (!net.empty() && fs::exists(net)) {
    g_trained = load_network(net);
    std::ifstream(net + ".seconds") >> g_train_seconds;
    return;
  }
  train_network(desk, net);
}

Verdict end_to_end(const RunConfig& desk, const std::string& net) {
  ensure_network(desk, net);
  RunConfig eval = desk;
  eval.run.k_list = {12};
  eval.run.episodes = std::max(500, desk.run.episodes);
  eval.run.policies = {"dqn", "random", "cluster"};
  const auto rec = run_sweep(eval, g_trained);
  const MetricsRecord& dqn = rec[0];
  const MetricsRecord& rnd = rec[1];
  const MetricsRecord& clu = rec[2];
  const bool a = dqn.mean_v2i_rate_bps > rnd.mean_v2i_rate_bps && dqn.mean_v2i_rate_bps > clu.mean_v2i_rate_bps;
  const bool b = dqn.success_prob >= rnd.success_prob + 0.05;
  const bool c = g_train_seconds >= 0.0 && g_train_seconds <= 1800.0;
  std::ostringstream d;
  d << "K=12, " << desk.trainer.total_steps << " steps in " << fmt(g_train_seconds, 4) << " s (c "
    << (c ? "ok" : "FAIL") << "), " << eval.run.episodes << " episodes; V2I Mb/s dqn "
    << fmt(dqn.mean_v2i_rate_bps / 1e6) << " random " << fmt(rnd.mean_v2i_rate_bps / 1e6) << " cluster "
    << fmt(clu.mean_v2i_rate_bps / 1e6) << " (a " << (a ? "ok" : "FAIL") << "); success dqn " << fmt(dqn.success_prob)
    << " random " << fmt(rnd.success_prob) << " cluster " << fmt(clu.success_prob) << " (b " << (b ? "ok" : "FAIL")
    << ")";
  return {a && b && c, d.str()};
}

Verdict trend(const RunConfig& desk, const std::string& net) {
  ensure_network(desk, net);
  RunConfig cfg = desk;
  cfg.run.k_list = {4, 8, 12, 16, 20};
  cfg.run.episodes = std::max(200, desk.run.episodes);
  cfg.run.policies = {"random", "cluster"};
  if (g_trained) cfg.run.policies.insert(cfg.run.policies.begin(), "dqn");
  const auto records = run_sweep(cfg, g_trained);
  const std::size_t np = cfg.run.policies.size();
  bool ok = true;
  std::ostringstream d;
  for (std::size_t p = 0; p < np; ++p) {
    d << cfg.run.policies[p] << " [";
    for (std::size_t i = 0; i < cfg.run.k_list.size(); ++i) {
      const MetricsRecord& now = records[i * np + p];
      d << (i ? " " : "") << fmt(now.success_prob, 3);
      if (i == 0) continue;
      const MetricsRecord& prev = records[(i - 1) * np + p];
      const double margin = 2.0 * std::hypot(now.success_stderr, prev.success_stderr);
      if (now.success_prob > prev.success_prob + margin) {
        ok = false;
        d << "!";
      }
    }
    d << "] ";
  }
  if (!g_trained) {
    ok = false;
    d << "(no trained network)";
  }
  return {ok, "K=4..20, " + std::to_string(cfg.run.episodes) + " episodes/point: " + d.str()};
}

// ---- 7: determinism --------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict determinism(const std::string& cli, const RunConfig& desk) {
  const fs::path root = fs::temp_directory_path() / "v2v_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  RunConfig cfg = desk;
  cfg.trainer.total_steps = 600;
  cfg.trainer.log_interval = 50;
  cfg.run.episodes = 20;
  cfg.run.k_list = {4, 12};
  const fs::path conf = root / "run.conf";
  std::ofstream(conf) << serialize_config(cfg);

  std::vector<std::string> files;
  bool ran = true;
  for (const std::string tag : {"a", "b"}) {
    const fs::path out = root / tag;
    const std::string base = "\"" + cli + "\" ";
    const std::string c = " --config \"" + conf.string() + "\" --out \"" + out.string() + "\"";
    const std::string ckpt = " --checkpoint \"" + (out / "checkpoint.mlp").string() + "\"";
    ran = ran && std::system((base + "train --quiet" + c + " > /dev/null").c_str()) == 0;
    ran = ran && std::system((base + "sweep" + c + ckpt + " > /dev/null").c_str()) == 0;
    ran = ran && std::system((base + "eval --policy dqn" + c + ckpt + " --trace \"" + (out / "trace.csv").string() +
                              "\" > /dev/null").c_str()) == 0;
    for (const char* f : {"checkpoint.mlp", "train_log.csv", "sweep.csv", "metrics_dqn.csv", "trace.csv"})
      files.push_back(slurp(out / f));
  }
  int identical = 0;
  const std::size_t half = files.size() / 2;
  for (std::size_t i = 0; i < half; ++i) identical += !files[i].empty() && files[i] == files[i + half];
  fs::remove_all(root);
  return {ran && identical == static_cast<int>(half),
          "train, sweep and eval run twice via the CLI: " + std::to_string(identical) + "/" + std::to_string(half) +
              " output files byte-identical"};
}

// ---- 8: replay memory ------------------------------------------------------

Verdict replay_property() {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal(0.0, 1.0);
  int ok = 0, cases = 0;
  for (std::size_t capacity : {1u, 2u, 7u, 100u, 1000u, 4096u}) {
    ++cases;
    ReplayMemory mem(capacity);
    std::vector<Transition> inserted;
    for (std::size_t i = 0; i < 10 * capacity; ++i) {
      Transition t;
      t.state = {normal(rng), normal(rng)};
      t.action = static_cast<int>(rng() % 12);
      t.reward = normal(rng);
      t.next_state = {normal(rng), normal(rng)};
      t.terminal = rng() % 5 == 0;
      inserted.push_back(t);
      mem.push(std::move(t));
    }
    bool same = mem.size() == capacity;
    for (std::size_t i = 0; same && i < capacity; ++i) same = mem.at(i) == inserted[inserted.size() - capacity + i];
    ok += same;
  }
  return {ok == cases, std::to_string(ok) + "/" + std::to_string(cases) +
                           " capacities hold exactly the last `capacity` transitions in order"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: acceptance <desk.conf> <v2vsim> [--network FILE] [--train | --only N]\n";
    return 2;
  }
  const RunConfig desk = load_config_file(argv[1]);
  const std::string cli = argv[2];
  std::string net;
  int only = 0;
  bool train_only = false;
  for (int i = 3; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--network" && i + 1 < argc) {
      net = argv[++i];
    } else if (a == "--only" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else if (a == "--train") {
      train_only = true;
    } else {
      std::cerr << "unknown argument " << a << "\n";
      return 2;
    }
  }
  if (train_only) {
    try {
      train_network(desk, net);
    } catch (const std::exception& e) {
      std::cout << "FAIL training: " << e.what() << std::endl;
      return 1;
    }
    std::cout << "trained " << desk.trainer.total_steps << " steps in " << fmt(g_train_seconds, 4) << " s -> " << net
              << std::endl;
    return 0;
  }
  int failures = 0;
  auto run = [&](int id, const std::string& name, double limit_s, const std::function<Verdict()>& fn) {
    if (only != 0 && only != id) return;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (limit_s > 0 && s > limit_s) {
      v.passed = false;
      v.detail += "; over the " + fmt(limit_s) + " s budget";
    }
    failures += !v.passed;
    std::cout << (v.passed ? "PASS" : "FAIL") << " criterion " << id << " (" << name << "): " << v.detail << " ["
              << fmt(s, 3) << " s]" << std::endl;
  };
  run(1, "gradient oracle", 10.0, gradient_oracle);
  run(2, "Q-learning oracle", 120.0, q_learning_oracle);
  run(3, "physics oracle", 0.0, physics_oracle);
  run(4, "reward contract", 0.0, [&] { return reward_contract(desk); });
  run(5, "end-to-end learning", 0.0, [&] { return end_to_end(desk, net); });
  run(6, "success trend in K", 0.0, [&] { return trend(desk, net); });
  run(7, "determinism", 0.0, [&] { return determinism(cli, desk); });
  run(8, "replay memory", 0.0, replay_property);
  if (only == 0)
    std::cout << (failures == 0 ? "all acceptance criteria passed" : std::to_string(failures) + " criteria failed")
              << std::endl;
  return failures == 0 ? 0 : 1;
}
