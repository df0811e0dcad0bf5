#include "v2v/selftest.hpp"

#include <cmath>
#include <ostream>
#include <random>
#include <sstream>

#include "v2v/baselines.hpp"
#include "v2v/dqn_agent.hpp"
#include "v2v/environment.hpp"
#include "v2v/neuralnet.hpp"
#include "v2v/policy.hpp"
#include "v2v/replay_memory.hpp"
#include "v2v/rng.hpp"
#include "v2v/runner.hpp"
#include "v2v/tabular.hpp"

namespace v2v {

bool SelftestReport::all_passed() const {
  for (const CheckResult& c : checks) {
    if (!c.passed) return false;
  }
  return !checks.empty();
}

namespace {

double relative_error(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

double masked_loss(const MlpParams& p, const Eigen::MatrixXd& x, std::span<const int> actions,
                   std::span<const double> targets) {
  const Eigen::MatrixXd q = forward_batch(p, x);
  double loss = 0.0;
  for (Eigen::Index s = 0; s < x.cols(); ++s) {
    const double e = targets[static_cast<std::size_t>(s)] - q(actions[static_cast<std::size_t>(s)], s);
    loss += e * e;
  }
  return loss;
}

}  // namespace

CheckResult check_gradients(const SelftestFaults& faults) {
  constexpr double kStep = 1e-5;
  Rng rng(derive_seed(7, Stream::kInit, 99));
  std::uniform_int_distribution<int> width(2, 5);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0.0;
  for (int net = 0; net < 20; ++net) {
    std::vector<int> sizes{width(rng), width(rng), width(rng), width(rng)};
    MlpParams p = init_params(sizes, static_cast<std::uint64_t>(net) + 1);
    for (auto& l : p.layers) {
      for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias(i) = 0.1 * normal(rng);
    }
    const int batch = 3;
    Eigen::MatrixXd x(sizes.front(), batch);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
    std::vector<int> actions(batch);
    std::vector<double> targets(batch);
    std::uniform_int_distribution<int> pick(0, sizes.back() - 1);
    for (int s = 0; s < batch; ++s) {
      actions[static_cast<std::size_t>(s)] = pick(rng);
      targets[static_cast<std::size_t>(s)] = normal(rng);
    }
    BackwardResult br = backward(p, x, actions, targets);
    br.grads.layers[0].weight(0, 0) += faults.gradient_perturbation;

    auto probe = [&](double& param, double analytic) {
      const double saved = param;
      param = saved + kStep;
      const double up = masked_loss(p, x, actions, targets);
      param = saved - kStep;
      const double down = masked_loss(p, x, actions, targets);
      param = saved;
      const double numeric = (up - down) / (2.0 * kStep);
      // Entries whose gradient is negligible are compared absolutely.
      const double err = std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-3});
      worst = std::max(worst, err);
    };
    for (std::size_t li = 0; li < p.layers.size(); ++li) {
      auto& l = p.layers[li];
      const auto& g = br.grads.layers[li];
      for (Eigen::Index i = 0; i < l.weight.size(); ++i) probe(l.weight.data()[i], g.weight.data()[i]);
      for (Eigen::Index i = 0; i < l.bias.size(); ++i) probe(l.bias.data()[i], g.bias.data()[i]);
    }
  }
  std::ostringstream detail;
  detail << "max relative error " << worst << " over 20 networks";
  return {"gradient", worst < 1e-5, detail.str()};
}

CheckResult check_tabular_oracle() {
  const FiniteMdp mdp = make_chain_mdp();
  const double beta = 0.9;
  const TabularQ exact = value_iteration(mdp, beta);
  Rng rng(derive_seed(11, Stream::kExploration));
  const TabularQ learned = tabular_q_oracle(mdp, [](long) { return 0.5; }, beta, 200000, rng);
  const double diff = max_abs_difference(exact, learned);
  const bool policy_ok = learned.greedy_policy() == exact.greedy_policy();
  std::ostringstream detail;
  detail << "max |Q - Q*| = " << diff << (policy_ok ? ", greedy policy matches" : ", greedy policy differs");
  return {"tabular-oracle", diff < 1e-3 && policy_ok, detail.str()};
}

CheckResult check_sinr_equivalence(const SelftestFaults& faults) {
  Rng rng(derive_seed(13, Stream::kFading, 0));
  std::uniform_int_distribution<int> count(1, 6);
  std::uniform_real_distribution<double> log_gain(-14.0, -5.0);
  std::uniform_real_distribution<double> log_power(-3.0, 0.0);
  const double noise = dbm_to_watts(-114.0);
  const double cue_power = dbm_to_watts(23.0);
  const double bandwidth = 180e3;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int m_count = count(rng);
    const int k_count = count(rng);
    LinkGainMatrix gains(m_count, k_count, m_count);
    auto draw = [&] { return std::pow(10.0, log_gain(rng)); };
    for (int b = 0; b < m_count; ++b) {
      for (int m = 0; m < m_count; ++m) {
        gains.h(m, b) = draw();
        for (int k = 0; k < k_count; ++k) gains.cue_to_v2v(m, k, b) = draw();
      }
      for (int j = 0; j < k_count; ++j) {
        gains.h_tilde(j, b) = draw();
        for (int k = 0; k < k_count; ++k) gains.v2v_to_v2v(j, k, b) = draw();
      }
    }
    std::uniform_int_distribution<int> band(-1, m_count - 1);
    std::vector<int> alloc(static_cast<std::size_t>(k_count));
    std::vector<double> power(static_cast<std::size_t>(k_count));
    for (int k = 0; k < k_count; ++k) {
      alloc[static_cast<std::size_t>(k)] = band(rng);
      power[static_cast<std::size_t>(k)] = std::pow(10.0, log_power(rng));
    }
    const double sim_noise = noise * std::pow(10.0, faults.noise_offset_db / 10.0);
    const auto sim_cue = cue_sinr(gains, alloc, power, cue_power, sim_noise);
    for (int m = 0; m < m_count; ++m) {
      double interference = 0.0;
      for (int k = 0; k < k_count; ++k) {
        if (alloc[static_cast<std::size_t>(k)] == m) interference += power[static_cast<std::size_t>(k)] * gains.h_tilde(k, m);
      }
      const double sinr = cue_power * gains.h(m, m) / (noise + interference);
      worst = std::max(worst, relative_error(sinr, sim_cue[static_cast<std::size_t>(m)]));
      worst = std::max(worst, relative_error(bandwidth * std::log2(1.0 + sinr),
                                             cue_capacity(sim_cue[static_cast<std::size_t>(m)], bandwidth)));
    }
    for (int k = 0; k < k_count; ++k) {
      const int b = alloc[static_cast<std::size_t>(k)];
      if (b < 0) continue;
      double interference = cue_power * gains.cue_to_v2v(b, k, b);
      for (int j = 0; j < k_count; ++j) {
        if (j != k && alloc[static_cast<std::size_t>(j)] == b)
          interference += power[static_cast<std::size_t>(j)] * gains.v2v_to_v2v(j, k, b);
      }
      const double sinr = power[static_cast<std::size_t>(k)] * gains.g(k, b) / (noise + interference);
      worst = std::max(worst, relative_error(sinr, v2v_sinr(gains, alloc, power, k, cue_power, sim_noise)));
    }
  }
  std::ostringstream detail;
  detail << "max relative error " << worst << " over 100 instances";
  return {"sinr-equivalence", worst < 1e-12, detail.str()};
}

CheckResult check_replay_fifo() {
  const std::size_t capacity = 37;
  ReplayMemory memory(capacity);
  for (std::size_t i = 0; i < 10 * capacity; ++i) {
    Transition t;
    t.state = {static_cast<double>(i)};
    t.action = static_cast<int>(i % 5);
    t.reward = static_cast<double>(i);
    t.next_state = {static_cast<double>(i + 1)};
    memory.push(std::move(t));
  }
  bool ok = memory.size() == capacity;
  for (std::size_t i = 0; ok && i < capacity; ++i) {
    ok = memory.at(i).reward == static_cast<double>(9 * capacity + i);
  }
  return {"replay-fifo", ok, ok ? "buffer holds the newest transitions in order" : "buffer contents out of order"};
}

CheckResult check_determinism() {
  RunConfig cfg;
  cfg.env.num_cues = cfg.env.num_subbands = 4;
  cfg.env.num_links = 4;
  cfg.trainer.total_steps = 60;
  cfg.trainer.batch_size = 16;
  cfg.trainer.log_interval = 20;
  cfg.net.hidden_layers = {16, 8};
  cfg.run.episodes = 3;
  cfg.run.k_list = {4};
  cfg.run.policies = {"dqn", "random", "cluster"};

  auto once = [&] {
    std::ostringstream out;
    const TrainResult trained = run_training(cfg);
    save_checkpoint(trained.params, out);
    write_training_log_csv(out, trained.log);
    const auto records = run_sweep(cfg, std::make_shared<const MlpParams>(trained.params));
    write_metrics_csv(out, records);
    return out.str();
  };
  const std::string a = once();
  const std::string b = once();
  return {"determinism", a == b, a == b ? "repeated runs are byte-identical" : "repeated runs differ"};
}

SelftestReport run_selftest(const SelftestFaults& faults) {
  SelftestReport report;
  auto guarded = [&](const std::string& name, auto&& fn) {
    try {
      report.checks.push_back(fn());
    } catch (const std::exception& e) {
      report.checks.push_back({name, false, std::string("exception: ") + e.what()});
    }
  };
  guarded("gradient", [&] { return check_gradients(faults); });
  guarded("tabular-oracle", [] { return check_tabular_oracle(); });
  guarded("sinr-equivalence", [&] { return check_sinr_equivalence(faults); });
  guarded("replay-fifo", [] { return check_replay_fifo(); });
  guarded("determinism", [] { return check_determinism(); });
  return report;
}

void print_report(std::ostream& out, const SelftestReport& report) {
  for (const CheckResult& c : report.checks) {
    out << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
  }
  out << (report.all_passed() ? "selftest passed" : "selftest FAILED") << '\n';
}

}  // namespace v2v
