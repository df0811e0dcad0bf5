#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "v2v/config.hpp"
#include "v2v/errors.hpp"
#include "v2v/runner.hpp"
#include "v2v/selftest.hpp"

namespace py = pybind11;
using namespace v2v;

namespace {

// Networks cross the boundary as checkpoint text.
std::string to_text(const MlpParams& params) {
  std::ostringstream out;
  save_checkpoint(params, out);
  return out.str();
}

std::shared_ptr<const MlpParams> from_text(const std::optional<std::string>& text) {
  if (!text) return nullptr;
  std::istringstream in(*text);
  return std::make_shared<const MlpParams>(load_checkpoint(in));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "V2V spectrum sharing simulator";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_RuntimeError);
  py::register_exception<MetricsError>(m, "MetricsError", PyExc_ValueError);
  py::register_exception<TopologyError>(m, "TopologyError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def("validate", &RunConfig::validate)
      .def("__eq__", [](const RunConfig& a, const RunConfig& b) { return a == b; })
      .def_property(
          "num_links", [](const RunConfig& c) { return c.env.num_links; },
          [](RunConfig& c, int k) { c.env.num_links = k; })
      .def_property(
          "num_subbands", [](const RunConfig& c) { return c.env.num_subbands; },
          [](RunConfig& c, int n) { c.env.num_subbands = c.env.num_cues = n; })
      .def_property(
          "payload_bits", [](const RunConfig& c) { return c.env.payload_bits; },
          [](RunConfig& c, double v) { c.env.payload_bits = v; })
      .def_property(
          "total_steps", [](const RunConfig& c) { return c.trainer.total_steps; },
          [](RunConfig& c, long v) { c.trainer.total_steps = v; })
      .def_property(
          "hidden_layers", [](const RunConfig& c) { return c.net.hidden_layers; },
          [](RunConfig& c, std::vector<int> v) { c.net.hidden_layers = std::move(v); })
      .def_property(
          "episodes", [](const RunConfig& c) { return c.run.episodes; },
          [](RunConfig& c, int v) { c.run.episodes = v; })
      .def_property(
          "seed", [](const RunConfig& c) { return c.run.seed; },
          [](RunConfig& c, std::uint64_t v) { c.run.seed = v; })
      .def_property(
          "k_list", [](const RunConfig& c) { return c.run.k_list; },
          [](RunConfig& c, std::vector<int> v) { c.run.k_list = std::move(v); })
      .def_property(
          "policies", [](const RunConfig& c) { return c.run.policies; },
          [](RunConfig& c, std::vector<std::string> v) { c.run.policies = std::move(v); })
      .def_property(
          "threads", [](const RunConfig& c) { return c.run.threads; },
          [](RunConfig& c, int v) { c.run.threads = v; });

  m.def("parse_config", &parse_config_string, py::arg("text"));
  m.def("load_config", &load_config_file, py::arg("path"));
  m.def("serialize_config", &serialize_config, py::arg("config"));
  m.def("desk_profile", &desk_profile);

  py::class_<MetricsRecord>(m, "MetricsRecord")
      .def_readonly("num_links", &MetricsRecord::num_links)
      .def_readonly("policy", &MetricsRecord::policy)
      .def_readonly("mean_v2i_rate", &MetricsRecord::mean_v2i_rate_bps)
      .def_readonly("success_prob", &MetricsRecord::success_prob)
      .def_readonly("episodes", &MetricsRecord::episodes)
      .def_readonly("seed", &MetricsRecord::seed)
      .def_readonly("valid", &MetricsRecord::valid)
      .def("__repr__", [](const MetricsRecord& r) {
        return "MetricsRecord(K=" + std::to_string(r.num_links) + ", policy='" + r.policy +
               "', mean_v2i_rate=" + format_number(r.mean_v2i_rate_bps) +
               ", success_prob=" + format_number(r.success_prob) + ")";
      });

  m.def(
      "train",
      [](const RunConfig& cfg) {
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = run_training(cfg);
        }
        py::list log;
        for (const TrainLogRow& row : r.log) {
          py::dict d;
          d["step"] = row.step;
          d["epsilon"] = row.epsilon;
          d["loss"] = row.loss;
          d["mean_episode_reward"] = row.mean_episode_reward;
          log.append(d);
        }
        return py::make_tuple(to_text(r.params), log);
      },
      py::arg("config"), "Train the shared Q-network; returns (checkpoint_text, log rows).");

  m.def(
      "run_eval",
      [](const RunConfig& cfg, const std::string& policy, std::optional<std::string> checkpoint) {
        auto params = from_text(checkpoint);
        py::gil_scoped_release release;
        return run_eval(cfg, policy, params);
      },
      py::arg("config"), py::arg("policy"), py::arg("checkpoint") = py::none());

  m.def(
      "run_sweep",
      [](const RunConfig& cfg, std::optional<std::string> checkpoint) {
        auto params = from_text(checkpoint);
        py::gil_scoped_release release;
        return run_sweep(cfg, params);
      },
      py::arg("config"), py::arg("checkpoint") = py::none());

  m.def("save_checkpoint", [](const std::string& text, const std::string& path) {
    save_checkpoint_file(*from_text(text), path);
  });
  m.def("load_checkpoint", [](const std::string& path) { return to_text(load_checkpoint_file(path)); });

  m.def("pathloss_v2i", [](double d) { return pathloss_v2i(d); }, py::arg("distance_m"));
  m.def("pathloss_v2v", [](double d, bool los) { return pathloss_v2v(d, los); }, py::arg("distance_m"),
        py::arg("los"));

  m.def("selftest", [] {
    const SelftestReport report = run_selftest();
    py::dict out;
    for (const CheckResult& c : report.checks) out[py::str(c.name)] = py::make_tuple(c.passed, c.detail);
    return out;
  });

  py::class_<Action>(m, "Action")
      .def(py::init<int, int>(), py::arg("sub_band"), py::arg("power_level"))
      .def_readwrite("sub_band", &Action::sub_band)
      .def_readwrite("power_level", &Action::power_level)
      .def_property_readonly("flat", &Action::flat);

  py::class_<V2VEnvironment>(m, "Environment")
      .def(py::init([](const RunConfig& cfg, std::uint64_t seed) { return V2VEnvironment(cfg.env, seed); }),
           py::arg("config"), py::arg("seed"))
      .def("reset", &V2VEnvironment::reset, py::arg("seed"))
      .def_property_readonly("num_agents", &V2VEnvironment::num_agents)
      .def_property_readonly("observation_size", &V2VEnvironment::observation_size)
      .def_property_readonly("num_actions", &V2VEnvironment::num_actions)
      .def_property_readonly("slot", &V2VEnvironment::slot)
      .def_property_readonly("episode_over", &V2VEnvironment::episode_over)
      .def("active", &V2VEnvironment::agent_active, py::arg("agent"))
      .def("observe", [](const V2VEnvironment& env, int k) { return env.observe(k).flatten(); }, py::arg("agent"))
      .def(
          "step",
          [](V2VEnvironment& env, const std::vector<Action>& actions) {
            py::list out;
            for (const StepOutcome& o : env.step(actions)) out.append(py::make_tuple(o.agent, o.reward, o.terminal));
            return out;
          },
          py::arg("actions"), "Submit one action per agent (ignored for inactive ones); returns (agent, reward, terminal).")
      .def("remaining_bits", [](const V2VEnvironment& env, int k) { return env.load(k).remaining_bits; });
}
