#include "v2v/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string_view>

#include "v2v/errors.hpp"

namespace v2v {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw ConfigError("expected a number, got '" + std::string(s) + "'");
  return v;
}

template <typename Int>
Int parse_int(std::string_view s) {
  Int v{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ConfigError("expected an integer, got '" + std::string(s) + "'");
  return v;
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (out.back().empty()) throw ConfigError("empty element in list '" + std::string(s) + "'");
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T, typename F>
std::string join(const std::vector<T>& xs, F fmt) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += fmt(xs[i]);
  }
  return out;
}

struct Field {
  std::string section;
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view)> set;
};

template <typename Member>
Field dbl(std::string section, std::string key, Member member) {
  return Field{std::move(section), std::move(key), [member](const RunConfig& c) { return format_double(member(c)); },
               [member](RunConfig& c, std::string_view v) { member(c) = parse_double(v); }};
}

template <typename Int, typename Member>
Field integer(std::string section, std::string key, Member member) {
  return Field{std::move(section), std::move(key),
               [member](const RunConfig& c) { return std::to_string(member(c)); },
               [member](RunConfig& c, std::string_view v) { member(c) = parse_int<Int>(v); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    // geometry
    f.push_back(integer<int>("geometry", "block_rows", [](auto& c) -> auto& { return c.env.grid.block_rows; }));
    f.push_back(integer<int>("geometry", "block_cols", [](auto& c) -> auto& { return c.env.grid.block_cols; }));
    f.push_back(dbl("geometry", "block_width_m", [](auto& c) -> auto& { return c.env.grid.block_width_m; }));
    f.push_back(dbl("geometry", "block_height_m", [](auto& c) -> auto& { return c.env.grid.block_height_m; }));
    f.push_back(integer<int>("geometry", "lanes_per_direction",
                             [](auto& c) -> auto& { return c.env.grid.lanes_per_direction; }));
    f.push_back(dbl("geometry", "lane_width_m", [](auto& c) -> auto& { return c.env.grid.lane_width_m; }));
    f.push_back(dbl("geometry", "vehicle_density", [](auto& c) -> auto& { return c.env.vehicle_density; }));
    f.push_back(dbl("geometry", "speed_mps", [](auto& c) -> auto& { return c.env.speed_mps; }));
    f.push_back(dbl("geometry", "turn_left", [](auto& c) -> auto& { return c.env.turns.left; }));
    f.push_back(dbl("geometry", "turn_right", [](auto& c) -> auto& { return c.env.turns.right; }));
    f.push_back(dbl("geometry", "turn_straight", [](auto& c) -> auto& { return c.env.turns.straight; }));
    f.push_back(integer<int>("geometry", "max_drop_attempts", [](auto& c) -> auto& { return c.env.max_drop_attempts; }));
    // channel
    f.push_back(dbl("channel", "carrier_ghz", [](auto& c) -> auto& { return c.env.channel.carrier_ghz; }));
    f.push_back(dbl("channel", "v2i_intercept_db", [](auto& c) -> auto& { return c.env.channel.v2i_intercept_db; }));
    f.push_back(dbl("channel", "v2i_slope_db", [](auto& c) -> auto& { return c.env.channel.v2i_slope_db; }));
    f.push_back(dbl("channel", "v2v_intercept_db", [](auto& c) -> auto& { return c.env.channel.v2v_intercept_db; }));
    f.push_back(dbl("channel", "v2v_slope_db", [](auto& c) -> auto& { return c.env.channel.v2v_slope_db; }));
    f.push_back(dbl("channel", "v2v_freq_coeff_db", [](auto& c) -> auto& { return c.env.channel.v2v_freq_coeff_db; }));
    f.push_back(dbl("channel", "nlos_penalty_db", [](auto& c) -> auto& { return c.env.channel.nlos_penalty_db; }));
    f.push_back(dbl("channel", "shadow_std_v2i_db", [](auto& c) -> auto& { return c.env.channel.shadow_std_v2i_db; }));
    f.push_back(dbl("channel", "shadow_std_v2v_db", [](auto& c) -> auto& { return c.env.channel.shadow_std_v2v_db; }));
    f.push_back(dbl("channel", "bs_antenna_gain_dbi", [](auto& c) -> auto& { return c.env.channel.bs_antenna_gain_dbi; }));
    f.push_back(dbl("channel", "bs_antenna_height_m", [](auto& c) -> auto& { return c.env.channel.bs_antenna_height_m; }));
    f.push_back(dbl("channel", "vehicle_antenna_gain_dbi",
                    [](auto& c) -> auto& { return c.env.channel.vehicle_antenna_gain_dbi; }));
    f.push_back(dbl("channel", "vehicle_antenna_height_m",
                    [](auto& c) -> auto& { return c.env.channel.vehicle_antenna_height_m; }));
    f.push_back(dbl("channel", "min_distance_m", [](auto& c) -> auto& { return c.env.channel.min_distance_m; }));
    // env
    f.push_back(integer<int>("env", "num_cues", [](auto& c) -> auto& { return c.env.num_cues; }));
    f.push_back(integer<int>("env", "num_subbands", [](auto& c) -> auto& { return c.env.num_subbands; }));
    f.push_back(integer<int>("env", "num_links", [](auto& c) -> auto& { return c.env.num_links; }));
    f.push_back(dbl("env", "bandwidth_hz", [](auto& c) -> auto& { return c.env.bandwidth_hz; }));
    f.push_back(dbl("env", "cue_power_dbm", [](auto& c) -> auto& { return c.env.cue_power_dbm; }));
    f.push_back(Field{"env", "power_levels_dbm",
                      [](const RunConfig& c) {
                        return join(std::vector<double>(c.env.power_levels_dbm.begin(), c.env.power_levels_dbm.end()),
                                    format_double);
                      },
                      [](RunConfig& c, std::string_view v) {
                        const auto parts = split_list(v);
                        if (parts.size() != kPowerLevels) throw ConfigError("power_levels_dbm needs exactly 3 values");
                        for (std::size_t i = 0; i < parts.size(); ++i) c.env.power_levels_dbm[i] = parse_double(parts[i]);
                      }});
    f.push_back(dbl("env", "noise_dbm", [](auto& c) -> auto& { return c.env.noise_dbm; }));
    f.push_back(integer<int>("env", "deadline_ms", [](auto& c) -> auto& { return c.env.deadline_ms; }));
    f.push_back(integer<int>("env", "slot_ms", [](auto& c) -> auto& { return c.env.slot_ms; }));
    f.push_back(dbl("env", "payload_bits", [](auto& c) -> auto& { return c.env.payload_bits; }));
    f.push_back(dbl("env", "penalty", [](auto& c) -> auto& { return c.env.penalty; }));
    f.push_back(dbl("env", "lambda_v2i", [](auto& c) -> auto& { return c.env.lambda_v2i; }));
    f.push_back(dbl("env", "obs_gain_ref_db", [](auto& c) -> auto& { return c.env.obs_gain_ref_db; }));
    f.push_back(dbl("env", "obs_gain_scale_db", [](auto& c) -> auto& { return c.env.obs_gain_scale_db; }));
    f.push_back(dbl("env", "obs_bs_gain_ref_db", [](auto& c) -> auto& { return c.env.obs_bs_gain_ref_db; }));
    f.push_back(dbl("env", "obs_bs_gain_scale_db", [](auto& c) -> auto& { return c.env.obs_bs_gain_scale_db; }));
    f.push_back(dbl("env", "obs_interference_ref_dbm",
                    [](auto& c) -> auto& { return c.env.obs_interference_ref_dbm; }));
    f.push_back(dbl("env", "obs_interference_scale_db",
                    [](auto& c) -> auto& { return c.env.obs_interference_scale_db; }));
    // trainer
    f.push_back(dbl("trainer", "beta", [](auto& c) -> auto& { return c.trainer.beta; }));
    f.push_back(dbl("trainer", "epsilon_start", [](auto& c) -> auto& { return c.trainer.epsilon_start; }));
    f.push_back(dbl("trainer", "epsilon_end", [](auto& c) -> auto& { return c.trainer.epsilon_end; }));
    f.push_back(dbl("trainer", "epsilon_decay_fraction",
                    [](auto& c) -> auto& { return c.trainer.epsilon_decay_fraction; }));
    f.push_back(integer<int>("trainer", "batch_size", [](auto& c) -> auto& { return c.trainer.batch_size; }));
    f.push_back(integer<int>("trainer", "memory_capacity", [](auto& c) -> auto& { return c.trainer.memory_capacity; }));
    f.push_back(integer<int>("trainer", "target_sync_interval",
                             [](auto& c) -> auto& { return c.trainer.target_sync_interval; }));
    f.push_back(integer<long>("trainer", "total_steps", [](auto& c) -> auto& { return c.trainer.total_steps; }));
    f.push_back(integer<std::uint64_t>("trainer", "seed", [](auto& c) -> auto& { return c.trainer.seed; }));
    f.push_back(dbl("trainer", "learning_rate", [](auto& c) -> auto& { return c.trainer.adam.learning_rate; }));
    f.push_back(dbl("trainer", "adam_beta1", [](auto& c) -> auto& { return c.trainer.adam.beta1; }));
    f.push_back(dbl("trainer", "adam_beta2", [](auto& c) -> auto& { return c.trainer.adam.beta2; }));
    f.push_back(dbl("trainer", "adam_epsilon", [](auto& c) -> auto& { return c.trainer.adam.epsilon; }));
    f.push_back(dbl("trainer", "lr_decay_factor", [](auto& c) -> auto& { return c.trainer.lr_decay_factor; }));
    f.push_back(Field{"trainer", "lr_decay_points",
                      [](const RunConfig& c) { return join(c.trainer.lr_decay_points, format_double); },
                      [](RunConfig& c, std::string_view v) {
                        c.trainer.lr_decay_points.clear();
                        for (const auto& p : split_list(v)) c.trainer.lr_decay_points.push_back(parse_double(p));
                      }});
    f.push_back(integer<int>("trainer", "log_interval", [](auto& c) -> auto& { return c.trainer.log_interval; }));
    // net
    f.push_back(Field{"net", "hidden_layers",
                      [](const RunConfig& c) { return join(c.net.hidden_layers, [](int x) { return std::to_string(x); }); },
                      [](RunConfig& c, std::string_view v) {
                        c.net.hidden_layers.clear();
                        for (const auto& p : split_list(v)) c.net.hidden_layers.push_back(parse_int<int>(p));
                      }});
    // run
    f.push_back(Field{"run", "output_dir", [](const RunConfig& c) { return c.run.output_dir; },
                      [](RunConfig& c, std::string_view v) { c.run.output_dir = std::string(v); }});
    f.push_back(Field{"run", "policies", [](const RunConfig& c) { return join(c.run.policies, [](const std::string& s) { return s; }); },
                      [](RunConfig& c, std::string_view v) { c.run.policies = split_list(v); }});
    f.push_back(Field{"run", "k_list",
                      [](const RunConfig& c) { return join(c.run.k_list, [](int x) { return std::to_string(x); }); },
                      [](RunConfig& c, std::string_view v) {
                        c.run.k_list.clear();
                        for (const auto& p : split_list(v)) c.run.k_list.push_back(parse_int<int>(p));
                      }});
    f.push_back(integer<int>("run", "episodes", [](auto& c) -> auto& { return c.run.episodes; }));
    f.push_back(integer<std::uint64_t>("run", "seed", [](auto& c) -> auto& { return c.run.seed; }));
    f.push_back(Field{"run", "checkpoint", [](const RunConfig& c) { return c.run.checkpoint; },
                      [](RunConfig& c, std::string_view v) { c.run.checkpoint = std::string(v); }});
    f.push_back(integer<int>("run", "cluster_max_iters", [](auto& c) -> auto& { return c.run.cluster_max_iters; }));
    f.push_back(integer<int>("run", "threads", [](auto& c) -> auto& { return c.run.threads; }));
    return f;
  }();
  return table;
}

const std::vector<std::string>& section_order() {
  static const std::vector<std::string> order{"geometry", "channel", "env", "trainer", "net", "run"};
  return order;
}

}  // namespace

void RunConfig::validate() const {
  env.validate();
  trainer.validate();
  for (int w : net.hidden_layers) {
    if (w < 1) throw ConfigError("hidden layer widths must be >= 1");
  }
  if (run.episodes < 0) throw ConfigError("episodes must be >= 0");
  if (run.cluster_max_iters < 0) throw ConfigError("cluster_max_iters must be >= 0");
  if (run.threads < 0) throw ConfigError("threads must be >= 0");
  for (int k : run.k_list) {
    if (k < 1) throw ConfigError("k_list entries must be >= 1");
  }
  static const std::set<std::string> known{"dqn", "random", "cluster"};
  for (const auto& p : run.policies) {
    if (!known.count(p)) throw ConfigError("unknown policy '" + p + "' (expected dqn, random or cluster)");
  }
}

std::string RunConfig::checkpoint_path() const {
  return run.checkpoint.empty() ? run.output_dir + "/checkpoint.mlp" : run.checkpoint;
}

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::string section;
  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  const auto& table = fields();
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#' || text[0] == ';') continue;
    const std::string where = "config line " + std::to_string(line_no) + ": ";
    if (text.front() == '[') {
      if (text.back() != ']') throw ConfigError(where + "malformed section header");
      section = trim(std::string_view(text).substr(1, text.size() - 2));
      bool ok = false;
      for (const auto& s : section_order()) ok = ok || s == section;
      if (!ok) throw ConfigError(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    if (section.empty()) throw ConfigError(where + "key outside of any section");
    const std::string key = trim(std::string_view(text).substr(0, eq));
    const std::string value = trim(std::string_view(text).substr(eq + 1));
    const Field* field = nullptr;
    for (const Field& f : table) {
      if (f.section == section && f.key == key) field = &f;
    }
    if (!field) throw ConfigError(where + "unknown key '" + key + "' in [" + section + "]");
    if (!seen.insert(section + "." + key).second) throw ConfigError(where + "duplicate key '" + key + "'");
    try {
      field->set(cfg, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + key + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream out;
  for (std::size_t s = 0; s < section_order().size(); ++s) {
    const std::string& section = section_order()[s];
    if (s) out << '\n';
    out << '[' << section << "]\n";
    for (const Field& f : fields()) {
      if (f.section == section) out << f.key << " = " << f.get(cfg) << '\n';
    }
  }
  return out.str();
}

RunConfig desk_profile() {
  RunConfig cfg;
  cfg.env.num_cues = 4;
  cfg.env.num_subbands = 4;
  cfg.env.num_links = 12;
  cfg.env.slot_ms = 10;
  cfg.env.payload_bits = 1e6;
  cfg.env.lambda_v2i = 1e-10;
  cfg.trainer.beta = 0.9;
  cfg.run.episodes = 500;
  cfg.run.k_list = {4, 8, 12, 16, 20};
  return cfg;
}

}  // namespace v2v
