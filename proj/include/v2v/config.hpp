#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "v2v/dqn_agent.hpp"
#include "v2v/environment.hpp"

namespace v2v {

struct RunSettings {
  std::string output_dir = "out";
  std::vector<std::string> policies{"dqn", "random", "cluster"};
  std::vector<int> k_list{4, 8, 12, 16, 20};
  int episodes = 200;
  std::uint64_t seed = 2024;
  std::string checkpoint;  // empty: <output_dir>/checkpoint.mlp
  int cluster_max_iters = 50;
  int threads = 0;  // 0: SIM_THREADS or hardware concurrency

  bool operator==(const RunSettings&) const = default;
};

struct RunConfig {
  EnvConfig env;
  TrainerConfig trainer;
  NetConfig net;
  RunSettings run;

  bool operator==(const RunConfig&) const = default;
  void validate() const;
  std::string checkpoint_path() const;
};

// Flat "key = value" text with [geometry], [channel], [env], [trainer], [net]
// and [run] sections. '#' starts a comment line. Unknown sections or keys,
// duplicates and malformed values raise ConfigError with the line number.
RunConfig parse_config(std::istream& in);
RunConfig parse_config_string(const std::string& text);
RunConfig load_config_file(const std::string& path);

// Writes every key, so parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& cfg);

// Laptop-sized profile: N_RB = M = 4, K = 12, with 10 ms decision slots and a
// 1 Mbit payload so the 100 ms deadline actually binds.
RunConfig desk_profile();

}  // namespace v2v
