#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace chandis::cli {

/// Every experiment knob the subcommands read. Optional sizes fall back to a
/// per-subcommand default when unset.
struct RunConfig {
  std::string subcommand;

  // discriminate / sweep
  std::string strategy = "parallel";
  std::size_t p = 1;
  std::size_t r = 0;
  std::size_t l = 1;
  std::size_t restarts = 10;
  std::string channel_a = "eb-A";
  std::string channel_b = "eb-B";
  std::string pairs;  // "a0:a1,a0:a1"; empty = default grid
  bool warm_start = true;
  int max_iterations = 2000;

  // diamond
  std::size_t diamond_restarts = 20;

  // classify-var
  std::string ansatz = "U2";
  double alpha0 = 0.1;
  double alpha1 = 0.9;
  bool heatmap = false;
  std::size_t classifier_restarts = 5;

  // classify-kernel
  std::string intervals = "i1";
  std::size_t n_copies = 1;
  std::string input = "plus";
  std::optional<double> cap = 1e6;  // null = hard margin

  // shared sizes
  std::optional<std::size_t> n_train;
  std::optional<std::size_t> n_test;

  // analyze
  bool maps = true;
  bool correlation = false;
  std::vector<std::size_t> layers{2, 6, 10, 14};
  std::size_t runs = 5;
  double grid_step = 0.1;

  std::uint64_t seed = 0;
  std::string output_dir = ".";
  std::size_t threads = 0;
  bool record_timing = false;

  bool operator==(const RunConfig&) const = default;
};

/// JSON text with every field.
std::string to_json(const RunConfig& cfg);

/// Parses JSON text; keys absent from the text keep their defaults and unknown
/// keys raise ConfigError naming the key.
RunConfig config_from_json(const std::string& text, RunConfig base = {});

/// Reads a config file. An empty (or whitespace-only) file yields the defaults.
RunConfig load_config(const std::string& path);

}  // namespace chandis::cli
