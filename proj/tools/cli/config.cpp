#include "config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "chandis/errors.hpp"

namespace chandis::cli {

using nlohmann::json;

std::string to_json(const RunConfig& c) {
  json j;
  j["subcommand"] = c.subcommand;
  j["strategy"] = c.strategy;
  j["p"] = c.p;
  j["r"] = c.r;
  j["l"] = c.l;
  j["restarts"] = c.restarts;
  j["channel_a"] = c.channel_a;
  j["channel_b"] = c.channel_b;
  j["pairs"] = c.pairs;
  j["warm_start"] = c.warm_start;
  j["max_iterations"] = c.max_iterations;
  j["diamond_restarts"] = c.diamond_restarts;
  j["ansatz"] = c.ansatz;
  j["alpha0"] = c.alpha0;
  j["alpha1"] = c.alpha1;
  j["heatmap"] = c.heatmap;
  j["classifier_restarts"] = c.classifier_restarts;
  j["intervals"] = c.intervals;
  j["n_copies"] = c.n_copies;
  j["input"] = c.input;
  j["cap"] = c.cap ? json(*c.cap) : json(nullptr);
  j["n_train"] = c.n_train ? json(*c.n_train) : json(nullptr);
  j["n_test"] = c.n_test ? json(*c.n_test) : json(nullptr);
  j["maps"] = c.maps;
  j["correlation"] = c.correlation;
  j["layers"] = c.layers;
  j["runs"] = c.runs;
  j["grid_step"] = c.grid_step;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["threads"] = c.threads;
  j["record_timing"] = c.record_timing;
  return j.dump(2);
}

namespace {

template <typename T>
void read(const json& v, const std::string& key, T& out) {
  try {
    out = v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: key '" + key + "' has the wrong type");
  }
}

template <typename T>
void read_optional(const json& v, const std::string& key, std::optional<T>& out) {
  if (v.is_null()) {
    out.reset();
    return;
  }
  T tmp{};
  read(v, key, tmp);
  out = tmp;
}

}  // namespace

RunConfig config_from_json(const std::string& text, RunConfig c) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  for (const auto& [key, v] : j.items()) {
    if (key == "subcommand") read(v, key, c.subcommand);
    else if (key == "strategy") read(v, key, c.strategy);
    else if (key == "p") read(v, key, c.p);
    else if (key == "r") read(v, key, c.r);
    else if (key == "l") read(v, key, c.l);
    else if (key == "restarts") read(v, key, c.restarts);
    else if (key == "channel_a") read(v, key, c.channel_a);
    else if (key == "channel_b") read(v, key, c.channel_b);
    else if (key == "pairs") read(v, key, c.pairs);
    else if (key == "warm_start") read(v, key, c.warm_start);
    else if (key == "max_iterations") read(v, key, c.max_iterations);
    else if (key == "diamond_restarts") read(v, key, c.diamond_restarts);
    else if (key == "ansatz") read(v, key, c.ansatz);
    else if (key == "alpha0") read(v, key, c.alpha0);
    else if (key == "alpha1") read(v, key, c.alpha1);
    else if (key == "heatmap") read(v, key, c.heatmap);
    else if (key == "classifier_restarts") read(v, key, c.classifier_restarts);
    else if (key == "intervals") read(v, key, c.intervals);
    else if (key == "n_copies") read(v, key, c.n_copies);
    else if (key == "input") read(v, key, c.input);
    else if (key == "cap") read_optional(v, key, c.cap);
    else if (key == "n_train") read_optional(v, key, c.n_train);
    else if (key == "n_test") read_optional(v, key, c.n_test);
    else if (key == "maps") read(v, key, c.maps);
    else if (key == "correlation") read(v, key, c.correlation);
    else if (key == "layers") read(v, key, c.layers);
    else if (key == "runs") read(v, key, c.runs);
    else if (key == "grid_step") read(v, key, c.grid_step);
    else if (key == "seed") read(v, key, c.seed);
    else if (key == "output_dir") read(v, key, c.output_dir);
    else if (key == "threads") read(v, key, c.threads);
    else if (key == "record_timing") read(v, key, c.record_timing);
    else throw ConfigError("config: unknown key '" + key + "'");
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return {};
  return config_from_json(text);
}

}  // namespace chandis::cli
