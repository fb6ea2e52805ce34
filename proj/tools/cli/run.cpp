#include "run.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "chandis/analysis.hpp"
#include "chandis/diamond.hpp"
#include "chandis/errors.hpp"
#include "chandis/ksvm.hpp"
#include "chandis/vardisc.hpp"
#include "chandis/vclass.hpp"
#include "config.hpp"
#include "csv.hpp"

#ifndef CHANDIS_VERSION
#define CHANDIS_VERSION "0.0.0"
#endif

namespace chandis::cli {

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << h;
  return ss.str();
}

namespace {

using Clock = std::chrono::steady_clock;

/// Collects output files and writes them plus the manifest at the end.
class Outputs {
public:
  explicit Outputs(const RunConfig& cfg) : cfg_(cfg) {}

  void add(const std::string& name, const std::string& text) { files_[name] = text; }

  void write(double wall_time) const {
    namespace fs = std::filesystem;
    const fs::path dir(cfg_.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    nlohmann::json checksums = nlohmann::json::object();
    for (const auto& [name, text] : files_) {
      std::ofstream f(dir / name, std::ios::binary);
      if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
      f << text;
      checksums[name] = "fnv1a64:" + fnv1a_hex(text);
    }
    nlohmann::json manifest;
    manifest["config"] = nlohmann::json::parse(to_json(cfg_));
    manifest["version"] = CHANDIS_VERSION;
    manifest["wall_time_seconds"] = wall_time;
    manifest["outputs"] = checksums;
    std::ofstream m(dir / "manifest.json");
    if (!m) throw std::runtime_error("cannot write manifest.json");
    m << manifest.dump(2) << '\n';
  }

private:
  const RunConfig& cfg_;
  std::map<std::string, std::string> files_;
};

std::string seconds_field(const RunConfig& cfg, double s) { return cfg.record_timing ? fmt(s) : "0"; }

// Depolarising parameter of a channel name, or empty for other channels.
std::string alpha_field(const std::string& name) {
  for (const std::string prefix : {"dep:", "depolarizing:"}) {
    if (name.rfind(prefix, 0) == 0) return name.substr(prefix.size());
  }
  return "";
}

std::vector<AlphaPair> parse_pairs(const std::string& text) {
  if (text.empty()) return default_sweep_pairs();
  std::vector<AlphaPair> out;
  std::stringstream ss(text);
  std::string piece;
  while (std::getline(ss, piece, ',')) {
    const auto colon = piece.find(':');
    if (colon == std::string::npos) throw ConfigError("pairs: expected a0:a1, got '" + piece + "'");
    try {
      out.push_back({std::stod(piece.substr(0, colon)), std::stod(piece.substr(colon + 1))});
    } catch (const std::exception&) {
      throw ConfigError("pairs: cannot parse '" + piece + "'");
    }
  }
  return out;
}

StrategySpec spec_of(const RunConfig& c) {
  StrategySpec s;
  s.strategy = strategy_from_string(c.strategy);
  s.p = c.p;
  s.r = c.r;
  s.l = c.l;
  s.restarts = c.restarts;
  s.seed = c.seed;
  return s;
}

TrainOptions train_options_of(const RunConfig& c) {
  TrainOptions t;
  t.lbfgs.max_iterations = c.max_iterations;
  t.threads = c.threads;
  return t;
}

const std::vector<std::string> kDiscriminateHeader{"strategy", "p",        "r",          "l",     "alpha0",
                                                   "alpha1",   "restart",  "best_value", "iters", "seconds"};

void add_restart_rows(CsvTable& t, const RunConfig& c, const std::string& a0, const std::string& a1,
                      const TrainReport& rep) {
  for (const auto& rec : rep.per_restart) {
    t.add({c.strategy, std::to_string(c.p), std::to_string(c.r), std::to_string(c.l), a0, a1,
           std::to_string(rec.restart), fmt(rec.final_value), std::to_string(rec.iterations),
           seconds_field(c, rec.seconds)});
  }
}

void cmd_discriminate(const RunConfig& c, Outputs& outs, std::ostream& out) {
  const KrausChannel phi0 = channel_by_name(c.channel_a);
  const KrausChannel phi1 = channel_by_name(c.channel_b);
  const TrainReport rep = train(phi0, phi1, spec_of(c), train_options_of(c));
  CsvTable t(kDiscriminateHeader);
  add_restart_rows(t, c, alpha_field(c.channel_a), alpha_field(c.channel_b), rep);
  outs.add("discriminate.csv", t.text());
  out << "best_value " << fmt(rep.best_value) << "\n";
  out << "failed_restarts " << rep.failed_restarts << "\n";
}

void cmd_sweep(const RunConfig& c, Outputs& outs, std::ostream& out) {
  const auto pairs = parse_pairs(c.pairs);
  const auto reports = sweep_depolarizing(spec_of(c), pairs, c.warm_start, train_options_of(c));
  CsvTable t(kDiscriminateHeader);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    add_restart_rows(t, c, fmt(pairs[i].alpha0), fmt(pairs[i].alpha1), reports[i]);
    out << fmt(pairs[i].alpha0) << ' ' << fmt(pairs[i].alpha1) << " best " << fmt(reports[i].best_value) << "\n";
  }
  outs.add("sweep.csv", t.text());
}

void cmd_diamond(const RunConfig& c, Outputs& outs, std::ostream& out) {
  const KrausChannel a = channel_by_name(c.channel_a);
  const KrausChannel b = channel_by_name(c.channel_b);
  DiamondOptions opt;
  opt.restarts = c.diamond_restarts;
  opt.seed = c.seed;
  const auto ta = c.p == 1 ? a : tensor_channels(a, c.p);
  const auto tb = c.p == 1 ? b : tensor_channels(b, c.p);
  const DiamondEstimate est = diamond_norm(ta, tb, opt);
  double lo = est.value;
  double hi = 0.0;
  for (const double v : est.per_restart_values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double pd = std::clamp(0.5 + 0.25 * est.value, 0.5, 1.0);
  CsvTable t({"channel_a", "channel_b", "p", "restarts", "value", "choi_lower_bound", "p_diamond", "restart_min",
              "restart_max"});
  t.add({c.channel_a, c.channel_b, std::to_string(c.p), std::to_string(est.restarts_used), fmt(est.value),
         fmt(est.choi_lower_bound), fmt(pd), fmt(lo), fmt(hi)});
  outs.add("diamond.csv", t.text());
  out << "diamond_norm " << fmt(est.value) << "\n";
  out << "choi_lower_bound " << fmt(est.choi_lower_bound) << "\n";
  out << "p_diamond " << fmt(pd) << "\n";
  out << "restart_spread " << fmt(lo) << ' ' << fmt(hi) << "\n";
}

std::vector<double> alpha_grid(double step) {
  if (!(step > 0.0 && step <= 1.0)) throw ConfigError("grid_step must be in (0, 1]");
  std::vector<double> g;
  const int n = static_cast<int>(std::lround(1.0 / step));
  for (int i = 0; i <= n; ++i) g.push_back(std::min(1.0, i * step));
  return g;
}

void cmd_classify_var(const RunConfig& c, Outputs& outs, std::ostream& out) {
  const ClassifierAnsatz id = classifier_ansatz_from_string(c.ansatz);
  const std::size_t n_train = c.n_train.value_or(1000);
  const std::size_t n_test = c.n_test.value_or(1000);
  ClassifierOptions opt;
  opt.restarts = c.classifier_restarts;
  CsvTable t({"ansatz", "alpha0", "alpha1", "train_acc", "test_acc", "b", "seconds"});
  std::vector<HeatmapCell> cells;
  if (c.heatmap) {
    const auto grid = alpha_grid(c.grid_step);
    cells = accuracy_heatmap(id, grid, n_train, n_test, c.seed, opt);
  } else {
    const auto t0 = Clock::now();
    const SeedPath root = SeedPath(c.seed).child("classify-var");
    const auto train = make_dataset(c.alpha0, c.alpha1, n_train, pairing_for(id), root.child("train").seed());
    const auto test = make_dataset(c.alpha0, c.alpha1, n_test, pairing_for(id), root.child("test").seed());
    opt.seed = root.child("fit").seed();
    const auto clf = train_classifier(id, train, opt);
    HeatmapCell cell{c.alpha0, c.alpha1, clf.train_accuracy, evaluate(clf, test), clf.b, 0.0};
    cell.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    cells.push_back(cell);
  }
  for (const auto& cell : cells) {
    t.add({std::string(to_string(id)), fmt(cell.alpha0), fmt(cell.alpha1), fmt(cell.train_accuracy),
           fmt(cell.test_accuracy), fmt(cell.b), seconds_field(c, cell.seconds)});
  }
  outs.add("classify_var.csv", t.text());
  if (cells.size() == 1) {
    out << "train_acc " << fmt(cells[0].train_accuracy) << "\ntest_acc " << fmt(cells[0].test_accuracy) << "\nb "
        << fmt(cells[0].b) << "\n";
  } else {
    out << "cells " << cells.size() << "\n";
  }
}

void cmd_classify_kernel(const RunConfig& c, Outputs& outs, std::ostream& out) {
  const IntervalSpec spec = parse_intervals(c.intervals);
  const InputPolicy policy = input_policy_from_string(c.input);
  const std::size_t n_train = c.n_train.value_or(100);
  const std::size_t n_test = c.n_test.value_or(1000);
  const SeedPath root = SeedPath(c.seed).child("classify-kernel");
  const auto train = make_interval_dataset(spec, policy, c.n_copies, n_train, root.child("train").seed());
  const auto test = make_interval_dataset(spec, policy, c.n_copies, n_test, root.child("test").seed());
  DualOptions opt;
  opt.cap = c.cap;
  const KernelModel model = train_kernel(train, opt);
  const KernelEvaluation ev = evaluate_kernel(model, test);
  CsvTable t({"alpha", "true_label", "score", "pred_label"});
  for (std::size_t i = 0; i < test.items.size(); ++i) {
    t.add({fmt(test.items[i].alpha), std::to_string(test.items[i].label), fmt(ev.scores[i]),
           std::to_string(ev.predicted[i])});
  }
  t.add({"summary", "", fmt(ev.accuracy), ""});
  outs.add("classify_kernel.csv", t.text());
  out << "accuracy " << fmt(ev.accuracy) << "\n";
  out << "support_vectors " << model.theta.size() << "\n";
  out << "dual_status " << to_string(model.status) << "\n";
}

std::string matrix_csv(const std::vector<double>& grid, const Eigen::MatrixXd& m) {
  std::vector<std::string> header{"alpha0\\alpha1"};
  for (const double a : grid) header.push_back(fmt(a));
  CsvTable t(header);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<std::string> row{fmt(grid[static_cast<std::size_t>(i)])};
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(fmt(m(i, j)));
    t.add(row);
  }
  return t.text();
}

void cmd_analyze(const RunConfig& c, Outputs& outs, std::ostream& out) {
  DiamondOptions dopt;
  dopt.restarts = c.diamond_restarts;
  dopt.seed = c.seed;
  if (c.maps) {
    const GridMaps maps = grid_maps(alpha_grid(c.grid_step), c.p, dopt);
    outs.add("trace_map.csv", matrix_csv(maps.grid, maps.trace));
    outs.add("diamond_map.csv", matrix_csv(maps.grid, maps.diamond));
    out << "maps " << maps.grid.size() << "x" << maps.grid.size() << "\n";
  }
  if (c.correlation) {
    const auto pairs = correlation_pairs();
    const CorrelationStudy st =
        correlation_study(spec_of(c), c.layers, pairs, c.runs, train_options_of(c), dopt);
    std::vector<std::string> header{"l", "r_trace", "r_diamond"};
    for (const auto& pr : pairs) header.push_back("ps_" + fmt(pr.alpha0) + "_" + fmt(pr.alpha1));
    CsvTable t(header);
    std::vector<double> ls;
    std::vector<double> rt;
    std::vector<double> rd;
    for (const auto& row : st.rows) {
      std::vector<std::string> cells{std::to_string(row.l), fmt(row.r_trace), fmt(row.r_diamond)};
      for (const double v : row.mean_success) cells.push_back(fmt(v));
      t.add(cells);
      ls.push_back(static_cast<double>(row.l));
      rt.push_back(row.r_trace);
      rd.push_back(row.r_diamond);
      out << "l " << row.l << " r_trace " << fmt(row.r_trace) << " r_diamond " << fmt(row.r_diamond) << "\n";
    }
    outs.add("correlation.csv", t.text());
    try {
      const FitResult fa = fit_power(ls, rt);
      out << "fit_power a " << fmt(fa.parameter) << " residual " << fmt(fa.residual_sum) << "\n";
    } catch (const ContractError& e) {
      out << "fit_power unavailable: " << e.what() << "\n";
    }
    try {
      const FitResult fb = fit_exp(ls, rd);
      out << "fit_exp b " << fmt(fb.parameter) << " residual " << fmt(fb.residual_sum) << "\n";
    } catch (const ContractError& e) {
      out << "fit_exp unavailable: " << e.what() << "\n";
    }
  }
}

std::string find_config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return "";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  std::string config_path;
  try {
    config_path = find_config_path(args);
    if (!config_path.empty()) cfg = load_config(config_path);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  CLI::App app{"chandis: quantum channel discrimination experiments"};
  app.require_subcommand(1);
  std::string config_dummy;
  std::optional<double> cap_flag;
  bool hard_margin = false;
  std::size_t n_train = cfg.n_train.value_or(0);
  std::size_t n_test = cfg.n_test.value_or(0);
  std::vector<CLI::Option*> size_opts;

  auto common = [&](CLI::App* s) {
    s->add_option("--config", config_dummy, "JSON config file; flags override its values");
    s->add_option("--seed", cfg.seed, "Master seed")->capture_default_str();
    s->add_option("--output-dir", cfg.output_dir, "Directory for CSV outputs and manifest.json")
        ->capture_default_str();
    s->add_option("--threads", cfg.threads, "Worker threads (0: CHANDIS_THREADS or all cores)")
        ->capture_default_str();
    s->add_flag("--record-timing", cfg.record_timing, "Write measured seconds into CSV outputs");
  };
  auto strategy_opts = [&](CLI::App* s) {
    s->add_option("--strategy", cfg.strategy, "parallel | sequential")->capture_default_str();
    s->add_option("--p", cfg.p, "Channel uses")->capture_default_str();
    s->add_option("--r", cfg.r, "Ancilla qubits")->capture_default_str();
    s->add_option("--l", cfg.l, "Ansatz layers per block")->capture_default_str();
    s->add_option("--restarts", cfg.restarts, "Random restarts")->capture_default_str();
    s->add_option("--max-iterations", cfg.max_iterations, "Optimizer iteration cap")->capture_default_str();
  };
  auto channel_opts = [&](CLI::App* s) {
    auto* a = s->add_option("--channel-a", cfg.channel_a, "Channel 0: eb-A, eb-B, identity, dep:<alpha> or JSON");
    auto* b = s->add_option("--channel-b", cfg.channel_b, "Channel 1");
    if (config_path.empty()) {
      a->required();
      b->required();
    }
  };

  auto* disc = app.add_subcommand("discriminate", "Train a variational strategy for one channel pair");
  common(disc);
  strategy_opts(disc);
  channel_opts(disc);

  auto* sweep = app.add_subcommand("sweep", "Depolarizing sweep over (alpha, alpha + 0.1) pairs");
  common(sweep);
  strategy_opts(sweep);
  sweep->add_option("--pairs", cfg.pairs, "a0:a1,a0:a1,... (default: the ten-pair grid)");
  sweep->add_option("--warm-start", cfg.warm_start, "Continue each pair from the previous optimum")
      ->capture_default_str();

  auto* diam = app.add_subcommand("diamond", "Estimate the diamond norm and p_diamond");
  common(diam);
  channel_opts(diam);
  diam->add_option("--p", cfg.p, "Parallel channel uses")->capture_default_str();
  diam->add_option("--restarts", cfg.diamond_restarts, "Random pure-state restarts")->capture_default_str();

  auto* cvar = app.add_subcommand("classify-var", "Variational classifier (single cell or heatmap)");
  common(cvar);
  cvar->add_option("--ansatz", cfg.ansatz, "U1 | U2 | U3")->capture_default_str();
  cvar->add_option("--alpha0", cfg.alpha0, "Class-0 depolarization")->capture_default_str();
  cvar->add_option("--alpha1", cfg.alpha1, "Class-1 depolarization")->capture_default_str();
  cvar->add_flag("--heatmap", cfg.heatmap, "Evaluate the whole alpha grid");
  cvar->add_option("--grid-step", cfg.grid_step, "Heatmap grid step")->capture_default_str();
  cvar->add_option("--restarts", cfg.classifier_restarts, "Optimizer restarts per cell")->capture_default_str();
  size_opts.push_back(cvar->add_option("--n-train", n_train, "Training set size (default 1000)"));
  size_opts.push_back(cvar->add_option("--n-test", n_test, "Test set size (default 1000)"));

  auto* ckern = app.add_subcommand("classify-kernel", "Kernel classifier on interval datasets");
  common(ckern);
  ckern->add_option("--intervals", cfg.intervals, "i1..i4 or lo:hi[,lo:hi]/lo:hi[,...]")
      ->capture_default_str();
  ckern->add_option("--n-copies", cfg.n_copies, "Kernel power n")->capture_default_str();
  ckern->add_option("--input", cfg.input, "plus | random-mixed")->capture_default_str();
  ckern->add_option("--cap", cap_flag, "Box cap C on the dual variables");
  ckern->add_flag("--hard-margin", hard_margin, "No cap on the dual variables");
  size_opts.push_back(ckern->add_option("--n-train", n_train, "Training set size (default 100)"));
  size_opts.push_back(ckern->add_option("--n-test", n_test, "Test set size (default 1000)"));

  auto* an = app.add_subcommand("analyze", "Trace-product / diamond maps and the correlation study");
  common(an);
  strategy_opts(an);
  an->add_option("--grid-step", cfg.grid_step, "Map grid step")->capture_default_str();
  an->add_option("--diamond-restarts", cfg.diamond_restarts, "Restarts per diamond estimate")
      ->capture_default_str();
  an->add_option("--maps", cfg.maps, "Emit trace_map.csv and diamond_map.csv")->capture_default_str();
  an->add_flag("--correlation", cfg.correlation, "Run the Pearson correlation study");
  an->add_option("--layers", cfg.layers, "Layer counts for the correlation study");
  an->add_option("--runs", cfg.runs, "Independent runs per (l, pair)")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o;
    std::ostringstream eo;
    const int code = app.exit(e, o, eo);
    out << o.str();
    err << eo.str();
    return code == 0 ? kExitOk : kExitConfig;
  }

  CLI::App* chosen = app.get_subcommands().front();
  cfg.subcommand = chosen->get_name();
  for (const auto* o : size_opts) {
    if (o->count() == 0) continue;
    if (o->get_name() == "--n-train") cfg.n_train = n_train;
    else cfg.n_test = n_test;
  }
  if (hard_margin) cfg.cap.reset();
  else if (cap_flag) cfg.cap = *cap_flag;
  if (cfg.threads > 0) setenv("CHANDIS_THREADS", std::to_string(cfg.threads).c_str(), 1);

  const auto t0 = Clock::now();
  Outputs outs(cfg);
  try {
    if (cfg.subcommand == "discriminate") cmd_discriminate(cfg, outs, out);
    else if (cfg.subcommand == "sweep") cmd_sweep(cfg, outs, out);
    else if (cfg.subcommand == "diamond") cmd_diamond(cfg, outs, out);
    else if (cfg.subcommand == "classify-var") cmd_classify_var(cfg, outs, out);
    else if (cfg.subcommand == "classify-kernel") cmd_classify_kernel(cfg, outs, out);
    else if (cfg.subcommand == "analyze") cmd_analyze(cfg, outs, out);
    outs.write(std::chrono::duration<double>(Clock::now() - t0).count());
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace chandis::cli
