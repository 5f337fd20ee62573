// Command-line front end: gen, run, sweep, bound and robust.
//
// Exit codes: 0 success, 2 usage or configuration error, 3 data or I/O error.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "retrain/csv.hpp"
#include "retrain/errors.hpp"
#include "retrain/harness.hpp"
#include "retrain/oracle.hpp"

namespace fs = std::filesystem;
using namespace retrain;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr const char* kOutEnv = "RETRAIN_OUT_DIR";

std::string default_out_dir() {
  const char* env = std::getenv(kOutEnv);
  return env && *env ? env : "results";
}

// Files are collected first and written only once every computation succeeded.
class Outputs {
 public:
  explicit Outputs(std::string dir) : dir_(std::move(dir)) {}
  void add(const std::string& name, std::string contents) { files_.emplace_back(name, std::move(contents)); }
  void commit() const {
    for (const auto& [name, contents] : files_) csv::write_file_atomic((fs::path(dir_) / name).string(), contents);
  }

 private:
  std::string dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

template <typename Fn>
std::string render(Fn&& fn) {
  std::ostringstream out;
  fn(out);
  return out.str();
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::pair<std::string, std::string>> split_overrides(const std::vector<std::string>& raw) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& item : raw) {
    auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ArgumentError("override '" + item + "' is not key=value");
    out.emplace_back(item.substr(0, eq), item.substr(eq + 1));
  }
  return out;
}

struct ConfigArgs {
  std::string path;
  std::vector<std::string> overrides;

  ExperimentConfig load() const {
    return parse_experiment_config(path.empty() ? std::string() : read_text(path), split_overrides(overrides));
  }
};

void add_config_options(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("--config", args.path, "JSON experiment config");
  cmd->add_option("--set", args.overrides, "Override a config key, e.g. --set world.n=2000 (repeatable)");
}

std::string fmt(double v) { return csv::format_double(v); }

// ---------------------------------------------------------------------------

struct GenArgs {
  std::string world = "gauss";
  std::int64_t seed = 0;
  int n = 5000;
  int w = 7;
  int T = 8;
  std::string gauss_rule = "shifted";
  std::optional<int> t;
  std::string out;
};

int cmd_gen(const GenArgs& a) {
  WorldConfig cfg;
  cfg.kind = parse_world_kind(a.world);
  if (cfg.kind == WorldKind::PeMatrix) throw ArgumentError("gen needs a synthetic world");
  cfg.n = a.n;
  cfg.w = a.w;
  cfg.T = a.T;
  if (a.gauss_rule != "shifted" && a.gauss_rule != "scaled") throw ArgumentError("--gauss-rule must be shifted or scaled");
  cfg.gauss_rule = a.gauss_rule == "shifted" ? GaussLabelRule::ShiftedSquare : GaussLabelRule::ScaledSquare;
  cfg.validate();
  const auto seed = trial_seed(as_seed(a.seed), 0);
  Outputs out(a.out);

  if (a.t) {
    auto d = generate_dataset(cfg, *a.t, seed);
    double ones = 0.0;
    for (int y : d.labels) ones += y;
    out.add("dataset_" + std::to_string(*a.t) + ".csv", render([&](auto& s) { write_dataset_csv(s, d); }));
    out.commit();
    std::cout << "world " << a.world << " t " << *a.t << " n " << d.size() << " label_fraction "
              << fmt(ones / static_cast<double>(d.size())) << "\n";
    return 0;
  }

  auto world = World::build(cfg, seed);
  for (int t = -cfg.w; t <= cfg.T; ++t) {
    out.add("dataset_" + std::to_string(t) + ".csv", render([&](auto& s) { write_dataset_csv(s, world.dataset(t)); }));
  }
  out.add("pe.csv", render([&](auto& s) { write_pe_csv(s, world.pe()); }));
  out.commit();
  CostSpec spec{0.0, 1.0, cfg.T, cfg.w};
  std::cout << "world " << a.world << " seed " << a.seed << ": " << (cfg.w + 1 + cfg.T) << " datasets, pe matrix w="
            << cfg.w << " T=" << cfg.T << ", empirical_L " << fmt(empirical_L(world.pe())) << ", alpha_max "
            << fmt(alpha_max(world.pe(), spec)) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct RunArgs {
  ConfigArgs config;
  std::string policy = "upf";
  double alpha = 0.0;
  std::optional<std::int64_t> seed;
  std::string out;
};

int cmd_run(const RunArgs& a) {
  auto cfg = a.config.load();
  if (a.seed) cfg.master_seed = as_seed(*a.seed);
  if (!(a.alpha >= 0.0)) throw ArgumentError("--alpha must be >= 0");
  auto r = run_trial(cfg, a.policy, a.alpha, trial_seed(cfg.master_seed, 0), 0);
  Outputs out(a.out);
  out.add("trace.csv", render([&](auto& s) { write_trace_csv(s, r.trace); }));
  out.add("result.csv", "policy,alpha,trial,cost,retrains\n" + r.policy + "," + fmt(r.alpha) + ",0," + fmt(r.cost) +
                            "," + std::to_string(r.retrains) + "\n");
  out.commit();
  std::cout << r.policy << " alpha " << fmt(r.alpha) << ": cost " << fmt(r.cost) << ", retrains " << r.retrains
            << ", schedule " << r.trace.decisions.to_string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct SweepArgs {
  ConfigArgs config;
  bool ablation = false;
  std::string out;
};

int cmd_sweep(const SweepArgs& a) {
  auto cfg = a.config.load();
  auto r = a.ablation ? ablation_suite(cfg) : sweep(cfg);
  if (a.ablation) cfg.policies = r.policies;
  Outputs out(a.out);
  out.add("results.csv", render([&](auto& s) { write_results_csv(s, r); }));
  out.add("auc.csv", render([&](auto& s) { write_auc_csv(s, r); }));
  out.add("summary.csv", render([&](auto& s) { write_summary_csv(s, r); }));
  out.add("plot_cost.csv", render([&](auto& s) { write_cost_plot_csv(s, r); }));
  out.add("plot_retrains.csv", render([&](auto& s) { write_retrain_plot_csv(s, r); }));
  out.add("config.json", experiment_config_json(cfg));
  out.commit();
  std::cout << "policy            auc_mean      auc_std\n";
  for (const auto& p : r.policies) {
    auto s = r.auc_summary(p);
    char line[128];
    std::snprintf(line, sizeof line, "%-16s  %-12.6g  %-12.6g\n", p.c_str(), s.mean, s.std);
    std::cout << line;
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct BoundArgs {
  int T = 8;
  double alpha = 0.0;
  std::optional<double> L;
  std::string pe_path;
  std::string world;
  std::int64_t seed = 0;
  std::string out;
};

int cmd_bound(const BoundArgs& a) {
  int sources = (a.L ? 1 : 0) + (a.pe_path.empty() ? 0 : 1) + (a.world.empty() ? 0 : 1);
  if (sources != 1) throw ArgumentError("bound needs exactly one of --L, --pe or --world");
  double L = 0.0;
  int T = a.T;
  std::optional<double> oracle_alpha;
  if (a.L) {
    L = *a.L;
  } else {
    PerformanceMatrix pe;
    if (!a.pe_path.empty()) {
      pe = read_pe_csv_file(a.pe_path);
    } else {
      WorldConfig cfg;
      cfg.kind = parse_world_kind(a.world);
      cfg.T = a.T;
      pe = World::build(cfg, trial_seed(as_seed(a.seed), 0)).pe();
    }
    T = pe.horizon_T();
    L = empirical_L(pe);
    oracle_alpha = alpha_max(pe, CostSpec{0.0, 1.0, T, pe.offline_w()});
  }
  const double bound = retrain_upper_bound({L, a.alpha, T});
  const double threshold = never_retrain_alpha(L, T);
  const bool never = bound < 1.0;
  const std::string verdict =
      never ? "no retraining justified"
            : "at most " + std::to_string(static_cast<int>(std::floor(bound))) + " retrains justified";

  nlohmann::ordered_json j;
  j["T"] = T;
  j["alpha"] = a.alpha;
  j["L"] = L;
  j["bound"] = bound;
  j["never_retrain_alpha"] = threshold;
  if (oracle_alpha) j["oracle_zero_retrain_alpha"] = *oracle_alpha;
  j["verdict"] = verdict;
  Outputs out(a.out);
  out.add("bound.json", j.dump(2) + "\n");
  out.commit();

  std::cout << "L " << fmt(L) << ", T " << T << ", alpha " << fmt(a.alpha) << "\n";
  std::cout << "T - sqrt(alpha / L) = " << fmt(bound) << "\n";
  std::cout << "never-retrain alpha threshold L (T - 1)^2 = " << fmt(threshold) << "\n";
  if (oracle_alpha) std::cout << "oracle zero-retrain alpha = " << fmt(*oracle_alpha) << "\n";
  std::cout << "verdict: " << verdict << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct RobustArgs {
  ConfigArgs config;
  std::string policy = "upf";
  std::string out;
};

int cmd_robust(const RobustArgs& a) {
  auto cfg = a.config.load();
  auto g = robustness_grid(cfg, a.policy);
  Outputs out(a.out);
  out.add("robustness.csv", render([&](auto& s) { write_robustness_csv(s, g); }));
  out.commit();
  std::cout << "percent cost increase, rows = true alpha, columns = specified alpha (" << a.policy << ")\n";
  for (std::size_t r = 0; r < g.percent.size(); ++r) {
    char head[48];
    std::snprintf(head, sizeof head, "%-10.4g", g.alpha_true_mean[r]);
    std::cout << head;
    for (double v : g.percent[r]) {
      char cell[32];
      std::snprintf(cell, sizeof cell, " %8.3f", v);
      std::cout << cell;
    }
    std::cout << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cost-aware retraining: worlds, policies, sweeps and bounds"};
  app.require_subcommand(1);
  const std::string out_help = std::string("Output directory (default $") + kOutEnv + " or ./results)";

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate a seeded world's datasets and performance matrix");
  g->add_option("--world", gen.world, "gauss, circles or stationary");
  g->add_option("--seed", gen.seed, "World seed");
  g->add_option("--n", gen.n, "Samples per dataset");
  g->add_option("--w", gen.w, "Offline window");
  g->add_option("--T", gen.T, "Online horizon");
  g->add_option("--gauss-rule", gen.gauss_rule, "shifted: (4 x1 - 0.5)^2 > x2, scaled: 4 (x1 - 0.5)^2 > x2");
  g->add_option("--t", gen.t, "Only write the dataset of this timestep");
  g->add_option("--out", gen.out, out_help);

  RunArgs run;
  auto* r = app.add_subcommand("run", "Run one policy at one alpha on one seeded world");
  add_config_options(r, run.config);
  r->add_option("--policy", run.policy, "Policy name (oracle, never, always, upf, pf, upf-<family>, "
                                        "<adwin|fhddm|kswin>-<percent>, cara-<strategy>)");
  r->add_option("--alpha", run.alpha, "Cost ratio alpha")->required();
  r->add_option("--seed", run.seed, "Master seed (overrides the config)");
  r->add_option("--out", run.out, out_help);

  SweepArgs sw;
  auto* s = app.add_subcommand("sweep", "Run every configured policy over the alpha grid for every trial");
  add_config_options(s, sw.config);
  s->add_flag("--ablation", sw.ablation, "Compare upf, pf and upf-gaussian instead of the configured policies");
  s->add_option("--out", sw.out, out_help);

  BoundArgs bd;
  auto* b = app.add_subcommand("bound", "Evaluate the retrain-count bound T - sqrt(alpha / L)");
  b->add_option("--T", bd.T, "Online horizon");
  b->add_option("--alpha", bd.alpha, "Cost ratio alpha")->required();
  b->add_option("--L", bd.L, "Adjacent-model performance gap");
  b->add_option("--pe", bd.pe_path, "Use the empirical gap of this performance-matrix CSV");
  b->add_option("--world", bd.world, "Use the empirical gap of a seeded synthetic world");
  b->add_option("--seed", bd.seed, "World seed for --world");
  b->add_option("--out", bd.out, out_help);

  RobustArgs rb;
  auto* ro = app.add_subcommand("robust", "Cost increase from a wrongly specified alpha");
  add_config_options(ro, rb.config);
  ro->add_option("--policy", rb.policy, "Policy name");
  ro->add_option("--out", rb.out, out_help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  for (std::string* o : {&gen.out, &run.out, &sw.out, &bd.out, &rb.out}) {
    if (o->empty()) *o = default_out_dir();
  }

  try {
    if (*g) return cmd_gen(gen);
    if (*r) return cmd_run(run);
    if (*s) return cmd_sweep(sw);
    if (*b) return cmd_bound(bd);
    if (*ro) return cmd_robust(rb);
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const StateError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
