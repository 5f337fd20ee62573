#include "retrain/harness.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "retrain/csv.hpp"
#include "retrain/errors.hpp"
#include "retrain/oracle.hpp"
#include "retrain/rng.hpp"

namespace retrain {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Policies

PolicySpec parse_policy(const std::string& name) {
  PolicySpec p;
  p.name = name;
  if (name == "oracle") {
    p.kind = PolicyKind::Oracle;
  } else if (name == "never") {
    p.kind = PolicyKind::Never;
  } else if (name == "always") {
    p.kind = PolicyKind::Always;
  } else if (name == "upf") {
    p.kind = PolicyKind::Upf;
  } else if (name == "pf") {
    p.kind = PolicyKind::Upf;
    p.delta = 0.5;
  } else if (name.rfind("upf-", 0) == 0) {
    p.kind = PolicyKind::Upf;
    p.family = parse_family(name.substr(4));
  } else if (name.rfind("cara-", 0) == 0) {
    p.kind = PolicyKind::Cara;
    p.cara = parse_cara_strategy(name.substr(5));
  } else {
    auto dash = name.find('-');
    if (dash == std::string::npos) throw ArgumentError("unknown policy '" + name + "'");
    p.kind = PolicyKind::Drift;
    p.detector = parse_detector(name.substr(0, dash));
    double pct = csv::parse_double(name.substr(dash + 1), "detector significance percent");
    if (!(pct > 0.0 && pct < 100.0)) throw ArgumentError("detector significance must lie in (0, 100) percent");
    p.significance = pct / 100.0;
  }
  return p;
}

// ---------------------------------------------------------------------------
// Configuration

void ExperimentConfig::validate() const {
  world.validate();
  if (policies.empty()) throw ArgumentError("at least one policy is required");
  std::set<std::string> seen;
  for (const auto& p : policies) {
    parse_policy(p);
    if (!seen.insert(p).second) throw ArgumentError("policy '" + p + "' listed twice");
  }
  if (trials < 1) throw ArgumentError("trials must be >= 1");
  upf.validate();
  switch (alpha.mode) {
    case AlphaMode::Oracle:
    case AlphaMode::Range:
      if (alpha.n_points < 2) throw ArgumentError("alpha.n_points must be >= 2");
      if (alpha.mode == AlphaMode::Range && !(alpha.max > 0.0)) throw ArgumentError("alpha.max must be > 0");
      break;
    case AlphaMode::Explicit:
      if (alpha.values.size() < 2) throw ArgumentError("alpha.values needs at least two values");
      for (std::size_t k = 0; k < alpha.values.size(); ++k) {
        if (!(alpha.values[k] >= 0.0)) throw ArgumentError("alpha values must be >= 0");
        if (k > 0 && !(alpha.values[k] > alpha.values[k - 1])) {
          throw ArgumentError("alpha values must be strictly increasing");
        }
      }
      break;
  }
}

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ArgumentError(where + " must be a JSON object");
  for (const auto& item : obj.items()) {
    bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return item.key() == k; });
    if (!ok) throw ArgumentError("unknown key '" + (where.empty() ? "" : where + ".") + item.key() + "'");
  }
}

template <typename T>
T get(const json& obj, const char* key, const std::string& where, T fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  try {
    if constexpr (std::is_same_v<T, int>) {
      if (!it->is_number_integer()) throw ArgumentError("");
    } else if constexpr (std::is_same_v<T, double>) {
      if (!it->is_number()) throw ArgumentError("");
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) throw ArgumentError("");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!it->is_string()) throw ArgumentError("");
    }
    return it->get<T>();
  } catch (const std::exception&) {
    throw ArgumentError("config key '" + where + "." + key + "' has the wrong type");
  }
}

const char* gauss_rule_name(GaussLabelRule r) {
  return r == GaussLabelRule::ShiftedSquare ? "shifted" : "scaled";
}

GaussLabelRule parse_gauss_rule(const std::string& s) {
  if (s == "shifted") return GaussLabelRule::ShiftedSquare;
  if (s == "scaled") return GaussLabelRule::ScaledSquare;
  throw ArgumentError("gauss_rule must be 'shifted' or 'scaled'");
}

const char* alpha_mode_name(AlphaMode m) {
  switch (m) {
    case AlphaMode::Oracle: return "oracle";
    case AlphaMode::Range: return "range";
    case AlphaMode::Explicit: return "explicit";
  }
  return "?";
}

AlphaMode parse_alpha_mode(const std::string& s) {
  if (s == "oracle") return AlphaMode::Oracle;
  if (s == "range") return AlphaMode::Range;
  if (s == "explicit") return AlphaMode::Explicit;
  throw ArgumentError("alpha.mode must be 'oracle', 'range' or 'explicit'");
}

const char* lognormal_name(LogNormalParam p) {
  return p == LogNormalParam::Standard ? "standard" : "printed";
}

LogNormalParam parse_lognormal(const std::string& s) {
  if (s == "standard") return LogNormalParam::Standard;
  if (s == "printed") return LogNormalParam::PrintedFormula;
  throw ArgumentError("upf.lognormal must be 'standard' or 'printed'");
}

void apply_override(json& root, const std::string& path, const std::string& raw) {
  if (path.empty()) throw ArgumentError("override needs a key");
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* node = &root;
  std::size_t start = 0;
  while (true) {
    auto dot = path.find('.', start);
    std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ArgumentError("malformed override key '" + path + "'");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    if (!node->contains(key)) (*node)[key] = json::object();
    node = &(*node)[key];
    if (!node->is_object()) throw ArgumentError("override path '" + path + "' crosses a non-object value");
    start = dot + 1;
  }
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text,
                                         const std::vector<std::pair<std::string, std::string>>& overrides) {
  json root;
  try {
    root = json_text.empty() ? json::object() : json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ArgumentError(std::string("config is not valid JSON: ") + e.what());
  }
  for (const auto& [k, v] : overrides) apply_override(root, k, v);
  check_keys(root, "", {"world", "policies", "alpha", "upf", "trials", "master_seed"});

  ExperimentConfig cfg;
  if (root.contains("world")) {
    const auto& w = root["world"];
    check_keys(w, "world", {"kind", "n", "w", "T", "gauss_rule", "pe_csv_path"});
    cfg.world.kind = parse_world_kind(get<std::string>(w, "kind", "world", world_kind_name(cfg.world.kind)));
    cfg.world.n = get<int>(w, "n", "world", cfg.world.n);
    cfg.world.w = get<int>(w, "w", "world", cfg.world.w);
    cfg.world.T = get<int>(w, "T", "world", cfg.world.T);
    cfg.world.gauss_rule = parse_gauss_rule(get<std::string>(w, "gauss_rule", "world", "shifted"));
    cfg.world.pe_csv_path = get<std::string>(w, "pe_csv_path", "world", "");
  }
  if (root.contains("policies")) {
    const auto& p = root["policies"];
    if (!p.is_array()) throw ArgumentError("policies must be an array of names");
    cfg.policies.clear();
    for (const auto& item : p) {
      if (!item.is_string()) throw ArgumentError("policies must be an array of names");
      cfg.policies.push_back(item.get<std::string>());
    }
  }
  if (root.contains("alpha")) {
    const auto& a = root["alpha"];
    check_keys(a, "alpha", {"mode", "max", "n_points", "values"});
    cfg.alpha.mode = parse_alpha_mode(get<std::string>(a, "mode", "alpha", "oracle"));
    cfg.alpha.max = get<double>(a, "max", "alpha", 0.0);
    cfg.alpha.n_points = get<int>(a, "n_points", "alpha", cfg.alpha.n_points);
    if (a.contains("values")) {
      if (!a["values"].is_array()) throw ArgumentError("alpha.values must be an array of numbers");
      for (const auto& v : a["values"]) {
        if (!v.is_number()) throw ArgumentError("alpha.values must be an array of numbers");
        cfg.alpha.values.push_back(v.get<double>());
      }
    }
  }
  if (root.contains("upf")) {
    const auto& u = root["upf"];
    check_keys(u, "upf", {"delta", "samples", "family", "lognormal", "memoize"});
    cfg.upf.delta = get<double>(u, "delta", "upf", cfg.upf.delta);
    cfg.upf.samples = get<int>(u, "samples", "upf", cfg.upf.samples);
    cfg.upf.family = parse_family(get<std::string>(u, "family", "upf", family_name(cfg.upf.family)));
    cfg.upf.lognormal_param = parse_lognormal(get<std::string>(u, "lognormal", "upf", "standard"));
    cfg.upf.memoize = get<bool>(u, "memoize", "upf", cfg.upf.memoize);
  }
  cfg.trials = get<int>(root, "trials", "", cfg.trials);
  if (root.contains("master_seed")) {
    const auto& s = root["master_seed"];
    if (!s.is_number_integer()) throw ArgumentError("master_seed must be an integer");
    cfg.master_seed = s.is_number_unsigned() ? s.get<std::uint64_t>() : as_seed(s.get<std::int64_t>());
  }
  cfg.validate();
  return cfg;
}

std::string experiment_config_json(const ExperimentConfig& cfg) {
  json root;
  root["world"] = {{"kind", world_kind_name(cfg.world.kind)},
                   {"n", cfg.world.n},
                   {"w", cfg.world.w},
                   {"T", cfg.world.T},
                   {"gauss_rule", gauss_rule_name(cfg.world.gauss_rule)},
                   {"pe_csv_path", cfg.world.pe_csv_path}};
  root["policies"] = cfg.policies;
  root["alpha"] = {{"mode", alpha_mode_name(cfg.alpha.mode)},
                   {"max", cfg.alpha.max},
                   {"n_points", cfg.alpha.n_points},
                   {"values", cfg.alpha.values}};
  root["upf"] = {{"delta", cfg.upf.delta},
                 {"samples", cfg.upf.samples},
                 {"family", family_name(cfg.upf.family)},
                 {"lognormal", lognormal_name(cfg.upf.lognormal_param)},
                 {"memoize", cfg.upf.memoize}};
  root["trials"] = cfg.trials;
  root["master_seed"] = cfg.master_seed;
  return root.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Trials

std::uint64_t trial_seed(std::uint64_t master_seed, int trial) {
  return derive_seed({master_seed, as_seed(trial)});
}

World build_world(const ExperimentConfig& cfg, std::uint64_t seed) { return World::build(cfg.world, seed); }

namespace {

CostSpec cost_spec(const World& world, double alpha) {
  CostSpec spec;
  spec.alpha = alpha;
  spec.horizon_T = world.horizon_T();
  spec.offline_w = world.offline_w();
  return spec;
}

using StalenessMemo = std::map<std::pair<int, int>, double>;

TrialResult run_with_memo(const ExperimentConfig& cfg, const World& world, const PolicySpec& policy, double alpha,
                          std::uint64_t seed, int trial, StalenessMemo* memo) {
  const auto spec = cost_spec(world, alpha);
  const auto stream = derive_seed({seed, hash_name(policy.name)});
  TrialResult r;
  r.policy = policy.name;
  r.alpha = alpha;
  r.trial = trial;
  switch (policy.kind) {
    case PolicyKind::Oracle:
      r.trace = trace_from_schedule(world.pe(), oracle_schedule(world.pe(), spec), spec);
      break;
    case PolicyKind::Never:
      r.trace = trace_from_schedule(world.pe(), DecisionVector::all(world.horizon_T(), false), spec);
      break;
    case PolicyKind::Always:
      r.trace = trace_from_schedule(world.pe(), DecisionVector::all(world.horizon_T(), true), spec);
      break;
    case PolicyKind::Upf: {
      UpfConfig u = cfg.upf;
      if (policy.delta) u.delta = *policy.delta;
      if (policy.family) u.family = *policy.family;
      u.seed = stream;
      r.trace = run_upf(world, spec, u);
      break;
    }
    case PolicyKind::Drift: {
      DriftDetectorConfig d;
      d.kind = policy.detector;
      d.significance = policy.significance;
      d.window = world.has_samples() ? static_cast<int>(world.dataset(0).eval_rows.size()) : 0;
      d.seed = stream;
      r.trace = run_drift(world, spec, d);
      break;
    }
    case PolicyKind::Cara: {
      StalenessMemo local;
      StalenessMemo& m = memo ? *memo : local;
      auto psi = [&](int i, int t) {
        auto key = std::make_pair(i, t);
        auto it = m.find(key);
        if (it != m.end()) return it->second;
        double v = model_staleness(world, i, t);
        m.emplace(key, v);
        return v;
      };
      auto fitted = cara_fit_from(policy.cara, world.pe(), alpha, psi);
      r.trace = run_cara(world, spec, fitted, psi);
      break;
    }
  }
  r.cost = r.trace.realized_total_cost;
  r.retrains = r.trace.retrains();
  double sum = 0.0;
  for (double l : r.trace.realized_losses) sum += l;
  r.mean_loss = sum / static_cast<double>(r.trace.realized_losses.size());
  return r;
}

}  // namespace

std::vector<double> trial_alpha_grid(const ExperimentConfig& cfg, const World& world) {
  switch (cfg.alpha.mode) {
    case AlphaMode::Oracle: {
      double amax = alpha_max(world.pe(), cost_spec(world, 0.0));
      return alpha_grid(std::max(amax, kAlphaMaxFloor), cfg.alpha.n_points);
    }
    case AlphaMode::Range:
      return alpha_grid(cfg.alpha.max, cfg.alpha.n_points);
    case AlphaMode::Explicit:
      return cfg.alpha.values;
  }
  throw ArgumentError("invalid alpha mode");
}

TrialResult run_on_world(const ExperimentConfig& cfg, const World& world, const PolicySpec& policy, double alpha,
                         std::uint64_t seed, int trial) {
  return run_with_memo(cfg, world, policy, alpha, seed, trial, nullptr);
}

TrialResult run_trial(const ExperimentConfig& cfg, const std::string& policy, double alpha, std::uint64_t seed,
                      int trial) {
  cfg.validate();
  if (!(alpha >= 0.0)) throw ArgumentError("alpha must be >= 0");
  World world = build_world(cfg, seed);
  return run_on_world(cfg, world, parse_policy(policy), alpha, seed, trial);
}

// ---------------------------------------------------------------------------
// Sweeps

Aggregate aggregate(const std::vector<double>& values) {
  if (values.empty()) throw ArgumentError("aggregate of no values");
  Aggregate a;
  for (double v : values) a.mean += v;
  a.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    a.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return a;
}

std::vector<double> SweepResult::auc_values(const std::string& policy) const {
  std::vector<double> out;
  for (const auto& a : aucs) {
    if (a.policy == policy) out.push_back(a.auc);
  }
  return out;
}

Aggregate SweepResult::auc_summary(const std::string& policy) const { return aggregate(auc_values(policy)); }

std::vector<double> SweepResult::retrains_at(const std::string& policy, std::size_t alpha_index) const {
  std::vector<double> out;
  for (const auto& [trial, grid] : grids) {
    if (alpha_index >= grid.size()) continue;
    for (const auto& r : rows) {
      if (r.trial == trial && r.policy == policy && r.alpha == grid[alpha_index]) {
        out.push_back(r.retrains);
        break;
      }
    }
  }
  return out;
}

SweepResult sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  SweepResult out;
  out.policies = cfg.policies;
  for (int trial = 0; trial < cfg.trials; ++trial) {
    const auto seed = trial_seed(cfg.master_seed, trial);
    World world = build_world(cfg, seed);
    auto grid = trial_alpha_grid(cfg, world);
    out.grids[trial] = grid;
    StalenessMemo memo;
    for (const auto& name : cfg.policies) {
      auto policy = parse_policy(name);
      std::vector<double> costs;
      for (double alpha : grid) {
        auto r = run_with_memo(cfg, world, policy, alpha, seed, trial, &memo);
        costs.push_back(r.cost);
        out.rows.push_back(std::move(r));
      }
      out.aucs.push_back({name, trial, auc_over_alpha(grid, costs)});
    }
  }
  return out;
}

SweepResult ablation_suite(ExperimentConfig cfg) {
  cfg.policies = {"upf", "pf", "upf-gaussian"};
  cfg.upf.delta = 0.95;
  cfg.upf.family = Family::Beta;
  return sweep(cfg);
}

void write_results_csv(std::ostream& out, const SweepResult& r) {
  out << "policy,alpha,trial,cost,retrains\n";
  for (const auto& row : r.rows) {
    out << row.policy << ',' << csv::format_double(row.alpha) << ',' << row.trial << ','
        << csv::format_double(row.cost) << ',' << row.retrains << '\n';
  }
}

void write_auc_csv(std::ostream& out, const SweepResult& r) {
  out << "policy,trial,auc\n";
  for (const auto& a : r.aucs) out << a.policy << ',' << a.trial << ',' << csv::format_double(a.auc) << '\n';
}

void write_summary_csv(std::ostream& out, const SweepResult& r) {
  out << "policy,auc_mean,auc_std,trials\n";
  for (const auto& p : r.policies) {
    auto values = r.auc_values(p);
    auto a = aggregate(values);
    out << p << ',' << csv::format_double(a.mean) << ',' << csv::format_double(a.std) << ',' << values.size() << '\n';
  }
}

namespace {

void write_plot(std::ostream& out, const SweepResult& r, const char* metric, bool retrains) {
  out << "policy,alpha_index,alpha_mean," << metric << "_mean," << metric << "_std\n";
  std::size_t width = 0;
  for (const auto& [trial, grid] : r.grids) width = std::max(width, grid.size());
  for (const auto& p : r.policies) {
    for (std::size_t k = 0; k < width; ++k) {
      std::vector<double> alphas, values;
      for (const auto& [trial, grid] : r.grids) {
        if (k >= grid.size()) continue;
        for (const auto& row : r.rows) {
          if (row.trial == trial && row.policy == p && row.alpha == grid[k]) {
            alphas.push_back(row.alpha);
            values.push_back(retrains ? row.retrains : row.cost);
            break;
          }
        }
      }
      if (values.empty()) continue;
      auto a = aggregate(alphas);
      auto v = aggregate(values);
      out << p << ',' << k << ',' << csv::format_double(a.mean) << ',' << csv::format_double(v.mean) << ','
          << csv::format_double(v.std) << '\n';
    }
  }
}

}  // namespace

void write_cost_plot_csv(std::ostream& out, const SweepResult& r) { write_plot(out, r, "cost", false); }
void write_retrain_plot_csv(std::ostream& out, const SweepResult& r) { write_plot(out, r, "retrains", true); }

// ---------------------------------------------------------------------------
// Wrong alpha

RobustnessGrid robustness_grid(const ExperimentConfig& cfg, const std::string& policy_name) {
  cfg.validate();
  auto policy = parse_policy(policy_name);
  RobustnessGrid g;
  g.policy = policy_name;
  std::vector<std::vector<std::vector<double>>> cells;
  std::vector<std::vector<double>> alphas;
  for (int trial = 0; trial < cfg.trials; ++trial) {
    const auto seed = trial_seed(cfg.master_seed, trial);
    World world = build_world(cfg, seed);
    auto grid = trial_alpha_grid(cfg, world);
    const auto n = grid.size();
    if (cells.empty()) {
      cells.assign(n, std::vector<std::vector<double>>(n));
      alphas.assign(n, {});
    }
    if (cells.size() != n) throw StateError("alpha grids differ in length across trials");
    StalenessMemo memo;
    std::vector<DecisionVector> schedules;
    for (double a : grid) {
      schedules.push_back(run_with_memo(cfg, world, policy, a, seed, trial, &memo).trace.decisions);
    }
    for (std::size_t a = 0; a < n; ++a) {
      alphas[a].push_back(grid[a]);
      auto spec = cost_spec(world, grid[a]);
      const double matched = total_cost(world.pe(), schedules[a], spec);
      for (std::size_t b = 0; b < n; ++b) {
        const double c = total_cost(world.pe(), schedules[b], spec);
        cells[a][b].push_back(a == b ? 0.0 : 100.0 * (c / matched - 1.0));
      }
    }
  }
  for (const auto& col : alphas) {
    g.alpha_true_mean.push_back(aggregate(col).mean);
  }
  g.alpha_spec_mean = g.alpha_true_mean;
  for (const auto& row : cells) {
    std::vector<double> out;
    for (const auto& cell : row) out.push_back(aggregate(cell).mean);
    g.percent.push_back(out);
  }
  return g;
}

void write_robustness_csv(std::ostream& out, const RobustnessGrid& g) {
  out << "alpha_true_index,alpha_spec_index,alpha_true,alpha_spec,percent_increase\n";
  for (std::size_t a = 0; a < g.percent.size(); ++a) {
    for (std::size_t b = 0; b < g.percent[a].size(); ++b) {
      out << a << ',' << b << ',' << csv::format_double(g.alpha_true_mean[a]) << ','
          << csv::format_double(g.alpha_spec_mean[b]) << ',' << csv::format_double(g.percent[a][b]) << '\n';
    }
  }
}

}  // namespace retrain
