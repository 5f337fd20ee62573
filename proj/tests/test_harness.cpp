#include <sstream>

#include "doctest.h"
#include "retrain/errors.hpp"
#include "retrain/harness.hpp"
#include "retrain/oracle.hpp"

using namespace retrain;

namespace {

ExperimentConfig small_config(WorldKind kind = WorldKind::Circles) {
  ExperimentConfig cfg;
  cfg.world.kind = kind;
  cfg.world.n = 1000;
  cfg.world.w = 4;
  cfg.world.T = 5;
  cfg.trials = 3;
  cfg.upf.samples = 300;
  cfg.alpha.n_points = 5;
  cfg.master_seed = 17;
  return cfg;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("policy names") {
  CHECK(parse_policy("oracle").kind == PolicyKind::Oracle);
  CHECK(parse_policy("pf").delta == 0.5);
  CHECK(parse_policy("upf-gaussian").family == Family::Gaussian);
  auto d = parse_policy("kswin-50");
  CHECK(d.kind == PolicyKind::Drift);
  CHECK(d.detector == DetectorKind::KSWIN);
  CHECK(d.significance == doctest::Approx(0.5));
  CHECK(parse_policy("cara-cumulative").cara == CaraStrategy::Cumulative);
  CHECK_THROWS_AS(parse_policy("random"), ArgumentError);
  CHECK_THROWS_AS(parse_policy("adwin-x"), DataError);
  CHECK_THROWS_AS(parse_policy("adwin-150"), ArgumentError);
}

TEST_CASE("strict config parsing and overrides") {
  auto cfg = parse_experiment_config(R"({"world": {"kind": "circles", "n": 800}, "trials": 2,
                                         "policies": ["oracle", "never"], "alpha": {"mode": "range", "max": 0.5}})");
  CHECK(cfg.world.kind == WorldKind::Circles);
  CHECK(cfg.world.n == 800);
  CHECK(cfg.world.w == 7);
  CHECK(cfg.trials == 2);
  CHECK(cfg.alpha.mode == AlphaMode::Range);

  CHECK_THROWS_AS(parse_experiment_config(R"({"wrold": {}})"), ArgumentError);
  CHECK_THROWS_AS(parse_experiment_config(R"({"world": {"size": 3}})"), ArgumentError);
  CHECK_THROWS_AS(parse_experiment_config(R"({"trials": "ten"})"), ArgumentError);
  CHECK_THROWS_AS(parse_experiment_config(R"({"trials": 0})"), ArgumentError);
  CHECK_THROWS_AS(parse_experiment_config("{not json"), ArgumentError);
  CHECK_THROWS_AS(parse_experiment_config(R"({"alpha": {"mode": "explicit", "values": [0.2, 0.1]}})"), ArgumentError);
  CHECK_THROWS_AS(parse_experiment_config(R"({"policies": ["upf", "upf"]})"), ArgumentError);

  auto over = parse_experiment_config(R"({"world": {"n": 800}, "upf": {"delta": 0.9}})",
                                      {{"world.n", "1200"}, {"upf.delta", "0.8"}, {"world.kind", "gauss"},
                                       {"upf.family", "gaussian"}});
  CHECK(over.world.n == 1200);
  CHECK(over.upf.delta == 0.8);
  CHECK(over.world.kind == WorldKind::Gauss);
  CHECK(over.upf.family == Family::Gaussian);
  CHECK_THROWS_AS(parse_experiment_config("{}", {{"world.bogus", "1"}}), ArgumentError);

  auto round = parse_experiment_config(experiment_config_json(over));
  CHECK(experiment_config_json(round) == experiment_config_json(over));
}

TEST_CASE("run_trial consistency") {
  auto cfg = small_config();
  const auto seed = trial_seed(cfg.master_seed, 0);
  auto world = build_world(cfg, seed);
  CostSpec spec{0.05, 1.0, cfg.world.T, cfg.world.w};
  auto oracle_row = run_trial(cfg, "oracle", 0.05, seed);
  CHECK(oracle_row.cost == total_cost(world.pe(), oracle_schedule(world.pe(), spec), spec));
  CHECK(oracle_row.cost == doctest::Approx(oracle_cost(world.pe(), spec)).epsilon(1e-12));

  auto never_row = run_trial(cfg, "never", 0.05, seed);
  CHECK(never_row.cost - oracle_row.cost >= 0.0);

  auto a = run_trial(cfg, "upf", 0.05, seed);
  auto b = run_trial(cfg, "upf", 0.05, seed);
  CHECK(a.cost == b.cost);
  CHECK(a.trace.decisions == b.trace.decisions);
  CHECK(a.trace.realized_losses == b.trace.realized_losses);
}

TEST_CASE("sweep invariants") {
  auto cfg = small_config();
  cfg.policies = {"oracle", "upf", "never", "always", "fhddm-5", "cara-threshold"};
  auto r = sweep(cfg);
  CHECK(r.rows.size() == static_cast<std::size_t>(cfg.trials) * cfg.policies.size() * 5);
  CHECK(r.aucs.size() == static_cast<std::size_t>(cfg.trials) * cfg.policies.size());

  for (int trial = 0; trial < cfg.trials; ++trial) {
    double oracle_auc = 0.0;
    for (const auto& a : r.aucs)
      if (a.trial == trial && a.policy == "oracle") oracle_auc = a.auc;
    for (const auto& a : r.aucs) {
      if (a.trial == trial) CHECK(a.auc - oracle_auc >= 0.0);
    }
    // AUC recomputed from the stored rows.
    for (const auto& p : cfg.policies) {
      std::vector<double> costs;
      for (const auto& row : r.rows)
        if (row.trial == trial && row.policy == p) costs.push_back(row.cost);
      double stored = 0.0;
      for (const auto& a : r.aucs)
        if (a.trial == trial && a.policy == p) stored = a.auc;
      CHECK(auc_over_alpha(r.grids.at(trial), costs) == stored);
    }
    // Drift rows have one retrain count across the alpha column.
    std::set<int> counts;
    for (const auto& row : r.rows)
      if (row.trial == trial && row.policy == "fhddm-5") counts.insert(row.retrains);
    CHECK(counts.size() == 1);
  }
}

TEST_CASE("sweep rows do not depend on trial order") {
  auto cfg = small_config();
  cfg.policies = {"oracle", "upf"};
  auto all = sweep(cfg);
  for (int trial = cfg.trials - 1; trial >= 0; --trial) {
    const auto seed = trial_seed(cfg.master_seed, trial);
    auto world = build_world(cfg, seed);
    auto grid = trial_alpha_grid(cfg, world);
    CHECK(grid == all.grids.at(trial));
    for (const auto& name : cfg.policies) {
      for (double alpha : grid) {
        auto row = run_on_world(cfg, world, parse_policy(name), alpha, seed, trial);
        bool found = false;
        for (const auto& stored : all.rows) {
          if (stored.trial == trial && stored.policy == name && stored.alpha == alpha) {
            CHECK(stored.cost == row.cost);
            found = true;
          }
        }
        CHECK(found);
      }
    }
  }
}

TEST_CASE("oracle grid floor when retraining never helps") {
  PerformanceMatrix pe(1, 3);
  for (int i = -1; i <= 3; ++i)
    for (int j = i; j <= 3; ++j) pe.set(i, j, 0.2);
  auto world = World::from_matrix(pe);
  ExperimentConfig cfg;
  auto grid = trial_alpha_grid(cfg, world);
  CHECK(grid.back() == kAlphaMaxFloor);
  CHECK(grid.front() == 0.0);
}

TEST_CASE("robustness grid") {
  auto cfg = small_config();
  auto g = robustness_grid(cfg, "oracle");
  REQUIRE(g.percent.size() == 5);
  for (std::size_t a = 0; a < 5; ++a) {
    CHECK(g.percent[a][a] == 0.0);
    for (std::size_t b = 0; b < 5; ++b) CHECK(g.percent[a][b] >= -1e-9);
  }
  auto u = robustness_grid(cfg, "upf");
  for (std::size_t a = 0; a < 5; ++a) CHECK(u.percent[a][a] == 0.0);
  std::ostringstream out;
  write_robustness_csv(out, u);
  CHECK(out.str().rfind("alpha_true_index,alpha_spec_index,alpha_true,alpha_spec,percent_increase\n", 0) == 0);
}

TEST_CASE("ablation variants share world realizations") {
  auto cfg = small_config();
  cfg.trials = 2;
  auto r = ablation_suite(cfg);
  CHECK(r.policies == std::vector<std::string>{"upf", "pf", "upf-gaussian"});
  for (int trial = 0; trial < cfg.trials; ++trial) {
    auto world = build_world(cfg, trial_seed(cfg.master_seed, trial));
    for (const auto& row : r.rows) {
      if (row.trial != trial) continue;
      for (int t = 1; t <= cfg.world.T; ++t) {
        CHECK(row.trace.realized_losses[t - 1] == world.pe().at(row.trace.models_used[t - 1], t));
      }
    }
  }
  CHECK(r.auc_values("pf").size() == 2);
}

TEST_CASE("result tables") {
  auto cfg = small_config();
  cfg.trials = 2;
  cfg.policies = {"oracle", "never"};
  auto r = sweep(cfg);
  std::ostringstream res, auc, sum, cost, ret;
  write_results_csv(res, r);
  write_auc_csv(auc, r);
  write_summary_csv(sum, r);
  write_cost_plot_csv(cost, r);
  write_retrain_plot_csv(ret, r);
  CHECK(res.str().rfind("policy,alpha,trial,cost,retrains\n", 0) == 0);
  CHECK(auc.str().rfind("policy,trial,auc\n", 0) == 0);
  CHECK(sum.str().rfind("policy,auc_mean,auc_std,trials\n", 0) == 0);
  CHECK(cost.str().rfind("policy,alpha_index,alpha_mean,cost_mean,cost_std\n", 0) == 0);
  CHECK(ret.str().rfind("policy,alpha_index,alpha_mean,retrains_mean,retrains_std\n", 0) == 0);
  auto lines = [](const std::string& s) { return std::count(s.begin(), s.end(), '\n'); };
  CHECK(lines(res.str()) == 1 + 2 * 2 * 5);
  CHECK(lines(auc.str()) == 1 + 4);
  CHECK(lines(cost.str()) == 1 + 2 * 5);
}

TEST_CASE("aggregate") {
  auto a = aggregate({1.0, 2.0, 3.0});
  CHECK(a.mean == 2.0);
  CHECK(a.std == doctest::Approx(1.0));
  CHECK(aggregate({4.0}).std == 0.0);
  CHECK_THROWS_AS(aggregate({}), ArgumentError);
}

}
