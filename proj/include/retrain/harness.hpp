#pragma once

// Seeded experiments: one realized world per trial, every policy replayed on it
// over an alpha grid, AUC per (policy, trial), wrong-alpha grids and ablations.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "retrain/cara.hpp"
#include "retrain/drift.hpp"
#include "retrain/policy.hpp"
#include "retrain/synthetic.hpp"
#include "retrain/upf.hpp"

namespace retrain {

// Lower end used for the grid when the oracle never retrains, even at alpha = 0.
inline constexpr double kAlphaMaxFloor = 1e-4;

enum class PolicyKind { Oracle, Never, Always, Upf, Drift, Cara };

// Parsed policy name: oracle, never, always, upf, pf, upf-gaussian, upf-lognormal,
// upf-beta, <adwin|fhddm|kswin>-<percent>, cara-<threshold|cumulative|periodic>.
struct PolicySpec {
  std::string name;
  PolicyKind kind = PolicyKind::Oracle;
  std::optional<double> delta;
  std::optional<Family> family;
  DetectorKind detector = DetectorKind::ADWIN;
  double significance = 0.05;
  CaraStrategy cara = CaraStrategy::Threshold;
};

PolicySpec parse_policy(const std::string& name);

enum class AlphaMode { Oracle, Range, Explicit };

struct AlphaSpec {
  AlphaMode mode = AlphaMode::Oracle;
  double max = 0.0;             // Range
  std::vector<double> values;   // Explicit
  int n_points = 10;
};

struct ExperimentConfig {
  WorldConfig world;
  std::vector<std::string> policies{"oracle", "upf", "never"};
  AlphaSpec alpha;
  UpfConfig upf;
  int trials = 10;
  std::uint64_t master_seed = 0;

  void validate() const;
};

// Strict JSON: unknown keys and wrong types are rejected with ArgumentError.
// Overrides are dotted paths (e.g. "world.n", "upf.delta") whose values are parsed
// as JSON when possible and as plain strings otherwise; they win over file values.
ExperimentConfig parse_experiment_config(const std::string& json_text,
                                         const std::vector<std::pair<std::string, std::string>>& overrides = {});
std::string experiment_config_json(const ExperimentConfig& cfg);

std::uint64_t trial_seed(std::uint64_t master_seed, int trial);

World build_world(const ExperimentConfig& cfg, std::uint64_t seed);

// Per-trial grid: the oracle-derived range, the configured range or the explicit list.
std::vector<double> trial_alpha_grid(const ExperimentConfig& cfg, const World& world);

struct TrialResult {
  std::string policy;
  double alpha = 0.0;
  int trial = 0;
  double cost = 0.0;
  int retrains = 0;
  double mean_loss = 0.0;
  PolicyTrace trace;
};

// Runs one policy on an already realized world. Monte-Carlo and detector streams
// derive from (seed, policy name), never from alpha.
TrialResult run_on_world(const ExperimentConfig& cfg, const World& world, const PolicySpec& policy, double alpha,
                         std::uint64_t seed, int trial = 0);

TrialResult run_trial(const ExperimentConfig& cfg, const std::string& policy, double alpha, std::uint64_t seed,
                      int trial = 0);

struct AucRow {
  std::string policy;
  int trial = 0;
  double auc = 0.0;
};

struct Aggregate {
  double mean = 0.0;
  double std = 0.0;  // sample std, 0 for a single trial
};

Aggregate aggregate(const std::vector<double>& values);

struct SweepResult {
  std::vector<std::string> policies;
  std::map<int, std::vector<double>> grids;  // trial -> alpha grid
  std::vector<TrialResult> rows;             // ordered by (trial, policy, alpha index)
  std::vector<AucRow> aucs;                  // ordered by (trial, policy)

  std::vector<double> auc_values(const std::string& policy) const;
  Aggregate auc_summary(const std::string& policy) const;
  // Per-trial mean retrain count at each grid index.
  std::vector<double> retrains_at(const std::string& policy, std::size_t alpha_index) const;
};

SweepResult sweep(const ExperimentConfig& cfg);
SweepResult ablation_suite(ExperimentConfig cfg);

// CSV `policy,alpha,trial,cost,retrains`.
void write_results_csv(std::ostream& out, const SweepResult& r);
// CSV `policy,trial,auc`.
void write_auc_csv(std::ostream& out, const SweepResult& r);
// CSV `policy,auc_mean,auc_std,trials`.
void write_summary_csv(std::ostream& out, const SweepResult& r);
// Plot data per grid index: `policy,alpha_index,alpha_mean,<metric>_mean,<metric>_std`.
void write_cost_plot_csv(std::ostream& out, const SweepResult& r);
void write_retrain_plot_csv(std::ostream& out, const SweepResult& r);

struct RobustnessGrid {
  std::string policy;
  std::vector<double> alpha_true_mean;  // grid values averaged over trials
  std::vector<double> alpha_spec_mean;
  // percent[a][b]: mean over trials of 100 * (C_true(run at spec b) / C_true(run at true a) - 1).
  std::vector<std::vector<double>> percent;
};

// Both axes use the trial's alpha grid (true index a, specified index b).
RobustnessGrid robustness_grid(const ExperimentConfig& cfg, const std::string& policy);

// CSV `alpha_true_index,alpha_spec_index,alpha_true,alpha_spec,percent_increase`.
void write_robustness_csv(std::ostream& out, const RobustnessGrid& g);

}  // namespace retrain
