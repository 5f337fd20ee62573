#pragma once

// Uncertainty-aware retraining rule: at state (last model i, time t) the keep and
// retrain branches are random total costs built by backward induction over the
// remaining horizon, and the branch with the smaller delta-quantile wins.

#include <cstdint>
#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "retrain/forecaster.hpp"
#include "retrain/policy.hpp"

namespace retrain {

struct DecisionState {
  int last_model = 0;
  int time = 1;
  int horizon_T = 1;

  void validate() const;
};

struct UpfConfig {
  double delta = 0.95;
  int samples = 1000;
  Family family = Family::Beta;
  LogNormalParam lognormal_param = LogNormalParam::Standard;
  std::vector<double> ridge_grid{0.0, 1e-3, 1e-2, 1e-1, 1.0};
  std::uint64_t seed = 0;
  bool memoize = true;

  void validate() const;
};

// Nearest-rank quantile: sorted[ceil(delta * S) - 1].
double quantile(std::vector<double> samples, double delta);

// Predictive distribution of the loss of model i on dataset j.
using ForecastFn = std::function<PredictiveDistribution(int i, int j)>;

struct BranchOutcome {
  std::vector<double> samples;  // total future cost of the chosen branch
  bool retrain = false;
};

// Per-invocation memory: one draw vector per (i, j) pair, shared by every state
// that references the pair, and optionally the solved states.
class UpfCache {
 public:
  const std::vector<double>& draws(int i, int j, const ForecastFn& forecast, const UpfConfig& cfg);
  const BranchOutcome* find(int i, int t) const;
  const BranchOutcome& store(int i, int t, BranchOutcome outcome);
  std::size_t solved_states() const { return states_.size(); }

 private:
  std::map<std::pair<int, int>, std::vector<double>> draws_;
  std::map<std::pair<int, int>, BranchOutcome> states_;
};

BranchOutcome future_cost_samples(const DecisionState& state, const ForecastFn& forecast, double alpha,
                                  const UpfConfig& cfg, UpfCache& cache);

// Forecast closure over a fitted model; future datasets reuse the latest observed shift.
ForecastFn make_forecast(const FittedForecaster& fitted, const InformationSet& info);

// Refits the forecaster on the regression set of info and decides at (deployed, t).
bool decide_step(int t, int deployed, const InformationSet& info, double alpha, const UpfConfig& cfg,
                 int horizon_T);

PolicyTrace run_upf(const World& world, const CostSpec& spec, const UpfConfig& cfg);

}  // namespace retrain
