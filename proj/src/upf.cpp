#include "retrain/upf.hpp"

#include <algorithm>
#include <cmath>

#include "retrain/errors.hpp"
#include "retrain/rng.hpp"

namespace retrain {

void DecisionState::validate() const {
  if (horizon_T < 1) throw ArgumentError("horizon must be >= 1");
  if (time < 1 || time > horizon_T + 1) throw ArgumentError("decision time outside 1..T+1");
  if (last_model >= time) throw ArgumentError("last model must precede the decision time");
}

void UpfConfig::validate() const {
  if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("delta must lie in (0, 1)");
  if (samples < 1) throw ArgumentError("sample count must be >= 1");
}

double quantile(std::vector<double> samples, double delta) {
  if (samples.empty()) throw ArgumentError("quantile of an empty sample");
  if (!(delta > 0.0 && delta <= 1.0)) throw ArgumentError("quantile level must lie in (0, 1]");
  const auto s = static_cast<double>(samples.size());
  auto rank = static_cast<std::size_t>(std::ceil(delta * s - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, samples.size());
  auto nth = samples.begin() + static_cast<std::ptrdiff_t>(rank - 1);
  std::nth_element(samples.begin(), nth, samples.end());
  return *nth;
}

const std::vector<double>& UpfCache::draws(int i, int j, const ForecastFn& forecast, const UpfConfig& cfg) {
  auto key = std::make_pair(i, j);
  auto it = draws_.find(key);
  if (it != draws_.end()) return it->second;
  auto seed = derive_seed({cfg.seed, as_seed(i), as_seed(j)});
  return draws_.emplace(key, sample(forecast(i, j), cfg.samples, seed)).first->second;
}

const BranchOutcome* UpfCache::find(int i, int t) const {
  auto it = states_.find({i, t});
  return it == states_.end() ? nullptr : &it->second;
}

const BranchOutcome& UpfCache::store(int i, int t, BranchOutcome outcome) {
  return states_.insert_or_assign({i, t}, std::move(outcome)).first->second;
}

BranchOutcome future_cost_samples(const DecisionState& state, const ForecastFn& forecast, double alpha,
                                  const UpfConfig& cfg, UpfCache& cache) {
  if (!forecast) throw StateError("UPF needs a fitted forecaster");
  const auto S = static_cast<std::size_t>(cfg.samples);
  const int i = state.last_model;
  const int t = state.time;
  if (t > state.horizon_T) return {std::vector<double>(S, 0.0), false};
  if (cfg.memoize) {
    if (const auto* hit = cache.find(i, t)) return *hit;
  }

  const auto keep_future = future_cost_samples({i, t + 1, state.horizon_T}, forecast, alpha, cfg, cache);
  const auto retrain_future = future_cost_samples({t, t + 1, state.horizon_T}, forecast, alpha, cfg, cache);
  const auto& a_keep = cache.draws(i, t, forecast, cfg);
  const auto& a_new = cache.draws(t, t, forecast, cfg);

  std::vector<double> keep(S), retrain(S);
  for (std::size_t s = 0; s < S; ++s) {
    keep[s] = a_keep[s] + keep_future.samples[s];
    retrain[s] = (alpha + a_new[s]) + retrain_future.samples[s];
  }
  BranchOutcome out;
  out.retrain = quantile(retrain, cfg.delta) < quantile(keep, cfg.delta);
  out.samples = out.retrain ? std::move(retrain) : std::move(keep);
  if (cfg.memoize) return cache.store(i, t, std::move(out));
  return out;
}

ForecastFn make_forecast(const FittedForecaster& fitted, const InformationSet& info) {
  const double shift = info.current_shift();
  return [fitted, shift](int i, int j) { return predict(fitted, ForecastFeatures::make(i, j, shift)); };
}

bool decide_step(int t, int deployed, const InformationSet& info, double alpha, const UpfConfig& cfg,
                 int horizon_T) {
  cfg.validate();
  if (alpha < 0.0) throw ArgumentError("alpha must be >= 0");
  DecisionState state{deployed, t, horizon_T};
  state.validate();
  if (t > horizon_T) throw ArgumentError("decision time beyond the horizon");
  if (info.empty()) throw StateError("information set is empty");

  ForecasterOptions opts;
  opts.family = cfg.family;
  opts.lognormal_param = cfg.lognormal_param;
  opts.ridge_grid = cfg.ridge_grid;
  auto fitted = fit(build_regression_set(info), opts);

  UpfConfig local = cfg;
  local.seed = derive_seed({cfg.seed, as_seed(t)});
  UpfCache cache;
  return future_cost_samples(state, make_forecast(fitted, info), alpha, local, cache).retrain;
}

PolicyTrace run_upf(const World& world, const CostSpec& spec, const UpfConfig& cfg) {
  spec.validate();
  OnlineSession session(world);
  while (!session.done()) {
    int t = session.current_step();
    session.step(decide_step(t, session.deployed_model(), session.info(), spec.alpha, cfg, session.horizon_T()));
  }
  return session.finish(spec);
}

}  // namespace retrain
