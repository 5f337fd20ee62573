#include "retrain/oracle.hpp"

#include <vector>

#include "retrain/errors.hpp"

namespace retrain {

namespace {

struct OracleTable {
  // value[i][t] for i in 0..T (model), t in 1..T+1; retrain[i][t] decision at (i, t).
  std::vector<std::vector<double>> value;
  std::vector<std::vector<char>> retrain;
};

OracleTable solve(const PerformanceMatrix& pe, double alpha) {
  const int T = pe.horizon_T();
  if (!pe.covers(0)) throw DataError("oracle needs every pe[i, j] with 0 <= i <= j <= T");
  OracleTable tab;
  tab.value.assign(static_cast<std::size_t>(T + 1), std::vector<double>(static_cast<std::size_t>(T + 2), 0.0));
  tab.retrain.assign(static_cast<std::size_t>(T + 1), std::vector<char>(static_cast<std::size_t>(T + 2), 0));
  for (int t = T; t >= 1; --t) {
    for (int i = 0; i < t; ++i) {
      double keep = pe.at(i, t) + tab.value[i][t + 1];
      double fresh = alpha + pe.at(t, t) + tab.value[t][t + 1];
      bool r = fresh < keep;
      tab.retrain[i][t] = r ? 1 : 0;
      tab.value[i][t] = r ? fresh : keep;
    }
  }
  return tab;
}

}  // namespace

DecisionVector oracle_schedule(const PerformanceMatrix& pe, const CostSpec& spec) {
  spec.validate();
  auto tab = solve(pe, spec.alpha);
  const int T = pe.horizon_T();
  DecisionVector theta(T);
  int last = 0;
  for (int t = 1; t <= T; ++t) {
    if (tab.retrain[last][t]) {
      theta.set(t, true);
      last = t;
    }
  }
  return theta;
}

double oracle_cost(const PerformanceMatrix& pe, const CostSpec& spec) {
  spec.validate();
  return spec.scale_eN * solve(pe, spec.alpha).value[0][1];
}

double alpha_max(const PerformanceMatrix& pe, const CostSpec& spec_template) {
  CostSpec spec = spec_template;
  spec.horizon_T = pe.horizon_T();
  auto retrains_at = [&](double a) {
    spec.alpha = a;
    return oracle_schedule(pe, spec).retrains();
  };
  if (retrains_at(0.0) == 0) return 0.0;
  double lo = 0.0;
  double hi = pe.horizon_T() * pe.max_entry();
  while (hi - lo > 1e-4) {
    double mid = 0.5 * (lo + hi);
    if (retrains_at(mid) == 0) hi = mid; else lo = mid;
  }
  return hi;
}

}  // namespace retrain
