#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "retrain/errors.hpp"

namespace retrain {

namespace cara_detail {

template <typename StalenessFn>
double offline_cost(const CaraConfig& cfg, const PerformanceMatrix& pe, double alpha, StalenessFn& staleness) {
  const int w = pe.offline_w();
  CaraRule rule(cfg);
  int deployed = -w;
  double cost = 0.0;
  for (int s = -w + 1; s <= 0; ++s) {
    if (rule.decide(s + w, cfg.strategy == CaraStrategy::Periodic ? 0.0 : staleness(deployed, s))) {
      deployed = s;
      cost += alpha;
    }
    cost += pe.at(deployed, s);
  }
  return cost;
}

}  // namespace cara_detail

template <typename StalenessFn>
CaraConfig cara_fit_from(CaraStrategy strategy, const PerformanceMatrix& pe, double alpha, StalenessFn&& staleness) {
  const int w = pe.offline_w();
  if (w < 1) throw StateError("CARA needs at least two offline steps");
  if (alpha < 0.0) throw ArgumentError("alpha must be >= 0");

  std::map<std::pair<int, int>, double> memo;
  auto psi = [&](int i, int s) {
    auto key = std::make_pair(i, s);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    double v = staleness(i, s);
    memo.emplace(key, v);
    return v;
  };

  std::vector<double> candidates;
  if (strategy == CaraStrategy::Periodic) {
    for (int p = 1; p <= w; ++p) candidates.push_back(p);
  } else {
    std::set<double> seen;
    for (int i = -w; i < 0; ++i) {
      double run = 0.0;
      for (int s = i + 1; s <= 0; ++s) {
        double v = psi(i, s);
        run += v;
        seen.insert(strategy == CaraStrategy::Threshold ? v : run);
      }
    }
    candidates.assign(seen.begin(), seen.end());
    candidates.push_back(std::numeric_limits<double>::infinity());
  }

  CaraConfig best{strategy, candidates.front(), 0.0};
  double best_cost = std::numeric_limits<double>::infinity();
  for (double c : candidates) {
    CaraConfig cfg{strategy, c, 0.0};
    double cost = cara_detail::offline_cost(cfg, pe, alpha, psi);
    // Candidates ascend, so <= keeps the largest parameter among ties.
    if (cost <= best_cost) {
      best_cost = cost;
      best = cfg;
    }
  }
  return best;
}

}  // namespace retrain
