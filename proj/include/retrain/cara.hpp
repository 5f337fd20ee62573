#pragma once

// CARA-style baselines: a staleness estimate of the deployed model on the incoming
// (unlabeled) features, and three fixed retraining rules fitted on the offline window.

#include <cstdint>
#include <functional>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "retrain/policy.hpp"

namespace retrain {

enum class CaraStrategy { Threshold, Cumulative, Periodic };

const char* cara_strategy_name(CaraStrategy s);
CaraStrategy parse_cara_strategy(const std::string& name);

inline constexpr int kCaraQuerySize = 200;

struct CaraConfig {
  CaraStrategy strategy = CaraStrategy::Threshold;
  double fitted_param = std::numeric_limits<double>::infinity();  // threshold or period
  double similarity_bandwidth = 0.0;                              // 0 = median heuristic

  void validate() const;
};

// Median pairwise Euclidean distance among the rows (standardized space expected).
double median_pairwise_distance(const Eigen::MatrixXd& rows);

// (1 / (|Q| |D|)) sum_q sum_x sim(q, x) * loss(x), sim(q, x) = exp(-|q - x|^2 / (2 h^2))
// on features standardized by the reference set; h = bandwidth, or the median
// pairwise distance of the standardized reference rows when bandwidth <= 0.
// bandwidth = +inf gives sim = 1.
double cara_staleness(const Eigen::MatrixXd& query, const Eigen::MatrixXd& reference,
                      const Eigen::VectorXd& reference_loss, double bandwidth = 0.0);

// Staleness of model i at step t: queries are the first rows of D_t (labels unused),
// the reference is the eval split of D_{t-1} with model i's 0-1 losses.
double model_staleness(const World& world, int model, int t, double bandwidth = 0.0);

// Replays the offline steps -w+1..0 starting from f_{-w} and picks the parameter with
// the lowest offline cost; ties go to the larger threshold or period.
CaraConfig cara_fit_offline(CaraStrategy strategy, const World& world, double alpha, double bandwidth = 0.0);

// Generic offline search on precomputed staleness values. staleness(i, s) is queried
// for offline steps s = -w+1..0 and models i < s; pe supplies the offline losses.
template <typename StalenessFn>
CaraConfig cara_fit_from(CaraStrategy strategy, const PerformanceMatrix& pe, double alpha, StalenessFn&& staleness);

using StalenessFn = std::function<double(int model, int t)>;

// Online run; staleness defaults to model_staleness with the configured bandwidth.
PolicyTrace run_cara(const World& world, const CostSpec& spec, const CaraConfig& cfg,
                     const StalenessFn& staleness = {});

// Rule evaluation shared by the offline fit and the online run.
class CaraRule {
 public:
  explicit CaraRule(CaraConfig cfg) : cfg_(cfg) {}
  // step_index counts steps since the start of the run (1-based).
  bool decide(int step_index, double staleness);

 private:
  CaraConfig cfg_;
  double accumulated_ = 0.0;
};

}  // namespace retrain

#include "retrain/cara_impl.hpp"
