#pragma once

// Performance forecaster: regression set construction from the information
// available at decision time, a ridge mean model with constant residual variance,
// and moment-matched predictive distributions for unseen losses A[i, j].

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "retrain/ridge.hpp"

namespace retrain {

inline constexpr double kVarianceFloor = 1e-6;
inline constexpr double kMeanClampEps = 1e-3;

// Features [i, j, j - i, z_shift] for the loss of model i on dataset j.
struct ForecastFeatures {
  int model_index = 0;
  int time_index = 0;
  int gap = 0;
  double shift = 0.0;

  static ForecastFeatures make(int i, int j, double shift);
  Eigen::VectorXd as_vector() const;
};

struct Observation {
  ForecastFeatures features;
  double loss = 0.0;
};

struct RegressionSet {
  std::vector<Observation> pairs;
  std::size_t size() const { return pairs.size(); }
};

// CSV `i,j,gap,z_shift,a`.
void write_regression_csv(std::ostream& out, const RegressionSet& m);

// Information set I_{<t}: trained models, arrived datasets (by per-dimension
// feature means) and the measured losses between them.
class InformationSet {
 public:
  InformationSet() = default;

  // Registers dataset j (must be later than every dataset so far) and records
  // loss_of(i) for every trained model i <= j.
  template <typename LossFn>
  void add_dataset(int j, std::optional<Eigen::VectorXd> feature_means, LossFn&& loss_of) {
    register_dataset(j, std::move(feature_means));
    for (int i : models_) {
      if (i <= j) losses_[{i, j}] = loss_of(i);
    }
  }

  // Registers model i and records loss_on(j) for every arrived dataset j >= i.
  template <typename LossFn>
  void add_model(int i, LossFn&& loss_on) {
    register_model(i);
    for (int j : datasets_) {
      if (j >= i) losses_[{i, j}] = loss_on(j);
    }
  }

  const std::vector<int>& models() const { return models_; }
  const std::vector<int>& datasets() const { return datasets_; }
  const std::map<std::pair<int, int>, double>& losses() const { return losses_; }
  bool empty() const { return models_.empty() || datasets_.empty(); }

  // ||mean(D_j) - mean(D_{j-1})||_1, 0 for the earliest dataset or when features are unknown.
  double shift_at(int j) const;
  // Shift between the two most recently arrived datasets.
  double current_shift() const;
  int latest_dataset() const;

 private:
  void register_dataset(int j, std::optional<Eigen::VectorXd> feature_means);
  void register_model(int i);

  std::vector<int> models_;
  std::vector<int> datasets_;
  std::map<int, Eigen::VectorXd> means_;
  std::map<std::pair<int, int>, double> losses_;
};

// L1 distance between the per-dimension feature means of two datasets (rows = samples).
double shift_statistic(const Eigen::MatrixXd& current, const Eigen::MatrixXd& previous);

RegressionSet build_regression_set(const InformationSet& info);

enum class Family { Beta, Gaussian, LogNormal, PointMass };

enum class LogNormalParam {
  Standard,      // v^2 = ln(1 + sigma2 / mu^2), m = ln(mu) - v^2 / 2
  PrintedFormula // v = sqrt(ln(1 + mu / sigma2)), m = ln(v) - v^2 / 2
};

const char* family_name(Family f);
Family parse_family(const std::string& name);

struct PredictiveDistribution {
  Family family = Family::Gaussian;
  double p1 = 0.0;  // Beta a | Gaussian mean | log-normal m | point value
  double p2 = 0.0;  // Beta b | Gaussian variance | log-normal v (log-scale std)

  static PredictiveDistribution beta(double a, double b);
  static PredictiveDistribution gaussian(double mean, double var);
  static PredictiveDistribution lognormal(double m, double v);
  static PredictiveDistribution point(double value);

  double mean() const;
  double variance() const;
};

struct BetaParams {
  double a = 1.0;
  double b = 1.0;
};

struct LogNormalParams {
  double m = 0.0;
  double v = 1.0;
};

BetaParams beta_from_moments(double mu, double sigma2);
LogNormalParams lognormal_from_moments(double mu, double sigma2,
                                       LogNormalParam param = LogNormalParam::Standard);

struct ForecasterOptions {
  Family family = Family::Beta;
  LogNormalParam lognormal_param = LogNormalParam::Standard;
  std::vector<double> ridge_grid{0.0, 1e-3, 1e-2, 1e-1, 1.0};
  double variance_floor = kVarianceFloor;
};

struct FittedForecaster {
  RidgeModel mean_model;
  double sigma2 = kVarianceFloor;
  Family family = Family::Beta;
  LogNormalParam lognormal_param = LogNormalParam::Standard;

  double predict_mean(const ForecastFeatures& feats) const;
};

FittedForecaster fit(const RegressionSet& m, const ForecasterOptions& opts = {});

PredictiveDistribution predict(const FittedForecaster& fitted, const ForecastFeatures& feats);

// S independent draws, deterministic in seed.
std::vector<double> sample(const PredictiveDistribution& dist, int count, std::uint64_t seed);

}  // namespace retrain
