#include "retrain/forecaster.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include "retrain/csv.hpp"
#include "retrain/errors.hpp"
#include "retrain/rng.hpp"

namespace retrain {

namespace {
constexpr int kFeatureCount = 4;
}

ForecastFeatures ForecastFeatures::make(int i, int j, double shift) {
  if (j < i) throw ArgumentError("forecast features need i <= j");
  if (!(shift >= 0.0)) throw ArgumentError("shift statistic must be >= 0");
  return ForecastFeatures{i, j, j - i, shift};
}

Eigen::VectorXd ForecastFeatures::as_vector() const {
  Eigen::VectorXd v(kFeatureCount);
  v << model_index, time_index, gap, shift;
  return v;
}

void write_regression_csv(std::ostream& out, const RegressionSet& m) {
  out << "i,j,gap,z_shift,a\n";
  for (const auto& p : m.pairs) {
    out << p.features.model_index << ',' << p.features.time_index << ',' << p.features.gap << ','
        << csv::format_double(p.features.shift) << ',' << csv::format_double(p.loss) << '\n';
  }
}

// ---------------------------------------------------------------------------
// InformationSet

void InformationSet::register_dataset(int j, std::optional<Eigen::VectorXd> feature_means) {
  if (!datasets_.empty() && j <= datasets_.back()) {
    throw StateError("datasets must arrive in increasing time order");
  }
  datasets_.push_back(j);
  if (feature_means) means_[j] = std::move(*feature_means);
}

void InformationSet::register_model(int i) {
  if (std::find(models_.begin(), models_.end(), i) != models_.end()) {
    throw StateError("model " + std::to_string(i) + " already trained");
  }
  models_.push_back(i);
}

double InformationSet::shift_at(int j) const {
  auto it = std::find(datasets_.begin(), datasets_.end(), j);
  if (it == datasets_.end()) throw StateError("dataset " + std::to_string(j) + " has not arrived");
  if (it == datasets_.begin()) return 0.0;
  auto cur = means_.find(j);
  auto prev = means_.find(*(it - 1));
  if (cur == means_.end() || prev == means_.end()) return 0.0;
  if (cur->second.size() != prev->second.size()) throw DataError("feature dimension changed between datasets");
  return (cur->second - prev->second).lpNorm<1>();
}

double InformationSet::current_shift() const {
  if (datasets_.empty()) throw StateError("no dataset has arrived");
  return shift_at(datasets_.back());
}

int InformationSet::latest_dataset() const {
  if (datasets_.empty()) throw StateError("no dataset has arrived");
  return datasets_.back();
}

double shift_statistic(const Eigen::MatrixXd& current, const Eigen::MatrixXd& previous) {
  if (current.rows() == 0 || previous.rows() == 0) throw DataError("shift statistic needs nonempty datasets");
  if (current.cols() != previous.cols()) throw DataError("datasets differ in feature dimension");
  Eigen::VectorXd a = current.colwise().mean().transpose();
  Eigen::VectorXd b = previous.colwise().mean().transpose();
  return (a - b).lpNorm<1>();
}

RegressionSet build_regression_set(const InformationSet& info) {
  if (info.empty()) throw StateError("information set has no trained model or no dataset");
  RegressionSet m;
  std::vector<int> models = info.models();
  std::sort(models.begin(), models.end());
  for (int i : models) {
    for (int j : info.datasets()) {
      if (j < i) continue;
      auto it = info.losses().find({i, j});
      if (it == info.losses().end()) {
        throw StateError("missing loss for model " + std::to_string(i) + " on dataset " + std::to_string(j));
      }
      m.pairs.push_back({ForecastFeatures::make(i, j, info.shift_at(j)), it->second});
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Distributions

const char* family_name(Family f) {
  switch (f) {
    case Family::Beta: return "beta";
    case Family::Gaussian: return "gaussian";
    case Family::LogNormal: return "lognormal";
    case Family::PointMass: return "point";
  }
  return "?";
}

Family parse_family(const std::string& name) {
  if (name == "beta") return Family::Beta;
  if (name == "gaussian") return Family::Gaussian;
  if (name == "lognormal") return Family::LogNormal;
  if (name == "point") return Family::PointMass;
  throw ArgumentError("unknown distribution family '" + name + "'");
}

PredictiveDistribution PredictiveDistribution::beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw ArgumentError("Beta parameters must be positive");
  return {Family::Beta, a, b};
}

PredictiveDistribution PredictiveDistribution::gaussian(double mean, double var) {
  if (!(var > 0.0)) throw ArgumentError("Gaussian variance must be positive");
  return {Family::Gaussian, mean, var};
}

PredictiveDistribution PredictiveDistribution::lognormal(double m, double v) {
  if (!(v > 0.0)) throw ArgumentError("log-normal scale must be positive");
  return {Family::LogNormal, m, v};
}

PredictiveDistribution PredictiveDistribution::point(double value) {
  return {Family::PointMass, value, 0.0};
}

double PredictiveDistribution::mean() const {
  switch (family) {
    case Family::Beta: return p1 / (p1 + p2);
    case Family::Gaussian: return p1;
    case Family::LogNormal: return std::exp(p1 + 0.5 * p2 * p2);
    case Family::PointMass: return p1;
  }
  return 0.0;
}

double PredictiveDistribution::variance() const {
  switch (family) {
    case Family::Beta: {
      double s = p1 + p2;
      return p1 * p2 / (s * s * (s + 1.0));
    }
    case Family::Gaussian: return p2;
    case Family::LogNormal: {
      double v2 = p2 * p2;
      return (std::exp(v2) - 1.0) * std::exp(2.0 * p1 + v2);
    }
    case Family::PointMass: return 0.0;
  }
  return 0.0;
}

BetaParams beta_from_moments(double mu, double sigma2) {
  constexpr double eps = kMeanClampEps;
  mu = std::clamp(std::isfinite(mu) ? mu : 0.5, eps, 1.0 - eps);
  double cap = mu * (1.0 - mu) * (1.0 - eps);
  if (!(sigma2 > 0.0)) sigma2 = kVarianceFloor;
  sigma2 = std::min(sigma2, cap);
  double k = mu * (1.0 - mu) / sigma2 - 1.0;
  return {mu * k, (1.0 - mu) * k};
}

LogNormalParams lognormal_from_moments(double mu, double sigma2, LogNormalParam param) {
  if (!(mu > 0.0)) throw ArgumentError("log-normal moment match needs mu > 0");
  if (!(sigma2 > 0.0)) throw ArgumentError("log-normal moment match needs sigma2 > 0");
  if (param == LogNormalParam::Standard) {
    double v2 = std::log1p(sigma2 / (mu * mu));
    return {std::log(mu) - 0.5 * v2, std::sqrt(v2)};
  }
  double v = std::sqrt(std::log1p(mu / sigma2));
  return {std::log(v) - 0.5 * v * v, v};
}

// ---------------------------------------------------------------------------
// Fitting and prediction

double FittedForecaster::predict_mean(const ForecastFeatures& feats) const {
  return mean_model.predict(feats.as_vector());
}

FittedForecaster fit(const RegressionSet& m, const ForecasterOptions& opts) {
  const auto n = static_cast<Eigen::Index>(m.size());
  if (n < 2) throw InsufficientDataError("forecaster needs at least 2 observations, got " + std::to_string(n));
  if (!(opts.variance_floor > 0.0)) throw ArgumentError("variance floor must be > 0");
  Eigen::MatrixXd X(n, kFeatureCount);
  Eigen::VectorXd y(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    X.row(r) = m.pairs[static_cast<std::size_t>(r)].features.as_vector().transpose();
    y[r] = m.pairs[static_cast<std::size_t>(r)].loss;
  }
  FittedForecaster out;
  out.mean_model = fit_ridge_loo(X, y, opts.ridge_grid);
  out.family = opts.family;
  out.lognormal_param = opts.lognormal_param;
  double dof = (n > kFeatureCount + 1) ? static_cast<double>(n - kFeatureCount - 1) : static_cast<double>(n);
  out.sigma2 = std::max(opts.variance_floor, out.mean_model.rss / dof);
  return out;
}

PredictiveDistribution predict(const FittedForecaster& fitted, const ForecastFeatures& feats) {
  double mean = fitted.predict_mean(feats);
  switch (fitted.family) {
    case Family::Beta: {
      auto p = beta_from_moments(std::clamp(mean, kMeanClampEps, 1.0 - kMeanClampEps), fitted.sigma2);
      return PredictiveDistribution::beta(p.a, p.b);
    }
    case Family::Gaussian:
      return PredictiveDistribution::gaussian(mean, fitted.sigma2);
    case Family::LogNormal: {
      auto p = lognormal_from_moments(std::max(mean, kMeanClampEps), fitted.sigma2, fitted.lognormal_param);
      return PredictiveDistribution::lognormal(p.m, p.v);
    }
    case Family::PointMass:
      return PredictiveDistribution::point(mean);
  }
  throw StateError("invalid forecaster family");
}

std::vector<double> sample(const PredictiveDistribution& dist, int count, std::uint64_t seed) {
  if (count < 1) throw ArgumentError("sample count must be >= 1");
  std::vector<double> out(static_cast<std::size_t>(count));
  Rng rng(seed);
  switch (dist.family) {
    case Family::Beta: {
      std::gamma_distribution<double> ga(dist.p1, 1.0);
      std::gamma_distribution<double> gb(dist.p2, 1.0);
      const double fallback = dist.mean();
      for (auto& x : out) {
        double u = ga(rng);
        double v = gb(rng);
        double s = u + v;
        x = s > 0.0 ? std::clamp(u / s, 0.0, 1.0) : fallback;
      }
      break;
    }
    case Family::Gaussian: {
      std::normal_distribution<double> nd(dist.p1, std::sqrt(dist.p2));
      for (auto& x : out) x = nd(rng);
      break;
    }
    case Family::LogNormal: {
      std::lognormal_distribution<double> ln(dist.p1, dist.p2);
      for (auto& x : out) x = ln(rng);
      break;
    }
    case Family::PointMass:
      std::fill(out.begin(), out.end(), dist.p1);
      break;
  }
  return out;
}

}  // namespace retrain
