#include "retrain/cara.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "retrain/errors.hpp"

namespace retrain {

const char* cara_strategy_name(CaraStrategy s) {
  switch (s) {
    case CaraStrategy::Threshold: return "threshold";
    case CaraStrategy::Cumulative: return "cumulative";
    case CaraStrategy::Periodic: return "periodic";
  }
  return "?";
}

CaraStrategy parse_cara_strategy(const std::string& name) {
  if (name == "threshold") return CaraStrategy::Threshold;
  if (name == "cumulative") return CaraStrategy::Cumulative;
  if (name == "periodic") return CaraStrategy::Periodic;
  throw ArgumentError("unknown CARA strategy '" + name + "'");
}

void CaraConfig::validate() const {
  if (std::isnan(fitted_param)) throw ArgumentError("CARA parameter must not be NaN");
  if (strategy == CaraStrategy::Periodic && !(fitted_param >= 1.0)) {
    throw ArgumentError("CARA period must be >= 1");
  }
}

bool CaraRule::decide(int step_index, double staleness) {
  switch (cfg_.strategy) {
    case CaraStrategy::Threshold:
      return staleness > cfg_.fitted_param;
    case CaraStrategy::Cumulative:
      accumulated_ += staleness;
      if (accumulated_ > cfg_.fitted_param) {
        accumulated_ = 0.0;
        return true;
      }
      return false;
    case CaraStrategy::Periodic: {
      if (!std::isfinite(cfg_.fitted_param)) return false;
      auto period = static_cast<long long>(cfg_.fitted_param);
      return step_index % period == 0;
    }
  }
  return false;
}

double median_pairwise_distance(const Eigen::MatrixXd& rows) {
  const auto n = rows.rows();
  if (n < 2) return 1.0;
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a + 1; b < n; ++b) d.push_back((rows.row(a) - rows.row(b)).norm());
  }
  auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  return *mid;
}

double cara_staleness(const Eigen::MatrixXd& query, const Eigen::MatrixXd& reference,
                      const Eigen::VectorXd& reference_loss, double bandwidth) {
  if (query.rows() == 0 || reference.rows() == 0) throw ArgumentError("staleness needs nonempty sets");
  if (query.cols() != reference.cols()) throw DataError("query and reference differ in feature dimension");
  if (reference_loss.size() != reference.rows()) throw ArgumentError("one loss per reference row required");

  const bool uniform = std::isinf(bandwidth);
  Eigen::RowVectorXd center = reference.colwise().mean();
  Eigen::RowVectorXd scale(reference.cols());
  for (Eigen::Index c = 0; c < reference.cols(); ++c) {
    double sd = std::sqrt((reference.col(c).array() - center[c]).square().mean());
    scale[c] = sd > 1e-12 ? sd : 1.0;
  }
  Eigen::MatrixXd q = (query.rowwise() - center).array().rowwise() / scale.array();
  Eigen::MatrixXd r = (reference.rowwise() - center).array().rowwise() / scale.array();

  double h = bandwidth;
  if (!uniform && !(h > 0.0)) {
    const Eigen::Index m = std::min<Eigen::Index>(r.rows(), 300);
    h = median_pairwise_distance(r.topRows(m));
    if (!(h > 0.0)) h = 1.0;
  }
  const double inv = uniform ? 0.0 : 1.0 / (2.0 * h * h);

  double total = 0.0;
  for (Eigen::Index a = 0; a < q.rows(); ++a) {
    double row = 0.0;
    for (Eigen::Index b = 0; b < r.rows(); ++b) {
      if (reference_loss[b] == 0.0) continue;
      double sim = uniform ? 1.0 : std::exp(-(q.row(a) - r.row(b)).squaredNorm() * inv);
      row += sim * reference_loss[b];
    }
    total += row / static_cast<double>(r.rows());
  }
  return total / static_cast<double>(q.rows());
}

double model_staleness(const World& world, int model, int t, double bandwidth) {
  if (!world.has_samples()) throw StateError("CARA needs a sample-level world");
  const auto& incoming = world.dataset(t);
  const auto& previous = world.dataset(t - 1);
  const Eigen::Index m = std::min<Eigen::Index>(kCaraQuerySize, incoming.features.rows());
  Eigen::MatrixXd query = incoming.features.topRows(m);
  Eigen::MatrixXd reference = previous.eval_features();
  auto correct = eval_correctness(world.model(model), previous);
  Eigen::VectorXd loss(static_cast<Eigen::Index>(correct.size()));
  for (std::size_t k = 0; k < correct.size(); ++k) loss[static_cast<Eigen::Index>(k)] = 1.0 - correct[k];
  return cara_staleness(query, reference, loss, bandwidth);
}

CaraConfig cara_fit_offline(CaraStrategy strategy, const World& world, double alpha, double bandwidth) {
  auto cfg = cara_fit_from(strategy, world.pe(), alpha, [&](int i, int s) {
    return model_staleness(world, i, s, bandwidth);
  });
  cfg.similarity_bandwidth = bandwidth;
  return cfg;
}

PolicyTrace run_cara(const World& world, const CostSpec& spec, const CaraConfig& cfg,
                     const StalenessFn& staleness) {
  spec.validate();
  cfg.validate();
  CaraRule rule(cfg);
  OnlineSession session(world);
  while (!session.done()) {
    const int t = session.current_step();
    double psi = cfg.strategy == CaraStrategy::Periodic
                     ? 0.0
                 : staleness ? staleness(session.deployed_model(), t)
                             : model_staleness(world, session.deployed_model(), t, cfg.similarity_bandwidth);
    session.step(rule.decide(t, psi));
  }
  return session.finish(spec);
}

}  // namespace retrain
