#include "retrain/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include "retrain/csv.hpp"
#include "retrain/errors.hpp"
#include "retrain/rng.hpp"

namespace retrain {

namespace {

constexpr std::uint64_t kFeatureStream = 0x66656174;  // "feat"
constexpr std::uint64_t kSplitStream = 0x73706c74;    // "splt"
constexpr double kGaussSigma = 0.1;

void check_n(int n) {
  if (n < 1) throw ArgumentError("dataset size n must be >= 1");
}

}  // namespace

const char* world_kind_name(WorldKind k) {
  switch (k) {
    case WorldKind::Gauss: return "gauss";
    case WorldKind::Circles: return "circles";
    case WorldKind::Stationary: return "stationary";
    case WorldKind::PeMatrix: return "pe_csv";
  }
  return "?";
}

WorldKind parse_world_kind(const std::string& name) {
  if (name == "gauss") return WorldKind::Gauss;
  if (name == "circles") return WorldKind::Circles;
  if (name == "stationary") return WorldKind::Stationary;
  if (name == "pe_csv") return WorldKind::PeMatrix;
  throw ArgumentError("unknown world '" + name + "' (expected gauss, circles, stationary or pe_csv)");
}

// ---------------------------------------------------------------------------
// Datasets

DatasetSnapshot DatasetSnapshot::with_split(Eigen::MatrixXd features, std::vector<int> labels, int timestep,
                                            std::uint64_t split_seed, double eval_fraction) {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw DataError("features and labels differ in length");
  }
  for (int y : labels) {
    if (y != 0 && y != 1) throw DataError("labels must be 0 or 1");
  }
  DatasetSnapshot d;
  d.features = std::move(features);
  d.labels = std::move(labels);
  d.timestep = timestep;
  const int n = static_cast<int>(d.labels.size());
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(split_seed);
  std::shuffle(order.begin(), order.end(), rng);
  int n_eval = static_cast<int>(std::lround(eval_fraction * n));
  if (n >= 2) n_eval = std::clamp(n_eval, 1, n - 1);
  d.eval_rows.assign(order.begin(), order.begin() + n_eval);
  d.train_rows.assign(order.begin() + n_eval, order.end());
  std::sort(d.eval_rows.begin(), d.eval_rows.end());
  std::sort(d.train_rows.begin(), d.train_rows.end());
  return d;
}

Eigen::VectorXd DatasetSnapshot::feature_means() const {
  return features.colwise().mean().transpose();
}

Eigen::MatrixXd DatasetSnapshot::eval_features() const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(eval_rows.size()), features.cols());
  for (std::size_t k = 0; k < eval_rows.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = features.row(eval_rows[k]);
  return out;
}

std::vector<int> DatasetSnapshot::eval_labels() const {
  std::vector<int> out;
  out.reserve(eval_rows.size());
  for (int r : eval_rows) out.push_back(labels[static_cast<std::size_t>(r)]);
  return out;
}

void write_dataset_csv(std::ostream& out, const DatasetSnapshot& d) {
  std::vector<char> is_eval(d.size(), 0);
  for (int r : d.eval_rows) is_eval[static_cast<std::size_t>(r)] = 1;
  out << "x1,x2,y,split\n";
  for (Eigen::Index r = 0; r < d.features.rows(); ++r) {
    out << csv::format_double(d.features(r, 0)) << ',' << csv::format_double(d.features(r, 1)) << ','
        << d.labels[static_cast<std::size_t>(r)] << ',' << (is_eval[static_cast<std::size_t>(r)] ? "eval" : "train")
        << '\n';
  }
}

int gauss_label(double x1, double x2, GaussLabelRule rule) {
  double lhs = rule == GaussLabelRule::ShiftedSquare ? (4.0 * x1 - 0.5) * (4.0 * x1 - 0.5)
                                                     : 4.0 * (x1 - 0.5) * (x1 - 0.5);
  return lhs > x2 ? 1 : 0;
}

int circles_label(double x1, double x2, int t) {
  double c = 0.2 + 0.02 * t;
  double d1 = x1 - c;
  double d2 = x2 - c;
  return d1 * d1 + d2 * d2 <= 0.5 ? 1 : 0;
}

namespace {

DatasetSnapshot gaussian_blob(int t, int mean_step, int n, std::uint64_t seed, GaussLabelRule rule) {
  check_n(n);
  Rng rng(derive_seed({seed, as_seed(t), kFeatureStream}));
  const double mu1 = (mean_step + 1) / 100.0;
  const double mu2 = 0.5 - (mean_step + 1) / 100.0;
  std::normal_distribution<double> nd(0.0, kGaussSigma);
  Eigen::MatrixXd x(n, 2);
  std::vector<int> y(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) {
    x(r, 0) = mu1 + nd(rng);
    x(r, 1) = mu2 + nd(rng);
    y[static_cast<std::size_t>(r)] = gauss_label(x(r, 0), x(r, 1), rule);
  }
  return DatasetSnapshot::with_split(std::move(x), std::move(y), t, derive_seed({seed, as_seed(t), kSplitStream}));
}

}  // namespace

DatasetSnapshot gen_gauss(int t, int n, std::uint64_t seed, GaussLabelRule rule) {
  return gaussian_blob(t, t, n, seed, rule);
}

DatasetSnapshot gen_stationary(int t, int n, std::uint64_t seed) {
  return gaussian_blob(t, 0, n, seed, GaussLabelRule::ShiftedSquare);
}

DatasetSnapshot gen_circles(int t, int n, std::uint64_t seed) {
  check_n(n);
  Rng rng(derive_seed({seed, as_seed(t), kFeatureStream}));
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  Eigen::MatrixXd x(n, 2);
  std::vector<int> y(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) {
    x(r, 0) = ud(rng);
    x(r, 1) = ud(rng);
    y[static_cast<std::size_t>(r)] = circles_label(x(r, 0), x(r, 1), t);
  }
  return DatasetSnapshot::with_split(std::move(x), std::move(y), t, derive_seed({seed, as_seed(t), kSplitStream}));
}

// ---------------------------------------------------------------------------
// Base classifier

BaseClassifier BaseClassifier::constant(int label, int trained_at) {
  BaseClassifier c;
  c.constant_ = label;
  c.trained_at_ = trained_at;
  return c;
}

BaseClassifier BaseClassifier::from_weights(const Eigen::VectorXd& weights, int trained_at,
                                            const Eigen::Vector2d& center, const Eigen::Vector2d& scale) {
  if (weights.size() != kFeatures) throw ArgumentError("base classifier needs 6 weights");
  if (!weights.allFinite()) throw DataError("base classifier weights must be finite");
  if (!(scale.array() > 0.0).all()) throw ArgumentError("input scale must be positive");
  BaseClassifier c;
  c.weights_ = weights;
  c.center_ = center;
  c.scale_ = scale;
  c.trained_at_ = trained_at;
  return c;
}

Eigen::VectorXd BaseClassifier::expand(double u1, double u2) {
  Eigen::VectorXd phi(kFeatures);
  phi << 1.0, u1, u2, u1 * u1, u2 * u2, u1 * u2;
  return phi;
}

Eigen::VectorXd BaseClassifier::features(double x1, double x2) const {
  return expand((x1 - center_[0]) / scale_[0], (x2 - center_[1]) / scale_[1]);
}

double BaseClassifier::probability(double x1, double x2) const {
  if (constant_) return static_cast<double>(*constant_);
  double z = weights_.dot(features(x1, x2));
  return 1.0 / (1.0 + std::exp(-z));
}

int BaseClassifier::predict(double x1, double x2) const {
  if (constant_) return *constant_;
  return weights_.dot(features(x1, x2)) > 0.0 ? 1 : 0;
}

BaseClassifier train_base_model(const DatasetSnapshot& d, const BaseTrainingOptions& opts) {
  const auto n = static_cast<Eigen::Index>(d.train_rows.size());
  if (n == 0) throw ArgumentError("cannot train on an empty training split");
  if (d.features.cols() != 2) throw DataError("base classifier expects 2 features");
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  int positives = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    int r = d.train_rows[static_cast<std::size_t>(k)];
    x.row(k) = d.features.row(r);
    y[k] = d.labels[static_cast<std::size_t>(r)];
    positives += d.labels[static_cast<std::size_t>(r)];
  }
  if (positives == 0 || positives == n) return BaseClassifier::constant(positives == 0 ? 0 : 1, d.timestep);

  Eigen::Vector2d center = x.colwise().mean().transpose();
  Eigen::Vector2d scale;
  for (int c = 0; c < 2; ++c) {
    double sd = std::sqrt((x.col(c).array() - center[c]).square().mean());
    scale[c] = sd > 1e-12 ? sd : 1.0;
  }
  Eigen::MatrixXd phi(n, BaseClassifier::kFeatures);
  for (Eigen::Index k = 0; k < n; ++k) {
    phi.row(k) = BaseClassifier::expand((x(k, 0) - center[0]) / scale[0], (x(k, 1) - center[1]) / scale[1]).transpose();
  }

  Eigen::VectorXd w = Eigen::VectorXd::Zero(BaseClassifier::kFeatures);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    Eigen::VectorXd z = phi * w;
    Eigen::VectorXd p = (1.0 + (-z.array()).exp()).inverse().matrix();
    w -= opts.step * inv_n * (phi.transpose() * (p - y));
  }
  return BaseClassifier::from_weights(w, d.timestep, center, scale);
}

std::vector<int> eval_correctness(const BaseClassifier& model, const DatasetSnapshot& d) {
  std::vector<int> out;
  out.reserve(d.eval_rows.size());
  for (int r : d.eval_rows) {
    int pred = model.predict(d.features(r, 0), d.features(r, 1));
    out.push_back(pred == d.labels[static_cast<std::size_t>(r)] ? 1 : 0);
  }
  return out;
}

double eval_model(const BaseClassifier& model, const DatasetSnapshot& d) {
  if (d.eval_rows.empty()) throw ArgumentError("dataset has an empty eval split");
  auto correct = eval_correctness(model, d);
  int wrong = 0;
  for (int c : correct) wrong += 1 - c;
  return static_cast<double>(wrong) / static_cast<double>(correct.size());
}

// ---------------------------------------------------------------------------
// Worlds

void WorldConfig::validate() const {
  if (kind == WorldKind::PeMatrix) {
    if (pe_csv_path.empty()) throw ArgumentError("pe_csv world needs pe_csv_path");
    return;
  }
  if (n < 2) throw ArgumentError("world n must be >= 2");
  if (w < 0) throw ArgumentError("world w must be >= 0");
  if (T < 1) throw ArgumentError("world T must be >= 1");
}

DatasetSnapshot generate_dataset(const WorldConfig& cfg, int t, std::uint64_t world_seed) {
  switch (cfg.kind) {
    case WorldKind::Gauss: return gen_gauss(t, cfg.n, world_seed, cfg.gauss_rule);
    case WorldKind::Circles: return gen_circles(t, cfg.n, world_seed);
    case WorldKind::Stationary: return gen_stationary(t, cfg.n, world_seed);
    case WorldKind::PeMatrix: break;
  }
  throw StateError("matrix-only worlds have no datasets");
}

World World::build(const WorldConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (cfg.kind == WorldKind::PeMatrix) return from_matrix(read_pe_csv_file(cfg.pe_csv_path));
  World world;
  world.pe_ = PerformanceMatrix(cfg.w, cfg.T, true);
  for (int t = -cfg.w; t <= cfg.T; ++t) {
    world.datasets_.push_back(generate_dataset(cfg, t, seed));
    world.models_.push_back(train_base_model(world.datasets_.back()));
  }
  for (int i = -cfg.w; i <= cfg.T; ++i) {
    for (int j = i; j <= cfg.T; ++j) {
      world.pe_.set(i, j, eval_model(world.model(i), world.dataset(j)));
    }
  }
  return world;
}

World World::from_matrix(PerformanceMatrix pe) {
  if (!pe.covers(pe.min_index())) throw DataError("performance matrix is missing entries");
  World world;
  world.pe_ = std::move(pe);
  return world;
}

const DatasetSnapshot& World::dataset(int t) const {
  if (!has_samples()) throw StateError("world has no sample-level data");
  if (t < -offline_w() || t > horizon_T()) throw std::out_of_range("dataset index out of range");
  return datasets_[static_cast<std::size_t>(t + offline_w())];
}

const BaseClassifier& World::model(int i) const {
  if (!has_samples()) throw StateError("world has no trained models");
  if (i < -offline_w() || i > horizon_T()) throw std::out_of_range("model index out of range");
  return models_[static_cast<std::size_t>(i + offline_w())];
}

std::optional<Eigen::VectorXd> World::feature_means(int t) const {
  if (!has_samples()) return std::nullopt;
  return dataset(t).feature_means();
}

PerformanceMatrix build_pe_matrix(const WorldConfig& cfg, std::uint64_t seed) {
  return World::build(cfg, seed).pe();
}

}  // namespace retrain
