#pragma once

// Seeded drift worlds (covariate-shift "Gauss" and concept-drift "circles"),
// the degree-2 logistic base learner, and performance-matrix construction.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "retrain/core.hpp"

namespace retrain {

inline constexpr double kEvalFraction = 0.3;

enum class WorldKind { Gauss, Circles, Stationary, PeMatrix };

const char* world_kind_name(WorldKind k);
WorldKind parse_world_kind(const std::string& name);

// Two readings of the Gauss labelling rule.
enum class GaussLabelRule {
  ShiftedSquare,  // (4*x1 - 0.5)^2 > x2  (default)
  ScaledSquare    // 4*(x1 - 0.5)^2 > x2
};

struct DatasetSnapshot {
  Eigen::MatrixXd features;  // n x d
  std::vector<int> labels;   // 0/1
  int timestep = 0;
  std::vector<int> train_rows;
  std::vector<int> eval_rows;

  // Splits rows into disjoint train/eval sets; eval gets round(eval_fraction * n) rows.
  static DatasetSnapshot with_split(Eigen::MatrixXd features, std::vector<int> labels, int timestep,
                                    std::uint64_t split_seed, double eval_fraction = kEvalFraction);

  std::size_t size() const { return labels.size(); }
  Eigen::VectorXd feature_means() const;
  Eigen::MatrixXd eval_features() const;
  std::vector<int> eval_labels() const;
};

// CSV `x1,x2,y,split` (split is "train" or "eval").
void write_dataset_csv(std::ostream& out, const DatasetSnapshot& d);

int gauss_label(double x1, double x2, GaussLabelRule rule = GaussLabelRule::ShiftedSquare);
int circles_label(double x1, double x2, int t);

DatasetSnapshot gen_gauss(int t, int n, std::uint64_t seed,
                          GaussLabelRule rule = GaussLabelRule::ShiftedSquare);
DatasetSnapshot gen_circles(int t, int n, std::uint64_t seed);
// Gauss world frozen at its t = 0 distribution; every step is identically distributed.
DatasetSnapshot gen_stationary(int t, int n, std::uint64_t seed);

// Logistic regression on [1, u1, u2, u1^2, u2^2, u1*u2], where u is the input
// standardized with the training split's per-dimension mean and std.
class BaseClassifier {
 public:
  static constexpr int kFeatures = 6;

  static BaseClassifier constant(int label, int trained_at);
  static BaseClassifier from_weights(const Eigen::VectorXd& weights, int trained_at,
                                     const Eigen::Vector2d& center = Eigen::Vector2d::Zero(),
                                     const Eigen::Vector2d& scale = Eigen::Vector2d::Ones());

  static Eigen::VectorXd expand(double u1, double u2);
  Eigen::VectorXd features(double x1, double x2) const;
  double probability(double x1, double x2) const;
  int predict(double x1, double x2) const;

  const Eigen::VectorXd& weights() const { return weights_; }
  int trained_at() const { return trained_at_; }
  std::optional<int> constant_label() const { return constant_; }

 private:
  Eigen::VectorXd weights_ = Eigen::VectorXd::Zero(kFeatures);
  Eigen::Vector2d center_ = Eigen::Vector2d::Zero();
  Eigen::Vector2d scale_ = Eigen::Vector2d::Ones();
  int trained_at_ = 0;
  std::optional<int> constant_;
};

struct BaseTrainingOptions {
  double step = 0.1;
  int epochs = 500;
};

// Fits on the dataset's train split only.
BaseClassifier train_base_model(const DatasetSnapshot& d, const BaseTrainingOptions& opts = {});

// 0-1 error on the dataset's eval split.
double eval_model(const BaseClassifier& model, const DatasetSnapshot& d);

// Per-row correctness (1 = correct) of the model on the eval split, in row order.
std::vector<int> eval_correctness(const BaseClassifier& model, const DatasetSnapshot& d);

struct WorldConfig {
  WorldKind kind = WorldKind::Gauss;
  int n = 5000;
  int w = 7;
  int T = 8;
  GaussLabelRule gauss_rule = GaussLabelRule::ShiftedSquare;
  std::string pe_csv_path;

  void validate() const;
};

DatasetSnapshot generate_dataset(const WorldConfig& cfg, int t, std::uint64_t world_seed);

// A realized world: datasets and models for every step -w..T and the full matrix of
// eval-split losses. Matrix-only worlds (loaded from CSV) carry no samples.
class World {
 public:
  static World build(const WorldConfig& cfg, std::uint64_t seed);
  static World from_matrix(PerformanceMatrix pe);

  const PerformanceMatrix& pe() const { return pe_; }
  int offline_w() const { return pe_.offline_w(); }
  int horizon_T() const { return pe_.horizon_T(); }
  bool has_samples() const { return !datasets_.empty(); }

  const DatasetSnapshot& dataset(int t) const;
  const BaseClassifier& model(int i) const;
  std::optional<Eigen::VectorXd> feature_means(int t) const;

  // Overwrites one matrix entry; used to build perturbed copies of a world.
  void override_loss(int i, int j, double loss) { pe_.set(i, j, loss); }

 private:
  PerformanceMatrix pe_;
  std::vector<DatasetSnapshot> datasets_;  // index t + w
  std::vector<BaseClassifier> models_;
};

PerformanceMatrix build_pe_matrix(const WorldConfig& cfg, std::uint64_t seed);

}  // namespace retrain
