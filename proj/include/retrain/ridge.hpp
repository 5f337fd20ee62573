#pragma once

#include <vector>

#include <Eigen/Dense>

namespace retrain {

// Ridge regression on standardized columns with an unpenalized intercept; the
// penalty is picked from a grid by exact leave-one-out squared error (hat-matrix
// shortcut). Zero-variance columns are dropped; rank deficiency at lambda = 0 is
// resolved with the minimum-norm solution.
struct RidgeModel {
  Eigen::VectorXd center;   // per-column mean of the raw features
  Eigen::VectorXd scale;    // per-column std; 0 marks a dropped constant column
  Eigen::VectorXd weights;  // coefficients on standardized columns
  double intercept = 0.0;
  double lambda = 0.0;
  double loo_mse = 0.0;
  double rss = 0.0;

  Eigen::VectorXd standardize(const Eigen::VectorXd& raw) const;
  double predict(const Eigen::VectorXd& raw) const;
};

RidgeModel fit_ridge_loo(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const std::vector<double>& ridge_grid);

}  // namespace retrain
