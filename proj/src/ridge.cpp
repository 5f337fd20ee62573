#include "retrain/ridge.hpp"

#include <cmath>
#include <limits>

#include "retrain/errors.hpp"

namespace retrain {

Eigen::VectorXd RidgeModel::standardize(const Eigen::VectorXd& raw) const {
  Eigen::VectorXd z(raw.size());
  for (Eigen::Index k = 0; k < raw.size(); ++k) {
    z[k] = scale[k] > 0.0 ? (raw[k] - center[k]) / scale[k] : 0.0;
  }
  return z;
}

double RidgeModel::predict(const Eigen::VectorXd& raw) const {
  if (raw.size() != weights.size()) throw ArgumentError("feature vector has the wrong length");
  return intercept + weights.dot(standardize(raw));
}

RidgeModel fit_ridge_loo(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const std::vector<double>& ridge_grid) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  if (n != y.size()) throw ArgumentError("design matrix and target differ in length");
  if (n < 2) throw InsufficientDataError("ridge fit needs at least 2 observations");
  if (ridge_grid.empty()) throw ArgumentError("ridge grid is empty");
  for (double lam : ridge_grid) {
    if (!(lam >= 0.0) || !std::isfinite(lam)) throw ArgumentError("ridge strengths must be finite and >= 0");
  }

  RidgeModel model;
  model.center = X.colwise().mean().transpose();
  model.scale = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd Z(n, p);
  for (Eigen::Index c = 0; c < p; ++c) {
    Eigen::VectorXd col = X.col(c).array() - model.center[c];
    double sd = std::sqrt(col.squaredNorm() / static_cast<double>(n));
    double tol = 1e-12 * (1.0 + std::abs(model.center[c]));
    if (sd > tol) {
      model.scale[c] = sd;
      Z.col(c) = col / sd;
    } else {
      Z.col(c).setZero();
    }
  }

  const double ybar = y.mean();
  const Eigen::VectorXd yc = y.array() - ybar;
  const Eigen::MatrixXd gram = Z.transpose() * Z;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  const Eigen::VectorXd& d = eig.eigenvalues();
  const Eigen::MatrixXd& V = eig.eigenvectors();
  const double dmax = d.size() > 0 ? d.maxCoeff() : 0.0;
  const double rank_tol = 1e-10 * std::max(1.0, dmax);

  const Eigen::VectorXd zty = Z.transpose() * yc;
  const Eigen::MatrixXd ZV = Z * V;

  double best_err = std::numeric_limits<double>::infinity();
  for (double lam : ridge_grid) {
    Eigen::VectorXd inv(p);
    for (Eigen::Index k = 0; k < p; ++k) {
      double denom = d[k] + lam;
      inv[k] = (d[k] > rank_tol && denom > 0.0) ? 1.0 / denom : 0.0;
    }
    Eigen::VectorXd w = V * inv.asDiagonal() * V.transpose() * zty;
    Eigen::VectorXd resid = yc - Z * w;
    // diag of Z G Z^T plus the intercept's 1/n contribution.
    Eigen::VectorXd hdiag = (ZV.array().square().rowwise() * inv.transpose().array()).rowwise().sum();
    double err = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) {
      double lever = 1.0 - (hdiag[r] + 1.0 / static_cast<double>(n));
      lever = std::max(lever, 1e-10);
      double e = resid[r] / lever;
      err += e * e;
    }
    err /= static_cast<double>(n);
    if (err < best_err) {
      best_err = err;
      model.weights = w;
      model.lambda = lam;
      model.rss = resid.squaredNorm();
    }
  }
  model.intercept = ybar;
  model.loo_mse = best_err;
  return model;
}

}  // namespace retrain
