#pragma once

#include <Eigen/Core>

#include <functional>

namespace dlcz {

/// Fills the weighted residuals r_k = (y_k - model_k) / sigma_k and their
/// Jacobian dr_k/dp_j at `params`.
using ResidualFunction =
    std::function<void(const Eigen::VectorXd& params, Eigen::VectorXd& residuals,
                       Eigen::MatrixXd& jacobian)>;

struct LevenbergMarquardtOptions {
  int max_iterations = 500;
  double chi2_tolerance = 1e-14;  // relative change of chi^2
  double step_tolerance = 1e-12;  // relative step length
  /// Optional projection onto the feasible set, applied to every trial step.
  std::function<void(Eigen::VectorXd&)> project;
};

struct LevenbergMarquardtResult {
  Eigen::VectorXd params;
  Eigen::MatrixXd covariance;  // (J^T J)^-1 at the solution; empty if singular
  double chi2 = 0.0;
  int iterations = 0;
};

/// Damped Gauss-Newton with Marquardt diagonal scaling. Throws
/// NumericalError when the iteration limit is reached or chi^2 stops being
/// finite.
LevenbergMarquardtResult levenberg_marquardt(const ResidualFunction& fn,
                                             const Eigen::VectorXd& initial,
                                             const LevenbergMarquardtOptions& options = {});

}  // namespace dlcz
