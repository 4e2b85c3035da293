#include "dlcz/fitting.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

#include "dlcz/errors.hpp"

namespace dlcz {

LevenbergMarquardtResult levenberg_marquardt(const ResidualFunction& fn,
                                             const Eigen::VectorXd& initial,
                                             const LevenbergMarquardtOptions& options) {
  const auto n = initial.size();
  Eigen::VectorXd p = initial;
  if (options.project) options.project(p);
  Eigen::VectorXd r;
  Eigen::MatrixXd J;
  fn(p, r, J);
  double chi2 = r.squaredNorm();
  if (!std::isfinite(chi2)) throw NumericalError("non-finite chi^2 at the initial point");

  Eigen::MatrixXd JtJ = J.transpose() * J;
  Eigen::VectorXd g = J.transpose() * r;
  double lambda = 1e-3 * std::max(JtJ.diagonal().maxCoeff(), 1e-300);

  Eigen::VectorXd trial_r;
  Eigen::MatrixXd trial_J;
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    if (chi2 == 0.0 || g.lpNorm<Eigen::Infinity>() <= 1e-300) break;
    Eigen::MatrixXd A = JtJ;
    for (Eigen::Index k = 0; k < n; ++k) {
      A(k, k) += lambda * std::max(JtJ(k, k), 1e-12 * JtJ.diagonal().maxCoeff() + 1e-300);
    }
    Eigen::VectorXd step = A.ldlt().solve(-g);
    Eigen::VectorXd candidate = p + step;
    if (options.project) options.project(candidate);
    step = candidate - p;
    fn(candidate, trial_r, trial_J);
    const double trial_chi2 = trial_r.squaredNorm();

    if (std::isfinite(trial_chi2) && trial_chi2 < chi2) {
      const double drop = chi2 - trial_chi2;
      p = candidate;
      r = trial_r;
      J = trial_J;
      JtJ = J.transpose() * J;
      g = J.transpose() * r;
      chi2 = trial_chi2;
      lambda = std::max(lambda / 3.0, 1e-15);
      const bool small_drop = drop <= options.chi2_tolerance * (chi2 + 1e-300);
      const bool small_step = step.norm() <= options.step_tolerance * (p.norm() + 1e-12);
      if (small_drop && small_step) break;
      if (chi2 <= 1e-28) break;
    } else {
      lambda *= 4.0;
      if (lambda > 1e30) {
        // no downhill direction left: a stationary point
        break;
      }
    }
  }
  if (it == options.max_iterations) {
    std::ostringstream msg;
    msg << "Levenberg-Marquardt did not converge in " << options.max_iterations
        << " iterations (chi2=" << chi2 << ", lambda=" << lambda << ", params=" << p.transpose()
        << ")";
    throw NumericalError(msg.str());
  }

  LevenbergMarquardtResult out;
  out.params = p;
  out.chi2 = chi2;
  out.iterations = it;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(JtJ);
  if (lu.isInvertible()) out.covariance = lu.inverse();
  return out;
}

}  // namespace dlcz
