// Damped Gauss-Newton (Levenberg-Marquardt) for small weighted problems.
#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>

namespace nvdnp::lsq {

/// Fills weighted residuals r (already divided by sigma) and, when J is
/// non-null, the Jacobian dr/dp.
using ResidualFn =
    std::function<void(const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd* jac)>;

struct Options {
  int max_iterations = 500;
  double initial_lambda = 1e-3;
  double gradient_tol = 1e-8;  // success: |J^T r| < gradient_tol * cost
  double step_tol = 1e-15;
};

struct Result {
  Eigen::VectorXd params;
  Eigen::MatrixXd covariance;  // (J^T J)^-1 at the solution
  double cost = 0.0;           // sum of squared weighted residuals
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string message;
};

Result levenberg_marquardt(const ResidualFn& f, Eigen::VectorXd p0, std::size_t n_residuals,
                           const Options& opts = {});

}  // namespace nvdnp::lsq
