#include "nvdnp/lsq.hpp"

#include <cmath>
#include <limits>

namespace nvdnp::lsq {

namespace {

bool finite(const Eigen::VectorXd& v) { return v.allFinite(); }

}  // namespace

Result levenberg_marquardt(const ResidualFn& f, Eigen::VectorXd p0, std::size_t n_residuals,
                           const Options& opts) {
  const auto np = p0.size();
  const auto nr = static_cast<Eigen::Index>(n_residuals);
  Eigen::VectorXd r(nr), r_try(nr);
  Eigen::MatrixXd jac(nr, np);

  Result out;
  Eigen::VectorXd p = std::move(p0);
  f(p, r, &jac);
  if (!finite(r)) {
    out.params = p;
    out.cost = std::numeric_limits<double>::infinity();
    out.message = "non-finite residuals at start";
    return out;
  }
  double cost = r.squaredNorm();
  double lambda = opts.initial_lambda;

  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd grad = jac.transpose() * r;
    if (grad.norm() <= opts.gradient_tol * cost || cost == 0.0) {
      out.converged = true;
      out.message = "gradient criterion met";
      break;
    }

    bool accepted = false;
    bool tiny_step = false;
    while (lambda < 1e16) {
      Eigen::MatrixXd a = jtj;
      for (Eigen::Index i = 0; i < np; ++i) a(i, i) += lambda * std::max(jtj(i, i), 1e-300);
      const Eigen::VectorXd step = a.ldlt().solve(-grad);
      const Eigen::VectorXd p_try = p + step;
      f(p_try, r_try, nullptr);
      const double cost_try = finite(r_try) ? r_try.squaredNorm() : std::numeric_limits<double>::infinity();
      if (cost_try < cost) {
        tiny_step = step.norm() <= opts.step_tol * (p.norm() + opts.step_tol);
        p = p_try;
        cost = cost_try;
        lambda = std::max(lambda * 0.3, 1e-12);
        accepted = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted) {
      // No descent direction left at working precision.
      out.converged = true;
      out.message = "stationary at machine precision";
      break;
    }
    f(p, r, &jac);
    if (tiny_step) {
      out.converged = true;
      out.message = "step below tolerance";
      break;
    }
  }
  if (it == opts.max_iterations) out.message = "iteration limit reached";

  f(p, r, &jac);
  out.params = p;
  out.cost = r.squaredNorm();
  out.gradient_norm = (jac.transpose() * r).norm();
  out.iterations = it;
  const Eigen::MatrixXd jtj = jac.transpose() * jac;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(jtj);
  out.covariance = lu.isInvertible()
                       ? Eigen::MatrixXd(lu.inverse())
                       : Eigen::MatrixXd::Constant(np, np, std::numeric_limits<double>::quiet_NaN());
  return out;
}

}  // namespace nvdnp::lsq
