#include "nvdnp/relaxo.hpp"

#include "nvdnp/lsq.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace nvdnp::relaxo {

double r1_model(double a_lor, double w_lor, double c_offset, double b_mt) {
  return 2.0 * a_lor / std::numbers::pi * w_lor / (4.0 * b_mt * b_mt + w_lor * w_lor) + c_offset;
}

RelaxationProfile fit_r1_profile(std::vector<R1Sample> samples) {
  if (samples.size() < 4) throw std::invalid_argument("R1 profile fit needs at least 4 samples");
  for (const auto& s : samples)
    if (!(s.field > 0.0) || !(s.r1 > 0.0) || !(s.sigma_r1 > 0.0))
      throw std::invalid_argument("R1 samples need positive field, rate and sigma");
  std::sort(samples.begin(), samples.end(),
            [](const R1Sample& a, const R1Sample& b) { return a.field < b.field; });

  const auto n = samples.size();
  auto residual = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    const double a = p(0), w = p(1), c = p(2);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& s = samples[i];
      const double den = 4.0 * s.field * s.field + w * w;
      const auto ii = static_cast<Eigen::Index>(i);
      r(ii) = (r1_model(a, w, c, s.field) - s.r1) / s.sigma_r1;
      if (jac) {
        (*jac)(ii, 0) = 2.0 / std::numbers::pi * w / den / s.sigma_r1;
        (*jac)(ii, 1) = 2.0 * a / std::numbers::pi * (den - 2.0 * w * w) / (den * den) / s.sigma_r1;
        (*jac)(ii, 2) = 1.0 / s.sigma_r1;
      }
    }
  };

  // Starts: W log-spaced across the sampled fields; A and c by linear
  // weighted least squares at fixed W.
  const double bmin = samples.front().field, bmax = samples.back().field;
  lsq::Result best;
  best.cost = std::numeric_limits<double>::infinity();
  constexpr int kStarts = 12;
  for (int k = 0; k < kStarts; ++k) {
    const double w0 = 2.0 * bmin * std::pow(bmax / bmin, k / double(kStarts - 1));
    Eigen::MatrixXd x(n, 2);
    Eigen::VectorXd y(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& s = samples[i];
      const auto ii = static_cast<Eigen::Index>(i);
      x(ii, 0) = r1_model(1.0, w0, 0.0, s.field) / s.sigma_r1;
      x(ii, 1) = 1.0 / s.sigma_r1;
      y(ii) = s.r1 / s.sigma_r1;
    }
    const Eigen::Vector2d ac = x.colPivHouseholderQr().solve(y);
    Eigen::VectorXd p0(3);
    p0 << ac(0), w0, std::max(ac(1), 0.0);
    auto res = lsq::levenberg_marquardt(residual, p0, n);
    if ((res.converged && !best.converged) || (res.converged == best.converged && res.cost < best.cost))
      best = res;
  }

  // The offset is a rate and may not go negative.  When the free optimum
  // has c < 0 the constrained optimum lies on c = 0: refit (A, W) there.
  bool c_at_bound = false;
  if (best.params(2) < 0.0) {
    auto residual_c0 = [&](const Eigen::VectorXd& q, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
      Eigen::VectorXd full(3);
      full << q(0), q(1), 0.0;
      Eigen::MatrixXd j3(n, 3);
      residual(full, r, jac ? &j3 : nullptr);
      if (jac) *jac = j3.leftCols(2);
    };
    Eigen::VectorXd q0(2);
    q0 << best.params(0), best.params(1);
    const auto res = lsq::levenberg_marquardt(residual_c0, q0, n);
    best.params = Eigen::Vector3d(res.params(0), res.params(1), 0.0);
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(3, 3);
    cov.topLeftCorner(2, 2) = res.covariance;
    best.covariance = cov;
    best.cost = res.cost;
    best.converged = res.converged;
    best.message = res.message;
    c_at_bound = true;
  }

  // The model is even under (A, W) -> (-A, -W); report W > 0.
  if (best.params(1) < 0.0) {
    best.params(0) = -best.params(0);
    best.params(1) = -best.params(1);
  }

  LorentzianFit fit;
  fit.a_lor = best.params(0);
  fit.w_lor = best.params(1);
  fit.c_offset = best.params(2);
  fit.sigma_a = std::sqrt(best.covariance(0, 0));
  fit.sigma_w = std::sqrt(best.covariance(1, 1));
  fit.sigma_c = std::sqrt(best.covariance(2, 2));
  fit.chi2 = best.cost;
  fit.converged = best.converged;
  fit.message = best.message;
  double ss = 0.0;
  for (const auto& s : samples) {
    const double d = r1_model(fit.a_lor, fit.w_lor, fit.c_offset, s.field) - s.r1;
    ss += d * d;
  }
  fit.rms_residual = std::sqrt(ss / static_cast<double>(n));
  const double knee = 0.5 * fit.w_lor;
  fit.insufficient_span = bmin >= knee || bmax <= knee;
  if (fit.insufficient_span) fit.message += "; all fields on one side of the knee";
  if (c_at_bound) fit.message += "; offset held at 0";

  RelaxationProfile out;
  out.samples = std::move(samples);
  out.fit = fit;
  return out;
}

double knee_field(const LorentzianFit& f) { return 0.5 * f.w_lor; }

double knee_field(const RelaxationProfile& p) {
  if (!p.fit) throw std::invalid_argument("knee field requires a fitted profile");
  return knee_field(*p.fit);
}

double MonoExpFit::t1_halfwidth95() const {
  if (dof <= 0) return std::numeric_limits<double>::infinity();
  boost::math::students_t dist(dof);
  return boost::math::quantile(boost::math::complement(dist, 0.025)) * sigma_t1;
}

DecayRecord fit_monoexponential(DecayRecord d) {
  const auto n = d.times.size();
  if (n < 3 || d.signals.size() != n)
    throw std::invalid_argument("mono-exponential fit needs >= 3 (time, signal) points");
  if (!std::is_sorted(d.times.begin(), d.times.end()))
    throw std::invalid_argument("decay times must be ascending");
  for (double s : d.signals)
    if (!(s > 0.0)) throw std::invalid_argument("decay signals must be positive");

  // Log-linear start.
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double y = std::log(d.signals[i]);
    st += d.times[i];
    sy += y;
    stt += d.times[i] * d.times[i];
    sty += d.times[i] * y;
  }
  const double nn = static_cast<double>(n);
  const double slope = (nn * sty - st * sy) / (nn * stt - st * st);
  if (!(slope < 0.0)) throw std::domain_error("data do not decay (fitted T1 <= 0)");
  const double intercept = (sy - slope * st) / nn;

  auto residual = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    for (std::size_t i = 0; i < n; ++i) {
      const double e = std::exp(-d.times[i] / p(1));
      const auto ii = static_cast<Eigen::Index>(i);
      r(ii) = p(0) * e - d.signals[i];
      if (jac) {
        (*jac)(ii, 0) = e;
        (*jac)(ii, 1) = p(0) * e * d.times[i] / (p(1) * p(1));
      }
    }
  };
  Eigen::VectorXd p0(2);
  p0 << std::exp(intercept), -1.0 / slope;
  const auto res = lsq::levenberg_marquardt(residual, p0, n);
  if (!(res.params(1) > 0.0)) throw std::domain_error("data do not decay (fitted T1 <= 0)");

  MonoExpFit fit;
  fit.amplitude = res.params(0);
  fit.t1 = res.params(1);
  fit.dof = static_cast<int>(n) - 2;
  const double s2 = fit.dof > 0 ? res.cost / fit.dof : 0.0;
  fit.sigma_t1 = std::sqrt(std::max(res.covariance(1, 1) * s2, 0.0));
  d.fit = fit;
  return d;
}

ValueWithError epsilon0_map(double eps60, double t1, double sigma_t1, double wait_s) {
  if (!(t1 > 0.0)) throw std::invalid_argument("T1 must be positive");
  const double g = std::exp(wait_s / t1);
  return {eps60 * g, wait_s * eps60 * sigma_t1 * g / (t1 * t1)};
}

ValueWithError weighted_mean_eps0(const std::vector<ValueWithError>& values) {
  if (values.empty()) throw std::invalid_argument("weighted mean of an empty set");
  double sw = 0.0, swx = 0.0;
  for (const auto& v : values) {
    if (!(v.sigma > 0.0)) throw std::invalid_argument("weighted mean needs sigma > 0 for every entry");
    const double w = 1.0 / (v.sigma * v.sigma);
    sw += w;
    swx += w * v.value;
  }
  return {swx / sw, 1.0 / std::sqrt(sw)};
}

ValueWithError map_eps60_to_t1(double eps60, double mean_eps0, double sigma_mean, double wait_s) {
  if (!(eps60 > 0.0)) throw std::invalid_argument("eps(60) must be positive");
  if (!(mean_eps0 > eps60))
    throw std::domain_error("eps(60) must be smaller than the mean eps(0); T1 would be negative or infinite");
  const double lg = std::log(mean_eps0 / eps60);
  return {wait_s / lg, wait_s * sigma_mean / mean_eps0 / (lg * lg)};
}

double time_acceleration(double eps, double t1_high, double t1_pol) {
  if (!(eps > 0.0) || !(t1_high > 0.0) || !(t1_pol > 0.0))
    throw std::invalid_argument("time acceleration needs positive inputs");
  return eps * eps * t1_high / t1_pol;
}

}  // namespace nvdnp::relaxo
