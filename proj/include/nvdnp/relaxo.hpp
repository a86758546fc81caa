// Field-dependent 13C relaxation: Lorentzian R1(B) profiles, knee field,
// mono-exponential decays and the accelerated eps(0) -> T1 mapping.
#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace nvdnp::relaxo {

struct R1Sample {
  double field;     // mT, > 0
  double r1;        // Hz, > 0
  double sigma_r1;  // Hz, > 0
};

/// R1(B) = (2A/pi) W / (4B^2 + W^2) + c.
struct LorentzianFit {
  double a_lor = 0.0;     // Hz mT
  double w_lor = 0.0;     // mT
  double c_offset = 0.0;  // Hz, >= 0; held at 0 (sigma_c = 0) if the free fit goes negative
  double sigma_a = 0.0, sigma_w = 0.0, sigma_c = 0.0;
  double chi2 = 0.0;
  double rms_residual = 0.0;  // Hz, unweighted
  bool insufficient_span = false;  // all fields on one side of W/2
  bool converged = false;
  std::string message;
};

struct RelaxationProfile {
  std::vector<R1Sample> samples;
  std::optional<LorentzianFit> fit;
};

double r1_model(double a_lor, double w_lor, double c_offset, double b_mt);

/// Weighted (1/sigma^2) least squares in rate space, multi-start in W.
/// Requires >= 4 samples.
RelaxationProfile fit_r1_profile(std::vector<R1Sample> samples);

/// Knee = W/2, where the Lorentzian term is half its zero-field value.
double knee_field(const RelaxationProfile& p);
double knee_field(const LorentzianFit& f);

struct MonoExpFit {
  double amplitude = 0.0;
  double t1 = 0.0;        // s
  double sigma_t1 = 0.0;  // s, from covariance scaled by residual variance
  int dof = 0;
  /// Half-width of the two-sided 95% interval on T1 (Student t, dof).
  double t1_halfwidth95() const;
};

struct DecayRecord {
  std::vector<double> times;    // s, ascending
  std::vector<double> signals;  // arbitrary units
  std::optional<MonoExpFit> fit;
};

/// Least-squares amplitude * exp(-t / T1).  Requires >= 3 points with
/// positive signals; non-decaying data (T1 <= 0) raises.
DecayRecord fit_monoexponential(DecayRecord d);

struct ValueWithError {
  double value;
  double sigma;
};

/// eps(0) = eps(60) e^{60/T1}, sigma = 60 eps(60) sigma_T1 e^{60/T1} / T1^2.
ValueWithError epsilon0_map(double eps60, double t1, double sigma_t1, double wait_s = 60.0);

/// Inverse-variance mean, sigma_mean = (sqrt(sum w))^-1.
ValueWithError weighted_mean_eps0(const std::vector<ValueWithError>& values);

/// T1 = 60 / ln(eps0 / eps60), sigma = 60 sigma_eps0 / eps0 / ln(eps0/eps60)^2.
ValueWithError map_eps60_to_t1(double eps60, double mean_eps0, double sigma_mean,
                               double wait_s = 60.0);

/// Fields above which eps(0) estimates enter the weighted mean.
inline constexpr double kHighFieldAnchorMt = 500.0;

/// eps^2 T1(high) / T1(pol).
double time_acceleration(double eps, double t1_high, double t1_pol);

}  // namespace nvdnp::relaxo
