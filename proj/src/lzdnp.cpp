#include "nvdnp/lzdnp.hpp"

#include "nvdnp/lsq.hpp"
#include "nvdnp/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace nvdnp::lzdnp {

using spinsys::Complex;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kUsPerSecond = 1e6;

using rng::standard_normal;

double percentile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

double expect(const CMatrix& rho, const CMatrix& op) { return (rho * op).trace().real(); }

}  // namespace

// --- SweepProgram ----------------------------------------------------------------

void SweepProgram::validate() const {
  if (f_start == f_end) throw std::invalid_argument("sweep band is empty (f_start == f_end)");
  if (!(repetition_rate > 0.0)) throw std::invalid_argument("repetition rate must be positive");
  if (rabi < 0.0) throw std::invalid_argument("rabi frequency must be non-negative");
}

double SweepProgram::band() const { return std::abs(f_end - f_start); }
double SweepProgram::sweep_time() const { return 1.0 / repetition_rate; }
double SweepProgram::sweep_rate() const { return band() * repetition_rate; }

SweepProgram SweepProgram::reversed() const {
  SweepProgram p = *this;
  std::swap(p.f_start, p.f_end);
  return p;
}

// --- ChirpModel ------------------------------------------------------------------

ChirpModel ChirpModel::from_coupled(const HermitianOperator& h6, Subspace subspace) {
  if (h6.dim() != 6) throw std::invalid_argument("coupled Hamiltonian must be 6x6");
  const auto es = spinsys::eig_hermitian(h6);
  const auto labels = spinsys::assign_manifolds(es);

  std::array<std::vector<std::size_t>, 3> members;  // index by 1 - ms
  for (std::size_t k = 0; k < 6; ++k) {
    if (labels.purity[k] <= 0.5)
      throw ComputationError("electron manifolds are not separable at this field/orientation");
    members[static_cast<std::size_t>(1 - labels.ms[k])].push_back(k);
  }
  for (const auto& m : members)
    if (m.size() != 2)
      throw ComputationError("electron manifolds are not separable at this field/orientation");
  // Spectator overlap check: manifolds must occupy disjoint energy intervals.
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b) {
      const double lo_a = es.energies(members[a][0]), hi_a = es.energies(members[a][1]);
      const double lo_b = es.energies(members[b][0]), hi_b = es.energies(members[b][1]);
      if (std::max(lo_a, lo_b) <= std::min(hi_a, hi_b))
        throw ComputationError("electron manifolds overlap in energy; subspace not separable");
    }

  ChirpModel m;
  m.coupled_ = true;
  m.basis_ = es.vectors;
  m.energies_ = es.energies;
  m.upper_.assign(6, 0.0);

  std::vector<std::size_t> addressed;
  if (subspace == Subspace::MinusOne || subspace == Subspace::Full)
    addressed.insert(addressed.end(), members[2].begin(), members[2].end());
  if (subspace == Subspace::PlusOne || subspace == Subspace::Full)
    addressed.insert(addressed.end(), members[0].begin(), members[0].end());
  for (auto k : addressed) m.upper_[k] = 1.0;

  const auto& s = spinsys::spin1_ops();
  const CMatrix sx_eig =
      std::sqrt(2.0) * (es.vectors.adjoint() * spinsys::kron(s[0], CMatrix::Identity(2, 2)) *
                        es.vectors);
  m.drive_ = CMatrix::Zero(6, 6);
  for (auto k : members[1])
    for (auto l : addressed) {
      m.drive_(k, l) = sx_eig(k, l);
      m.drive_(l, k) = sx_eig(l, k);
    }

  m.active_ = members[1];
  m.active_.insert(m.active_.end(), addressed.begin(), addressed.end());
  std::sort(m.active_.begin(), m.active_.end());

  // Nuclear axis of the lower m_s=0 eigenstate.
  const auto v = es.vectors.col(static_cast<Eigen::Index>(members[1][0]));
  CMatrix rho_n = CMatrix::Zero(2, 2);
  for (int e = 0; e < 3; ++e)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) rho_n(a, b) += v(2 * e + a) * std::conj(v(2 * e + b));
  const auto& i = spinsys::spin_half_ops();
  Eigen::Vector3d bloch;
  for (int a = 0; a < 3; ++a) bloch(a) = 2.0 * (rho_n * i[a]).trace().real();
  m.axis_ = bloch.normalized();

  CMatrix i_axis = CMatrix::Zero(2, 2);
  for (int a = 0; a < 3; ++a) i_axis += 2.0 * m.axis_(a) * i[a];
  const CMatrix nuc_prod = spinsys::kron(CMatrix::Identity(3, 3), i_axis);
  CMatrix p0 = CMatrix::Zero(3, 3);
  p0(1, 1) = 1.0;
  const CMatrix ms0_prod = spinsys::kron(p0, CMatrix::Identity(2, 2));
  m.nuc_op_ = es.vectors.adjoint() * nuc_prod * es.vectors;
  m.ms0_op_ = es.vectors.adjoint() * ms0_prod * es.vectors;
  return m;
}

ChirpModel ChirpModel::two_level(double splitting) {
  ChirpModel m;
  m.basis_ = CMatrix::Identity(2, 2);
  m.energies_ = RVector(2);
  m.energies_ << 0.0, splitting;
  m.upper_ = {0.0, 1.0};
  m.drive_ = CMatrix::Zero(2, 2);
  m.drive_(0, 1) = m.drive_(1, 0) = 1.0;
  m.active_ = {0, 1};
  m.nuc_op_ = CMatrix::Zero(2, 2);
  m.ms0_op_ = CMatrix::Zero(2, 2);
  m.ms0_op_(0, 0) = 1.0;
  return m;
}

HermitianOperator ChirpModel::full_generator(double mw_freq, double rabi) const {
  const auto n = energies_.size();
  CMatrix h = 0.5 * rabi * drive_;
  for (Eigen::Index k = 0; k < n; ++k)
    h(k, k) += energies_(k) - mw_freq * upper_[static_cast<std::size_t>(k)];
  return HermitianOperator(std::move(h));
}

HermitianOperator ChirpModel::generator(double mw_freq, double rabi) const {
  const CMatrix full = full_generator(mw_freq, rabi).matrix();
  const auto n = static_cast<Eigen::Index>(active_.size());
  CMatrix h(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b)
      h(a, b) = full(static_cast<Eigen::Index>(active_[a]), static_cast<Eigen::Index>(active_[b]));
  return HermitianOperator(std::move(h));
}

double ChirpModel::addressed_center() const {
  double sum = 0.0;
  int count = 0;
  for (auto k : active_)
    for (auto l : active_)
      if (upper_[k] == 0.0 && upper_[l] == 1.0) {
        sum += energies_(static_cast<Eigen::Index>(l)) - energies_(static_cast<Eigen::Index>(k));
        ++count;
      }
  return count ? sum / count : 0.0;
}

double ChirpModel::max_spread(const SweepProgram& p) const {
  double spread = 0.0;
  for (double f : {p.f_start, p.f_end}) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (auto k : active_) {
      const double d = energies_(static_cast<Eigen::Index>(k)) - f * upper_[k];
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    spread = std::max(spread, hi - lo);
  }
  double row = 0.0;
  for (Eigen::Index r = 0; r < drive_.rows(); ++r) row = std::max(row, drive_.row(r).cwiseAbs().sum());
  return spread + p.rabi * row;
}

HermitianOperator rotating_frame_generator(const HermitianOperator& h6, double mw_freq, double rabi,
                                           Subspace subspace) {
  return ChirpModel::from_coupled(h6, subspace).generator(mw_freq, rabi);
}

// --- propagation --------------------------------------------------------------

void PolarizationTrace::push(double t, double pol, double ms0) {
  times.push_back(t);
  nuclear_polarization.push_back(pol);
  electron_population_ms0.push_back(ms0);
}

CMatrix initial_density(const ChirpModel& m, double nuclear_pol) {
  if (!m.coupled()) {
    CMatrix rho = CMatrix::Zero(m.energies().size(), m.energies().size());
    rho(0, 0) = 1.0;
    return rho;
  }
  if (std::abs(nuclear_pol) > 1.0) throw std::invalid_argument("nuclear polarization outside [-1, 1]");
  const auto& i = spinsys::spin_half_ops();
  CMatrix rho_n = 0.5 * CMatrix::Identity(2, 2);
  for (int a = 0; a < 3; ++a) rho_n += nuclear_pol * m.nuclear_axis()(a) * i[a];
  CMatrix p0 = CMatrix::Zero(3, 3);
  p0(1, 1) = 1.0;
  const CMatrix prod = spinsys::kron(p0, rho_n);
  return m.basis().adjoint() * prod * m.basis();
}

ChirpResult propagate_chirp(const ChirpModel& m, const SweepProgram& p, double dt_s,
                            const CMatrix& initial, std::size_t record_stride, double t_offset_s) {
  p.validate();
  if (!(dt_s > 0.0)) throw std::invalid_argument("time step must be positive");
  const double t_r_us = p.sweep_time() * kUsPerSecond;
  const double dt_req_us = dt_s * kUsPerSecond;
  if (m.max_spread(p) * dt_req_us > 0.05)
    throw std::invalid_argument("time step too large: max instantaneous gap * dt exceeds 0.05");

  const auto n_steps = static_cast<std::size_t>(std::ceil(t_r_us / dt_req_us - 1e-9));
  const double dt_us = t_r_us / static_cast<double>(n_steps);
  const auto n = m.energies().size();
  const auto& active = m.active();
  const auto na = static_cast<Eigen::Index>(active.size());

  std::vector<bool> is_active(static_cast<std::size_t>(n), false);
  for (auto k : active) is_active[k] = true;

  ChirpResult out;
  CMatrix rho = initial;
  const double trace0 = rho.trace().real();
  auto record = [&](double t_s) {
    out.trace.push(t_s, expect(rho, m.nuclear_polarization_op()), expect(rho, m.ms0_population_op()));
    out.max_norm_drift = std::max(out.max_norm_drift, std::abs(rho.trace().real() - trace0));
  };
  record(t_offset_s);

  CMatrix u = CMatrix::Zero(n, n);
  CMatrix h(na, na);
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(na);
  for (std::size_t s = 0; s < n_steps; ++s) {
    const double frac = (static_cast<double>(s) + 0.5) / static_cast<double>(n_steps);
    const double f = p.f_start + (p.f_end - p.f_start) * frac;

    for (Eigen::Index a = 0; a < na; ++a)
      for (Eigen::Index b = 0; b < na; ++b) {
        const auto ka = static_cast<Eigen::Index>(active[a]);
        const auto kb = static_cast<Eigen::Index>(active[b]);
        h(a, b) = 0.5 * p.rabi * m.drive()(ka, kb);
        if (a == b) h(a, b) += m.energies()(ka) - f * m.upper()[active[a]];
      }
    solver.compute(h);
    const RVector& lam = solver.eigenvalues();
    const CMatrix& vec = solver.eigenvectors();
    Eigen::VectorXcd phase(na);
    for (Eigen::Index a = 0; a < na; ++a) phase(a) = std::polar(1.0, -kTwoPi * lam(a) * dt_us);
    const CMatrix ua = vec * phase.asDiagonal() * vec.adjoint();

    u.setZero();
    for (Eigen::Index a = 0; a < na; ++a)
      for (Eigen::Index b = 0; b < na; ++b)
        u(static_cast<Eigen::Index>(active[a]), static_cast<Eigen::Index>(active[b])) = ua(a, b);
    for (Eigen::Index k = 0; k < n; ++k)
      if (!is_active[static_cast<std::size_t>(k)])
        u(k, k) = std::polar(1.0, -kTwoPi * (m.energies()(k) - f * m.upper()[static_cast<std::size_t>(k)]) * dt_us);

    rho = u * rho * u.adjoint();
    if (record_stride && (s + 1) % record_stride == 0 && s + 1 != n_steps)
      record(t_offset_s + static_cast<double>(s + 1) * dt_us / kUsPerSecond);
  }
  record(t_offset_s + t_r_us / kUsPerSecond);
  out.density = rho;
  return out;
}

CMatrix nuclear_reduced(const ChirpModel& m, const CMatrix& rho_eig) {
  if (!m.coupled()) throw std::invalid_argument("nuclear state requires a coupled model");
  const CMatrix prod = m.basis() * rho_eig * m.basis().adjoint();
  CMatrix rho_n = CMatrix::Zero(2, 2);
  for (int e = 0; e < 3; ++e) rho_n += prod.block(2 * e, 2 * e, 2, 2);
  return rho_n;
}

CMatrix apply_repolarization(const ChirpModel& m, const CMatrix& rho_eig, const Repolarization& r) {
  if (!m.coupled()) throw std::invalid_argument("repolarization requires a coupled model");
  if (r.efficiency < 0.0 || r.efficiency > 1.0)
    throw std::invalid_argument("repolarization efficiency must lie in [0, 1]");
  const CMatrix prod = m.basis() * rho_eig * m.basis().adjoint();
  CMatrix rho_n = CMatrix::Zero(2, 2);
  for (int e = 0; e < 3; ++e) rho_n += prod.block(2 * e, 2 * e, 2, 2);
  CMatrix p0 = CMatrix::Zero(3, 3);
  p0(1, 1) = 1.0;
  const CMatrix reset = (1.0 - r.efficiency) * prod + r.efficiency * spinsys::kron(p0, rho_n);
  return m.basis().adjoint() * reset * m.basis();
}

RatchetResult ratchet_cycle(const ChirpModel& m, const SweepProgram& p, const Repolarization& r,
                            std::size_t n_cycles, double dt_s, const CMatrix& initial,
                            double t_offset_s) {
  RatchetResult out;
  CMatrix rho = initial;
  out.trace.push(t_offset_s, expect(rho, m.nuclear_polarization_op()),
                 expect(rho, m.ms0_population_op()));
  for (std::size_t c = 0; c < n_cycles; ++c) {
    const double t0 = t_offset_s + static_cast<double>(c) * p.sweep_time();
    auto res = propagate_chirp(m, p, dt_s, rho, 0, t0);
    out.trace.push(res.trace.times.back(), res.trace.nuclear_polarization.back(),
                   res.trace.electron_population_ms0.back());
    out.max_norm_drift = std::max(out.max_norm_drift, res.max_norm_drift);
    rho = apply_repolarization(m, res.density, r);
  }
  out.density = rho;
  return out;
}

ChirpModel DnpScenario::model() const {
  return ChirpModel::from_coupled(
      spinsys::build_coupled_hamiltonian(constants, spinsys::field_vector(field_mt, orientation),
                                         hyperfine),
      subspace);
}

// --- rate model --------------------------------------------------------------------

double rate_model_eval(const RateModelParams& p, double omega_r) {
  if (!(omega_r > 0.0)) throw std::invalid_argument("repetition rate must be positive");
  const double l = p.lambda * p.lambda, w = p.omega * p.omega;
  return p.amplitude * std::exp(-l / omega_r) * -std::expm1(-w / omega_r);
}

double rate_model_optimum(const RateModelParams& p) {
  const double l = p.lambda * p.lambda, w = p.omega * p.omega;
  if (!(l > 0.0) || !(w > 0.0)) throw std::invalid_argument("rate model needs lambda, omega != 0");
  return w / std::log1p(w / l);
}

RateFit rate_model_fit(const std::vector<RateSample>& samples, const RateFitOptions& opts) {
  if (samples.size() < 5) throw std::invalid_argument("rate model fit needs at least 5 samples");
  double wmin = std::numeric_limits<double>::infinity(), wmax = 0.0;
  for (const auto& s : samples) {
    if (!(s.omega_r > 0.0) || !(s.sigma > 0.0))
      throw std::invalid_argument("samples need positive repetition rate and sigma");
    wmin = std::min(wmin, s.omega_r);
    wmax = std::max(wmax, s.omega_r);
  }
  if (wmax <= wmin * (1.0 + 1e-12)) throw std::invalid_argument("degenerate design: all repetition rates equal");

  const auto ns = samples.size();
  auto residual = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    const double a = p(0), lam = p(1), om = p(2);
    for (std::size_t i = 0; i < ns; ++i) {
      const auto& s = samples[i];
      const double e1 = std::exp(-lam * lam / s.omega_r);
      const double e2 = std::exp(-om * om / s.omega_r);
      const double g = -std::expm1(-om * om / s.omega_r);
      const auto ii = static_cast<Eigen::Index>(i);
      r(ii) = (a * e1 * g - s.enhancement) / s.sigma;
      if (jac) {
        (*jac)(ii, 0) = e1 * g / s.sigma;
        (*jac)(ii, 1) = -a * g * e1 * 2.0 * lam / s.omega_r / s.sigma;
        (*jac)(ii, 2) = a * e1 * e2 * 2.0 * om / s.omega_r / s.sigma;
      }
    }
  };

  RateFit best;
  best.chi2 = std::numeric_limits<double>::infinity();
  lsq::Result best_lsq;
  constexpr int kGrid = 4;
  const double lo = wmin / 3.0, hi = wmax * 3.0;
  for (int il = 0; il < kGrid; ++il)
    for (int iw = 0; iw < kGrid; ++iw) {
      const double l0 = lo * std::pow(hi / lo, il / double(kGrid - 1));
      const double w0 = lo * std::pow(hi / lo, iw / double(kGrid - 1));
      double num = 0.0, den = 0.0;
      for (const auto& s : samples) {
        const double f = std::exp(-l0 / s.omega_r) * -std::expm1(-w0 / s.omega_r);
        num += s.enhancement * f / (s.sigma * s.sigma);
        den += f * f / (s.sigma * s.sigma);
      }
      if (!(den > 0.0)) continue;
      Eigen::VectorXd p0(3);
      p0 << num / den, std::sqrt(l0), std::sqrt(w0);
      auto res = lsq::levenberg_marquardt(residual, p0, ns);
      ++best.starts;
      const bool better = (res.converged && !best.converged) ||
                          (res.converged == best.converged && res.cost < best.chi2);
      if (better) {
        best.chi2 = res.cost;
        best.converged = res.converged;
        best_lsq = res;
      }
    }
  if (best_lsq.params.size() != 3) throw ComputationError("rate model fit: no usable start");

  Eigen::Vector3d p = best_lsq.params;
  Eigen::Matrix3d cov = best_lsq.covariance;
  for (int k = 1; k < 3; ++k)
    if (p(k) < 0.0) {
      p(k) = -p(k);
      cov.row(k) *= -1.0;
      cov.col(k) *= -1.0;
    }
  best.params = {p(0), p(1), p(2)};
  best.covariance = cov;
  best.gradient_norm = best_lsq.gradient_norm;
  best.message = best_lsq.message;
  if (!best.converged)
    best.message = "not converged after " + std::to_string(best_lsq.iterations) +
                   " iterations: " + best_lsq.message;
  best.optimum_rate = rate_model_optimum(best.params);

  // Confidence band of the optimum by resampling parameters from N(p, cov).
  std::vector<double> optima;
  if (cov.allFinite()) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
    const Eigen::Vector3d sd = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Eigen::Matrix3d root = es.eigenvectors() * sd.asDiagonal();
    std::mt19937_64 rng(opts.seed);
    optima.reserve(opts.resamples);
    for (std::size_t k = 0; k < opts.resamples; ++k) {
      Eigen::Vector3d z;
      for (int a = 0; a < 3; ++a) z(a) = standard_normal(rng);
      const Eigen::Vector3d q = p + root * z;
      if (q(1) == 0.0 || q(2) == 0.0) continue;
      optima.push_back(rate_model_optimum({q(0), q(1), q(2)}));
    }
    std::sort(optima.begin(), optima.end());
  }
  best.ci95 = {percentile(optima, 0.025), percentile(optima, 0.975)};
  best.ci05 = {percentile(optima, 0.475), percentile(optima, 0.525)};
  return best;
}

}  // namespace nvdnp::lzdnp
