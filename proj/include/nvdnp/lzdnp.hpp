// Chirped-microwave Landau-Zener polarization transfer between an NV electron
// and one 13C nucleus, plus the empirical enhancement-vs-repetition-rate model.
//
// Conventions:
//  * energies/frequencies in MHz (linear), rabi in MHz (linear); the on-resonance
//    gap of a bare two-level m_s=0 <-> m_s=+/-1 transition equals `rabi`.
//  * the microwave drive couples through the electron S_x of the NV frame.
//  * times at the API are in seconds; internally in microseconds so that
//    phase = 2 pi * (MHz) * (us).
#pragma once

#include "nvdnp/spinsys.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nvdnp::lzdnp {

using spinsys::CMatrix;
using spinsys::HermitianOperator;
using spinsys::RVector;

class ComputationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SweepProgram {
  double f_start = 0.0;            // MHz
  double f_end = 0.0;              // MHz
  double repetition_rate = 0.0;    // Hz, omega_r = 1 / t_r
  double rabi = 0.0;               // MHz
  std::size_t n_sweeps = 1;

  void validate() const;
  int direction() const { return f_end > f_start ? +1 : -1; }
  double band() const;             // |f_end - f_start|, MHz
  double sweep_time() const;       // t_r, s
  double sweep_rate() const;       // band * omega_r, MHz/s
  SweepProgram reversed() const;
};

/// Which electron transitions the microwave addresses.
enum class Subspace { MinusOne, PlusOne, Full };

/// Rotating-frame decomposition of a swept, driven Hamiltonian in its own
/// eigenbasis:  H_rot(f) = diag(E_k - f u_k) + (rabi/2) D  restricted to the
/// active levels.  Levels outside the active set evolve freely.
class ChirpModel {
 public:
  /// From a coupled 6x6 electron-nucleus Hamiltonian.  Throws
  /// ComputationError if the electron manifolds cannot be separated.
  static ChirpModel from_coupled(const HermitianOperator& h6, Subspace subspace);

  /// Bare two-level crossing: level 0 at energy 0, level 1 at `splitting`,
  /// unit normalized coupling.  Used for Landau-Zener checks.
  static ChirpModel two_level(double splitting);

  HermitianOperator generator(double mw_freq, double rabi) const;  // active block
  HermitianOperator full_generator(double mw_freq, double rabi) const;

  const CMatrix& basis() const { return basis_; }          // product <- eigen
  const RVector& energies() const { return energies_; }
  const std::vector<std::size_t>& active() const { return active_; }
  const std::vector<double>& upper() const { return upper_; }
  const CMatrix& drive() const { return drive_; }
  bool coupled() const { return coupled_; }

  /// Observables in the eigenbasis.
  const CMatrix& nuclear_polarization_op() const { return nuc_op_; }
  const CMatrix& ms0_population_op() const { return ms0_op_; }

  /// Unit vector of the m_s=0 manifold nuclear quantization axis (NV frame).
  const Eigen::Vector3d& nuclear_axis() const { return axis_; }

  /// Mean transition frequency of the addressed manifold(s), MHz.
  double addressed_center() const;

  /// Upper bound on the active-block eigenvalue spread over a sweep, MHz.
  double max_spread(const SweepProgram& p) const;

 private:
  CMatrix basis_;
  RVector energies_;
  std::vector<double> upper_;
  CMatrix drive_;
  std::vector<std::size_t> active_;
  CMatrix nuc_op_;
  CMatrix ms0_op_;
  Eigen::Vector3d axis_ = Eigen::Vector3d::UnitZ();
  bool coupled_ = false;
};

/// Rotating-frame generator on the addressed subspace (4x4 for a single
/// electron transition, 6x6 for Full).
HermitianOperator rotating_frame_generator(const HermitianOperator& h6, double mw_freq,
                                           double rabi, Subspace subspace = Subspace::MinusOne);

struct PolarizationTrace {
  std::vector<double> times;                 // s
  std::vector<double> nuclear_polarization;  // [-1, 1]
  std::vector<double> electron_population_ms0;

  void push(double t, double pol, double ms0);
  std::size_t size() const { return times.size(); }
};

struct ChirpResult {
  PolarizationTrace trace;
  CMatrix density;  // eigenbasis of the model
  double max_norm_drift = 0.0;
};

/// Initial density in the eigenbasis: electron m_s=0, nucleus with
/// polarization `nuclear_pol` along the m_s=0 axis (0 = unpolarized).
/// For two-level models, all population in level 0.
CMatrix initial_density(const ChirpModel& m, double nuclear_pol = 0.0);

/// Propagates one linear chirp f_start -> f_end lasting t_r with midpoint
/// piecewise-constant unitaries.  Requires max_spread * dt <= 0.05 (cycles).
/// Records every `record_stride` steps and at the end.
ChirpResult propagate_chirp(const ChirpModel& m, const SweepProgram& p, double dt_s,
                            const CMatrix& initial, std::size_t record_stride = 0,
                            double t_offset_s = 0.0);

/// Electron repolarization applied between sweeps:
/// rho -> (1 - p) rho + p |m_s=0><m_s=0| (x) Tr_e(rho), in the product basis.
struct Repolarization {
  double efficiency = 1.0;
};
CMatrix apply_repolarization(const ChirpModel& m, const CMatrix& rho_eig, const Repolarization& r);

/// Reduced nuclear density matrix (2x2, product basis).
CMatrix nuclear_reduced(const ChirpModel& m, const CMatrix& rho_eig);

struct RatchetResult {
  PolarizationTrace trace;  // initial point, then one point per sweep end (before reset)
  CMatrix density;          // after the final reset
  double max_norm_drift = 0.0;
};

/// n_cycles sweeps, each followed by a repolarization reset.
RatchetResult ratchet_cycle(const ChirpModel& m, const SweepProgram& p, const Repolarization& r,
                            std::size_t n_cycles, double dt_s, const CMatrix& initial,
                            double t_offset_s = 0.0);

/// Defaults of the simulated configuration: m_s=0 <-> -1, A_zz=+0.5 MHz,
/// A_zx=0.15 MHz, B=10 mT, theta=45 deg.
struct DnpScenario {
  spinsys::PhysicalConstants constants;
  spinsys::HyperfineTensor hyperfine = spinsys::HyperfineTensor::with_default_transverse(0.5);
  double field_mt = 10.0;
  spinsys::Orientation orientation{0.785398163397448309616, 0.0};
  Subspace subspace = Subspace::MinusOne;

  ChirpModel model() const;
};

// --- repetition-rate model ---------------------------------------------------

/// eps = A exp(-lambda^2 / w) (1 - exp(-omega^2 / w)); lambda, omega in Hz^1/2.
struct RateModelParams {
  double amplitude = 1.0;
  double lambda = 1.0;
  double omega = 1.0;
};

double rate_model_eval(const RateModelParams& p, double omega_r);

/// Maximizer in omega_r: w* = W / ln(1 + W / L), with L = lambda^2, W = omega^2.
double rate_model_optimum(const RateModelParams& p);

struct RateSample {
  double omega_r;
  double enhancement;
  double sigma;
};

struct RateFit {
  RateModelParams params;
  Eigen::Matrix3d covariance;  // (A, lambda, omega)
  double optimum_rate = 0.0;   // Hz
  std::pair<double, double> ci95;  // central 95% band of the resampled optimum
  std::pair<double, double> ci05;  // central 5% band
  double chi2 = 0.0;
  double gradient_norm = 0.0;
  int starts = 0;
  bool converged = false;
  std::string message;
};

struct RateFitOptions {
  std::size_t resamples = 2000;
  std::uint64_t seed = 1;
};

/// Weighted multi-start fit (16 log-spaced starts in lambda^2, omega^2).
RateFit rate_model_fit(const std::vector<RateSample>& samples, const RateFitOptions& opts = {});

/// Optimal repetition rates reported for m_s=+1, m_s=-1 and both manifolds.
struct ShippedRates {
  double plus = 147.0;
  double plus_uncertainty = 53.0;
  double minus = 133.0;
  std::optional<double> minus_uncertainty;  // not quoted
  double both = 73.0;
  double both_uncertainty = 29.0;
};
inline constexpr ShippedRates kShippedRates{};

}  // namespace nvdnp::lzdnp
