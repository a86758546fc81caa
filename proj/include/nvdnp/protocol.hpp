// Background suppression by polarization sign reversal.
//
// A sweep in one direction polarizes the diamond 13C positively, the reversed
// sweep negatively, while signals from outside the diamond do not care about
// the sweep direction.  Half-difference and half-sum of the paired spectra
// separate the two.
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace nvdnp::protocol {

struct NmrSpectrum {
  std::vector<double> grid;    // ascending offsets (ppm or Hz)
  std::vector<double> values;  // signed amplitudes
  std::string label;           // "up", "down", "diamond", ...

  void validate() const;
};

struct Peak {
  double center = 0.0;
  double fwhm = 1.0;       // > 0
  double amplitude = 1.0;  // height at the center
};

/// Sum of Lorentzian lines sampled on `grid`.
NmrSpectrum synth_spectrum(const std::vector<Peak>& peaks, const std::vector<double>& grid,
                           std::string label = {});

/// Trapezoid integral of the values over [lo, hi] (grid points inside only).
double band_integral(const NmrSpectrum& s, std::pair<double, double> band);

/// F = 1 - |a_up + a_down| / (|a_up| + |a_down|) on band-integrated amplitudes.
double inversion_fidelity(const NmrSpectrum& up, const NmrSpectrum& down,
                          std::pair<double, double> diamond_band);

struct Decomposition {
  NmrSpectrum diamond;     // (up - down) / 2
  NmrSpectrum background;  // (up + down) / 2
};

Decomposition background_suppress(const NmrSpectrum& up, const NmrSpectrum& down);

struct SuppressionFactor {
  double value = 0.0;
  bool infinite = false;  // residual was exactly zero
};

/// raw / residual; both peak magnitudes.  raw must be > 0, residual >= 0.
SuppressionFactor suppression_factor(double raw_background_peak, double residual_background_peak);

double peak_magnitude(const std::vector<double>& v);

struct SuppressionReport {
  double fidelity = 0.0;
  SuppressionFactor suppression;
  double background_ratio = 0.0;  // 0 when not computed
};

struct RatioInputs {
  double m_f = 0.5;          // g of compound
  double edge_cm = 87e-4;    // truncated-octahedron edge length
  double n_crystals = 50;
  double molar_f = 299.29;   // g/mol
  double molar_d = 12.01;    // g/mol
  double rho_d = 3.52;       // g/cm^3
  double abundance_pct = 1.1;
};

/// 13C outside / inside the diamond:
///   (m_F M_D) / (8 sqrt2 a^3 rho n M_F) * (100 / abundance).
double background_ratio(const RatioInputs& in);

/// Synthetic paired acquisition.  The diamond line flips with the sweep
/// direction up to fidelity F (down diamond = -F/(2-F) d, so the fidelity
/// metric on the pure line returns F); the background is repeated with a
/// relative gain error of (1 - F).  Optional Gaussian noise per point.
struct FixtureSpec {
  Peak diamond{0.0, 2.0, 1.0};
  Peak background{0.0, 6.0, 112.0};
  double fidelity = 0.98;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  double grid_min = -50.0, grid_max = 50.0, grid_step = 0.05;
};

struct Fixture {
  NmrSpectrum up, down;
  std::vector<double> diamond_truth;     // diamond content of the diamond channel
  std::vector<double> background_truth;  // b
  std::pair<double, double> diamond_band;
};

Fixture make_fixture(const FixtureSpec& spec);

/// Residual background left in the diamond channel, i.e. the diamond channel
/// minus its true diamond content.
std::vector<double> diamond_channel_residual(const Fixture& f, const Decomposition& d);

}  // namespace nvdnp::protocol
