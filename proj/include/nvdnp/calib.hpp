// Bench calibration arithmetic: Rabi frequency from MW power, Hall-probe
// vector field, Helmholtz coil constant and sweep-band planning.
#pragma once

#include "nvdnp/spinsys.hpp"

#include <string>
#include <utility>
#include <vector>

namespace nvdnp::calib {

struct RabiEstimate {
  double b_field_mt = 0.0;
  double rabi_khz = 0.0;  // Omega_e / 2pi
};

/// Energy per cycle P/nu stored as B^2/(2 mu0) in a sphere of radius R.
/// The Rabi frequency is gamma_e * B / (4 pi): half the linearly polarized
/// amplitude co-rotates, and the result is quoted as a cyclic frequency.
RabiEstimate rabi_from_power(double power_w, double freq_ghz, double radius_mm,
                             double gamma_e = spinsys::PhysicalConstants{}.gamma_e);

struct VectorField {
  double bx = 0.0, by = 0.0, bz = 0.0;  // mT
  double magnitude() const;
};

inline constexpr double kHallSensitivityMvPerMt = 65.0;
inline constexpr double kHallMagnitudeCorrectionMt = 2.04;

struct HallEstimate {
  VectorField field;               // per-axis after optional per-axis offsets
  double magnitude_raw = 0.0;      // |field|
  double magnitude_corrected = 0.0;  // max(0, |field| - correction)
};

/// component = reading / sensitivity.  `axis_offsets_mt` is subtracted per
/// axis before the magnitude; `magnitude_correction_mt` from the magnitude.
HallEstimate hall_to_field(const std::vector<double>& readings_v,
                           double sensitivity_mv_per_mt = kHallSensitivityMvPerMt,
                           double magnitude_correction_mt = kHallMagnitudeCorrectionMt,
                           const VectorField& axis_offsets_mt = {});

enum class Manifold { Plus, Minus, Both };
Manifold parse_manifold(const std::string& s);  // "+1", "-1", "both" (also plus/minus)
std::string to_string(Manifold m);

struct SweepBandPlan {
  Manifold manifold = Manifold::Plus;
  double f_min = 0.0, f_max = 0.0;  // MHz, hull of the intervals
  double margin = 0.0;              // MHz
  // Sorted, disjoint; "both" holds two entries when the manifold bands do
  // not touch.
  std::vector<std::pair<double, double>> intervals;
  double width() const { return f_max - f_min; }
  double swept_width() const;  // sum of interval widths
  bool contains(double f) const;
};

/// Union of intervals, sorted and merged.
std::vector<std::pair<double, double>> interval_union(std::vector<std::pair<double, double>> v);

inline constexpr double kDefaultBandMargin = 56.0;  // two broadening sigmas
inline constexpr double kMaxPlanningField = 100.0;  // mT

SweepBandPlan plan_sweep_band(const spinsys::PhysicalConstants& c, double field_mt, Manifold m,
                              double margin_mhz = kDefaultBandMargin);
SweepBandPlan plan_sweep_band(const spinsys::PhysicalConstants& c, const VectorField& f, Manifold m,
                              double margin_mhz = kDefaultBandMargin);

/// Coil data points (current A, field mT).
inline const std::vector<std::pair<double, double>> kQuotedCoilPoints{{1.0, 7.02}, {2.0, 14.27}};

/// Least squares through the origin: k = sum(I B) / sum(I^2).
double fit_coil_constant(const std::vector<std::pair<double, double>>& points);

/// Default coil constant, fitted to kQuotedCoilPoints (7.112 mT/A).
double default_coil_constant();

double helmholtz_field(double current_a, double coil_constant_mt_per_a = default_coil_constant());

}  // namespace nvdnp::calib
