// Powder averaging of NV electron spectra.
#pragma once

#include "nvdnp/spinsys.hpp"

#include <cstdint>
#include <vector>

namespace nvdnp::powder {

using spinsys::Orientation;
using spinsys::PhysicalConstants;

struct OrientationSample {
  std::vector<Orientation> orientations;
  std::uint64_t seed = 0;
  std::size_t count = 0;
};

/// Uniform orientations on the sphere (cos(theta) uniform in [-1, 1], phi
/// uniform in [0, 2 pi)).  Uses std::mt19937_64 and explicit inverse-CDF
/// mapping so the list is bit-reproducible for a seed.
OrientationSample sample_orientations(std::size_t n, std::uint64_t seed);

struct SpectrumMeta {
  double field_mt = 0.0;
  double broadening_mhz = 0.0;
  std::uint64_t seed = 0;
  std::size_t n_orient = 0;
};

struct Spectrum {
  std::vector<double> grid;    // MHz, strictly ascending, uniform step
  std::vector<double> values;  // >= 0
  SpectrumMeta meta;

  double step() const { return grid.size() > 1 ? grid[1] - grid[0] : 0.0; }
  /// Rectangle-rule area, sum(values) * step.
  double area() const;
  double peak() const;
};

constexpr double kDefaultBroadening = 28.0;  // Gaussian sigma, MHz
constexpr double kDefaultGridStep = 1.0;     // MHz

/// Orientation-averaged ESR spectrum.  Every transition of every orientation
/// contributes intensity * N(f; f0, sigma) (unit-area Gaussian).  The grid
/// spans [delta - 1.5 gamma_e B - 5 sigma, delta + 1.5 gamma_e B + 5 sigma].
Spectrum powder_spectrum(const PhysicalConstants& c, double b_pol, const OrientationSample& sample,
                         double broadening_mhz = kDefaultBroadening,
                         double grid_step = kDefaultGridStep);

/// Centered boxcar moving average of width `window_mhz` (2*floor(w/(2 step))+1
/// points), zero outside the grid.
Spectrum convolve_sweep_window(const Spectrum& s, double window_mhz);

/// Closed-form frequency extrema of each manifold.
struct ManifoldEdges {
  double minus_lo, minus_hi;  // m_s = -1: [delta - gB, (delta + R)/2]
  double plus_lo, plus_hi;    // m_s = +1: [R, delta + gB], ordered
};
ManifoldEdges manifold_edges(const PhysicalConstants& c, double b_pol);

enum class EdgeKind { Rising, Falling };

/// Position of the steepest rising (falling) slope of the spectrum within
/// [f0 - halfwidth, f0 + halfwidth], at the midpoint of the steepest grid
/// interval.  Locates a Gaussian-blurred step at the step itself.
double steepest_edge(const Spectrum& s, double f0, EdgeKind kind, double halfwidth);

struct ManifoldSpread {
  double spread_plus = 0.0;
  double spread_minus = 0.0;
  double field = 0.0;
};
ManifoldSpread manifold_spread(const PhysicalConstants& c, double b_pol);

/// Integrated transition intensity over theta in [0, pi/2] with sin(theta)
/// weight, Gauss-Legendre with n_theta nodes (n_theta >= 64).
double integrated_intensity(const PhysicalConstants& c, double b_pol, std::size_t n_theta = 128);

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(std::size_t n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace nvdnp::powder
