#include "nvdnp/protocol.hpp"

#include "nvdnp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace nvdnp::protocol {

void NmrSpectrum::validate() const {
  if (grid.size() != values.size()) throw std::invalid_argument("spectrum grid/value length mismatch");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("spectrum grid must be strictly ascending");
  for (double v : values)
    if (!std::isfinite(v)) throw std::invalid_argument("spectrum values must be finite");
}

NmrSpectrum synth_spectrum(const std::vector<Peak>& peaks, const std::vector<double>& grid,
                           std::string label) {
  for (const auto& p : peaks)
    if (!(p.fwhm > 0.0)) throw std::invalid_argument("Lorentzian width must be positive");
  NmrSpectrum s{grid, std::vector<double>(grid.size(), 0.0), std::move(label)};
  for (const auto& p : peaks) {
    const double hw = 0.5 * p.fwhm;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double x = (grid[i] - p.center) / hw;
      s.values[i] += p.amplitude / (1.0 + x * x);
    }
  }
  s.validate();
  return s;
}

double band_integral(const NmrSpectrum& s, std::pair<double, double> band) {
  double acc = 0.0;
  for (std::size_t i = 1; i < s.grid.size(); ++i) {
    if (s.grid[i - 1] < band.first || s.grid[i] > band.second) continue;
    acc += 0.5 * (s.values[i] + s.values[i - 1]) * (s.grid[i] - s.grid[i - 1]);
  }
  return acc;
}

namespace {

void require_common_grid(const NmrSpectrum& a, const NmrSpectrum& b) {
  a.validate();
  b.validate();
  if (a.grid != b.grid) throw std::invalid_argument("spectra are not on a common grid");
}

}  // namespace

double inversion_fidelity(const NmrSpectrum& up, const NmrSpectrum& down,
                          std::pair<double, double> diamond_band) {
  require_common_grid(up, down);
  const double a_up = band_integral(up, diamond_band);
  const double a_down = band_integral(down, diamond_band);
  const double den = std::abs(a_up) + std::abs(a_down);
  if (den == 0.0) throw std::domain_error("both spectra have zero amplitude in the diamond band");
  return 1.0 - std::abs(a_up + a_down) / den;
}

Decomposition background_suppress(const NmrSpectrum& up, const NmrSpectrum& down) {
  require_common_grid(up, down);
  Decomposition d{{up.grid, std::vector<double>(up.grid.size()), "diamond"},
                  {up.grid, std::vector<double>(up.grid.size()), "background"}};
  for (std::size_t i = 0; i < up.grid.size(); ++i) {
    d.diamond.values[i] = 0.5 * (up.values[i] - down.values[i]);
    d.background.values[i] = 0.5 * (up.values[i] + down.values[i]);
  }
  return d;
}

SuppressionFactor suppression_factor(double raw_background_peak, double residual_background_peak) {
  if (!(raw_background_peak > 0.0) || !(residual_background_peak >= 0.0))
    throw std::invalid_argument("suppression factor needs a positive raw peak and non-negative residual");
  if (residual_background_peak == 0.0) return {std::numeric_limits<double>::infinity(), true};
  return {raw_background_peak / residual_background_peak, false};
}

double peak_magnitude(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double background_ratio(const RatioInputs& in) {
  if (!(in.m_f > 0) || !(in.edge_cm > 0) || !(in.n_crystals > 0) || !(in.molar_f > 0) ||
      !(in.molar_d > 0) || !(in.rho_d > 0) || !(in.abundance_pct > 0))
    throw std::invalid_argument("background ratio inputs must be positive");
  const double a3 = in.edge_cm * in.edge_cm * in.edge_cm;
  return (in.m_f * in.molar_d) / (8.0 * std::numbers::sqrt2 * a3 * in.rho_d * in.n_crystals * in.molar_f) *
         (100.0 / in.abundance_pct);
}

Fixture make_fixture(const FixtureSpec& spec) {
  if (!(spec.fidelity > 0.0 && spec.fidelity <= 1.0)) throw std::invalid_argument("fidelity must be in (0, 1]");
  if (!(spec.grid_step > 0.0) || !(spec.grid_max > spec.grid_min))
    throw std::invalid_argument("bad fixture grid");
  std::vector<double> grid;
  const auto n = static_cast<std::size_t>(std::floor((spec.grid_max - spec.grid_min) / spec.grid_step + 1e-9)) + 1;
  grid.reserve(n);
  for (std::size_t i = 0; i < n; ++i) grid.push_back(spec.grid_min + spec.grid_step * static_cast<double>(i));

  const auto d = synth_spectrum({spec.diamond}, grid);
  const auto b = synth_spectrum({spec.background}, grid);
  const double k = spec.fidelity / (2.0 - spec.fidelity);
  const double gain = spec.fidelity;  // background repeated with gain error 1 - F

  Fixture f;
  f.up = {grid, std::vector<double>(n), "up"};
  f.down = {grid, std::vector<double>(n), "down"};
  f.diamond_truth.resize(n);
  f.background_truth = b.values;
  rng::Engine eng(spec.seed);
  for (std::size_t i = 0; i < n; ++i) {
    double n1 = 0.0, n2 = 0.0;
    if (spec.noise_sigma > 0.0) {
      n1 = spec.noise_sigma * rng::standard_normal(eng);
      n2 = spec.noise_sigma * rng::standard_normal(eng);
    }
    f.up.values[i] = d.values[i] + b.values[i] + n1;
    f.down.values[i] = -k * d.values[i] + gain * b.values[i] + n2;
    f.diamond_truth[i] = 0.5 * (1.0 + k) * d.values[i];
  }
  f.diamond_band = {spec.diamond.center - 2.0 * spec.diamond.fwhm, spec.diamond.center + 2.0 * spec.diamond.fwhm};
  return f;
}

std::vector<double> diamond_channel_residual(const Fixture& f, const Decomposition& d) {
  std::vector<double> r(f.diamond_truth.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = d.diamond.values[i] - f.diamond_truth[i];
  return r;
}

}  // namespace nvdnp::protocol
