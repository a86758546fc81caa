#include "nvdnp/powder.hpp"

#include "nvdnp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace nvdnp::powder {

using rng::unit_uniform;

OrientationSample sample_orientations(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("orientation count must be >= 1");
  std::mt19937_64 rng(seed);
  OrientationSample s;
  s.seed = seed;
  s.count = n;
  s.orientations.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double cos_t = 1.0 - 2.0 * unit_uniform(rng);
    const double phi = 2.0 * std::numbers::pi * unit_uniform(rng);
    s.orientations.push_back({std::acos(std::clamp(cos_t, -1.0, 1.0)), phi});
  }
  return s;
}

double Spectrum::area() const {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum * step();
}

double Spectrum::peak() const {
  return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

Spectrum powder_spectrum(const PhysicalConstants& c, double b_pol, const OrientationSample& sample,
                         double broadening_mhz, double grid_step) {
  c.validate();
  if (!(broadening_mhz > 0.0)) throw std::invalid_argument("broadening must be positive");
  if (!(grid_step > 0.0) || grid_step > broadening_mhz)
    throw std::invalid_argument("grid step must be positive and not exceed the broadening");
  if (sample.orientations.empty()) throw std::invalid_argument("empty orientation sample");

  const double half = 1.5 * c.gamma_e * b_pol + 5.0 * broadening_mhz;
  const double lo = c.delta - half;
  const auto npts = static_cast<std::size_t>(std::ceil(2.0 * half / grid_step)) + 1;

  Spectrum s;
  s.grid.resize(npts);
  for (std::size_t i = 0; i < npts; ++i) s.grid[i] = lo + static_cast<double>(i) * grid_step;
  s.values.assign(npts, 0.0);
  s.meta = {b_pol, broadening_mhz, sample.seed, sample.orientations.size()};

  const auto rho = spinsys::initial_electron_density(c);
  const double norm = 1.0 / (broadening_mhz * std::sqrt(2.0 * std::numbers::pi) *
                             static_cast<double>(sample.orientations.size()));
  const double inv2s2 = 1.0 / (2.0 * broadening_mhz * broadening_mhz);
  const double reach = 8.0 * broadening_mhz;

  for (const auto& o : sample.orientations) {
    const auto es = spinsys::eig_hermitian(spinsys::build_electron_hamiltonian(c, b_pol, o));
    const auto table = spinsys::transition_table(es, rho);
    for (const auto& t : table.entries) {
      if (t.intensity <= 0.0) continue;
      const double f0 = t.frequency;
      const double first = std::ceil((f0 - reach - lo) / grid_step);
      const double last = std::floor((f0 + reach - lo) / grid_step);
      if (last < 0.0 || first > static_cast<double>(npts - 1)) continue;
      const auto i0 = static_cast<std::size_t>(std::max(first, 0.0));
      const auto i1 = static_cast<std::size_t>(std::min(last, static_cast<double>(npts - 1)));
      const double a = t.intensity * norm;
      for (std::size_t i = i0; i <= i1; ++i) {
        const double d = s.grid[i] - f0;
        s.values[i] += a * std::exp(-d * d * inv2s2);
      }
    }
  }
  return s;
}

Spectrum convolve_sweep_window(const Spectrum& s, double window_mhz) {
  const double step = s.step();
  if (s.grid.size() < 2) throw std::invalid_argument("spectrum needs at least two grid points");
  if (window_mhz < step * (1.0 - 1e-12))
    throw std::invalid_argument("sweep window smaller than grid step");

  const auto half = static_cast<std::ptrdiff_t>(std::floor(window_mhz / (2.0 * step) + 1e-9));
  const auto width = 2 * half + 1;
  const auto n = static_cast<std::ptrdiff_t>(s.values.size());

  Spectrum out = s;
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::ptrdiff_t j = std::max<std::ptrdiff_t>(0, i - half);
         j <= std::min<std::ptrdiff_t>(n - 1, i + half); ++j)
      sum += s.values[static_cast<std::size_t>(j)];
    out.values[static_cast<std::size_t>(i)] = sum / static_cast<double>(width);
  }
  return out;
}

ManifoldEdges manifold_edges(const PhysicalConstants& c, double b_pol) {
  const double gb = c.gamma_e * b_pol;
  const double r = std::sqrt(c.delta * c.delta + 4.0 * gb * gb);
  return {c.delta - gb, 0.5 * (c.delta + r), std::min(r, c.delta + gb), std::max(r, c.delta + gb)};
}

ManifoldSpread manifold_spread(const PhysicalConstants& c, double b_pol) {
  const auto e = manifold_edges(c, b_pol);
  return {e.plus_hi - e.plus_lo, e.minus_hi - e.minus_lo, b_pol};
}

void gauss_legendre(std::size_t n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n == 0) throw std::invalid_argument("quadrature order must be positive");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const std::size_t m = (n + 1) / 2;
  for (std::size_t i = 0; i < m; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double kk = static_cast<double>(k);
        const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
        p0 = p1;
        p1 = p2;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

double integrated_intensity(const PhysicalConstants& c, double b_pol, std::size_t n_theta) {
  if (n_theta < 64) throw std::invalid_argument("integrated_intensity needs n_theta >= 64");
  std::vector<double> x, w;
  gauss_legendre(n_theta, x, w);
  const auto rho = spinsys::initial_electron_density(c);
  const double half = 0.25 * std::numbers::pi;  // maps [-1,1] onto [0, pi/2]
  double sum = 0.0;
  for (std::size_t i = 0; i < n_theta; ++i) {
    const double theta = half * (x[i] + 1.0);
    const auto es = spinsys::eig_hermitian(
        spinsys::build_electron_hamiltonian(c, b_pol, {theta, 0.0}));
    sum += w[i] * half * std::sin(theta) * spinsys::total_intensity(spinsys::transition_table(es, rho));
  }
  return sum;
}

double steepest_edge(const Spectrum& s, double f0, EdgeKind kind, double halfwidth) {
  const double sign = kind == EdgeKind::Rising ? 1.0 : -1.0;
  double best = -std::numeric_limits<double>::infinity();
  double where = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 1; i < s.grid.size(); ++i) {
    const double mid = 0.5 * (s.grid[i] + s.grid[i - 1]);
    if (mid < f0 - halfwidth || mid > f0 + halfwidth) continue;
    const double slope = sign * (s.values[i] - s.values[i - 1]);
    if (slope > best) {
      best = slope;
      where = mid;
    }
  }
  if (std::isnan(where)) throw std::invalid_argument("search window does not overlap the spectrum grid");
  return where;
}

}  // namespace nvdnp::powder
