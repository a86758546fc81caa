// Portable random variates on top of std::mt19937_64.  The standard
// distributions are implementation-defined, so streams would differ between
// standard libraries; these conversions are fixed.
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace nvdnp::rng {

using Engine = std::mt19937_64;

// Uniform double in [0, 1) from the top 53 bits.
inline double unit_uniform(Engine& e) { return static_cast<double>(e() >> 11) * 0x1.0p-53; }

// Box-Muller, first branch only; two engine draws per variate.
inline double standard_normal(Engine& e) {
  const double u1 = 1.0 - unit_uniform(e);
  const double u2 = unit_uniform(e);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace nvdnp::rng
