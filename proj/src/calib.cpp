#include "nvdnp/calib.hpp"

#include "nvdnp/powder.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nvdnp::calib {

namespace {
constexpr double kMu0 = 1.25663706212e-6;  // T m / A
}

RabiEstimate rabi_from_power(double power_w, double freq_ghz, double radius_mm, double gamma_e) {
  if (!(power_w > 0) || !(freq_ghz > 0) || !(radius_mm > 0) || !(gamma_e > 0))
    throw std::invalid_argument("rabi_from_power inputs must be positive");
  const double energy = power_w / (freq_ghz * 1e9);  // J per cycle
  const double r = radius_mm * 1e-3;
  const double volume = 4.0 * std::numbers::pi / 3.0 * r * r * r;
  const double b_tesla = std::sqrt(2.0 * kMu0 * energy / volume);
  RabiEstimate out;
  out.b_field_mt = b_tesla * 1e3;
  out.rabi_khz = gamma_e * out.b_field_mt / (4.0 * std::numbers::pi) * 1e3;
  return out;
}

double VectorField::magnitude() const { return std::sqrt(bx * bx + by * by + bz * bz); }

HallEstimate hall_to_field(const std::vector<double>& readings_v, double sensitivity_mv_per_mt,
                           double magnitude_correction_mt, const VectorField& axis_offsets_mt) {
  if (readings_v.size() != 3) throw std::invalid_argument("Hall estimate needs exactly 3 readings");
  if (!(sensitivity_mv_per_mt > 0)) throw std::invalid_argument("Hall sensitivity must be positive");
  const double k = 1e3 / sensitivity_mv_per_mt;  // V -> mT
  HallEstimate h;
  h.field = {readings_v[0] * k - axis_offsets_mt.bx, readings_v[1] * k - axis_offsets_mt.by,
             readings_v[2] * k - axis_offsets_mt.bz};
  h.magnitude_raw = h.field.magnitude();
  h.magnitude_corrected = std::max(0.0, h.magnitude_raw - magnitude_correction_mt);
  return h;
}

Manifold parse_manifold(const std::string& s) {
  if (s == "+1" || s == "1" || s == "plus") return Manifold::Plus;
  if (s == "-1" || s == "minus") return Manifold::Minus;
  if (s == "both") return Manifold::Both;
  throw std::invalid_argument("manifold must be +1, -1 or both, got '" + s + "'");
}

std::string to_string(Manifold m) {
  switch (m) {
    case Manifold::Plus: return "+1";
    case Manifold::Minus: return "-1";
    case Manifold::Both: return "both";
  }
  return "?";
}

double SweepBandPlan::swept_width() const {
  double w = 0.0;
  for (const auto& [lo, hi] : intervals) w += hi - lo;
  return w;
}

bool SweepBandPlan::contains(double f) const {
  for (const auto& [lo, hi] : intervals)
    if (f >= lo && f <= hi) return true;
  return false;
}

std::vector<std::pair<double, double>> interval_union(std::vector<std::pair<double, double>> v) {
  std::sort(v.begin(), v.end());
  std::vector<std::pair<double, double>> out;
  for (const auto& iv : v) {
    if (!out.empty() && iv.first <= out.back().second)
      out.back().second = std::max(out.back().second, iv.second);
    else
      out.push_back(iv);
  }
  return out;
}

SweepBandPlan plan_sweep_band(const spinsys::PhysicalConstants& c, double field_mt, Manifold m,
                              double margin_mhz) {
  if (!(std::abs(field_mt) <= kMaxPlanningField))
    throw std::invalid_argument("sweep-band planning supports |B| <= 100 mT");
  if (!(margin_mhz >= 0)) throw std::invalid_argument("band margin must be non-negative");
  const auto e = powder::manifold_edges(c, std::abs(field_mt));
  const std::pair<double, double> plus{e.plus_lo - margin_mhz, e.plus_hi + margin_mhz};
  const std::pair<double, double> minus{e.minus_lo - margin_mhz, e.minus_hi + margin_mhz};
  SweepBandPlan p;
  p.manifold = m;
  p.margin = margin_mhz;
  switch (m) {
    case Manifold::Plus: p.intervals = {plus}; break;
    case Manifold::Minus: p.intervals = {minus}; break;
    case Manifold::Both: p.intervals = interval_union({plus, minus}); break;
  }
  p.f_min = p.intervals.front().first;
  p.f_max = p.intervals.back().second;
  return p;
}

SweepBandPlan plan_sweep_band(const spinsys::PhysicalConstants& c, const VectorField& f, Manifold m,
                              double margin_mhz) {
  return plan_sweep_band(c, f.magnitude(), m, margin_mhz);
}

double fit_coil_constant(const std::vector<std::pair<double, double>>& points) {
  double sib = 0.0, sii = 0.0;
  for (const auto& [i, b] : points) {
    sib += i * b;
    sii += i * i;
  }
  if (!(sii > 0)) throw std::invalid_argument("coil fit needs at least one non-zero current");
  return sib / sii;
}

double default_coil_constant() {
  static const double k = fit_coil_constant(kQuotedCoilPoints);
  return k;
}

double helmholtz_field(double current_a, double coil_constant_mt_per_a) {
  return current_a * coil_constant_mt_per_a;
}

}  // namespace nvdnp::calib
