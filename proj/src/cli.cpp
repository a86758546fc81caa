#include "nvdnp/cli.hpp"

#include "nvdnp/calib.hpp"
#include "nvdnp/csv.hpp"
#include "nvdnp/lzdnp.hpp"
#include "nvdnp/powder.hpp"
#include "nvdnp/protocol.hpp"
#include "nvdnp/relaxo.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <optional>
#include <stdexcept>

namespace nvdnp::cli {

namespace {

using csv::format_number;

constexpr std::uint64_t kDefaultSeed = 1;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// --seed wins, then NV_DNP_SEED, then the default.
std::uint64_t resolve_seed(const CLI::Option* opt, std::uint64_t flag_value) {
  if (opt->count() > 0) return flag_value;
  if (const char* env = std::getenv("NV_DNP_SEED"); env && *env) {
    char* end = nullptr;
    const auto v = std::strtoull(env, &end, 10);
    if (*end != '\0') throw std::invalid_argument("NV_DNP_SEED is not an unsigned integer");
    return v;
  }
  return kDefaultSeed;
}

void kv(std::ostream& out, const std::string& key, double v) { out << key << '=' << format_number(v) << '\n'; }
void kv(std::ostream& out, const std::string& key, const std::string& v) { out << key << '=' << v << '\n'; }

spinsys::PhysicalConstants constants_from(double delta, double gamma_e, double gamma_n) {
  spinsys::PhysicalConstants c{delta, gamma_e, gamma_n};
  c.validate();
  return c;
}

// --- per-subcommand settings ------------------------------------------------

struct ConstantFlags {
  double delta = spinsys::PhysicalConstants{}.delta;
  double gamma_e = spinsys::PhysicalConstants{}.gamma_e;
  double gamma_n = spinsys::PhysicalConstants{}.gamma_n;

  void attach(CLI::App* app) {
    app->add_option("--delta-mhz", delta, "Zero-field splitting (MHz)")->capture_default_str();
    app->add_option("--gamma-e", gamma_e, "Electron gyromagnetic ratio (MHz/mT)")->capture_default_str();
    app->add_option("--gamma-n", gamma_n, "13C gyromagnetic ratio (MHz/mT)")->capture_default_str();
  }
  spinsys::PhysicalConstants get() const { return constants_from(delta, gamma_e, gamma_n); }
};

struct SpectrumArgs {
  ConstantFlags constants;
  double field_mt = 36.0;
  std::size_t n_orient = 300;
  std::uint64_t seed = kDefaultSeed;
  CLI::Option* seed_opt = nullptr;
  double broadening = powder::kDefaultBroadening;
  double step = powder::kDefaultGridStep;
  double window = 0.0;
  std::string out;
};

int run_spectrum(const SpectrumArgs& a, std::ostream& out) {
  const auto seed = resolve_seed(a.seed_opt, a.seed);
  const auto sample = powder::sample_orientations(a.n_orient, seed);
  auto s = powder::powder_spectrum(a.constants.get(), a.field_mt, sample, a.broadening, a.step);
  if (a.window > 0.0) s = powder::convolve_sweep_window(s, a.window);

  csv::Table t;
  t.meta = {{"field_mT", format_number(a.field_mt)},
            {"broadening_mhz", format_number(a.broadening)},
            {"seed", std::to_string(seed)},
            {"n_orient", std::to_string(a.n_orient)}};
  if (a.window > 0.0) t.meta.emplace_back("window_mhz", format_number(a.window));
  t.header = {"freq_mhz", "intensity"};
  for (std::size_t i = 0; i < s.grid.size(); ++i) t.rows.push_back({s.grid[i], s.values[i]});
  csv::write_table(a.out, t);
  kv(out, "points", static_cast<double>(s.grid.size()));
  kv(out, "area", s.area());
  kv(out, "peak", s.peak());
  return kOk;
}

struct DnpArgs {
  ConstantFlags constants;
  double field_mt = 10.0;
  double theta_deg = 45.0;
  double phi_deg = 0.0;
  double azz = 0.5;
  std::optional<double> azx;
  double axx = 0.0, ayy = 0.0, axz = 0.0;
  std::string subspace = "-1";
  std::optional<double> f_start, f_end;
  double band_half = 1.5;        // MHz around the addressed transition
  double sweep_rate = 0.01;      // MHz/us, used when --rep-hz is absent
  std::optional<double> rep_hz;
  double rabi = 0.1;
  std::size_t cycles = 10;
  std::string direction = "up";
  std::optional<double> dt_us;
  double repol = 1.0;
  double initial_pol = 0.0;
  std::uint64_t seed = kDefaultSeed;
  CLI::Option* seed_opt = nullptr;
  std::string out;
};

int run_dnp(const DnpArgs& a, std::ostream& out) {
  resolve_seed(a.seed_opt, a.seed);  // validated; the coherent simulation uses no randomness
  lzdnp::DnpScenario sc;
  sc.constants = a.constants.get();
  sc.field_mt = a.field_mt;
  sc.orientation = {a.theta_deg * std::numbers::pi / 180.0, a.phi_deg * std::numbers::pi / 180.0};
  sc.hyperfine = spinsys::HyperfineTensor::with_default_transverse(a.azz);
  if (a.azx) sc.hyperfine.a_zx = *a.azx;
  sc.hyperfine.a_xx = a.axx;
  sc.hyperfine.a_yy = a.ayy;
  sc.hyperfine.a_xz = a.axz;
  if (a.subspace == "-1" || a.subspace == "minus") sc.subspace = lzdnp::Subspace::MinusOne;
  else if (a.subspace == "+1" || a.subspace == "plus") sc.subspace = lzdnp::Subspace::PlusOne;
  else if (a.subspace == "both") sc.subspace = lzdnp::Subspace::Full;
  else throw std::invalid_argument("--subspace must be -1, +1 or both");
  if (a.direction != "up" && a.direction != "down") throw std::invalid_argument("--direction must be up or down");
  if (sc.subspace == lzdnp::Subspace::Full && !(a.f_start && a.f_end))
    throw std::invalid_argument("--subspace both needs explicit --f-start and --f-end");
  if (a.f_start.has_value() != a.f_end.has_value())
    throw std::invalid_argument("--f-start and --f-end go together");

  const auto model = sc.model();
  lzdnp::SweepProgram p;
  if (a.f_start) {
    p.f_start = *a.f_start;
    p.f_end = *a.f_end;
  } else {
    const double c = model.addressed_center();
    p.f_start = c - a.band_half;
    p.f_end = c + a.band_half;
  }
  if ((a.direction == "up") != (p.f_end > p.f_start)) std::swap(p.f_start, p.f_end);
  p.rabi = a.rabi;
  p.n_sweeps = a.cycles;
  p.repetition_rate = a.rep_hz ? *a.rep_hz : a.sweep_rate * 1e6 / std::abs(p.f_end - p.f_start);
  p.validate();

  const double dt_s = (a.dt_us ? *a.dt_us : 0.045 / model.max_spread(p)) * 1e-6;
  const auto rho0 = lzdnp::initial_density(model, a.initial_pol);
  const auto r = lzdnp::ratchet_cycle(model, p, lzdnp::Repolarization{a.repol}, a.cycles, dt_s, rho0);

  csv::Table t;
  t.meta = {{"field_mT", format_number(a.field_mt)},
            {"theta_deg", format_number(a.theta_deg)},
            {"a_zz_mhz", format_number(sc.hyperfine.a_zz)},
            {"a_zx_mhz", format_number(sc.hyperfine.a_zx)},
            {"subspace", a.subspace},
            {"f_start_mhz", format_number(p.f_start)},
            {"f_end_mhz", format_number(p.f_end)},
            {"rep_hz", format_number(p.repetition_rate)},
            {"rabi_mhz", format_number(p.rabi)},
            {"cycles", std::to_string(a.cycles)},
            {"repol", format_number(a.repol)},
            {"dt_s", format_number(dt_s)}};
  t.header = {"t_s", "nuc_pol", "e_ms0"};
  for (std::size_t i = 0; i < r.trace.size(); ++i)
    t.rows.push_back({r.trace.times[i], r.trace.nuclear_polarization[i], r.trace.electron_population_ms0[i]});
  csv::write_table(a.out, t);
  kv(out, "final_nuc_pol", r.trace.nuclear_polarization.back());
  kv(out, "max_norm_drift", r.max_norm_drift);
  return kOk;
}

struct SweepOptArgs {
  std::string in;
  std::string out;
  bool defaults = false;
  std::size_t resamples = 2000;
  std::uint64_t seed = kDefaultSeed;
  CLI::Option* seed_opt = nullptr;
};

int run_sweep_opt(const SweepOptArgs& a, std::ostream& out) {
  if (a.defaults) {
    const auto& d = lzdnp::kShippedRates;
    kv(out, "omega_r_plus_hz", d.plus);
    kv(out, "omega_r_plus_sigma_hz", d.plus_uncertainty);
    kv(out, "omega_r_minus_hz", d.minus);
    kv(out, "omega_r_both_hz", d.both);
    kv(out, "omega_r_both_sigma_hz", d.both_uncertainty);
    return kOk;
  }
  if (a.in.empty()) throw std::invalid_argument("sweep-opt needs --in (or --defaults)");
  const auto t = csv::read_file(a.in);
  const auto jw = t.column("omega_r_hz"), je = t.column("enhancement"), js = t.column("sigma");
  std::vector<lzdnp::RateSample> samples;
  for (const auto& r : t.rows) samples.push_back({r[jw], r[je], r[js]});
  lzdnp::RateFitOptions opts;
  opts.resamples = a.resamples;
  opts.seed = resolve_seed(a.seed_opt, a.seed);
  const auto f = lzdnp::rate_model_fit(samples, opts);

  kv(out, "amplitude", f.params.amplitude);
  kv(out, "lambda", f.params.lambda);
  kv(out, "omega", f.params.omega);
  kv(out, "sigma_amplitude", std::sqrt(f.covariance(0, 0)));
  kv(out, "sigma_lambda", std::sqrt(f.covariance(1, 1)));
  kv(out, "sigma_omega", std::sqrt(f.covariance(2, 2)));
  kv(out, "optimum_rate_hz", f.optimum_rate);
  kv(out, "ci95_lo_hz", f.ci95.first);
  kv(out, "ci95_hi_hz", f.ci95.second);
  kv(out, "ci05_lo_hz", f.ci05.first);
  kv(out, "ci05_hi_hz", f.ci05.second);
  kv(out, "chi2", f.chi2);
  kv(out, "converged", f.converged ? "true" : "false");
  if (!f.converged) kv(out, "message", f.message);

  if (!a.out.empty()) {
    double lo = samples.front().omega_r, hi = lo;
    for (const auto& s : samples) {
      lo = std::min(lo, s.omega_r);
      hi = std::max(hi, s.omega_r);
    }
    csv::Table c;
    c.header = {"omega_r_hz", "enhancement"};
    constexpr int kPoints = 200;
    for (int i = 0; i < kPoints; ++i) {
      const double w = lo * std::pow(hi / lo, i / double(kPoints - 1));
      c.rows.push_back({w, lzdnp::rate_model_eval(f.params, w)});
    }
    csv::write_table(a.out, c);
  }
  return f.converged ? kOk : kComputation;
}

struct T1Args {
  std::string in;
  std::string out;
};

int run_t1fit(const T1Args& a, std::ostream& out) {
  const auto t = csv::read_file(a.in);
  auto has = [&](const char* name) {
    return std::find(t.header.begin(), t.header.end(), name) != t.header.end();
  };
  csv::Table curve;
  constexpr int kPoints = 200;
  if (has("field_mT")) {
    const auto jb = t.column("field_mT"), jr = t.column("r1_hz"), js = t.column("sigma_hz");
    std::vector<relaxo::R1Sample> samples;
    for (const auto& r : t.rows) samples.push_back({r[jb], r[jr], r[js]});
    const auto prof = relaxo::fit_r1_profile(samples);
    const auto& f = *prof.fit;
    kv(out, "model", "lorentzian");
    kv(out, "a_lor", f.a_lor);
    kv(out, "w_lor_mt", f.w_lor);
    kv(out, "c_offset_hz", f.c_offset);
    kv(out, "sigma_a_lor", f.sigma_a);
    kv(out, "sigma_w_lor_mt", f.sigma_w);
    kv(out, "sigma_c_offset_hz", f.sigma_c);
    kv(out, "knee_field_mt", relaxo::knee_field(f));
    kv(out, "chi2", f.chi2);
    kv(out, "rms_residual_hz", f.rms_residual);
    kv(out, "insufficient_span", f.insufficient_span ? "true" : "false");
    const double lo = prof.samples.front().field, hi = prof.samples.back().field;
    curve.header = {"field_mT", "r1_hz"};
    for (int i = 0; i < kPoints; ++i) {
      const double b = lo * std::pow(hi / lo, i / double(kPoints - 1));
      curve.rows.push_back({b, relaxo::r1_model(f.a_lor, f.w_lor, f.c_offset, b)});
    }
  } else if (has("t_s")) {
    relaxo::DecayRecord d;
    d.times = t.column_values(t.column("t_s"));
    d.signals = t.column_values(t.column("signal"));
    d = relaxo::fit_monoexponential(d);
    const auto& f = *d.fit;
    kv(out, "model", "monoexponential");
    kv(out, "amplitude", f.amplitude);
    kv(out, "t1_s", f.t1);
    kv(out, "sigma_t1_s", f.sigma_t1);
    kv(out, "t1_halfwidth95_s", f.t1_halfwidth95());
    curve.header = {"t_s", "signal"};
    const double lo = d.times.front(), hi = d.times.back();
    for (int i = 0; i < kPoints; ++i) {
      const double x = lo + (hi - lo) * i / double(kPoints - 1);
      curve.rows.push_back({x, f.amplitude * std::exp(-x / f.t1)});
    }
  } else {
    throw std::invalid_argument("t1fit input needs columns field_mT,r1_hz,sigma_hz or t_s,signal");
  }
  if (!a.out.empty()) csv::write_table(a.out, curve);
  return kOk;
}

struct SuppressArgs {
  std::string up, down;
  std::string out_prefix;
  std::optional<double> band_lo, band_hi;
  // Fixture generation.
  bool make_fixture = false;
  double fidelity = 0.98;
  double noise = 0.0;
  double background_scale = 112.0;
  std::uint64_t seed = kDefaultSeed;
  CLI::Option* seed_opt = nullptr;
};

protocol::NmrSpectrum read_nmr(const std::string& path, const std::string& label) {
  const auto t = csv::read_file(path);
  if (t.header.size() < 2) throw std::invalid_argument(path + ": need two columns (shift, amplitude)");
  protocol::NmrSpectrum s{t.column_values(0), t.column_values(1), label};
  s.validate();
  return s;
}

void write_nmr(const std::string& path, const protocol::NmrSpectrum& s) {
  csv::Table t;
  t.meta = {{"label", s.label}};
  t.header = {"shift", "amplitude"};
  for (std::size_t i = 0; i < s.grid.size(); ++i) t.rows.push_back({s.grid[i], s.values[i]});
  csv::write_table(path, t);
}

int run_suppress(const SuppressArgs& a, std::ostream& out) {
  if (a.out_prefix.empty()) throw std::invalid_argument("suppress needs --out-prefix");
  if (a.make_fixture) {
    protocol::FixtureSpec spec;
    spec.fidelity = a.fidelity;
    spec.noise_sigma = a.noise;
    spec.background.amplitude = a.background_scale;
    spec.seed = resolve_seed(a.seed_opt, a.seed);
    const auto f = protocol::make_fixture(spec);
    write_nmr(a.out_prefix + "_up.csv", f.up);
    write_nmr(a.out_prefix + "_down.csv", f.down);
    kv(out, "band_lo", f.diamond_band.first);
    kv(out, "band_hi", f.diamond_band.second);
    return kOk;
  }
  if (a.up.empty() || a.down.empty()) throw std::invalid_argument("suppress needs --up and --down");
  if (!a.band_lo || !a.band_hi) throw std::invalid_argument("suppress needs --band-lo and --band-hi");
  const auto up = read_nmr(a.up, "up");
  const auto down = read_nmr(a.down, "down");
  const std::pair<double, double> band{*a.band_lo, *a.band_hi};
  const auto dec = protocol::background_suppress(up, down);
  // Band-integrated fidelity of the raw pair; meaningful when the band holds
  // the diamond line only.
  const double fid = protocol::inversion_fidelity(up, down, band);
  // Off-band residual: peak of the diamond channel outside the diamond band.
  double residual = 0.0;
  for (std::size_t i = 0; i < dec.diamond.grid.size(); ++i) {
    const double x = dec.diamond.grid[i];
    if (x < band.first || x > band.second) residual = std::max(residual, std::abs(dec.diamond.values[i]));
  }
  const auto sf = protocol::suppression_factor(protocol::peak_magnitude(dec.background.values), residual);

  write_nmr(a.out_prefix + "_diamond.csv", dec.diamond);
  write_nmr(a.out_prefix + "_background.csv", dec.background);
  csv::Table rep;
  rep.header = {"fidelity", "suppression_factor", "suppression_infinite"};
  rep.rows.push_back({fid, sf.infinite ? 0.0 : sf.value, sf.infinite ? 1.0 : 0.0});
  csv::write_table(a.out_prefix + "_report.csv", rep);
  kv(out, "fidelity", fid);
  kv(out, "suppression_factor", sf.infinite ? std::string("inf") : format_number(sf.value));
  return kOk;
}

struct CalibArgs {
  ConstantFlags constants;
  double power_w = 1.5, freq_ghz = 3.0, radius_mm = 2.0;
  double vx = 0, vy = 0, vz = 0, sensitivity = calib::kHallSensitivityMvPerMt,
         correction = calib::kHallMagnitudeCorrectionMt;
  double current_a = 1.0;
  std::optional<double> coil_constant;
  double band_field = 38.0;
  std::string manifold = "+1";
  double margin = calib::kDefaultBandMargin;
};

int run_calib_rabi(const CalibArgs& a, std::ostream& out) {
  const auto r = calib::rabi_from_power(a.power_w, a.freq_ghz, a.radius_mm, a.constants.get().gamma_e);
  kv(out, "b_field_mt", r.b_field_mt);
  kv(out, "rabi_khz", r.rabi_khz);
  out << "B = " << format_sig(r.b_field_mt, 2) << " mT, Omega_e/2pi = " << format_sig(r.rabi_khz, 2) << " kHz\n";
  return kOk;
}

int run_calib_hall(const CalibArgs& a, std::ostream& out) {
  const auto h = calib::hall_to_field({a.vx, a.vy, a.vz}, a.sensitivity, a.correction);
  kv(out, "bx_mt", h.field.bx);
  kv(out, "by_mt", h.field.by);
  kv(out, "bz_mt", h.field.bz);
  kv(out, "magnitude_mt", h.magnitude_raw);
  kv(out, "magnitude_corrected_mt", h.magnitude_corrected);
  return kOk;
}

int run_calib_helmholtz(const CalibArgs& a, std::ostream& out) {
  const double k = a.coil_constant ? *a.coil_constant : calib::default_coil_constant();
  kv(out, "coil_constant_mt_per_a", k);
  kv(out, "field_mt", calib::helmholtz_field(a.current_a, k));
  return kOk;
}

int run_calib_band(const CalibArgs& a, std::ostream& out) {
  const auto p = calib::plan_sweep_band(a.constants.get(), a.band_field, calib::parse_manifold(a.manifold),
                                        a.margin);
  kv(out, "manifold", calib::to_string(p.manifold));
  kv(out, "f_min_mhz", p.f_min);
  kv(out, "f_max_mhz", p.f_max);
  kv(out, "margin_mhz", p.margin);
  for (std::size_t i = 0; i < p.intervals.size(); ++i) {
    kv(out, "interval" + std::to_string(i) + "_lo_mhz", p.intervals[i].first);
    kv(out, "interval" + std::to_string(i) + "_hi_mhz", p.intervals[i].second);
  }
  return kOk;
}

}  // namespace

std::string format_sig(double v, int digits) {
  if (v == 0.0 || !std::isfinite(v)) return format_number(v);
  const int mag = static_cast<int>(std::floor(std::log10(std::abs(v)))) + 1;
  const int decimals = std::max(0, digits - mag);
  const double scale = std::pow(10.0, mag - digits);
  const double rounded = std::round(v / scale) * scale;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, rounded);
  return buf;
}

std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::map<std::string, std::string> kvs;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto hash = line.find('#');
    const auto s = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(n) + ": expected key=value");
    kvs[trim(s.substr(0, eq))] = trim(s.substr(eq + 1));
  }
  return kvs;
}

std::vector<std::string> merge_config(const std::vector<std::string>& argv) {
  std::vector<std::string> args;
  std::optional<std::string> path;
  for (std::size_t i = 0; i < argv.size(); ++i) {
    if (argv[i] == "--config") {
      if (i + 1 >= argv.size()) throw CLI::ArgumentMismatch("--config needs a path");
      path = argv[++i];
    } else if (argv[i].rfind("--config=", 0) == 0) {
      path = argv[i].substr(9);
    } else {
      args.push_back(argv[i]);
    }
  }
  if (!path) return args;
  auto present = [&](const std::string& flag) {
    for (const auto& a : args)
      if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    return false;
  };
  for (const auto& [k, v] : read_config(*path)) {
    const auto flag = "--" + k;
    if (!present(flag)) args.push_back(flag + "=" + v);
  }
  return args;
}

int cli_dispatch(const std::vector<std::string>& argv_in, std::ostream& out, std::ostream& err) {
  CLI::App app{"NV-center 13C hyperpolarization toolkit", "nvdnp"};
  app.require_subcommand(1);

  SpectrumArgs sp;
  auto* spectrum = app.add_subcommand("spectrum", "Orientation-averaged ESR powder spectrum");
  sp.constants.attach(spectrum);
  spectrum->add_option("--field-mt", sp.field_mt, "Polarizing field (mT)")->capture_default_str();
  spectrum->add_option("--n-orient", sp.n_orient, "Number of random orientations")->capture_default_str();
  sp.seed_opt = spectrum->add_option("--seed", sp.seed, "Orientation seed (fallback: NV_DNP_SEED)");
  spectrum->add_option("--broadening-mhz", sp.broadening, "Gaussian sigma (MHz)")->capture_default_str();
  spectrum->add_option("--step-mhz", sp.step, "Grid step (MHz)")->capture_default_str();
  spectrum->add_option("--window-mhz", sp.window, "Sweep window boxcar (MHz), 0 = none")->capture_default_str();
  spectrum->add_option("--out", sp.out, "Output CSV")->required();

  DnpArgs dn;
  auto* dnp = app.add_subcommand("dnp-sim", "Chirped-sweep ratchet simulation of one 13C");
  dn.constants.attach(dnp);
  dnp->add_option("--field-mt", dn.field_mt)->capture_default_str();
  dnp->add_option("--theta-deg", dn.theta_deg, "NV axis to field angle")->capture_default_str();
  dnp->add_option("--phi-deg", dn.phi_deg)->capture_default_str();
  dnp->add_option("--azz", dn.azz, "Hyperfine A_zz (MHz)")->capture_default_str();
  dnp->add_option("--azx", dn.azx, "Hyperfine A_zx (MHz), default 0.3|A_zz|");
  dnp->add_option("--axx", dn.axx)->capture_default_str();
  dnp->add_option("--ayy", dn.ayy)->capture_default_str();
  dnp->add_option("--axz", dn.axz)->capture_default_str();
  dnp->add_option("--subspace", dn.subspace, "-1, +1 or both")->capture_default_str();
  dnp->add_option("--f-start", dn.f_start, "Sweep start (MHz)");
  dnp->add_option("--f-end", dn.f_end, "Sweep end (MHz)");
  dnp->add_option("--band-half-mhz", dn.band_half, "Half band around the addressed line")->capture_default_str();
  dnp->add_option("--sweep-rate", dn.sweep_rate, "MHz/us when --rep-hz is absent")->capture_default_str();
  dnp->add_option("--rep-hz", dn.rep_hz, "Repetition rate (Hz)");
  dnp->add_option("--rabi-mhz", dn.rabi)->capture_default_str();
  dnp->add_option("--cycles", dn.cycles)->capture_default_str();
  dnp->add_option("--direction", dn.direction, "up or down")->capture_default_str();
  dnp->add_option("--dt-us", dn.dt_us, "Time step (us), default 0.045 / spread");
  dnp->add_option("--repol", dn.repol, "Electron reset efficiency in [0, 1]")->capture_default_str();
  dnp->add_option("--initial-pol", dn.initial_pol, "Initial nuclear polarization")->capture_default_str();
  dn.seed_opt = dnp->add_option("--seed", dn.seed, "Accepted for uniformity; the simulation is deterministic");
  dnp->add_option("--out", dn.out, "Output trace CSV")->required();

  SweepOptArgs so;
  auto* sweep = app.add_subcommand("sweep-opt", "Fit the repetition-rate model and locate its optimum");
  sweep->add_option("--in", so.in, "CSV with omega_r_hz,enhancement,sigma");
  sweep->add_option("--out", so.out, "Fitted curve CSV");
  sweep->add_flag("--defaults", so.defaults, "Print the shipped optimal rates");
  sweep->add_option("--resamples", so.resamples)->capture_default_str();
  so.seed_opt = sweep->add_option("--seed", so.seed, "Resampling seed (fallback: NV_DNP_SEED)");

  T1Args ta;
  auto* t1 = app.add_subcommand("t1fit", "Fit R1(B) profiles or mono-exponential decays");
  t1->add_option("--in", ta.in, "CSV: field_mT,r1_hz,sigma_hz or t_s,signal")->required();
  t1->add_option("--out", ta.out, "Fitted curve CSV");

  SuppressArgs su;
  auto* sup = app.add_subcommand("suppress", "Separate diamond and background by sweep reversal");
  sup->add_option("--up", su.up, "Spectrum CSV, low-to-high sweep");
  sup->add_option("--down", su.down, "Spectrum CSV, high-to-low sweep");
  sup->add_option("--band-lo", su.band_lo, "Diamond band lower edge");
  sup->add_option("--band-hi", su.band_hi, "Diamond band upper edge");
  sup->add_option("--out-prefix", su.out_prefix, "Prefix for output CSVs")->required();
  sup->add_flag("--make-fixture", su.make_fixture, "Write a synthetic up/down pair instead");
  sup->add_option("--fidelity", su.fidelity)->capture_default_str();
  sup->add_option("--noise", su.noise)->capture_default_str();
  sup->add_option("--background-scale", su.background_scale)->capture_default_str();
  su.seed_opt = sup->add_option("--seed", su.seed, "Fixture noise seed (fallback: NV_DNP_SEED)");

  CalibArgs ca;
  auto* cal = app.add_subcommand("calib", "Bench calibration calculators");
  cal->require_subcommand(1);
  auto* rabi = cal->add_subcommand("rabi", "Rabi frequency from MW power");
  rabi->add_option("--power-w", ca.power_w)->capture_default_str();
  rabi->add_option("--freq-ghz", ca.freq_ghz)->capture_default_str();
  rabi->add_option("--radius-mm", ca.radius_mm)->capture_default_str();
  rabi->add_option("--gamma-e", ca.constants.gamma_e)->capture_default_str();
  auto* hall = cal->add_subcommand("hall", "Vector field from three Hall probes");
  hall->add_option("--vx", ca.vx, "Volts")->capture_default_str();
  hall->add_option("--vy", ca.vy, "Volts")->capture_default_str();
  hall->add_option("--vz", ca.vz, "Volts")->capture_default_str();
  hall->add_option("--sensitivity", ca.sensitivity, "mV/mT")->capture_default_str();
  hall->add_option("--correction", ca.correction, "Magnitude correction (mT)")->capture_default_str();
  auto* helm = cal->add_subcommand("helmholtz", "Coil field from current");
  helm->add_option("--current-a", ca.current_a)->capture_default_str();
  helm->add_option("--constant", ca.coil_constant, "mT/A, default fitted to the coil data");
  auto* band = cal->add_subcommand("band", "Plan the MW sweep band");
  ca.constants.attach(band);
  band->add_option("--field-mt", ca.band_field)->capture_default_str();
  band->add_option("--manifold", ca.manifold, "+1, -1 or both")->capture_default_str();
  band->add_option("--margin-mhz", ca.margin)->capture_default_str();

  std::vector<std::string> args;
  try {
    args = merge_config(argv_in);
    std::vector<const char*> cargs;
    for (const auto& s : args) cargs.push_back(s.c_str());
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (spectrum->parsed()) return run_spectrum(sp, out);
    if (dnp->parsed()) return run_dnp(dn, out);
    if (sweep->parsed()) return run_sweep_opt(so, out);
    if (t1->parsed()) return run_t1fit(ta, out);
    if (sup->parsed()) return run_suppress(su, out);
    if (rabi->parsed()) return run_calib_rabi(ca, out);
    if (hall->parsed()) return run_calib_hall(ca, out);
    if (helm->parsed()) return run_calib_helmholtz(ca, out);
    if (band->parsed()) return run_calib_band(ca, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kComputation;
  }
  err << app.help();
  return kUsage;
}

}  // namespace nvdnp::cli
