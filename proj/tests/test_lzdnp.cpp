#include <doctest.h>

#include "nvdnp/lzdnp.hpp"
#include "nvdnp/rng.hpp"
#include "oracles.hpp"

#include <cmath>
#include <numbers>

using namespace nvdnp;
using namespace nvdnp::lzdnp;

namespace {

constexpr double kPi = std::numbers::pi;

// Band of +-1.5 MHz around the addressed line at 0.01 MHz/us, rabi 0.1 MHz.
SweepProgram default_program(const ChirpModel& m, int direction = +1) {
  const double c = m.addressed_center();
  SweepProgram p;
  p.f_start = c - 1.5 * direction;
  p.f_end = c + 1.5 * direction;
  p.rabi = 0.1;
  p.repetition_rate = 0.01 / 3.0 * 1e6;
  return p;
}

double default_dt(const ChirpModel& m, const SweepProgram& p) { return 0.045 / m.max_spread(p) * 1e-6; }

double final_polarization(const ChirpModel& m, const SweepProgram& p, std::size_t cycles = 10) {
  return ratchet_cycle(m, p, {1.0}, cycles, default_dt(m, p), initial_density(m, 0.0))
      .trace.nuclear_polarization.back();
}

// --- an independent rendering of the driven, swept electron-nucleus problem --
//
// Eigenbasis from the general complex eigensolver, manifold labels from the
// electron weights, time stepping by classical RK4 on all six basis vectors,
// reset coded from the partial trace.  Shares only the 6x6 Hamiltonian
// builder with the library.
struct Reference {
  oracle::CMatrix v;             // product <- eigen, columns sorted by energy
  std::vector<double> e;         // ascending
  std::vector<int> ms;           // per eigenstate
  Eigen::Vector3d axis;          // nuclear axis of the lower m_s = 0 state
};

Reference reference_eigensystem(const spinsys::HermitianOperator& h6) {
  Eigen::ComplexEigenSolver<oracle::CMatrix> es(h6.matrix());
  std::vector<int> order(6);
  for (int k = 0; k < 6; ++k) order[k] = k;
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return es.eigenvalues()(a).real() < es.eigenvalues()(b).real(); });
  Reference r;
  r.v = oracle::CMatrix(6, 6);
  for (int k = 0; k < 6; ++k) {
    r.v.col(k) = es.eigenvectors().col(order[k]).normalized();
    r.e.push_back(es.eigenvalues()(order[k]).real());
    double best = -1.0;
    int label = 0;
    for (int el = 0; el < 3; ++el) {
      const double w = std::norm(r.v(2 * el, k)) + std::norm(r.v(2 * el + 1, k));
      if (w > best) {
        best = w;
        label = 1 - el;
      }
    }
    r.ms.push_back(label);
  }
  for (int k = 0; k < 6; ++k)
    if (r.ms[k] == 0) {
      // Reduced nuclear state of this eigenvector, as a Bloch vector.
      std::complex<double> r00 = 0.0, r01 = 0.0, r11 = 0.0;
      for (int el = 0; el < 3; ++el) {
        r00 += std::norm(r.v(2 * el, k));
        r11 += std::norm(r.v(2 * el + 1, k));
        r01 += r.v(2 * el, k) * std::conj(r.v(2 * el + 1, k));
      }
      r.axis = Eigen::Vector3d(2.0 * r01.real(), -2.0 * r01.imag(), (r00 - r11).real()).normalized();
      break;
    }
  return r;
}

// Sweep propagator over the full 6-level space in the eigenbasis.
oracle::CMatrix reference_sweep(const Reference& ref, const SweepProgram& p, long n_steps) {
  const auto sx = oracle::spin1()[0];
  oracle::CMatrix sx6 = oracle::CMatrix::Zero(6, 6);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int n = 0; n < 2; ++n) sx6(2 * a + n, 2 * b + n) = sx(a, b);
  const oracle::CMatrix d = std::sqrt(2.0) * ref.v.adjoint() * sx6 * ref.v;
  const double t_us = 1e6 / p.repetition_rate;
  // A common energy offset of the driven block is taken out of the RK4
  // problem and restored as an exact phase.
  double shift = 0.0;
  for (int k = 0; k < 6; ++k)
    if (ref.ms[k] == 0) shift += 0.5 * ref.e[k];
  const auto h = [&](double t) {
    const double f = p.f_start + (p.f_end - p.f_start) * t / t_us;
    oracle::CMatrix m = oracle::CMatrix::Zero(6, 6);
    for (int k = 0; k < 6; ++k)
      if (ref.ms[k] != 1) m(k, k) = ref.e[k] - (ref.ms[k] == -1 ? f : 0.0) - shift;
    for (int k = 0; k < 6; ++k)
      for (int l = 0; l < 6; ++l)
        if (ref.ms[k] == 0 && ref.ms[l] == -1) {
          m(k, l) = 0.5 * p.rabi * d(k, l);
          m(l, k) = 0.5 * p.rabi * d(l, k);
        }
    return m;
  };
  // The undriven m_s = +1 levels sit ~3 GHz away in this frame; they only
  // pick up a phase, applied exactly.  RK4 runs on the other four.
  oracle::CMatrix u = oracle::CMatrix::Zero(6, 6);
  for (int j = 0; j < 6; ++j) {
    if (ref.ms[j] == 1) {
      u(j, j) = std::polar(1.0, -2.0 * kPi * ref.e[j] * t_us);
      continue;
    }
    const auto col = oracle::rk4(h, Eigen::VectorXcd::Unit(6, j), t_us, n_steps);
    for (int k = 0; k < 6; ++k)
      if (ref.ms[k] != 1) u(k, j) = col(k) * std::polar(1.0, -2.0 * kPi * shift * t_us);
  }
  return u;
}

// (1 - p) rho + p |0><0| (x) Tr_e rho, product basis.
oracle::CMatrix reference_reset(const oracle::CMatrix& rho, double p) {
  oracle::CMatrix rn = oracle::CMatrix::Zero(2, 2);
  for (int el = 0; el < 3; ++el)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) rn(a, b) += rho(2 * el + a, 2 * el + b);
  oracle::CMatrix out = (1.0 - p) * rho;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) out(2 + a, 2 + b) += p * rn(a, b);
  return out;
}

double reference_polarization(const Reference& ref, const oracle::CMatrix& rho_prod) {
  std::complex<double> r00 = 0.0, r01 = 0.0, r11 = 0.0;
  for (int el = 0; el < 3; ++el) {
    r00 += rho_prod(2 * el, 2 * el);
    r11 += rho_prod(2 * el + 1, 2 * el + 1);
    r01 += rho_prod(2 * el, 2 * el + 1);
  }
  return ref.axis(0) * 2.0 * r01.real() - ref.axis(1) * 2.0 * r01.imag() + ref.axis(2) * (r00 - r11).real();
}

}  // namespace

TEST_CASE("SweepProgram") {
  SweepProgram p{2000.0, 2003.0, 3333.0, 0.1, 4};
  CHECK_NOTHROW(p.validate());
  CHECK(p.direction() == +1);
  CHECK(p.reversed().direction() == -1);
  CHECK(p.band() == doctest::Approx(3.0));
  CHECK(p.sweep_time() == doctest::Approx(1.0 / 3333.0));
  // sweep rate = band / t_r
  CHECK(p.sweep_rate() == doctest::Approx(p.band() / p.sweep_time()));
  CHECK_THROWS_AS((SweepProgram{1.0, 1.0, 10.0, 0.1, 1}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((SweepProgram{1.0, 2.0, 0.0, 0.1, 1}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((SweepProgram{1.0, 2.0, 10.0, -0.1, 1}.validate()), std::invalid_argument);
}

TEST_CASE("Landau-Zener two-level crossing") {
  // x = pi g^2 / (2 v) in angular units = pi^2 rabi^2 / rate for rabi in MHz
  // and rate in MHz/us.  Ten points from diabatic to adiabatic.
  const double xs[] = {0.05, 0.1, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0};
  const double rabis[] = {0.05, 0.1, 0.2};
  for (int i = 0; i < 10; ++i) {
    const double rabi = rabis[i % 3];
    const double rate = kPi * kPi * rabi * rabi / xs[i];  // MHz/us
    // A finite sweep leaves a ripple of about 2 (rabi / band) sqrt(P (1 - P))
    // in the transfer probability P; the band is sized so that this stays
    // near 0.2% of P.
    const double p_lz = 1.0 - std::exp(-xs[i]);
    const double band = std::max(400.0, 1000.0 * std::sqrt((1.0 - p_lz) / p_lz)) * rabi;
    const auto m = ChirpModel::two_level(0.0);
    SweepProgram p{-0.5 * band, 0.5 * band, rate / band * 1e6, rabi, 1};
    const auto r = propagate_chirp(m, p, default_dt(m, p), initial_density(m));
    const double transfer = 1.0 - r.trace.electron_population_ms0.back();
    const double expected = oracle::lz_transfer(2.0 * kPi * rabi, 2.0 * kPi * rate);
    CAPTURE(rabi);
    CAPTURE(rate);
    CHECK(std::abs(transfer - expected) <= 0.01 * expected);
  }
}

TEST_CASE("rotating-frame generator") {
  const DnpScenario sc;
  const auto h6 = spinsys::build_coupled_hamiltonian(sc.constants, spinsys::field_vector(sc.field_mt, sc.orientation),
                                                     sc.hyperfine);
  const auto m = sc.model();
  const double c = m.addressed_center();

  SUBCASE("4x4, Hermitian, diagonal without drive") {
    const auto g = rotating_frame_generator(h6, c, 0.1);
    CHECK(g.dim() == 4);
    CHECK(spinsys::HermitianOperator::is_hermitian(g.matrix()));
    const auto g0 = rotating_frame_generator(h6, c, 0.0);
    CHECK(g0.matrix().isDiagonal(0.0));
    CHECK(rotating_frame_generator(h6, c, 0.1, Subspace::Full).dim() == 6);
  }

  SUBCASE("on resonance without hyperfine the gap is rabi") {
    // Field along the NV axis, no hyperfine: the 4x4 splits into one
    // two-level problem per nuclear state, both resonant at delta + gamma_e B.
    const double b = 10.0;
    const auto h0 = spinsys::build_coupled_hamiltonian(sc.constants, spinsys::field_vector(b, {0.0, 0.0}),
                                                       spinsys::HyperfineTensor{});
    const double f0 = sc.constants.delta + sc.constants.gamma_e * b;
    const double zn = 0.5 * sc.constants.gamma_n * b;
    for (double rabi : {0.05, 0.3}) {
      const auto ev = oracle::char_poly_eigenvalues(rotating_frame_generator(h0, f0, rabi).matrix());
      std::vector<double> expected{-zn - rabi / 2, -zn + rabi / 2, zn - rabi / 2, zn + rabi / 2};
      std::sort(expected.begin(), expected.end());
      for (int k = 0; k < 4; ++k) CHECK(ev[k] == doctest::Approx(expected[k]).epsilon(1e-9));
    }
  }

  SUBCASE("level diagram across the band") {
    // Eigenvalues along a detuning scan agree with characteristic-polynomial
    // roots; with drive every adjacent pair stays open, without drive the
    // diabatic levels cross.
    double min_gap_driven = 1e9, min_gap_free = 1e9;
    for (int i = 0; i <= 120; ++i) {
      const double f = c - 1.5 + 3.0 * i / 120.0;
      const auto g = rotating_frame_generator(h6, f, 0.1).matrix();
      const auto ref = oracle::char_poly_eigenvalues(g);
      const auto es = spinsys::eig_hermitian(spinsys::HermitianOperator(g));
      for (int k = 0; k < 4; ++k) CHECK(std::abs(es.energies(k) - ref[k]) <= 1e-9 * (1.0 + std::abs(ref[k])));
      for (int k = 0; k + 1 < 4; ++k) min_gap_driven = std::min(min_gap_driven, ref[k + 1] - ref[k]);
      const auto free = oracle::char_poly_eigenvalues(rotating_frame_generator(h6, f, 0.0).matrix());
      for (int k = 0; k + 1 < 4; ++k) min_gap_free = std::min(min_gap_free, free[k + 1] - free[k]);
    }
    CHECK(min_gap_driven > 1e-3);
    CHECK(min_gap_free < 0.02);
  }

  SUBCASE("non-separable manifolds rejected") {
    // Near 102.5 mT along the NV axis m_s = -1 crosses m_s = 0.
    const auto hx = spinsys::build_coupled_hamiltonian(sc.constants, spinsys::field_vector(102.5, {0.0, 0.0}),
                                                       sc.hyperfine);
    CHECK_THROWS_AS(ChirpModel::from_coupled(hx, Subspace::MinusOne), ComputationError);
  }
}

TEST_CASE("propagation") {
  const DnpScenario sc;
  const auto m = sc.model();
  const auto p = default_program(m);
  const double dt = default_dt(m, p);

  SUBCASE("no drive: populations frozen") {
    auto q = p;
    q.rabi = 0.0;
    const auto rho0 = initial_density(m, 0.3);
    const auto r = propagate_chirp(m, q, dt, rho0, 100);
    for (Eigen::Index k = 0; k < 6; ++k) CHECK(std::abs(r.density(k, k) - rho0(k, k)) < 1e-12);
    // The m_s = 0 eigenstates are not exactly antiparallel in their nuclear
    // part, so the polarization along the axis wobbles slightly.
    for (double v : r.trace.nuclear_polarization) CHECK(std::abs(v - 0.3) < 1e-3);
    // The product-basis m_s = 0 projector is not diagonal in the eigenbasis
    // (field-induced mixing of order (gamma_e B sin(theta) / delta)^2), so its
    // expectation carries a small fast oscillation.
    for (double v : r.trace.electron_population_ms0) CHECK(std::abs(v - 1.0) < 0.03);
  }

  SUBCASE("unitarity at the default step") {
    const auto r = propagate_chirp(m, p, dt, initial_density(m, 0.0), 1000);
    CHECK(r.max_norm_drift <= 1e-8);
    const Eigen::MatrixXcd& rho = r.density;
    CHECK((rho - rho.adjoint()).norm() < 1e-12);
    // Purity is conserved by a unitary map: the initial state has two equal
    // eigenvalues of 1/2.
    CHECK((rho * rho).trace().real() == doctest::Approx(0.5).epsilon(1e-9));
    for (std::size_t i = 0; i < r.trace.size(); ++i) {
      CHECK(std::abs(r.trace.nuclear_polarization[i]) <= 1.0 + 1e-12);
      CHECK(r.trace.electron_population_ms0[i] >= -1e-12);
      CHECK(r.trace.electron_population_ms0[i] <= 1.0 + 1e-12);
    }
  }

  SUBCASE("halving the step") {
    const double a = propagate_chirp(m, p, dt, initial_density(m, 0.0)).trace.nuclear_polarization.back();
    const double b = propagate_chirp(m, p, dt / 2.0, initial_density(m, 0.0)).trace.nuclear_polarization.back();
    CHECK(std::abs(a - b) < 1e-4);
  }

  SUBCASE("step-size precondition") {
    CHECK_THROWS_AS(propagate_chirp(m, p, 0.06 / m.max_spread(p) * 1e-6, initial_density(m, 0.0)),
                    std::invalid_argument);
  }

  SUBCASE("trace bookkeeping") {
    const auto r = propagate_chirp(m, p, dt, initial_density(m, 0.0), 5000, 2.0);
    CHECK(r.trace.times.front() == 2.0);
    CHECK(r.trace.times.back() == doctest::Approx(2.0 + p.sweep_time()).epsilon(1e-12));
    for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace.times[i] > r.trace.times[i - 1]);
  }
}

TEST_CASE("ratchet against the reference map") {
  const DnpScenario sc;
  const auto h6 = spinsys::build_coupled_hamiltonian(sc.constants, spinsys::field_vector(sc.field_mt, sc.orientation),
                                                     sc.hyperfine);
  const auto m = sc.model();
  const auto p = default_program(m);
  const auto ref = reference_eigensystem(h6);

  // RK4 at about 0.005 cycles of the largest eigenvalue per step.
  const auto steps = static_cast<long>(std::ceil(1e6 / p.repetition_rate * m.max_spread(p) / 0.005));
  const auto u = reference_sweep(ref, p, steps);

  for (double p_repol : {1.0, 0.6}) {
    const auto lib = ratchet_cycle(m, p, {p_repol}, 4, default_dt(m, p), initial_density(m, 0.0));
    // Electron in m_s = 0, nucleus unpolarized, product basis.
    oracle::CMatrix rho = oracle::CMatrix::Zero(6, 6);
    rho(2, 2) = rho(3, 3) = 0.5;
    for (int cyc = 0; cyc < 4; ++cyc) {
      const oracle::CMatrix rho_eig = u * (ref.v.adjoint() * rho * ref.v) * u.adjoint();
      rho = ref.v * rho_eig * ref.v.adjoint();
      CAPTURE(p_repol);
      CAPTURE(cyc);
      CHECK(std::abs(reference_polarization(ref, rho) - lib.trace.nuclear_polarization[cyc + 1]) < 1e-5);
      rho = reference_reset(rho, p_repol);
    }
    // Final library state (after reset) against the reference state.
    const oracle::CMatrix lib_prod = m.basis() * lib.density * m.basis().adjoint();
    CHECK((lib_prod - rho).norm() < 1e-5);
  }
}

TEST_CASE("ratchet behaviour") {
  const DnpScenario sc;
  const auto m = sc.model();
  const auto p = default_program(m);
  const double dt = default_dt(m, p);

  SUBCASE("monotone approach with full reset") {
    const auto r = ratchet_cycle(m, p, {1.0}, 10, dt, initial_density(m, 0.0));
    REQUIRE(r.trace.size() == 11);
    for (std::size_t i = 1; i < r.trace.size(); ++i)
      CHECK(std::abs(r.trace.nuclear_polarization[i]) > std::abs(r.trace.nuclear_polarization[i - 1]));
    // Gains shrink as the fixed point is approached.
    for (std::size_t i = 2; i < r.trace.size(); ++i)
      CHECK(std::abs(r.trace.nuclear_polarization[i] - r.trace.nuclear_polarization[i - 1]) <
            std::abs(r.trace.nuclear_polarization[i - 1] - r.trace.nuclear_polarization[i - 2]));
    CHECK(r.max_norm_drift <= 1e-8 * 10);
  }

  SUBCASE("no reset after the first sweep") {
    // With p_repol = 0 later sweeps are unitary: no fresh electron
    // polarization enters, the state spectrum is fixed and the nucleus only
    // trades polarization back and forth with the electron.
    const auto first = ratchet_cycle(m, p, {1.0}, 1, dt, initial_density(m, 0.0));
    const auto rest = ratchet_cycle(m, p, {0.0}, 9, dt, first.density);
    const auto full = ratchet_cycle(m, p, {1.0}, 10, dt, initial_density(m, 0.0));
    const Eigen::MatrixXcd& a = first.density;
    const Eigen::MatrixXcd& b = rest.density;
    CHECK((b * b).trace().real() == doctest::Approx((a * a).trace().real()).epsilon(1e-9));
    CHECK(((b * b * b).trace() - (a * a * a).trace()).real() == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
    double peak = 0.0;
    for (double v : rest.trace.nuclear_polarization) peak = std::max(peak, std::abs(v));
    CHECK(peak < 0.5 * std::abs(full.trace.nuclear_polarization.back()));
  }

  SUBCASE("direction reversal mid-run") {
    const auto up = ratchet_cycle(m, p, {1.0}, 10, dt, initial_density(m, 0.0));
    const auto down = ratchet_cycle(m, p.reversed(), {1.0}, 10, dt, up.density, 10 * p.sweep_time());
    CHECK(up.trace.nuclear_polarization.back() > 0.5);
    for (std::size_t i = 1; i < down.trace.size(); ++i)
      CHECK(down.trace.nuclear_polarization[i] < down.trace.nuclear_polarization[i - 1]);
    CHECK(down.trace.nuclear_polarization.back() < -0.5);
  }

  SUBCASE("sweep-direction antisymmetry") {
    const double up = final_polarization(m, p);
    const double down = final_polarization(m, p.reversed());
    CHECK(up > 0.0);
    CHECK(down < 0.0);
    CHECK(std::abs(up + down) <= 0.05 * std::abs(up - down) / 2.0);
  }

  SUBCASE("invalid repolarization") {
    CHECK_THROWS_AS(apply_repolarization(m, initial_density(m, 0.0), {1.5}), std::invalid_argument);
  }
}

TEST_CASE("sign of the hyperfine coupling swaps the efficient manifold") {
  // With A_zz > 0 the m_s = -1 sweep builds polarization and the m_s = +1
  // sweep barely does; with A_zz < 0 the roles swap.
  auto run = [](double azz, Subspace s) {
    DnpScenario sc;
    sc.hyperfine = spinsys::HyperfineTensor::with_default_transverse(azz);
    sc.subspace = s;
    const auto m = sc.model();
    return final_polarization(m, default_program(m));
  };
  const double pos_minus = run(0.5, Subspace::MinusOne), pos_plus = run(0.5, Subspace::PlusOne);
  const double neg_minus = run(-0.5, Subspace::MinusOne), neg_plus = run(-0.5, Subspace::PlusOne);
  CHECK(std::abs(pos_minus) > 20.0 * std::abs(pos_plus));
  CHECK(std::abs(neg_plus) > 20.0 * std::abs(neg_minus));
  CHECK(pos_minus > 0.3);
  CHECK(neg_plus > 0.3);
}

TEST_CASE("rate model") {
  const RateModelParams t{1.0, std::sqrt(50.0), std::sqrt(277.0)};

  SUBCASE("limits and sign") {
    CHECK(rate_model_eval(t, 1e-3) < 1e-300);
    CHECK(rate_model_eval(t, 1e9) < 1e-6);
    for (double w = 1.0; w < 1e5; w *= 1.7) CHECK(rate_model_eval(t, w) >= 0.0);
    CHECK_THROWS_AS(rate_model_eval(t, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(rate_model_eval(t, -1.0), std::invalid_argument);
  }

  SUBCASE("optimum against a numerical maximizer") {
    rng::Engine e(11);
    for (int i = 0; i < 20; ++i) {
      const RateModelParams q{0.5 + rng::unit_uniform(e), 1.0 + 30.0 * rng::unit_uniform(e),
                              1.0 + 30.0 * rng::unit_uniform(e)};
      const double num = oracle::golden_max([&](double w) { return rate_model_eval(q, w); }, 1e-2, 1e6);
      CHECK(rate_model_optimum(q) == doctest::Approx(num).epsilon(1e-6));
    }
  }

  SUBCASE("noiseless fit") {
    std::vector<RateSample> s;
    for (int i = 0; i < 20; ++i) {
      const double w = std::pow(20000.0, i / 19.0);
      s.push_back({w, rate_model_eval(t, w), 0.05 * rate_model_eval(t, w)});
    }
    const auto f = rate_model_fit(s);
    CHECK(f.converged);
    CHECK(f.params.amplitude == doctest::Approx(t.amplitude).epsilon(1e-6));
    CHECK(f.params.lambda == doctest::Approx(t.lambda).epsilon(1e-6));
    CHECK(f.params.omega == doctest::Approx(t.omega).epsilon(1e-6));
    CHECK(f.optimum_rate == doctest::Approx(rate_model_optimum(t)).epsilon(1e-6));
    CHECK(f.starts >= 8);
    CHECK(f.gradient_norm < 1e-8 * std::max(f.chi2, 1e-30) + 1e-20);
  }

  SUBCASE("degenerate and undersized designs") {
    std::vector<RateSample> same(6, RateSample{100.0, 0.5, 0.05});
    CHECK_THROWS_AS(rate_model_fit(same), std::invalid_argument);
    std::vector<RateSample> few{{1, 0.1, 0.1}, {10, 0.5, 0.1}, {100, 0.7, 0.1}, {1000, 0.2, 0.1}};
    CHECK_THROWS_AS(rate_model_fit(few), std::invalid_argument);
  }

  SUBCASE("seed 3: truth inside the reported band") {
    rng::Engine e(3);
    std::vector<RateSample> s;
    for (int i = 0; i < 20; ++i) {
      const double w = std::pow(20000.0, i / 19.0);
      const double y = rate_model_eval(t, w);
      s.push_back({w, y * (1.0 + 0.05 * rng::standard_normal(e)), 0.05 * y});
    }
    const auto f = rate_model_fit(s);
    CHECK(f.converged);
    CHECK(f.ci95.first <= rate_model_optimum(t));
    CHECK(f.ci95.second >= rate_model_optimum(t));
    CHECK(f.ci05.first >= f.ci95.first);
    CHECK(f.ci05.second <= f.ci95.second);
    CHECK(f.ci05.first <= f.optimum_rate * 1.01);
  }
}

TEST_CASE("shipped optimal rates") {
  const auto& d = kShippedRates;
  CHECK(d.plus == 147.0);
  CHECK(d.minus == 133.0);
  CHECK(d.both == 73.0);
  CHECK(std::abs(d.both - d.plus / 2.0) <= d.both_uncertainty);
}

TEST_CASE("rate model Monte Carlo") {
  // 20 log-spaced rates over 1 Hz - 20 kHz (four decades around the 147 Hz
  // optimum), 5% relative Gaussian noise, 100 seeds; every parameter of
  // every fit within 5%.
  const RateModelParams t{1.0, std::sqrt(50.0), std::sqrt(277.0)};
  int covered = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    rng::Engine e(seed);
    std::vector<RateSample> s;
    for (int i = 0; i < 20; ++i) {
      const double w = std::pow(20000.0, i / 19.0);
      const double y = rate_model_eval(t, w);
      s.push_back({w, y * (1.0 + 0.05 * rng::standard_normal(e)), 0.05 * y});
    }
    const auto f = rate_model_fit(s, {500, seed});
    CAPTURE(seed);
    CHECK(f.converged);
    CHECK(std::abs(f.params.amplitude / t.amplitude - 1.0) <= 0.05);
    CHECK(std::abs(f.params.lambda / t.lambda - 1.0) <= 0.05);
    CHECK(std::abs(f.params.omega / t.omega - 1.0) <= 0.05);
    covered += f.ci95.first <= rate_model_optimum(t) && rate_model_optimum(t) <= f.ci95.second;
  }
  // Nominal 95% band: 100 draws give 90 or more with probability > 0.98.
  CHECK(covered >= 90);
}
