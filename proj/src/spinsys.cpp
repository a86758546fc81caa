#include "nvdnp/spinsys.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nvdnp::spinsys {

namespace {

constexpr Complex kI{0.0, 1.0};

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

void PhysicalConstants::validate() const {
  require(delta > 0.0 && gamma_e > 0.0 && gamma_n > 0.0,
          "physical constants must be strictly positive");
}

Eigen::Vector3d field_vector(double b_mt, const Orientation& o) {
  return {b_mt * std::sin(o.theta) * std::cos(o.phi), b_mt * std::sin(o.theta) * std::sin(o.phi),
          b_mt * std::cos(o.theta)};
}

// --- HermitianOperator -------------------------------------------------------

bool HermitianOperator::is_hermitian(const CMatrix& m, double rel_tol) {
  if (m.rows() != m.cols() || m.rows() == 0) return false;
  const double scale = std::max(m.norm(), 1.0);
  return (m - m.adjoint()).norm() <= rel_tol * scale;
}

HermitianOperator::HermitianOperator(CMatrix m) {
  if (!is_hermitian(m)) throw std::invalid_argument("operator is not Hermitian");
  m_ = 0.5 * (m + m.adjoint());
}

EigenSystem eig_hermitian(const HermitianOperator& h) {
  const CMatrix& m = h.matrix();
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(m);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");

  EigenSystem es{solver.eigenvalues(), solver.eigenvectors()};
  const Eigen::Index n = m.rows();

  for (Eigen::Index k = 0; k < n; ++k) {
    auto v = es.vectors.col(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(v(i)) > 1e-12) {
        v *= std::conj(v(i)) / std::abs(v(i));
        v(i) = std::abs(v(i));
        break;
      }
    }
  }

  const double hnorm = es.energies.cwiseAbs().maxCoeff();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double r = (m * es.vectors.col(k) - es.energies(k) * es.vectors.col(k)).norm();
    if (r > 1e-9 * hnorm + 1e-300)
      throw std::runtime_error("eigen residual bound violated");
  }
  const CMatrix gram = es.vectors.adjoint() * es.vectors;
  if ((gram - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-10)
    throw std::runtime_error("eigenvectors not orthonormal");
  return es;
}

HyperfineTensor HyperfineTensor::with_default_transverse(double a_zz) {
  HyperfineTensor hf;
  hf.a_zz = a_zz;
  hf.a_zx = 0.3 * std::abs(a_zz);
  return hf;
}

// --- operators -----------------------------------------------------------------

const std::array<CMatrix, 3>& spin1_ops() {
  static const std::array<CMatrix, 3> ops = [] {
    const double r = 1.0 / std::sqrt(2.0);
    CMatrix sx = CMatrix::Zero(3, 3), sy = CMatrix::Zero(3, 3), sz = CMatrix::Zero(3, 3);
    sx(0, 1) = sx(1, 0) = sx(1, 2) = sx(2, 1) = r;
    sy(0, 1) = -kI * r;
    sy(1, 0) = kI * r;
    sy(1, 2) = -kI * r;
    sy(2, 1) = kI * r;
    sz(0, 0) = 1.0;
    sz(2, 2) = -1.0;
    return std::array<CMatrix, 3>{sx, sy, sz};
  }();
  return ops;
}

const std::array<CMatrix, 3>& spin_half_ops() {
  static const std::array<CMatrix, 3> ops = [] {
    CMatrix ix = CMatrix::Zero(2, 2), iy = CMatrix::Zero(2, 2), iz = CMatrix::Zero(2, 2);
    ix(0, 1) = ix(1, 0) = 0.5;
    iy(0, 1) = -0.5 * kI;
    iy(1, 0) = 0.5 * kI;
    iz(0, 0) = 0.5;
    iz(1, 1) = -0.5;
    return std::array<CMatrix, 3>{ix, iy, iz};
  }();
  return ops;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// --- Hamiltonians --------------------------------------------------------------

HermitianOperator build_electron_hamiltonian(const PhysicalConstants& c, double b_pol,
                                             const Orientation& o) {
  c.validate();
  require(b_pol >= 0.0, "field magnitude must be non-negative");
  const auto& s = spin1_ops();
  CMatrix h = c.delta * s[2] * s[2] +
              c.gamma_e * b_pol * (s[0] * std::sin(o.theta) + s[2] * std::cos(o.theta));
  return HermitianOperator(std::move(h));
}

HermitianOperator initial_electron_density(const PhysicalConstants&) {
  const auto& s = spin1_ops();
  return HermitianOperator(CMatrix::Identity(3, 3) - s[2] * s[2] / 3.0);
}

TransitionTable transition_table(const EigenSystem& es, const HermitianOperator& rho) {
  const Eigen::Index n = es.vectors.rows();
  if (n != 3 || rho.dim() != 3 || es.energies.size() != 3)
    throw std::invalid_argument("transition_table expects a 3x3 electron eigensystem");
  const auto& s = spin1_ops();

  std::array<CMatrix, 3> s_eig;
  for (int m = 0; m < 3; ++m) s_eig[m] = es.vectors.adjoint() * s[m] * es.vectors;
  const CMatrix rho_eig = es.vectors.adjoint() * rho.matrix() * es.vectors;

  TransitionTable t;
  t.entries.reserve(3);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index l = k + 1; l < n; ++l) {
      double prob = 0.0;
      for (int m = 0; m < 3; ++m) prob += std::norm(s_eig[m](k, l));
      const double pop = rho_eig(k, k).real() - rho_eig(l, l).real();
      t.entries.push_back({es.energies(l) - es.energies(k), prob * std::max(pop, 0.0),
                           {static_cast<std::size_t>(k), static_cast<std::size_t>(l)}});
    }
  }
  return t;
}

double total_intensity(const TransitionTable& t) {
  double sum = 0.0;
  for (const auto& e : t.entries) sum += e.intensity;
  return sum;
}

HermitianOperator build_coupled_hamiltonian(const PhysicalConstants& c,
                                            const Eigen::Vector3d& b_vec,
                                            const HyperfineTensor& hf, ZeemanSign electron_zeeman) {
  c.validate();
  const double ge = electron_zeeman == ZeemanSign::Negative ? -c.gamma_e : c.gamma_e;
  const auto& s = spin1_ops();
  const auto& i = spin_half_ops();
  const CMatrix e1 = CMatrix::Identity(3, 3);
  const CMatrix n1 = CMatrix::Identity(2, 2);

  CMatrix h = kron(c.delta * s[2] * s[2], n1);
  for (int a = 0; a < 3; ++a) {
    h += ge * b_vec(a) * kron(s[a], n1);
    h -= c.gamma_n * b_vec(a) * kron(e1, i[a]);
  }
  h += hf.a_zz * kron(s[2], i[2]);
  h += hf.a_yy * kron(s[1], i[1]);
  h += hf.a_xx * kron(s[0], i[0]);
  h += hf.a_xz * kron(s[0], i[2]);
  h += hf.a_zx * kron(s[2], i[0]);
  return HermitianOperator(std::move(h));
}

NuclearSplittings nuclear_splittings(const PhysicalConstants& c, const HyperfineTensor& hf,
                                     double b_pol, const Orientation& o) {
  const double zeeman = c.gamma_n * b_pol * std::cos(o.theta);
  return {std::hypot(hf.a_zz - zeeman, hf.a_zx), std::hypot(hf.a_zz + zeeman, hf.a_zx)};
}

EffectiveLarmor effective_larmor(const PhysicalConstants& c, const HyperfineTensor& hf,
                                 double b_pol, const Orientation& o) {
  const double ratio = c.gamma_e * b_pol / c.delta;
  const double cp = std::cos(o.phi), sp = std::sin(o.phi);
  const double omega =
      c.gamma_n * b_pol +
      2.0 * ratio * std::sin(o.theta) * (std::hypot(hf.a_xx, hf.a_zx) * cp * cp + hf.a_yy * sp * sp);
  return {omega, ratio < 0.5};
}

bool larmor_below_hyperfine(const PhysicalConstants& c, const HyperfineTensor& hf, double b_pol,
                            const Orientation& o) {
  return effective_larmor(c, hf, b_pol, o).omega < std::abs(hf.a_zz);
}

ManifoldAssignment assign_manifolds(const EigenSystem& es6) {
  const Eigen::Index n = es6.vectors.cols();
  if (es6.vectors.rows() != 6) throw std::invalid_argument("expected a 6-level eigensystem");
  ManifoldAssignment out;
  out.ms.resize(n);
  out.purity.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    std::array<double, 3> w{};
    for (int e = 0; e < 3; ++e)
      w[e] = es6.vectors.col(k).segment(2 * e, 2).squaredNorm();
    const auto it = std::max_element(w.begin(), w.end());
    const int e = static_cast<int>(it - w.begin());
    out.ms[k] = 1 - e;
    out.purity[k] = *it;
  }
  return out;
}

}  // namespace nvdnp::spinsys
