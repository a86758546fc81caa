// NV-center spin Hamiltonians: the bare spin-1 electron and the electron
// coupled to a single 13C nucleus (spin-1/2).
//
// Units throughout: MHz for energies and frequencies, mT for fields,
// radians for angles.  Spin-1 matrices use the standard angular-momentum
// convention with S_z = diag(1, 0, -1), basis ordering (+1, 0, -1).
// Coupled operators are ordered electron (x) nucleus, index = 2*e + n.
#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

namespace nvdnp::spinsys {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

struct PhysicalConstants {
  double delta = 2870.0;     // zero-field splitting, MHz
  double gamma_e = 28.0;     // electron, MHz/mT
  double gamma_n = 0.01071;  // 13C, MHz/mT

  void validate() const;
};

struct Orientation {
  double theta = 0.0;  // polar angle of the N-V axis w.r.t. the field, [0, pi]
  double phi = 0.0;    // azimuth, [0, 2 pi)
};

/// Field vector in the NV frame for magnitude `b_mt` along orientation `o`.
Eigen::Vector3d field_vector(double b_mt, const Orientation& o);

/// Square complex matrix that is conjugate-symmetric within 1e-12 relative.
/// Construction validates; the stored matrix is symmetrized exactly.
class HermitianOperator {
 public:
  explicit HermitianOperator(CMatrix m);

  const CMatrix& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }
  Complex operator()(Eigen::Index r, Eigen::Index c) const { return m_(r, c); }
  Complex trace() const { return m_.trace(); }

  static bool is_hermitian(const CMatrix& m, double rel_tol = 1e-12);

 private:
  CMatrix m_;
};

struct EigenSystem {
  RVector energies;  // ascending
  CMatrix vectors;   // column k is |v_k>
};

/// Diagonalizes a Hermitian operator.  Energies ascend; each eigenvector's
/// first component with modulus above 1e-12 is made real-positive.
/// Residual and orthonormality bounds are checked on every call.
EigenSystem eig_hermitian(const HermitianOperator& h);

struct HyperfineTensor {
  double a_zz = 0.0;
  double a_zx = 0.0;
  double a_xx = 0.0;
  double a_yy = 0.0;
  double a_xz = 0.0;

  /// Tensor with the transverse term defaulted to 0.3 |a_zz|.
  static HyperfineTensor with_default_transverse(double a_zz);
};

struct Transition {
  double frequency = 0.0;  // MHz, E_l - E_k >= 0
  double intensity = 0.0;  // dimensionless, clamped >= 0
  std::pair<std::size_t, std::size_t> pair;
};

struct TransitionTable {
  std::vector<Transition> entries;
};

// Spin operators.
const std::array<CMatrix, 3>& spin1_ops();    // Sx, Sy, Sz (3x3)
const std::array<CMatrix, 3>& spin_half_ops();  // Ix, Iy, Iz (2x2)
CMatrix kron(const CMatrix& a, const CMatrix& b);

/// H = delta Sz^2 + gamma_e B (Sx sin(theta) + Sz cos(theta)).
HermitianOperator build_electron_hamiltonian(const PhysicalConstants& c, double b_pol,
                                             const Orientation& o);

/// rho = 1 - Sz^2 / 3, unnormalized.
HermitianOperator initial_electron_density(const PhysicalConstants& c);

/// P = sum_{k<l} sum_m |<v_k|S_m|v_l>|^2 max(0, <v_k|rho|v_k> - <v_l|rho|v_l>).
TransitionTable transition_table(const EigenSystem& es, const HermitianOperator& rho);

/// Sum of all transition intensities for one orientation.
double total_intensity(const TransitionTable& t);

/// Electron-nucleus Hamiltonian (6x6):
/// delta Sz^2 - gamma_e B.S - gamma_n B.I + A_zz SzIz + A_yy SyIy + A_xx SxIx
///   + A_xz SxIz + A_zx SzIx.
///
/// `electron_zeeman` selects the sign of the electron Zeeman term.  Negative
/// is the form above; Positive (+gamma_e B.S, the sign of the bare electron
/// Hamiltonian) is the convention under which the second-order m_s = 0
/// nuclear frequency of effective_larmor() adds to gamma_n B.
enum class ZeemanSign { Negative, Positive };
HermitianOperator build_coupled_hamiltonian(const PhysicalConstants& c,
                                            const Eigen::Vector3d& b_vec,
                                            const HyperfineTensor& hf,
                                            ZeemanSign electron_zeeman = ZeemanSign::Negative);

/// 13C splittings within the m_s = +1 and m_s = -1 manifolds.
struct NuclearSplittings {
  double omega_plus = 0.0;
  double omega_minus = 0.0;
};
NuclearSplittings nuclear_splittings(const PhysicalConstants& c, const HyperfineTensor& hf,
                                     double b_pol, const Orientation& o);

/// Second-order estimate of the nuclear frequency in the m_s = 0 manifold.
/// `perturbative` is false when gamma_e B / delta >= 0.5; the value is still
/// returned.
struct EffectiveLarmor {
  double omega = 0.0;
  bool perturbative = true;
};
EffectiveLarmor effective_larmor(const PhysicalConstants& c, const HyperfineTensor& hf,
                                 double b_pol, const Orientation& o);

/// True in the DNP-favourable regime, effective Larmor < |A_zz|.
bool larmor_below_hyperfine(const PhysicalConstants& c, const HyperfineTensor& hf,
                            double b_pol, const Orientation& o);

/// Electron-manifold label of each coupled eigenstate, obtained from the
/// dominant m_s weight.  Index 0 -> m_s=+1, 1 -> m_s=0, 2 -> m_s=-1 (the
/// spin-1 basis order).
struct ManifoldAssignment {
  std::vector<int> ms;           // per eigenstate, one of {+1, 0, -1}
  std::vector<double> purity;    // dominant weight per eigenstate
};
ManifoldAssignment assign_manifolds(const EigenSystem& es6);

}  // namespace nvdnp::spinsys
