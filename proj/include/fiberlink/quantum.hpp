#pragma once

#include <span>
#include <string>

#include "fiberlink/linalg.hpp"

namespace fiberlink {

/// Pauli operator labels, in the order used for every Pauli-basis index.
enum class Pauli { I = 0, X = 1, Y = 2, Z = 3 };

inline constexpr Pauli kPaulis[4] = {Pauli::I, Pauli::X, Pauli::Y, Pauli::Z};

const Mat2& pauli_matrix(Pauli p);
char pauli_name(Pauli p);

/// Which photon of a pair an operation acts on (1 = ancilla, 2 = transmitted).
enum class Side { First = 1, Second = 2 };

/// Single-qubit polarization kets. H is basis index 0, V is index 1.
namespace kets {
Ket2 h();
Ket2 v();
Ket2 d();
Ket2 a();
Ket2 r();
Ket2 l();
/// Orthogonal complement (the other PBS output port).
Ket2 orthogonal(const Ket2& k);
}  // namespace kets

/// A trace-one, Hermitian, positive-semidefinite matrix over one or two qubits.
///
/// Two-qubit matrices use the basis order (HH, HV, VH, VV). Construction
/// validates every invariant and throws InvalidArgument on violation.
class DensityMatrix {
 public:
  static constexpr double kHermitianTol = 1e-12;
  static constexpr double kTraceTol = 1e-10;
  static constexpr double kPsdTol = 1e-10;

  explicit DensityMatrix(CMatrix m);

  /// Projects an almost-valid matrix onto the state space before validating.
  static DensityMatrix nearest(const CMatrix& m);
  static DensityMatrix pure(const Eigen::VectorXcd& ket);

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMatrix& matrix() const { return m_; }
  Complex operator()(int i, int j) const { return m_(i, j); }

 private:
  CMatrix m_;
};

/// One analysis setting: the PBS "transmitted" state for each photon. The four
/// outcomes of a setting are (ψ1,ψ2), (ψ1,ψ2⊥), (ψ1⊥,ψ2), (ψ1⊥,ψ2⊥).
struct ProjectorSetting {
  std::string label1;
  std::string label2;
  Ket2 qubit1;
  Ket2 qubit2;

  /// Labels from {H, V, D, A, R, L}.
  static ProjectorSetting from_labels(const std::string& a, const std::string& b);
  void validate() const;
  /// Product ket of outcome k (bit 1: photon 1 flipped, bit 0: photon 2 flipped).
  Ket4 outcome_ket(int k) const;
};

/// The polarization ket named by one of H, V, D, A, R, L.
Ket2 ket_from_label(const std::string& label);

DensityMatrix bell_psi_minus();
DensityMatrix maximally_mixed(int dim);
/// v·|Ψ⁻⟩⟨Ψ⁻| + (1−v)·I/4
DensityMatrix werner(double visibility);
DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);

double purity(const DensityMatrix& rho);

/// Wootters concurrence of a two-qubit state.
double concurrence(const DensityMatrix& rho);

/// T_ab = Tr(ρ σ_a⊗σ_b) for a, b in {X, Y, Z}.
Eigen::Matrix3d correlation_matrix(const DensityMatrix& rho);

/// Maximal CHSH value over all local measurement settings (Horodecki criterion).
double chsh_max(const DensityMatrix& rho);

/// Uhlmann fidelity (Tr √(√a b √a))², squared convention.
double fidelity(const DensityMatrix& a, const DensityMatrix& b);

double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

/// Throws InvalidArgument unless Σ K†K = I within 1e-10.
void check_kraus_completeness(std::span<const Mat2> kraus);

/// Σ (I⊗K) ρ (I⊗K)† for Side::Second, (K⊗I) for Side::First.
DensityMatrix apply_channel_one_side(const DensityMatrix& rho, std::span<const Mat2> kraus,
                                     Side side);

DensityMatrix apply_unitary(const DensityMatrix& rho, const CMatrix& u);

DensityMatrix partial_trace(const DensityMatrix& rho, Side keep);

}  // namespace fiberlink
