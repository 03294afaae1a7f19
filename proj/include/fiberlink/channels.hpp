#pragma once

#include <vector>

#include "fiberlink/linalg.hpp"
#include "fiberlink/quantum.hpp"

namespace fiberlink {

/// Single-qubit process matrix in the Pauli basis (I, X, Y, Z):
/// E(ρ) = Σ_mn χ_mn σ_m ρ σ_n, normalized to unit trace.
///
/// Validated on construction: Hermitian within 1e-12, trace one within 1e-10,
/// completely positive (PSD within 1e-10).
class ChiMatrix {
 public:
  explicit ChiMatrix(Mat4 m);

  /// Projects onto the CP, trace-one set before validating.
  static ChiMatrix nearest(const Mat4& m);

  const Mat4& matrix() const { return m_; }
  Complex operator()(Pauli a, Pauli b) const { return m_(static_cast<int>(a), static_cast<int>(b)); }

  /// Weight of the identity component, χ_II.
  double identity_weight() const { return m_(0, 0).real(); }

 private:
  Mat4 m_;
};

/// Trace-preserving Kraus representation.
class KrausSet {
 public:
  explicit KrausSet(std::vector<Mat2> ops);
  const std::vector<Mat2>& operators() const { return ops_; }
  std::size_t size() const { return ops_.size(); }

 private:
  std::vector<Mat2> ops_;
};

/// p·IρI + (1−p)/3·(XρX + YρY + ZρZ)
ChiMatrix depolarizing_chi(double p);

/// Depolarizing channel with a preferred transmission axis: χ_IZ = χ_ZI = c and
/// χ_XY = −i·c, χ_YX = i·c, which keeps the channel trace preserving. Completely
/// positive for |c| ≤ (1−p)/3.
ChiMatrix axis_biased_chi(double p, double iz_offdiag);

KrausSet chi_to_kraus(const ChiMatrix& chi);
ChiMatrix kraus_to_chi(const KrausSet& kraus);

/// Choi state with the channel acting on the second half of |Φ⁺⟩:
/// J = Σ χ_mn (I⊗σ_m)|Φ⁺⟩⟨Φ⁺|(I⊗σ_n).
DensityMatrix chi_to_choi(const ChiMatrix& chi);
ChiMatrix choi_to_chi(const DensityMatrix& choi);
/// Unvalidated basis changes between χ and Choi matrices.
Mat4 chi_matrix_to_choi_matrix(const Mat4& chi);
Mat4 choi_matrix_to_chi_matrix(const Mat4& choi);

DensityMatrix apply_chi(const ChiMatrix& chi, const DensityMatrix& rho_qubit);
DensityMatrix apply_chi_one_side(const ChiMatrix& chi, const DensityMatrix& rho, Side side);

/// Uhlmann fidelity of the two χ matrices treated as states.
double process_fidelity(const ChiMatrix& a, const ChiMatrix& b);

struct ExtremalPurity {
  double min_purity;
  double max_purity;
  Eigen::Vector3d argmin_bloch;
  Eigen::Vector3d argmax_bloch;
};

/// Output purity of the channel for the pure input with Bloch vector `bloch`.
double output_purity(const ChiMatrix& chi, const Eigen::Vector3d& bloch);

/// Best/worst output purity over pure inputs: Fibonacci lattice of `samples`
/// points on the Bloch sphere, then 50 steps of pattern-search refinement.
ExtremalPurity extremal_output_purity(const ChiMatrix& chi, int samples = 2000);

/// Fibonacci lattice on the unit sphere.
std::vector<Eigen::Vector3d> fibonacci_sphere(int n);

DensityMatrix bloch_state(const Eigen::Vector3d& r);

}  // namespace fiberlink
