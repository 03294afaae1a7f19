#include "fiberlink/process_tomography.hpp"

#include "fiberlink/error.hpp"

namespace fiberlink::tomography {

ChiMatrix ancilla_process_tomography(const DensityMatrix& rho_joint, const DensityMatrix& reference_input) {
  if (rho_joint.dim() != 4 || reference_input.dim() != 4) {
    throw InvalidArgument("process tomography needs two-qubit joint and reference states");
  }
  const auto marginal = partial_trace(reference_input, Side::Second);
  if (linalg::hermitian_eig(marginal.matrix()).values.minCoeff() < 1e-9) {
    throw InvalidArgument("reference state has a singular photon-2 marginal");
  }

  // Column (m, n) holds vec((I⊗σ_m) ρ_ref (I⊗σ_n)).
  Eigen::Matrix<Complex, 16, 16> a;
  for (int m = 0; m < 4; ++m) {
    const Mat4 left = linalg::kron(Mat2::Identity(), pauli_matrix(kPaulis[m]));
    for (int n = 0; n < 4; ++n) {
      const Mat4 right = linalg::kron(Mat2::Identity(), pauli_matrix(kPaulis[n]));
      const Mat4 term = left * reference_input.matrix() * right;
      a.col(4 * m + n) = Eigen::Map<const Eigen::Matrix<Complex, 16, 1>>(term.data());
    }
  }
  Eigen::JacobiSVD<Eigen::Matrix<Complex, 16, 16>> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  if (s[15] < 1e-9 * s[0]) {
    throw InvalidArgument("reference state does not determine the channel (rank-deficient inversion)");
  }

  const Mat4 joint = rho_joint.matrix();
  const Eigen::Matrix<Complex, 16, 1> b = Eigen::Map<const Eigen::Matrix<Complex, 16, 1>>(joint.data());
  const Eigen::Matrix<Complex, 16, 1> x = svd.solve(b);
  Mat4 chi;
  for (int m = 0; m < 4; ++m) {
    for (int n = 0; n < 4; ++n) chi(m, n) = x[4 * m + n];
  }
  chi = linalg::hermitian_part(chi);

  // Nearest-PSD projection of the Choi matrix, renormalized to unit trace.
  const Mat4 choi = linalg::project_to_density(chi_matrix_to_choi_matrix(chi));
  return ChiMatrix(Mat4(linalg::hermitian_part(choi_matrix_to_chi_matrix(choi))));
}

}  // namespace fiberlink::tomography
