#pragma once

#include <complex>

#include <Eigen/Dense>

namespace fiberlink {

using Complex = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;
using Ket2 = Eigen::Vector2cd;
using Ket4 = Eigen::Vector4cd;
using CMatrix = Eigen::MatrixXcd;

namespace linalg {

// Eigenvalues below this magnitude are treated as numerical zeros of a PSD matrix.
inline constexpr double kPsdTolerance = 1e-10;

struct HermitianEigen {
  Eigen::VectorXd values;   // ascending
  CMatrix vectors;          // columns
};

// Eigen-decomposition of the Hermitian part of `m`.
HermitianEigen hermitian_eig(const CMatrix& m);

CMatrix hermitian_part(const CMatrix& m);

double max_abs_diff(const CMatrix& a, const CMatrix& b);

bool is_hermitian(const CMatrix& m, double tol);

// Square root of a PSD matrix; eigenvalues in [-kPsdTolerance, 0) are clamped
// to zero, anything more negative is rejected.
CMatrix psd_sqrt(const CMatrix& m);

// Nearest PSD matrix in Frobenius norm (eigen-clip), rescaled to unit trace.
CMatrix project_to_density(const CMatrix& m);

Mat4 kron(const Mat2& a, const Mat2& b);
Ket4 kron(const Ket2& a, const Ket2& b);

}  // namespace linalg
}  // namespace fiberlink
