#include "fiberlink/linalg.hpp"

#include <cmath>
#include <string>

#include "fiberlink/error.hpp"

namespace fiberlink::linalg {

CMatrix hermitian_part(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

HermitianEigen hermitian_eig(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(m));
  if (solver.info() != Eigen::Success) {
    throw NumericalError("Hermitian eigen-decomposition did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

double max_abs_diff(const CMatrix& a, const CMatrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

bool is_hermitian(const CMatrix& m, double tol) {
  return m.rows() == m.cols() && max_abs_diff(m, m.adjoint()) <= tol;
}

CMatrix psd_sqrt(const CMatrix& m) {
  const auto eig = hermitian_eig(m);
  Eigen::VectorXd roots(eig.values.size());
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    const double v = eig.values[i];
    if (v < -kPsdTolerance) {
      throw InvalidArgument("matrix square root of a non-PSD matrix (eigenvalue " +
                            std::to_string(v) + ")");
    }
    roots[i] = v > 0.0 ? std::sqrt(v) : 0.0;
  }
  return eig.vectors * roots.asDiagonal() * eig.vectors.adjoint();
}

CMatrix project_to_density(const CMatrix& m) {
  const auto eig = hermitian_eig(m);
  Eigen::VectorXd clipped = eig.values.cwiseMax(0.0);
  const double total = clipped.sum();
  if (!(total > 0.0)) {
    throw NumericalError("PSD projection left no positive weight");
  }
  clipped /= total;
  CMatrix out = eig.vectors * clipped.asDiagonal() * eig.vectors.adjoint();
  return hermitian_part(out);
}

Mat4 kron(const Mat2& a, const Mat2& b) {
  Mat4 out;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    }
  }
  return out;
}

Ket4 kron(const Ket2& a, const Ket2& b) {
  return Ket4(a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]);
}

}  // namespace fiberlink::linalg
