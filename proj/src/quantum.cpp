#include "fiberlink/quantum.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

#include "fiberlink/error.hpp"

namespace fiberlink {

namespace {

const std::array<Mat2, 4>& pauli_table() {
  static const std::array<Mat2, 4> table = [] {
    const Complex i(0.0, 1.0);
    std::array<Mat2, 4> t;
    t[0] << 1, 0, 0, 1;
    t[1] << 0, 1, 1, 0;
    t[2] << 0, -i, i, 0;
    t[3] << 1, 0, 0, -1;
    return t;
  }();
  return table;
}

std::string fmt_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

}  // namespace

const Mat2& pauli_matrix(Pauli p) { return pauli_table()[static_cast<int>(p)]; }

char pauli_name(Pauli p) { return "IXYZ"[static_cast<int>(p)]; }

namespace kets {
Ket2 h() { return Ket2(1.0, 0.0); }
Ket2 v() { return Ket2(0.0, 1.0); }
Ket2 d() { return Ket2(1.0, 1.0) / std::sqrt(2.0); }
Ket2 a() { return Ket2(1.0, -1.0) / std::sqrt(2.0); }
Ket2 r() { return Ket2(Complex(1.0), Complex(0.0, 1.0)) / std::sqrt(2.0); }
Ket2 l() { return Ket2(Complex(1.0), Complex(0.0, -1.0)) / std::sqrt(2.0); }
Ket2 orthogonal(const Ket2& k) { return Ket2(-std::conj(k[1]), std::conj(k[0])); }
}  // namespace kets

Ket2 ket_from_label(const std::string& label) {
  if (label == "H") return kets::h();
  if (label == "V") return kets::v();
  if (label == "D") return kets::d();
  if (label == "A") return kets::a();
  if (label == "R") return kets::r();
  if (label == "L") return kets::l();
  throw InvalidArgument("unknown polarization label '" + label + "'");
}

ProjectorSetting ProjectorSetting::from_labels(const std::string& a, const std::string& b) {
  return {a, b, ket_from_label(a), ket_from_label(b)};
}

void ProjectorSetting::validate() const {
  if (std::abs(qubit1.norm() - 1.0) > 1e-12 || std::abs(qubit2.norm() - 1.0) > 1e-12) {
    throw InvalidArgument("projector setting vectors must have unit norm");
  }
}

Ket4 ProjectorSetting::outcome_ket(int k) const {
  const Ket2 a = (k & 2) ? kets::orthogonal(qubit1) : qubit1;
  const Ket2 b = (k & 1) ? kets::orthogonal(qubit2) : qubit2;
  return linalg::kron(a, b);
}

DensityMatrix::DensityMatrix(CMatrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || (m_.rows() != 2 && m_.rows() != 4)) {
    throw InvalidArgument("density matrix must be 2x2 or 4x4");
  }
  if (!m_.allFinite()) throw InvalidArgument("density matrix has non-finite entries");
  const double herm = linalg::max_abs_diff(m_, m_.adjoint());
  if (herm > kHermitianTol) {
    throw InvalidArgument("density matrix is not Hermitian (deviation " + fmt_value(herm) + ")");
  }
  const double tr = m_.trace().real();
  if (std::abs(tr - 1.0) > kTraceTol) {
    throw InvalidArgument("density matrix trace is " + fmt_value(tr) + ", expected 1");
  }
  const double min_eig = linalg::hermitian_eig(m_).values.minCoeff();
  if (min_eig < -kPsdTol) {
    throw InvalidArgument("density matrix is not PSD (eigenvalue " + fmt_value(min_eig) + ")");
  }
  m_ = linalg::hermitian_part(m_);
}

DensityMatrix DensityMatrix::nearest(const CMatrix& m) {
  return DensityMatrix(linalg::project_to_density(m));
}

DensityMatrix DensityMatrix::pure(const Eigen::VectorXcd& ket) {
  const double n = ket.norm();
  if (!(n > 0.0)) throw InvalidArgument("zero ket");
  const Eigen::VectorXcd k = ket / n;
  return DensityMatrix(k * k.adjoint());
}

DensityMatrix bell_psi_minus() {
  Ket4 psi(0.0, 1.0, -1.0, 0.0);
  return DensityMatrix::pure(psi / std::sqrt(2.0));
}

DensityMatrix maximally_mixed(int dim) {
  if (dim != 2 && dim != 4) throw InvalidArgument("dimension must be 2 or 4");
  return DensityMatrix(CMatrix::Identity(dim, dim) / static_cast<double>(dim));
}

DensityMatrix werner(double visibility) {
  if (!(visibility >= -1.0 / 3.0 && visibility <= 1.0)) {
    throw InvalidArgument("Werner visibility outside [-1/3, 1]");
  }
  return DensityMatrix(visibility * bell_psi_minus().matrix() +
                       (1.0 - visibility) * maximally_mixed(4).matrix());
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != 2 || b.dim() != 2) throw InvalidArgument("tensor expects two qubit states");
  return DensityMatrix(linalg::kron(Mat2(a.matrix()), Mat2(b.matrix())));
}

double purity(const DensityMatrix& rho) {
  // Tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ.
  return rho.matrix().cwiseAbs2().sum();
}

double concurrence(const DensityMatrix& rho) {
  if (rho.dim() != 4) throw InvalidArgument("concurrence needs a two-qubit state");
  const Mat4 yy = linalg::kron(pauli_matrix(Pauli::Y), pauli_matrix(Pauli::Y));
  const Mat4 flipped = yy * rho.matrix().conjugate() * yy;
  // √ρ ρ̃ √ρ is Hermitian and shares its spectrum with ρ ρ̃.
  const CMatrix root = linalg::psd_sqrt(rho.matrix());
  const auto eig = linalg::hermitian_eig(root * flipped * root);
  std::array<double, 4> lambda{};
  for (int i = 0; i < 4; ++i) lambda[i] = std::sqrt(std::max(eig.values[i], 0.0));
  std::sort(lambda.begin(), lambda.end(), std::greater<>());
  return std::max(0.0, lambda[0] - lambda[1] - lambda[2] - lambda[3]);
}

Eigen::Matrix3d correlation_matrix(const DensityMatrix& rho) {
  if (rho.dim() != 4) throw InvalidArgument("correlation matrix needs a two-qubit state");
  Eigen::Matrix3d t;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      const Mat4 op = linalg::kron(pauli_table()[a + 1], pauli_table()[b + 1]);
      t(a, b) = (rho.matrix() * op).trace().real();
    }
  }
  return t;
}

double chsh_max(const DensityMatrix& rho) {
  const Eigen::Matrix3d t = correlation_matrix(rho);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(t.transpose() * t);
  const auto& m = solver.eigenvalues();  // ascending
  return 2.0 * std::sqrt(std::max(0.0, m[1] + m[2]));
}

double fidelity(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw InvalidArgument("fidelity of states with different dimensions");
  const CMatrix root = linalg::psd_sqrt(a.matrix());
  const auto eig = linalg::hermitian_eig(root * b.matrix() * root);
  double s = 0.0;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) s += std::sqrt(std::max(eig.values[i], 0.0));
  return std::clamp(s * s, 0.0, 1.0);
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw InvalidArgument("trace distance of states with different dimensions");
  const auto eig = linalg::hermitian_eig(a.matrix() - b.matrix());
  return 0.5 * eig.values.cwiseAbs().sum();
}

void check_kraus_completeness(std::span<const Mat2> kraus) {
  if (kraus.empty()) throw InvalidArgument("empty Kraus set");
  Mat2 sum = Mat2::Zero();
  for (const auto& k : kraus) sum += k.adjoint() * k;
  const double dev = linalg::max_abs_diff(sum, Mat2::Identity());
  if (dev > 1e-10) {
    throw InvalidArgument("Kraus set violates completeness (deviation " + fmt_value(dev) + ")");
  }
}

DensityMatrix apply_channel_one_side(const DensityMatrix& rho, std::span<const Mat2> kraus,
                                     Side side) {
  if (rho.dim() != 4) throw InvalidArgument("one-sided channel needs a two-qubit state");
  check_kraus_completeness(kraus);
  Mat4 out = Mat4::Zero();
  for (const auto& k : kraus) {
    const Mat4 op = side == Side::First ? linalg::kron(k, Mat2::Identity())
                                        : linalg::kron(Mat2::Identity(), k);
    out += op * rho.matrix() * op.adjoint();
  }
  return DensityMatrix(linalg::hermitian_part(out));
}

DensityMatrix apply_unitary(const DensityMatrix& rho, const CMatrix& u) {
  return DensityMatrix(linalg::hermitian_part(u * rho.matrix() * u.adjoint()));
}

DensityMatrix partial_trace(const DensityMatrix& rho, Side keep) {
  if (rho.dim() != 4) throw InvalidArgument("partial trace needs a two-qubit state");
  const auto& m = rho.matrix();
  Mat2 out = Mat2::Zero();
  // Index of |ab⟩ is 2a + b.
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      for (int k = 0; k < 2; ++k) {
        out(i, j) += keep == Side::First ? m(2 * i + k, 2 * j + k) : m(2 * k + i, 2 * k + j);
      }
    }
  }
  return DensityMatrix(linalg::hermitian_part(out));
}

}  // namespace fiberlink
