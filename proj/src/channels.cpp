#include "fiberlink/channels.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fiberlink/error.hpp"

namespace fiberlink {

namespace {

constexpr double kCpTol = 1e-10;

// Columns are (I⊗σ_m)|Φ⁺⟩, an orthonormal basis of the two-qubit space.
const Mat4& choi_basis() {
  static const Mat4 basis = [] {
    Ket4 phi_plus(1.0, 0.0, 0.0, 1.0);
    phi_plus /= std::sqrt(2.0);
    Mat4 u;
    for (int m = 0; m < 4; ++m) {
      u.col(m) = linalg::kron(Mat2::Identity(), pauli_matrix(kPaulis[m])) * phi_plus;
    }
    return u;
  }();
  return basis;
}

void validate_chi(const Mat4& m) {
  if (!m.allFinite()) throw InvalidArgument("chi matrix has non-finite entries");
  const double herm = linalg::max_abs_diff(m, m.adjoint());
  if (herm > 1e-12) throw InvalidArgument("chi matrix is not Hermitian");
  if (std::abs(m.trace().real() - 1.0) > 1e-10) throw InvalidArgument("chi matrix trace is not 1");
  const double min_eig = linalg::hermitian_eig(m).values.minCoeff();
  if (min_eig < -kCpTol) {
    throw InvalidArgument("chi matrix is not completely positive (eigenvalue " +
                          std::to_string(min_eig) + ")");
  }
}

Mat2 apply_chi_matrix(const Mat4& chi, const Mat2& rho) {
  Mat2 out = Mat2::Zero();
  for (int m = 0; m < 4; ++m) {
    const Mat2 left = pauli_matrix(kPaulis[m]) * rho;
    for (int n = 0; n < 4; ++n) {
      if (chi(m, n) == Complex(0.0)) continue;
      out += chi(m, n) * left * pauli_matrix(kPaulis[n]);
    }
  }
  return out;
}

Eigen::Vector3d tangent(const Eigen::Vector3d& r, int axis) {
  Eigen::Vector3d helper = std::abs(r.z()) < 0.9 ? Eigen::Vector3d::UnitZ() : Eigen::Vector3d::UnitX();
  const Eigen::Vector3d e1 = r.cross(helper).normalized();
  return axis == 0 ? e1 : Eigen::Vector3d(r.cross(e1).normalized());
}

// Pattern search on the sphere; sign = +1 maximizes, -1 minimizes.
std::pair<double, Eigen::Vector3d> refine(const ChiMatrix& chi, Eigen::Vector3d r, double value,
                                          double step, double sign) {
  for (int iter = 0; iter < 50; ++iter) {
    bool improved = false;
    for (int axis = 0; axis < 2 && !improved; ++axis) {
      for (double dir : {1.0, -1.0}) {
        const Eigen::Vector3d cand = (r + dir * step * tangent(r, axis)).normalized();
        const double v = output_purity(chi, cand);
        if (sign * (v - value) > 0.0) {
          r = cand;
          value = v;
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return {value, r};
}

}  // namespace

ChiMatrix::ChiMatrix(Mat4 m) : m_(std::move(m)) {
  validate_chi(m_);
  m_ = linalg::hermitian_part(m_);
}

ChiMatrix ChiMatrix::nearest(const Mat4& m) { return ChiMatrix(Mat4(linalg::project_to_density(m))); }

KrausSet::KrausSet(std::vector<Mat2> ops) : ops_(std::move(ops)) { check_kraus_completeness(ops_); }

ChiMatrix depolarizing_chi(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("depolarizing p must lie in [0, 1]");
  const double q = (1.0 - p) / 3.0;
  Mat4 m = Mat4::Zero();
  m.diagonal() << p, q, q, q;
  return ChiMatrix(m);
}

ChiMatrix axis_biased_chi(double p, double iz_offdiag) {
  Mat4 m = depolarizing_chi(p).matrix();
  const Complex i(0.0, 1.0);
  m(0, 3) = m(3, 0) = iz_offdiag;
  m(1, 2) = -i * iz_offdiag;
  m(2, 1) = i * iz_offdiag;
  return ChiMatrix(m);
}

KrausSet chi_to_kraus(const ChiMatrix& chi) {
  const auto eig = linalg::hermitian_eig(chi.matrix());
  std::vector<Mat2> ops;
  for (int k = 3; k >= 0; --k) {
    const double w = eig.values[k];
    if (w < -kCpTol) throw InvalidArgument("chi matrix is not completely positive");
    if (w <= 1e-14) continue;
    Mat2 op = Mat2::Zero();
    for (int m = 0; m < 4; ++m) op += eig.vectors(m, k) * pauli_matrix(kPaulis[m]);
    ops.push_back(std::sqrt(w) * op);
  }
  return KrausSet(std::move(ops));
}

ChiMatrix kraus_to_chi(const KrausSet& kraus) {
  Mat4 m = Mat4::Zero();
  for (const auto& k : kraus.operators()) {
    Eigen::Vector4cd c;
    for (int a = 0; a < 4; ++a) c[a] = (pauli_matrix(kPaulis[a]) * k).trace() / 2.0;
    m += c * c.adjoint();
  }
  return ChiMatrix(m);
}

DensityMatrix chi_to_choi(const ChiMatrix& chi) {
  const Mat4& u = choi_basis();
  return DensityMatrix(linalg::hermitian_part(u * chi.matrix() * u.adjoint()));
}

Mat4 chi_matrix_to_choi_matrix(const Mat4& chi) {
  const Mat4& u = choi_basis();
  return u * chi * u.adjoint();
}

Mat4 choi_matrix_to_chi_matrix(const Mat4& choi) {
  const Mat4& u = choi_basis();
  return u.adjoint() * choi * u;
}

ChiMatrix choi_to_chi(const DensityMatrix& choi) {
  if (choi.dim() != 4) throw InvalidArgument("Choi state must be two-qubit");
  return ChiMatrix(Mat4(linalg::hermitian_part(choi_matrix_to_chi_matrix(choi.matrix()))));
}

DensityMatrix apply_chi(const ChiMatrix& chi, const DensityMatrix& rho_qubit) {
  if (rho_qubit.dim() != 2) throw InvalidArgument("apply_chi needs a single-qubit state");
  return DensityMatrix(linalg::hermitian_part(apply_chi_matrix(chi.matrix(), rho_qubit.matrix())));
}

DensityMatrix apply_chi_one_side(const ChiMatrix& chi, const DensityMatrix& rho, Side side) {
  const auto kraus = chi_to_kraus(chi);
  return apply_channel_one_side(rho, kraus.operators(), side);
}

double process_fidelity(const ChiMatrix& a, const ChiMatrix& b) {
  return fidelity(DensityMatrix(a.matrix()), DensityMatrix(b.matrix()));
}

DensityMatrix bloch_state(const Eigen::Vector3d& r) {
  if (r.norm() > 1.0 + 1e-12) throw InvalidArgument("Bloch vector longer than 1");
  Mat2 m = 0.5 * (pauli_matrix(Pauli::I) + r.x() * pauli_matrix(Pauli::X) +
                  r.y() * pauli_matrix(Pauli::Y) + r.z() * pauli_matrix(Pauli::Z));
  return DensityMatrix(m);
}

double output_purity(const ChiMatrix& chi, const Eigen::Vector3d& bloch) {
  const Eigen::Vector3d r = bloch.normalized();
  const Mat2 in = 0.5 * (pauli_matrix(Pauli::I) + r.x() * pauli_matrix(Pauli::X) +
                         r.y() * pauli_matrix(Pauli::Y) + r.z() * pauli_matrix(Pauli::Z));
  return apply_chi_matrix(chi.matrix(), in).cwiseAbs2().sum();
}

std::vector<Eigen::Vector3d> fibonacci_sphere(int n) {
  if (n < 1) throw InvalidArgument("sample count must be >= 1");
  std::vector<Eigen::Vector3d> pts;
  pts.reserve(static_cast<std::size_t>(n));
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = n == 1 ? 1.0 : 1.0 - 2.0 * (i + 0.5) / n;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    pts.emplace_back(rho * std::cos(phi), rho * std::sin(phi), z);
  }
  return pts;
}

ExtremalPurity extremal_output_purity(const ChiMatrix& chi, int samples) {
  const auto lattice = fibonacci_sphere(samples);
  ExtremalPurity out{2.0, -1.0, lattice.front(), lattice.front()};
  for (const auto& r : lattice) {
    const double v = output_purity(chi, r);
    if (v < out.min_purity) {
      out.min_purity = v;
      out.argmin_bloch = r;
    }
    if (v > out.max_purity) {
      out.max_purity = v;
      out.argmax_bloch = r;
    }
  }
  const double step = std::sqrt(4.0 * std::numbers::pi / samples);
  std::tie(out.min_purity, out.argmin_bloch) = refine(chi, out.argmin_bloch, out.min_purity, step, -1.0);
  std::tie(out.max_purity, out.argmax_bloch) = refine(chi, out.argmax_bloch, out.max_purity, step, 1.0);
  return out;
}

}  // namespace fiberlink
