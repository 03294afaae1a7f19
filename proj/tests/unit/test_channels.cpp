#include <doctest.h>

#include <cmath>
#include <random>

#include "fiberlink/channels.hpp"
#include "fiberlink/error.hpp"
#include "fiberlink/linalg.hpp"
#include "oracles.hpp"

using namespace fiberlink;
using namespace fiberlink::linalg;
using doctest::Approx;

namespace {

KrausSet random_channel(std::mt19937_64& gen, int n_ops) {
  // Isometry V (2n × 2) from QR of a Ginibre block; Kraus blocks are its 2×2 slices.
  std::normal_distribution<double> g;
  CMatrix a(2 * n_ops, 2);
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < 2; ++j) a(i, j) = Complex(g(gen), g(gen));
  Eigen::HouseholderQR<CMatrix> qr(a);
  const CMatrix v = qr.householderQ() * CMatrix::Identity(2 * n_ops, 2);
  std::vector<Mat2> ops;
  for (int k = 0; k < n_ops; ++k) ops.push_back(v.block(2 * k, 0, 2, 2));
  return KrausSet(ops);
}

// Channel action computed directly from the χ definition: Σ χ_mn σ_m ρ σ_n†.
Mat2 chi_action(const Mat4& chi, const Mat2& rho) {
  Mat2 out = Mat2::Zero();
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n) out += chi(m, n) * oracle::pauli(m) * rho * oracle::pauli(n).adjoint();
  return out;
}

}  // namespace

TEST_CASE("depolarizing chi") {
  const auto chi = depolarizing_chi(0.94);
  CHECK(chi.identity_weight() == Approx(0.94));
  CHECK(chi(Pauli::X, Pauli::X).real() == Approx(0.02));
  CHECK(std::abs(chi(Pauli::I, Pauli::Z)) == 0.0);
  CHECK_THROWS_AS(depolarizing_chi(1.01), InvalidArgument);
  CHECK_THROWS_AS(depolarizing_chi(-0.01), InvalidArgument);
  // Bloch vector shrinks by (4p − 1)/3
  const auto out = apply_chi(chi, DensityMatrix::pure(kets::d()));
  CHECK(2 * out(0, 1).real() == Approx((4 * 0.94 - 1) / 3));
}

TEST_CASE("chi validation") {
  Mat4 m = Mat4::Zero();
  m(0, 0) = 0.5;
  CHECK_THROWS_AS(ChiMatrix{m}, InvalidArgument);
  m(0, 0) = 1.0;
  m(0, 1) = 0.2;
  CHECK_THROWS_AS(ChiMatrix{m}, InvalidArgument);  // not Hermitian
  m(1, 0) = 0.2;
  CHECK_THROWS_AS(ChiMatrix{m}, InvalidArgument);  // not PSD (χ_XX = 0)
  CHECK_NOTHROW(ChiMatrix::nearest(m));
}

TEST_CASE("one-sided depolarizing on the singlet is a Werner state") {
  for (double p : {0.25, 0.5, 0.94, 1.0}) {
    const auto out = apply_chi_one_side(depolarizing_chi(p), bell_psi_minus(), Side::Second);
    const double v = (4 * p - 1) / 3;
    CAPTURE(p);
    CHECK(max_abs_diff(out.matrix(), werner(v).matrix()) < 1e-12);
    const auto other = apply_chi_one_side(depolarizing_chi(p), bell_psi_minus(), Side::First);
    CHECK(max_abs_diff(other.matrix(), out.matrix()) < 1e-12);
  }
  const auto w = apply_chi_one_side(depolarizing_chi(0.94), bell_psi_minus(), Side::Second);
  CHECK(std::abs(concurrence(w) - 0.88) < 1e-9);
  CHECK(std::abs(purity(w) - 0.8848) < 1e-9);
}

TEST_CASE("chi / Kraus / Choi round trips on random channels") {
  std::mt19937_64 gen(42);
  for (int trial = 0; trial < 25; ++trial) {
    const auto kraus = random_channel(gen, 1 + trial % 4);
    const auto chi = kraus_to_chi(kraus);
    CAPTURE(trial);
    CHECK(max_abs_diff(chi.matrix(), kraus_to_chi(chi_to_kraus(chi)).matrix()) < 1e-9);
    CHECK(max_abs_diff(chi.matrix(), choi_to_chi(chi_to_choi(chi)).matrix()) < 1e-9);
    // Choi state reduced on the reference is maximally mixed (trace preservation)
    const auto choi = chi_to_choi(chi);
    CHECK(max_abs_diff(partial_trace(choi, Side::First).matrix(), Mat2::Identity() / 2.0) < 1e-12);
    // action agrees with the Kraus sum and with the χ definition
    const DensityMatrix rho(oracle::random_density(gen, 2, 2));
    Mat2 direct = Mat2::Zero();
    for (const auto& k : kraus.operators()) direct += k * rho.matrix() * k.adjoint();
    CHECK(max_abs_diff(apply_chi(chi, rho).matrix(), direct) < 1e-12);
    CHECK(max_abs_diff(chi_action(chi.matrix(), rho.matrix()), direct) < 1e-12);
    CHECK(chi.matrix().trace().real() == Approx(1.0));
  }
}

TEST_CASE("Choi state is the channel applied to half of a maximally entangled pair") {
  std::mt19937_64 gen(9);
  const auto chi = kraus_to_chi(random_channel(gen, 3));
  Ket4 phi_plus = Ket4::Zero();
  phi_plus(0) = phi_plus(3) = 1.0 / std::sqrt(2.0);
  const auto direct = apply_chi_one_side(chi, DensityMatrix::pure(phi_plus), Side::Second);
  CHECK(max_abs_diff(direct.matrix(), chi_to_choi(chi).matrix()) < 1e-12);
}

TEST_CASE("axis-biased channel") {
  const auto chi = axis_biased_chi(0.94, 0.02);
  CHECK(chi(Pauli::I, Pauli::Z).real() == Approx(0.02));
  CHECK(chi(Pauli::X, Pauli::Y).imag() == Approx(-0.02));
  // trace preserving: Σ χ_mn σ_n† σ_m = I
  Mat2 tp = Mat2::Zero();
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n) tp += chi.matrix()(m, n) * oracle::pauli(n) * oracle::pauli(m);
  CHECK(max_abs_diff(tp, Mat2::Identity()) < 1e-14);
  CHECK_THROWS_AS(axis_biased_chi(0.94, 0.05), InvalidArgument);  // not completely positive
  CHECK(process_fidelity(chi, depolarizing_chi(0.94)) == Approx(0.9763).epsilon(1e-3));
  CHECK(process_fidelity(axis_biased_chi(0.94, 0.0165), depolarizing_chi(0.94)) == Approx(0.988).epsilon(2e-3));
}

TEST_CASE("process fidelity") {
  const auto a = depolarizing_chi(0.94);
  CHECK(process_fidelity(a, a) == Approx(1.0));
  // between depolarizing channels, Choi states are Werner states
  const double p = 0.94, q = 1.0;
  CHECK(process_fidelity(depolarizing_chi(p), depolarizing_chi(q)) == Approx(p).epsilon(1e-10));
  std::mt19937_64 gen(17);
  const auto x = kraus_to_chi(random_channel(gen, 2));
  const auto y = kraus_to_chi(random_channel(gen, 3));
  CHECK(process_fidelity(x, y) == Approx(process_fidelity(y, x)).epsilon(1e-7));
  CHECK(process_fidelity(x, y) <= 1.0 + 1e-12);
}

TEST_CASE("extremal output purity") {
  SUBCASE("depolarizing channel is isotropic") {
    const auto e = extremal_output_purity(depolarizing_chi(0.94));
    const double r = (4 * 0.94 - 1) / 3;
    CHECK(e.min_purity == Approx((1 + r * r) / 2).epsilon(1e-10));
    CHECK(e.max_purity == Approx((1 + r * r) / 2).epsilon(1e-10));
  }
  SUBCASE("biased channel matches a dense sphere scan") {
    const auto chi = axis_biased_chi(0.94, 0.02);
    const auto e = extremal_output_purity(chi);
    double lo = 2.0, hi = -1.0;
    for (const auto& r : fibonacci_sphere(10000)) {
      const double g = output_purity(chi, r);
      lo = std::min(lo, g);
      hi = std::max(hi, g);
    }
    CHECK(e.min_purity <= lo + 1e-12);
    CHECK(e.max_purity >= hi - 1e-12);
    CHECK(e.min_purity == Approx(lo).epsilon(1e-4));
    CHECK(e.max_purity == Approx(hi).epsilon(1e-4));
    CHECK(e.max_purity - e.min_purity > 0.01);
    CHECK(e.max_purity == Approx(1.0).epsilon(2e-3));
    CHECK(e.min_purity == Approx(0.8528).epsilon(2e-3));
    CHECK(std::abs(e.argmax_bloch.z()) > 0.99);
  }
  SUBCASE("bloch states") {
    CHECK(purity(bloch_state(Eigen::Vector3d(0, 0, 1))) == Approx(1.0));
    CHECK(bloch_state(Eigen::Vector3d(0, 0, 1))(0, 0).real() == Approx(1.0));
    const auto pts = fibonacci_sphere(50);
    CHECK(pts.size() == 50);
    for (const auto& p : pts) CHECK(p.norm() == Approx(1.0));
  }
}
