#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fiberlink/channels.hpp"
#include "fiberlink/error.hpp"
#include "fiberlink/process_tomography.hpp"
#include "fiberlink/tomography.hpp"
#include "oracles.hpp"

using namespace fiberlink;
using namespace fiberlink::linalg;
using namespace fiberlink::tomography;
using doctest::Approx;

namespace {

const photonics::DetectorSpec kIdeal{0.0, 1.0, 0.0};

CountOptions noise_free(std::int64_t pairs = 1'000'000) {
  CountOptions o;
  o.pairs_per_setting = pairs;
  o.poisson = false;
  return o;
}

CountOptions poisson(std::int64_t pairs) {
  CountOptions o;
  o.pairs_per_setting = pairs;
  return o;
}

std::vector<MeasurementRecord> simulate(const DensityMatrix& rho, const CountOptions& o, std::uint64_t seed) {
  const auto settings = standard_settings();
  return simulate_counts(rho, settings, o, kIdeal, seed);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST_CASE("standard settings") {
  const auto s = standard_settings();
  CHECK(s.size() == 36);
  int computational = 0;
  for (const auto& x : s) {
    CHECK(x.qubit1.norm() == Approx(1.0));
    CHECK(x.qubit2.norm() == Approx(1.0));
    for (int k = 0; k < 4; ++k) CHECK(x.outcome_ket(k).norm() == Approx(1.0));
    const bool hv1 = x.label1 == "H" || x.label1 == "V";
    const bool hv2 = x.label2 == "H" || x.label2 == "V";
    computational += hv1 && hv2;
  }
  CHECK(computational == 4);
}

TEST_CASE("outcome probabilities") {
  const auto hh = DensityMatrix::pure(kron(kets::h(), kets::h()));
  const auto p_hh = outcome_probabilities(hh, ProjectorSetting::from_labels("H", "H"));
  CHECK(p_hh[0] == Approx(1.0));
  const auto p_psi = outcome_probabilities(bell_psi_minus(), ProjectorSetting::from_labels("H", "H"));
  CHECK(p_psi[0] == Approx(0.0).epsilon(1e-15));
  CHECK(p_psi[1] == Approx(0.5));
  CHECK(p_psi[2] == Approx(0.5));
  CHECK(p_psi[3] == Approx(0.0).epsilon(1e-15));
  const auto p_w = outcome_probabilities(werner(0.92), ProjectorSetting::from_labels("D", "D"));
  CHECK(p_w[0] == Approx((1 - 0.92) / 4));
  CHECK(p_w[1] == Approx((1 + 0.92) / 4));
}

TEST_CASE("simulated counts") {
  const auto hh = DensityMatrix::pure(kron(kets::h(), kets::h()));
  const std::vector<ProjectorSetting> one{ProjectorSetting::from_labels("H", "H")};
  const auto exact = simulate_counts(hh, one, noise_free(), kIdeal, 1);
  CHECK(exact[0].counts[0] == 1'000'000);
  CHECK(exact[0].total() == 1'000'000);
  const auto drawn = simulate_counts(hh, one, poisson(1'000'000), kIdeal, 1);
  CHECK(std::abs(static_cast<double>(drawn[0].counts[0]) - 1e6) < 6 * 1000.0);
  CHECK(drawn[0].counts[1] + drawn[0].counts[2] + drawn[0].counts[3] == 0);

  SUBCASE("efficiency scales and dark counts add a flat floor") {
    CountOptions o = noise_free(1000);
    o.coincidence_window_ps = 1000.0;
    o.duration_s = 100.0;
    const photonics::DetectorSpec det{21.0, 0.5, 1e4};
    const auto e = expected_counts(hh, one[0], o, det);
    const double acc = 1e4 * 1e4 * 1000e-12 * 100.0 / 4;
    CHECK(e[0] == Approx(1000 * 0.25 + acc));
    CHECK(e[3] == Approx(acc));
  }
  SUBCASE("reproducible and stream-separated") {
    const auto a = simulate(werner(0.9), poisson(10000), 77);
    const auto b = simulate(werner(0.9), poisson(10000), 77);
    const auto c = simulate(werner(0.9), poisson(10000), 78);
    bool same = true, differ = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      same = same && a[i].counts == b[i].counts;
      differ = differ || a[i].counts != c[i].counts;
    }
    CHECK(same);
    CHECK(differ);
  }
}

TEST_CASE("informational completeness") {
  const auto rec = simulate(werner(0.9), noise_free(1000), 0);
  CHECK(informationally_complete(rec));
  const std::vector<MeasurementRecord> single{rec.front()};
  CHECK_FALSE(informationally_complete(single));
  CHECK_THROWS_AS(mle_fit(single), InvalidArgument);
  std::vector<MeasurementRecord> hv;
  for (const auto& r : rec)
    if ((r.setting.label1 == "H" || r.setting.label1 == "V") && (r.setting.label2 == "H" || r.setting.label2 == "V"))
      hv.push_back(r);
  CHECK_FALSE(informationally_complete(hv));
}

TEST_CASE("noise-free reconstruction") {
  const auto psi = bell_psi_minus();
  const auto fit = mle_reconstruct(simulate(psi, noise_free(), 0));
  CHECK(fidelity(fit.rho_hat, psi) > 0.9999);
  CHECK(fit.converged);
  const auto w = werner(0.7);
  const auto fw = mle_reconstruct(simulate(w, noise_free(), 0));
  CHECK(fidelity(fw.rho_hat, w) > 0.99999);
  CHECK(fw.concurrence == Approx(0.55).epsilon(1e-4));
}

TEST_CASE("Werner(0.92) at 1e6 pairs per setting") {
  const auto fit = mle_reconstruct(simulate(werner(0.92), poisson(1'000'000), 2024));
  CHECK(std::abs(fit.concurrence - 0.88) < 0.01);
  CHECK(fit.rho_hat.matrix().trace().real() == Approx(1.0));
}

TEST_CASE("likelihood never decreases across iterations") {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 6; ++trial) {
    const DensityMatrix truth(oracle::random_density(gen, 4, 1 + trial % 4));
    MleOptions o;
    o.record_trace = true;
    const auto fit = mle_fit(simulate(truth, poisson(1000), trial), o);
    REQUIRE(fit.likelihood_trace.size() >= 2);
    for (std::size_t i = 1; i < fit.likelihood_trace.size(); ++i) {
      CAPTURE(i);
      CHECK(fit.likelihood_trace[i] >= fit.likelihood_trace[i - 1] - 1e-9 * std::abs(fit.likelihood_trace[i - 1]));
    }
    CHECK(hermitian_eig(fit.rho.matrix()).values.minCoeff() > -1e-10);
  }
}

TEST_CASE("reconstructions stay valid at the PSD boundary") {
  // rank-1 truth with few counts: many outcomes are zero
  const auto rho = DensityMatrix::pure(kron(kets::h(), kets::d()));
  const auto fit = mle_reconstruct(simulate(rho, poisson(50), 5));
  CHECK_NOTHROW(DensityMatrix(fit.rho_hat.matrix()));
  CHECK(fit.std_concurrence >= 0.0);
}

TEST_CASE("fidelity improves with the number of pairs") {
  std::mt19937_64 gen(123);
  const DensityMatrix truth(oracle::random_density(gen, 4, 3));
  std::vector<double> medians;
  for (std::int64_t n : {1'000, 10'000, 1'000'000}) {
    std::vector<double> f;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      f.push_back(fidelity(mle_reconstruct(simulate(truth, poisson(n), seed)).rho_hat, truth));
    }
    medians.push_back(median(f));
  }
  CHECK(medians[0] < medians[1]);
  CHECK(medians[1] < medians[2]);
  CHECK(medians[2] > 0.999);
}

TEST_CASE("Monte-Carlo errors") {
  SUBCASE("order of magnitude for a near-singlet source at 1e6 pairs") {
    const auto rec = simulate(werner(0.966), poisson(1'000'000), 31);
    const auto err = monte_carlo_errors(rec, 100, 9);
    CHECK(err.std_concurrence > 1e-4);
    CHECK(err.std_concurrence < 1e-3);
    CHECK(err.failures == 0);
    CHECK(err.replicates == 100);
  }
  SUBCASE("quadrupling the counts halves the spread") {
    const auto a = monte_carlo_errors(simulate(werner(0.9), poisson(10'000), 1), 60, 2);
    const auto b = monte_carlo_errors(simulate(werner(0.9), poisson(40'000), 1), 60, 2);
    const double ratio = b.std_concurrence / a.std_concurrence;
    CHECK(ratio > 0.35);
    CHECK(ratio < 0.65);
  }
  SUBCASE("zero-variance input") {
    // resampled fits stay deep inside the separable set, so every replicate has C = 0
    const auto rec = simulate(maximally_mixed(4), noise_free(100'000), 0);
    const auto err = monte_carlo_errors(rec, 20, 1);
    CHECK(err.std_concurrence == 0.0);
  }
  SUBCASE("thread count does not change results") {
    const auto rec = simulate(werner(0.8), poisson(5000), 4);
    const auto one = monte_carlo_errors(rec, 16, 3, {}, 1);
    const auto many = monte_carlo_errors(rec, 16, 3, {}, 4);
    CHECK(one.std_concurrence == many.std_concurrence);
    CHECK(one.std_purity == many.std_purity);
    CHECK(one.std_chsh == many.std_chsh);
  }
  CHECK(sample_std(std::vector<double>{1.0, 2.0, 3.0}) == Approx(1.0));
}

TEST_CASE("count table round trip") {
  const auto rec = simulate(werner(0.9), poisson(1000), 3);
  std::stringstream ss;
  write_records_csv(ss, rec);
  CHECK(ss.str().rfind("setting_q1,setting_q2,n_00,n_01,n_10,n_11,duration_s\n", 0) == 0);
  const auto back = read_records_csv(ss);
  REQUIRE(back.size() == rec.size());
  for (std::size_t i = 0; i < rec.size(); ++i) {
    CHECK(back[i].setting.label1 == rec[i].setting.label1);
    CHECK(back[i].counts == rec[i].counts);
    CHECK(back[i].duration_s == rec[i].duration_s);
  }
  std::stringstream bad("setting_q1,setting_q2,n_00,n_01,n_10,n_11,duration_s\nH,H,1,2,-3,4,1\n");
  CHECK_THROWS_AS(read_records_csv(bad), InvalidArgument);
}

TEST_CASE("ancilla process tomography, noise-free") {
  const auto psi = bell_psi_minus();
  SUBCASE("identity channel") {
    const auto chi = ancilla_process_tomography(psi, psi);
    Mat4 id = Mat4::Zero();
    id(0, 0) = 1.0;
    CHECK(max_abs_diff(chi.matrix(), id) < 1e-9);
  }
  SUBCASE("depolarizing channel") {
    const auto joint = apply_chi_one_side(depolarizing_chi(0.94), psi, Side::Second);
    const auto chi = ancilla_process_tomography(joint, psi);
    CHECK(max_abs_diff(chi.matrix(), depolarizing_chi(0.94).matrix()) < 1e-9);
  }
  SUBCASE("random channels and a mixed reference") {
    std::mt19937_64 gen(2);
    const auto ref = werner(0.9);
    for (int trial = 0; trial < 20; ++trial) {
      std::normal_distribution<double> g;
      CMatrix a(2 * 4, 2);
      for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < 2; ++j) a(i, j) = Complex(g(gen), g(gen));
      Eigen::HouseholderQR<CMatrix> qr(a);
      const CMatrix v = qr.householderQ() * CMatrix::Identity(8, 2);
      std::vector<Mat2> ops;
      for (int k = 0; k < 4; ++k) ops.push_back(v.block(2 * k, 0, 2, 2));
      const auto truth = kraus_to_chi(KrausSet(ops));
      const auto joint = apply_chi_one_side(truth, ref, Side::Second);
      CAPTURE(trial);
      CHECK(max_abs_diff(ancilla_process_tomography(joint, ref).matrix(), truth.matrix()) < 1e-9);
    }
  }
  SUBCASE("a product reference cannot identify the channel") {
    const auto prod = DensityMatrix::pure(kron(kets::h(), kets::h()));
    CHECK_THROWS_AS(ancilla_process_tomography(prod, prod), InvalidArgument);
  }
}

TEST_CASE("ancilla process tomography, simulated counts") {
  const auto psi = bell_psi_minus();
  const auto joint = apply_chi_one_side(depolarizing_chi(0.94), psi, Side::Second);
  const auto src = mle_reconstruct(simulate(psi, poisson(1'000'000), 10)).rho_hat;
  const auto out = mle_reconstruct(simulate(joint, poisson(1'000'000), 11)).rho_hat;
  const auto chi = ancilla_process_tomography(out, src);
  CHECK(std::abs(chi.identity_weight() - 0.94) < 0.01);
  CHECK(process_fidelity(chi, depolarizing_chi(0.94)) > 0.99);
}
