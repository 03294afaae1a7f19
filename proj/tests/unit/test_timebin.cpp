#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fiberlink/channels.hpp"
#include "fiberlink/error.hpp"
#include "fiberlink/timebin.hpp"

using namespace fiberlink;
using namespace fiberlink::linalg;
using namespace fiberlink::timebin;
using doctest::Approx;

namespace {

// Composite Simpson quadrature of the Gaussian density over [−w, w].
double simpson_mass(double center, double sigma, double w, int n = 20000) {
  auto f = [&](double t) {
    const double z = (t - center) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2 * std::numbers::pi));
  };
  const double h = 2 * w / n;
  double s = f(-w) + f(w);
  for (int i = 1; i < n; ++i) s += f(-w + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3;
}

std::vector<double> grid_0_520() { return make_grid(0.0, 520.0, 20.0); }

}  // namespace

TEST_CASE("window mass against quadrature") {
  for (double center : {0.0, 10.0, 40.0, 65.4, 120.0, 260.0, 520.0}) {
    for (double sigma : {21.8, 55.4}) {
      CAPTURE(center);
      CAPTURE(sigma);
      const double w = 3 * sigma;
      CHECK(std::abs(gaussian_window_mass(center, sigma, w) - simpson_mass(center, sigma, w)) < 1e-10);
      CHECK(gaussian_window_mass(center, sigma, w) == Approx(gaussian_window_mass(-center, sigma, w)));
    }
  }
  CHECK(gaussian_window_mass(0.0, 1.0, 3.0) == Approx(std::erf(3 / std::sqrt(2.0))));
  // far tails stay positive instead of cancelling to zero
  CHECK(gaussian_window_mass(40.0, 1.0, 3.0) >= 0.0);
  CHECK(gaussian_window_mass(12.0, 1.0, 3.0) > 0.0);
}

TEST_CASE("window probabilities") {
  const auto e = window_probabilities({520.0, 21.8, 3.0});
  CHECK(e.eps0 == Approx(e.eps1));
  CHECK(e.eps_center == Approx(std::erf(3 / std::sqrt(2.0))));
  CHECK(e.eps0 < 1e-30);
  const auto z = window_probabilities({0.0, 21.8, 3.0});
  CHECK(z.eps0 == Approx(z.eps_center));
  TimeBinConfig bad{-1.0, 21.8, 3.0};
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  CHECK_THROWS_AS(window_probabilities({100.0, 0.0, 3.0}), InvalidArgument);
}

TEST_CASE("effective state limits for the singlet") {
  const auto psi = bell_psi_minus();
  const auto at0 = effective_state(psi, {0.0, 21.8, 3.0});
  CHECK(std::abs(concurrence(at0)) < 1e-9);
  CHECK(std::abs(purity(at0) - 1.0 / 3.0) < 1e-9);
  CHECK(chsh_max(at0) < 2.0);
  CHECK(chsh_max(at0) == Approx(2 * std::sqrt(2.0) / 3).epsilon(1e-9));
  const auto far = effective_state(psi, {520.0, 21.8, 3.0});
  CHECK(concurrence(far) == Approx(1.0).epsilon(1e-9));
  // X-state closed form: C = 2(|ρ23| − √(ρ11ρ44)) = (ε′ − 2ε0)/(ε′ + 2ε0)
  const TimeBinConfig mid{100.0, 21.8, 3.0};
  const auto e = window_probabilities(mid);
  CHECK(concurrence(effective_state(psi, mid)) ==
        Approx((e.eps_center - 2 * e.eps0) / (e.eps_center + 2 * e.eps0)).epsilon(1e-10));
  CHECK(e.eps_center > 2 * e.eps0);
}

TEST_CASE("effective state keeps trace and adds the |HH>, |VV> admixture") {
  const auto rho = apply_chi_one_side(depolarizing_chi(0.94), bell_psi_minus(), Side::Second);
  const TimeBinConfig cfg{80.0, 21.8, 3.0};
  const auto out = effective_state(rho, cfg);
  const auto e = window_probabilities(cfg);
  const double norm = e.eps0 + e.eps1 + e.eps_center;
  CHECK(out.matrix().trace().real() == Approx(1.0));
  CHECK(out(0, 0).real() == Approx((e.eps0 + e.eps_center * rho(0, 0).real()) / norm));
  CHECK(out(1, 2).real() == Approx(e.eps_center * rho(1, 2).real() / norm));
}

TEST_CASE("sweep over the 0-520 ps grid") {
  const auto grid = grid_0_520();
  REQUIRE(grid.size() == 27);
  CHECK(grid.back() == Approx(520.0));
  for (double sigma : {21.8, 55.4}) {
    const auto rows = sweep_concurrence_purity(bell_psi_minus(), sigma, grid);
    REQUIRE(rows.size() == grid.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(rows[i].purity > 0.25);
      if (rows[i].concurrence == 0.0) CHECK(rows[i].chsh_s <= 2.0);
      if (i > 0) CHECK(rows[i].concurrence >= rows[i - 1].concurrence - 1e-12);
    }
  }
}

TEST_CASE("drop onset") {
  const auto grid = grid_0_520();
  const auto nanf = sweep_concurrence_purity(bell_psi_minus(), 21.8, grid);
  const auto smf = sweep_concurrence_purity(bell_psi_minus(), 55.4, grid);
  const auto a = drop_onset(nanf);
  const auto b = drop_onset(smf);
  REQUIRE(a);
  REQUIRE(b);
  CHECK(*a >= 120.0);
  CHECK(*a <= 160.0);
  CHECK(*b >= 280.0);
  CHECK(*b <= 360.0);
  // with the 3σ window the 95% level is crossed near 5.1σ
  CHECK(*a == Approx(120.0));
  CHECK(*b == Approx(300.0));
  // a flat sweep drops nowhere above its first point
  std::vector<SweepRow> flat{{0, 1, 1, 2}, {20, 1, 1, 2}};
  CHECK(*drop_onset(flat) == Approx(0.0));
  CHECK_FALSE(drop_onset(std::vector<SweepRow>{}).has_value());
}

TEST_CASE("make grid") {
  CHECK(make_grid(0, 1, 0.1).size() == 11);
  CHECK(make_grid(5, 5, 1).size() == 1);
  CHECK_THROWS_AS(make_grid(0, 1, 0), InvalidArgument);
  CHECK_THROWS_AS(make_grid(0, 1, -1), InvalidArgument);
}

TEST_CASE("three-peak fine structure") {
  std::vector<double> t;
  for (double x = -400; x <= 400; x += 1.0) t.push_back(x);
  const TimeBinConfig wide{140.0, 21.8, 3.0};
  const auto p = three_peak_profile(wide, PeakWeights{}, t);
  CHECK(count_local_maxima(p) == 3);
  double area = 0;
  for (double v : p) area += v;
  CHECK(area == Approx(1.0).epsilon(1e-6));
  // central peak is twice as tall as the side peaks
  CHECK(p[400] / p[540] == Approx(2.0).epsilon(1e-3));
  const TimeBinConfig merged{20.0, 55.4, 3.0};
  CHECK(count_local_maxima(three_peak_profile(merged, PeakWeights{}, t)) == 1);
  PeakWeights bad{0.5, -0.1, 0.6};
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}
