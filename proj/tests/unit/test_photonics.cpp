#include <doctest.h>

#include <cmath>

#include "fiberlink/error.hpp"
#include "fiberlink/photonics.hpp"
#include "fiberlink/scenario.hpp"

using namespace fiberlink::photonics;
using doctest::Approx;

namespace {
FiberSpec smf28() { return fiberlink::scenario::fiber_preset("SMF28-7.8"); }
FiberSpec nanf() { return fiberlink::scenario::fiber_preset("NANF-7.72"); }
}  // namespace

TEST_CASE("fwhm and sigma conversion") {
  CHECK(gaussian_fwhm_factor() == Approx(2 * std::sqrt(2 * std::log(2.0))));
  CHECK(fwhm_to_sigma(0.859) == Approx(0.3648).epsilon(1e-3));
  CHECK(sigma_to_fwhm(fwhm_to_sigma(1.234)) == Approx(1.234));
  CHECK_THROWS_AS(fwhm_to_sigma(-1.0), fiberlink::InvalidArgument);
}

TEST_CASE("coherence time of the source") {
  const WavePacket wp;
  // 0.441 λ² / (c Δλ)
  const double expected = 0.441 * 1550e-9 * 1550e-9 / (kSpeedOfLight_m_s * 0.859e-9) * 1e12;
  CHECK(coherence_time_ps(wp) == Approx(expected).epsilon(1e-12));
  CHECK(std::abs(coherence_time_ps(wp) - 4.1) < 0.05);
  WavePacket o = wp;
  o.center_wavelength_nm = 1310.0;
  CHECK(coherence_time_ps(o) == Approx(2.937).epsilon(1e-3));
}

TEST_CASE("dispersion broadening chain") {
  const double sl = fwhm_to_sigma(0.859);
  CHECK(dispersion_broadening_ps(smf28(), sl) == Approx(18 * sl * 7.8));
  CHECK(std::abs(dispersion_broadening_ps(smf28(), 0.365) - 51.2) < 0.1);
  CHECK(std::abs(dispersion_broadening_ps(nanf(), 0.365) - 5.64) < 0.1);
  const WavePacket wp;
  CHECK(std::abs(detected_sigma_ps(smf28(), wp) - 55.4) < 0.1);
  CHECK(std::abs(detected_sigma_ps(nanf(), wp) - 21.8) < 0.1);
  CHECK(combined_sigma_ps(3.0, 4.0) == Approx(5.0));
  // negative D broadens the same as positive
  auto neg = smf28();
  neg.dispersion_ps_nm_km = -18.0;
  CHECK(dispersion_broadening_ps(neg, sl) == Approx(dispersion_broadening_ps(smf28(), sl)));
  // zero-length fiber leaves the source width unchanged
  auto zero = nanf();
  zero.length_km = 0.0;
  CHECK(detected_sigma_ps(zero, wp) == Approx(21.1));
}

TEST_CASE("propagation delay") {
  CHECK(propagation_delay_us(smf28()) == Approx(1.47 * 7800.0 / kSpeedOfLight_m_s * 1e6));
  CHECK(propagation_delay_us(smf28()) == Approx(38.247).epsilon(1e-4));
  CHECK(propagation_delay_us(nanf()) == Approx(25.759).epsilon(1e-4));
  const double diff = propagation_delay_us(smf28()) - propagation_delay_us(nanf());
  CHECK(diff == Approx(12.488).epsilon(1e-3));
  CHECK(diff / propagation_delay_us(smf28()) == Approx(0.3265).epsilon(1e-3));
}

TEST_CASE("loss budget") {
  CHECK(link_loss_db(nanf()) == Approx(0.82 * 7.72 + 1.87));
  CHECK(link_loss_db(nanf()) == Approx(8.2).epsilon(1e-3));
  CHECK(loss_db_to_transmittance(10.0) == Approx(0.1));
  CHECK(transmittance_to_loss_db(loss_db_to_transmittance(3.7)) == Approx(3.7));
  CHECK(transmittance(smf28()) == Approx(std::pow(10.0, -0.19 * 7.8 / 10)));
}

TEST_CASE("fiber validation") {
  auto f = nanf();
  CHECK_NOTHROW(f.validate());
  f.length_km = -1;
  CHECK_THROWS_AS(f.validate(), fiberlink::InvalidArgument);
  f = nanf();
  f.group_index = 0.5;
  CHECK_THROWS_AS(f.validate(), fiberlink::InvalidArgument);
  f = nanf();
  f.depolarization_p = 1.5;
  CHECK_THROWS_AS(f.validate(), fiberlink::InvalidArgument);
}
