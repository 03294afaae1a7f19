#include "fiberlink/photonics.hpp"

#include <cmath>

#include "fiberlink/error.hpp"

namespace fiberlink::photonics {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

}  // namespace

double gaussian_fwhm_factor() { return 2.0 * std::sqrt(2.0 * std::log(2.0)); }

void WavePacket::validate() const {
  require(center_wavelength_nm > 0.0, "center_wavelength_nm must be positive");
  require(spectral_fwhm_nm > 0.0, "spectral_fwhm_nm must be positive");
  require(source_sigma_ps > 0.0, "source_sigma_ps must be positive");
}

void FiberSpec::validate() const {
  const std::string tag = "fiber '" + name + "': ";
  require(std::isfinite(length_km) && length_km >= 0.0, tag + "length_km must be >= 0");
  require(std::isfinite(group_index) && group_index >= 1.0, tag + "group_index must be >= 1");
  require(std::isfinite(dispersion_ps_nm_km), tag + "dispersion_ps_nm_km must be finite");
  require(attenuation_db_km >= 0.0, tag + "attenuation_db_km must be >= 0");
  require(excess_loss_db >= 0.0, tag + "excess_loss_db must be >= 0");
  require(depolarization_p >= 0.0 && depolarization_p <= 1.0,
          tag + "depolarization_p must lie in [0, 1]");
  require(std::isfinite(chi_iz_offdiag), tag + "chi_iz_offdiag must be finite");
}

void DetectorSpec::validate() const {
  require(jitter_sigma_ps >= 0.0, "jitter_sigma_ps must be >= 0");
  require(efficiency >= 0.0 && efficiency <= 1.0, "efficiency must lie in [0, 1]");
  require(dark_rate_hz >= 0.0, "dark_rate_hz must be >= 0");
}

double fwhm_to_sigma(double fwhm) {
  require(fwhm > 0.0, "FWHM must be positive");
  return fwhm / gaussian_fwhm_factor();
}

double sigma_to_fwhm(double sigma) {
  require(sigma > 0.0, "standard deviation must be positive");
  return sigma * gaussian_fwhm_factor();
}

double coherence_time_ps(const WavePacket& wp) {
  wp.validate();
  const double lambda_m = wp.center_wavelength_nm * 1e-9;
  const double bandwidth_hz = kSpeedOfLight_m_s * (wp.spectral_fwhm_nm * 1e-9) / (lambda_m * lambda_m);
  return 0.441 / bandwidth_hz * 1e12;
}

double dispersion_broadening_ps(const FiberSpec& fiber, double spectral_sigma_nm) {
  require(spectral_sigma_nm >= 0.0, "spectral width must be >= 0");
  require(fiber.length_km >= 0.0, "fiber length must be >= 0");
  return std::abs(fiber.dispersion_ps_nm_km) * spectral_sigma_nm * fiber.length_km;
}

double combined_sigma_ps(double broadening_ps, double source_sigma_ps) {
  require(broadening_ps >= 0.0 && source_sigma_ps >= 0.0, "widths must be >= 0");
  return std::hypot(broadening_ps, source_sigma_ps);
}

double detected_sigma_ps(const FiberSpec& fiber, const WavePacket& wp) {
  wp.validate();
  return combined_sigma_ps(dispersion_broadening_ps(fiber, fwhm_to_sigma(wp.spectral_fwhm_nm)),
                           wp.source_sigma_ps);
}

double propagation_delay_us(const FiberSpec& fiber) {
  fiber.validate();
  return fiber.length_km * 1e3 * fiber.group_index / kSpeedOfLight_m_s * 1e6;
}

double link_loss_db(const FiberSpec& fiber) {
  fiber.validate();
  return fiber.attenuation_db_km * fiber.length_km + fiber.excess_loss_db;
}

double loss_db_to_transmittance(double loss_db) {
  require(loss_db >= 0.0, "loss must be >= 0 dB");
  return std::pow(10.0, -loss_db / 10.0);
}

double transmittance_to_loss_db(double t) {
  require(t > 0.0 && t <= 1.0, "transmittance must lie in (0, 1]");
  return -10.0 * std::log10(t);
}

double transmittance(const FiberSpec& fiber) { return loss_db_to_transmittance(link_loss_db(fiber)); }

}  // namespace fiberlink::photonics
