#pragma once

#include <string>

namespace fiberlink::photonics {

inline constexpr double kSpeedOfLight_m_s = 299'792'458.0;

/// 2√(2 ln 2): Gaussian FWHM / standard deviation.
double gaussian_fwhm_factor();

struct WavePacket {
  double center_wavelength_nm = 1550.0;
  double spectral_fwhm_nm = 0.859;
  double source_sigma_ps = 21.1;  // detected arrival-time peak width, includes jitter

  void validate() const;
};

/// Scalar fiber parameters at the operating wavelength.
struct FiberSpec {
  std::string name;
  double length_km = 0.0;
  double group_index = 1.0;
  double dispersion_ps_nm_km = 0.0;
  double attenuation_db_km = 0.0;
  double excess_loss_db = 0.0;
  /// Identity weight of the polarization channel seen by the transmitted photon.
  double depolarization_p = 1.0;
  /// Optional I–Z coherence of that channel (0 = uniform depolarizing).
  double chi_iz_offdiag = 0.0;

  void validate() const;
};

struct DetectorSpec {
  double jitter_sigma_ps = 21.0;
  double efficiency = 1.0;
  double dark_rate_hz = 0.0;

  void validate() const;
};

double fwhm_to_sigma(double fwhm);
double sigma_to_fwhm(double sigma);

/// Transform-limited Gaussian coherence time (FWHM, ps), time-bandwidth product 0.441.
double coherence_time_ps(const WavePacket& wp);

/// Δτ = D · Δλ_σ · z, standard deviation in ps.
double dispersion_broadening_ps(const FiberSpec& fiber, double spectral_sigma_nm);

/// √(Δτ² + σ_source²)
double combined_sigma_ps(double broadening_ps, double source_sigma_ps);

/// Peak width after the fiber: dispersion of the wavepacket combined with the source peak.
double detected_sigma_ps(const FiberSpec& fiber, const WavePacket& wp);

/// z · n_g / c in microseconds.
double propagation_delay_us(const FiberSpec& fiber);

double link_loss_db(const FiberSpec& fiber);
double transmittance(const FiberSpec& fiber);
double loss_db_to_transmittance(double loss_db);
double transmittance_to_loss_db(double t);

}  // namespace fiberlink::photonics
