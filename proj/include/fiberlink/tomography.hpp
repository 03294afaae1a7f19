#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fiberlink/photonics.hpp"
#include "fiberlink/quantum.hpp"

namespace fiberlink::tomography {

/// Coincidence counts for one analysis setting, outcomes ordered n_00, n_01, n_10, n_11.
struct MeasurementRecord {
  ProjectorSetting setting;
  std::array<std::uint64_t, 4> counts{};
  double duration_s = 1.0;

  std::uint64_t total() const { return counts[0] + counts[1] + counts[2] + counts[3]; }
};

/// All 36 pairs of the six polarization eigenstates {H, V, D, A, R, L}.
std::vector<ProjectorSetting> standard_settings();

/// Born-rule probabilities of the four outcomes of a setting.
std::array<double, 4> outcome_probabilities(const DensityMatrix& rho, const ProjectorSetting& setting);

struct CountOptions {
  std::int64_t pairs_per_setting = 1'000'000;
  double duration_s = 1.0;
  double coincidence_window_ps = 1000.0;
  bool poisson = true;  // false: round the expected counts instead of drawing
};

/// Expected counts: pairs·η²·p_k plus the accidental floor dark²·window·duration / 4.
std::array<double, 4> expected_counts(const DensityMatrix& rho, const ProjectorSetting& setting,
                                      const CountOptions& opts, const photonics::DetectorSpec& det);

/// Forward model of the analysis stage. Setting i draws from RNG stream (seed, i).
std::vector<MeasurementRecord> simulate_counts(const DensityMatrix& rho,
                                               std::span<const ProjectorSetting> settings,
                                               const CountOptions& opts,
                                               const photonics::DetectorSpec& det, std::uint64_t seed);

/// True when the projectors of all records span the 16-dimensional operator space.
bool informationally_complete(std::span<const MeasurementRecord> records);

struct MleOptions {
  double tolerance = 1e-10;  // max-norm change between iterates
  int max_iterations = 10'000;
  bool record_trace = false;
};

struct MleFit {
  DensityMatrix rho;
  double log_likelihood;
  int iterations;
  bool converged;
  std::vector<double> likelihood_trace;  // per accepted iterate, when requested
};

/// Diluted RρR maximum-likelihood fit. Throws InvalidArgument for
/// non-informationally-complete input; returns the best iterate with
/// converged = false if the iteration cap is reached.
MleFit mle_fit(std::span<const MeasurementRecord> records, const MleOptions& opts = {});

/// Σ n_k log p_k(ρ) over all outcomes.
double log_likelihood(std::span<const MeasurementRecord> records, const DensityMatrix& rho);

struct TomographyResult {
  DensityMatrix rho_hat;
  double concurrence = 0.0;
  double purity = 0.0;
  double chsh_s = 0.0;
  double std_concurrence = 0.0;
  double std_purity = 0.0;
  double std_chsh = 0.0;
  int mc_samples = 0;
  int mc_failures = 0;
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
};

TomographyResult mle_reconstruct(std::span<const MeasurementRecord> records, const MleOptions& opts = {});

struct MonteCarloErrors {
  double std_concurrence;
  double std_purity;
  double std_chsh;
  int replicates;
  int failures;
};

/// Parametric bootstrap: every count is redrawn as Poisson(observed) on RNG
/// stream (seed, replicate), the state is refitted, and the sample standard
/// deviations of the derived metrics are returned. Fails if more than 10% of
/// the replicates cannot be reconstructed. `threads` = 0 uses all cores.
MonteCarloErrors monte_carlo_errors(std::span<const MeasurementRecord> records, int replicates,
                                    std::uint64_t seed, const MleOptions& opts = {}, unsigned threads = 0);

/// mle_reconstruct followed by monte_carlo_errors.
TomographyResult reconstruct_with_errors(std::span<const MeasurementRecord> records, int replicates,
                                         std::uint64_t seed, const MleOptions& opts = {});

/// Sample standard deviation (n − 1 denominator).
double sample_std(std::span<const double> values);

void write_records_csv(std::ostream& out, std::span<const MeasurementRecord> records);
std::vector<MeasurementRecord> read_records_csv(std::istream& in);

nlohmann::json result_to_json(const TomographyResult& result);

}  // namespace fiberlink::tomography
