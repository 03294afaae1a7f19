#pragma once

#include <optional>
#include <span>
#include <vector>

#include "fiberlink/quantum.hpp"

namespace fiberlink::timebin {

/// Time-bin spacing, effective peak width after fiber + detection, and
/// coincidence window half-width in units of the peak width.
struct TimeBinConfig {
  double delta_t_ps = 520.0;
  double sigma_ps = 21.8;
  double window_factor = 3.0;

  double window_ps() const { return window_factor * sigma_ps; }
  void validate() const;
};

/// Relative heights of the three recombination peaks.
struct PeakWeights {
  double early = 0.25;
  double central = 0.5;
  double late = 0.25;

  void validate() const;
};

/// Probability mass of each detection peak inside the window [−w, w].
struct WindowProbabilities {
  double eps0;        // peak at −Δt  (|HH⟩ admixture)
  double eps1;        // peak at +Δt  (|VV⟩ admixture)
  double eps_center;  // central peak (the transmitted state)
};

/// ∫_{-w}^{w} N(t; center, σ) dt in closed form.
double gaussian_window_mass(double center_ps, double sigma_ps, double window_ps);

WindowProbabilities window_probabilities(const TimeBinConfig& cfg);

/// ρ' ∝ ε0|HH⟩⟨HH| + ε1|VV⟩⟨VV| + ε′ρ_in, renormalized to unit trace.
DensityMatrix effective_state(const DensityMatrix& rho_in, const TimeBinConfig& cfg);

struct SweepRow {
  double delta_t_ps;
  double concurrence;
  double purity;
  double chsh_s;
};

std::vector<SweepRow> sweep_concurrence_purity(const DensityMatrix& rho_in, double sigma_ps,
                                               std::span<const double> dt_list,
                                               double window_factor = 3.0);

/// start, start+step, ..., up to and including stop (within half a step).
std::vector<double> make_grid(double start, double stop, double step);

/// Smallest Δt on the (ascending) grid such that every row at or above it keeps
/// concurrence ≥ fraction·C_plateau, where the plateau is the last row.
std::optional<double> drop_onset(std::span<const SweepRow> rows, double fraction = 0.95);

/// Weighted sum of three Gaussians centered at −Δt, 0, +Δt (standard deviation σ),
/// each normalized to unit area before weighting.
std::vector<double> three_peak_profile(const TimeBinConfig& cfg, const PeakWeights& weights,
                                       std::span<const double> t_grid);

/// Number of strict interior local maxima of a sampled curve.
int count_local_maxima(std::span<const double> values);

}  // namespace fiberlink::timebin
