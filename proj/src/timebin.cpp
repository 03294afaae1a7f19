#include "fiberlink/timebin.hpp"

#include <cmath>
#include <numbers>

#include "fiberlink/error.hpp"

namespace fiberlink::timebin {

void TimeBinConfig::validate() const {
  if (!(delta_t_ps >= 0.0) || !std::isfinite(delta_t_ps)) throw InvalidArgument("delta_t_ps must be >= 0");
  if (!(sigma_ps > 0.0) || !std::isfinite(sigma_ps)) throw InvalidArgument("sigma_ps must be > 0");
  if (!(window_factor > 0.0)) throw InvalidArgument("window_factor must be > 0");
}

void PeakWeights::validate() const {
  if (early < 0.0 || central < 0.0 || late < 0.0) throw InvalidArgument("peak weights must be >= 0");
  if (!(early + central + late > 0.0)) throw InvalidArgument("peak weights must not all vanish");
}

double gaussian_window_mass(double center_ps, double sigma_ps, double window_ps) {
  // Mass of N(center, σ) in [−w, w]; by symmetry only |center| matters.
  const double c = std::abs(center_ps);
  const double s = std::sqrt(2.0) * sigma_ps;
  if (c > window_ps) {
    // Both edges on the same side: erfc difference keeps the tiny tail accurate.
    return 0.5 * (std::erfc((c - window_ps) / s) - std::erfc((c + window_ps) / s));
  }
  return 0.5 * (std::erf((window_ps - c) / s) + std::erf((window_ps + c) / s));
}

WindowProbabilities window_probabilities(const TimeBinConfig& cfg) {
  cfg.validate();
  const double w = cfg.window_ps();
  const double side = gaussian_window_mass(cfg.delta_t_ps, cfg.sigma_ps, w);
  return {side, side, gaussian_window_mass(0.0, cfg.sigma_ps, w)};
}

DensityMatrix effective_state(const DensityMatrix& rho_in, const TimeBinConfig& cfg) {
  if (rho_in.dim() != 4) throw InvalidArgument("effective_state needs a two-qubit state");
  const auto eps = window_probabilities(cfg);
  CMatrix m = eps.eps_center * rho_in.matrix();
  m(0, 0) += eps.eps0;  // |HH⟩
  m(3, 3) += eps.eps1;  // |VV⟩
  m /= eps.eps0 + eps.eps1 + eps.eps_center;
  return DensityMatrix(linalg::hermitian_part(m));
}

std::vector<SweepRow> sweep_concurrence_purity(const DensityMatrix& rho_in, double sigma_ps,
                                               std::span<const double> dt_list, double window_factor) {
  std::vector<SweepRow> rows;
  rows.reserve(dt_list.size());
  for (double dt : dt_list) {
    const auto rho = effective_state(rho_in, {dt, sigma_ps, window_factor});
    rows.push_back({dt, concurrence(rho), purity(rho), chsh_max(rho)});
  }
  return rows;
}

std::vector<double> make_grid(double start, double stop, double step) {
  if (!(step > 0.0)) throw InvalidArgument("sweep step must be > 0");
  if (stop < start) throw InvalidArgument("sweep stop must be >= start");
  std::vector<double> grid;
  const auto n = static_cast<long>(std::floor((stop - start) / step + 0.5));
  for (long i = 0; i <= n; ++i) grid.push_back(start + static_cast<double>(i) * step);
  return grid;
}

std::optional<double> drop_onset(std::span<const SweepRow> rows, double fraction) {
  if (rows.empty()) return std::nullopt;
  const double threshold = fraction * rows.back().concurrence;
  std::optional<double> onset;
  for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
    if (it->concurrence < threshold) break;
    onset = it->delta_t_ps;
  }
  return onset;
}

std::vector<double> three_peak_profile(const TimeBinConfig& cfg, const PeakWeights& weights,
                                       std::span<const double> t_grid) {
  cfg.validate();
  weights.validate();
  const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * cfg.sigma_ps);
  auto g = [&](double t, double center) {
    const double x = (t - center) / cfg.sigma_ps;
    return norm * std::exp(-0.5 * x * x);
  };
  std::vector<double> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    out.push_back(weights.early * g(t, -cfg.delta_t_ps) + weights.central * g(t, 0.0) +
                  weights.late * g(t, cfg.delta_t_ps));
  }
  return out;
}

int count_local_maxima(std::span<const double> values) {
  int count = 0;
  for (std::size_t i = 1; i + 1 < values.size(); ++i) {
    if (values[i] > values[i - 1] && values[i] > values[i + 1]) ++count;
  }
  return count;
}

}  // namespace fiberlink::timebin
