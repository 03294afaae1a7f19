#include "fiberlink/tomography.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "fiberlink/error.hpp"
#include "fiberlink/rng.hpp"
#include "fiberlink/serialize.hpp"

namespace fiberlink::tomography {

namespace {

constexpr const char* kLabels[6] = {"H", "V", "D", "A", "R", "L"};

// Flattened outcome projectors with their counts.
struct Outcomes {
  std::vector<Ket4> kets;
  std::vector<double> counts;
  double total = 0.0;
};

Outcomes flatten(std::span<const MeasurementRecord> records) {
  Outcomes o;
  o.kets.reserve(records.size() * 4);
  o.counts.reserve(records.size() * 4);
  for (const auto& rec : records) {
    rec.setting.validate();
    for (int k = 0; k < 4; ++k) {
      o.kets.push_back(rec.setting.outcome_ket(k));
      o.counts.push_back(static_cast<double>(rec.counts[static_cast<std::size_t>(k)]));
      o.total += o.counts.back();
    }
  }
  return o;
}

double expectation(const Ket4& phi, const Mat4& rho) {
  return std::max((phi.adjoint() * rho * phi)(0, 0).real(), 0.0);
}

std::vector<double> probabilities(const Outcomes& o, const Mat4& rho) {
  std::vector<double> q(o.kets.size());
  for (std::size_t k = 0; k < q.size(); ++k) q[k] = expectation(o.kets[k], rho);
  return q;
}

// Σ n_k log(q'_k / q_k), evaluated term by term so tiny improvements are not
// swamped by the magnitude of the total likelihood.
double likelihood_gain(const Outcomes& o, const std::vector<double>& q_old, const std::vector<double>& q_new) {
  double gain = 0.0;
  for (std::size_t k = 0; k < q_old.size(); ++k) {
    if (o.counts[k] == 0.0) continue;
    if (q_new[k] <= 0.0) return -std::numeric_limits<double>::infinity();
    gain += o.counts[k] * std::log(q_new[k] / q_old[k]);
  }
  return gain;
}

double likelihood(const Outcomes& o, const std::vector<double>& q) {
  double l = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    if (o.counts[k] == 0.0) continue;
    if (q[k] <= 0.0) return -std::numeric_limits<double>::infinity();
    l += o.counts[k] * std::log(q[k]);
  }
  return l;
}

Mat4 normalized_sandwich(const Mat4& g, const Mat4& rho) {
  Mat4 next = g * rho * g.adjoint();
  next = 0.5 * (next + next.adjoint()).eval();
  return next / next.trace().real();
}

struct Metrics {
  double concurrence;
  double purity;
  double chsh;
};

Metrics metrics_of(const DensityMatrix& rho) { return {concurrence(rho), purity(rho), chsh_max(rho)}; }

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace

std::vector<ProjectorSetting> standard_settings() {
  std::vector<ProjectorSetting> out;
  out.reserve(36);
  for (const char* a : kLabels) {
    for (const char* b : kLabels) out.push_back(ProjectorSetting::from_labels(a, b));
  }
  return out;
}

std::array<double, 4> outcome_probabilities(const DensityMatrix& rho, const ProjectorSetting& setting) {
  if (rho.dim() != 4) throw InvalidArgument("tomography needs a two-qubit state");
  setting.validate();
  std::array<double, 4> p{};
  for (int k = 0; k < 4; ++k) p[static_cast<std::size_t>(k)] = expectation(setting.outcome_ket(k), rho.matrix());
  return p;
}

std::array<double, 4> expected_counts(const DensityMatrix& rho, const ProjectorSetting& setting,
                                      const CountOptions& opts, const photonics::DetectorSpec& det) {
  if (opts.pairs_per_setting <= 0) throw InvalidArgument("pairs_per_setting must be positive");
  if (!(opts.duration_s > 0.0)) throw InvalidArgument("duration_s must be positive");
  if (opts.coincidence_window_ps < 0.0) throw InvalidArgument("coincidence window must be >= 0");
  det.validate();
  const double accidentals =
      det.dark_rate_hz * det.dark_rate_hz * opts.coincidence_window_ps * 1e-12 * opts.duration_s;
  const double scale = static_cast<double>(opts.pairs_per_setting) * det.efficiency * det.efficiency;
  auto p = outcome_probabilities(rho, setting);
  for (auto& v : p) v = scale * v + accidentals / 4.0;
  return p;
}

std::vector<MeasurementRecord> simulate_counts(const DensityMatrix& rho,
                                               std::span<const ProjectorSetting> settings,
                                               const CountOptions& opts,
                                               const photonics::DetectorSpec& det, std::uint64_t seed) {
  if (opts.pairs_per_setting <= 0) throw InvalidArgument("pairs_per_setting must be positive");
  std::vector<MeasurementRecord> records;
  records.reserve(settings.size());
  for (std::size_t i = 0; i < settings.size(); ++i) {
    const auto mean = expected_counts(rho, settings[i], opts, det);
    MeasurementRecord rec{settings[i], {}, opts.duration_s};
    if (opts.poisson) {
      auto gen = rng::make_stream(seed, i);
      for (std::size_t k = 0; k < 4; ++k) rec.counts[k] = rng::poisson(gen, mean[k]);
    } else {
      for (std::size_t k = 0; k < 4; ++k) rec.counts[k] = static_cast<std::uint64_t>(std::llround(mean[k]));
    }
    records.push_back(std::move(rec));
  }
  return records;
}

bool informationally_complete(std::span<const MeasurementRecord> records) {
  if (records.empty()) return false;
  Eigen::MatrixXd span(16, static_cast<Eigen::Index>(records.size() * 4));
  Eigen::Index col = 0;
  for (const auto& rec : records) {
    for (int k = 0; k < 4; ++k) {
      const Ket4 phi = rec.setting.outcome_ket(k);
      const Mat4 proj = phi * phi.adjoint();
      Eigen::Index row = 0;
      for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
          span(row++, col) = i <= j ? proj(i, j).real() : proj(i, j).imag();
        }
      }
      ++col;
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(span);
  const auto& s = svd.singularValues();
  return s.size() == 16 && s[15] > 1e-9 * s[0];
}

double log_likelihood(std::span<const MeasurementRecord> records, const DensityMatrix& rho) {
  const auto o = flatten(records);
  return likelihood(o, probabilities(o, rho.matrix()));
}

MleFit mle_fit(std::span<const MeasurementRecord> records, const MleOptions& opts) {
  if (!informationally_complete(records)) {
    throw InvalidArgument("measurement settings are not informationally complete");
  }
  const auto o = flatten(records);
  if (!(o.total > 0.0)) throw InvalidArgument("no counts to reconstruct from");

  Mat4 rho = Mat4::Identity() / 4.0;
  auto q = probabilities(o, rho);
  double loglik = likelihood(o, q);
  std::vector<double> trace;
  if (opts.record_trace) trace.push_back(loglik);

  // nullopt: plain RρR; otherwise the dilution ε of (I + εR)/(1 + ε).
  std::optional<double> dilution;
  bool converged = false;
  int iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    Mat4 r = Mat4::Zero();
    for (std::size_t k = 0; k < q.size(); ++k) {
      if (o.counts[k] == 0.0) continue;
      r += (o.counts[k] / (o.total * q[k])) * o.kets[k] * o.kets[k].adjoint();
    }

    Mat4 next;
    std::vector<double> q_next;
    double gain = 0.0;
    while (true) {
      const Mat4 g = dilution ? Mat4((Mat4::Identity() + *dilution * r) / (1.0 + *dilution)) : r;
      next = normalized_sandwich(g, rho);
      q_next = probabilities(o, next);
      gain = likelihood_gain(o, q, q_next);
      if (gain >= 0.0) break;
      dilution = dilution ? *dilution * 0.5 : 1.0;
      if (*dilution < 1e-12) break;
    }
    if (gain < 0.0) {
      // No non-decreasing step exists at working precision: the iterate is a
      // numerical fixed point.
      converged = true;
      break;
    }

    const double change = (next - rho).cwiseAbs().maxCoeff();
    rho = next;
    q = std::move(q_next);
    loglik += gain;
    if (opts.record_trace) trace.push_back(loglik);
    if (change < opts.tolerance) {
      converged = true;
      ++iter;
      break;
    }
  }

  return {DensityMatrix::nearest(rho), likelihood(o, q), iter, converged, std::move(trace)};
}

TomographyResult mle_reconstruct(std::span<const MeasurementRecord> records, const MleOptions& opts) {
  auto fit = mle_fit(records, opts);
  const auto m = metrics_of(fit.rho);
  TomographyResult res{fit.rho};
  res.concurrence = m.concurrence;
  res.purity = m.purity;
  res.chsh_s = m.chsh;
  res.log_likelihood = fit.log_likelihood;
  res.iterations = fit.iterations;
  res.converged = fit.converged;
  return res;
}

double sample_std(std::span<const double> values) {
  if (values.size() < 2) throw InvalidArgument("sample standard deviation needs at least 2 values");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (n - 1.0));
}

MonteCarloErrors monte_carlo_errors(std::span<const MeasurementRecord> records, int replicates,
                                    std::uint64_t seed, const MleOptions& opts, unsigned threads) {
  if (replicates < 2) throw InvalidArgument("Monte-Carlo error estimation needs >= 2 replicates");
  const std::vector<MeasurementRecord> base(records.begin(), records.end());
  std::vector<std::optional<Metrics>> results(static_cast<std::size_t>(replicates));

  auto run_one = [&](std::size_t r) {
    auto gen = rng::make_stream(seed, r);
    auto sample = base;
    for (auto& rec : sample) {
      for (auto& n : rec.counts) n = rng::poisson(gen, static_cast<double>(n));
    }
    try {
      results[r] = metrics_of(mle_fit(sample, opts).rho);
    } catch (const InvalidArgument&) {
    } catch (const NumericalError&) {
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(replicates));
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t r = next++; r < results.size(); r = next++) run_one(r);
      });
    }
  }

  std::vector<double> c, p, s;
  for (const auto& m : results) {
    if (!m) continue;
    c.push_back(m->concurrence);
    p.push_back(m->purity);
    s.push_back(m->chsh);
  }
  const int failures = replicates - static_cast<int>(c.size());
  if (failures * 10 > replicates || c.size() < 2) {
    throw NumericalError("Monte-Carlo error estimation: " + std::to_string(failures) + " of " +
                         std::to_string(replicates) + " replicates failed to reconstruct");
  }
  return {sample_std(c), sample_std(p), sample_std(s), replicates, failures};
}

TomographyResult reconstruct_with_errors(std::span<const MeasurementRecord> records, int replicates,
                                         std::uint64_t seed, const MleOptions& opts) {
  auto res = mle_reconstruct(records, opts);
  const auto err = monte_carlo_errors(records, replicates, seed, opts);
  res.std_concurrence = err.std_concurrence;
  res.std_purity = err.std_purity;
  res.std_chsh = err.std_chsh;
  res.mc_samples = err.replicates;
  res.mc_failures = err.failures;
  return res;
}

void write_records_csv(std::ostream& out, std::span<const MeasurementRecord> records) {
  out << "setting_q1,setting_q2,n_00,n_01,n_10,n_11,duration_s\n";
  for (const auto& r : records) {
    out << r.setting.label1 << ',' << r.setting.label2;
    for (auto n : r.counts) out << ',' << n;
    out << ',' << serialize::format_double(r.duration_s) << '\n';
  }
}

std::vector<MeasurementRecord> read_records_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("empty measurement CSV");
  const auto header = split_csv_line(line);
  const std::vector<std::string> expected{"setting_q1", "setting_q2", "n_00", "n_01",
                                          "n_10",       "n_11",       "duration_s"};
  if (header != expected) throw InvalidArgument("unexpected measurement CSV header: " + line);
  std::vector<MeasurementRecord> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 7) throw InvalidArgument("measurement CSV line " + std::to_string(line_no) + ": expected 7 fields");
    MeasurementRecord rec{ProjectorSetting::from_labels(f[0], f[1]), {}, 0.0};
    try {
      for (std::size_t k = 0; k < 4; ++k) {
        if (f[2 + k].empty() || f[2 + k][0] == '-') throw std::invalid_argument("negative");
        rec.counts[k] = std::stoull(f[2 + k]);
      }
      rec.duration_s = std::stod(f[6]);
    } catch (const std::exception&) {
      throw InvalidArgument("measurement CSV line " + std::to_string(line_no) + ": bad number");
    }
    if (!(rec.duration_s > 0.0)) throw InvalidArgument("measurement CSV line " + std::to_string(line_no) + ": duration must be > 0");
    out.push_back(std::move(rec));
  }
  return out;
}

nlohmann::json result_to_json(const TomographyResult& r) {
  return {
      {"rho_hat", serialize::matrix_to_json(r.rho_hat.matrix(), serialize::state_basis(r.rho_hat.dim()))},
      {"concurrence", r.concurrence},
      {"purity", r.purity},
      {"chsh_s", r.chsh_s},
      {"std_concurrence", r.std_concurrence},
      {"std_purity", r.std_purity},
      {"std_chsh", r.std_chsh},
      {"mc_samples", r.mc_samples},
      {"mc_failures", r.mc_failures},
      {"log_likelihood", r.log_likelihood},
      {"iterations", r.iterations},
      {"converged", r.converged},
  };
}

}  // namespace fiberlink::tomography
