#include "fiberlink/runners.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <variant>

#include "fiberlink/error.hpp"
#include "fiberlink/process_tomography.hpp"
#include "fiberlink/rng.hpp"
#include "fiberlink/serialize.hpp"
#include "fiberlink/svg.hpp"

namespace fiberlink::scenario {

using nlohmann::json;

namespace {

// Stage identifiers for derive_seed; changing them changes every output.
enum Stage : std::uint64_t {
  kLatencyEvents = 1,
  kDistributionCounts = 2,
  kDistributionMonteCarlo = 3,
  kProcessSourceCounts = 4,
  kProcessJointCounts = 5,
  kSweepCounts = 6,
};

using Cell = std::variant<std::string, double, std::int64_t>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

std::string cell_text(const Cell& c) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  if (const auto* d = std::get_if<double>(&c)) return serialize::format_double(*d);
  return std::to_string(std::get<std::int64_t>(c));
}

std::string table_text(const Table& t, TableFormat format) {
  if (format == TableFormat::Json) {
    json rows = json::array();
    for (const auto& r : t.rows) {
      json row = json::object();
      for (std::size_t i = 0; i < t.columns.size(); ++i) {
        std::visit([&](const auto& v) { row[t.columns[i]] = v; }, r[i]);
      }
      rows.push_back(row);
    }
    return rows.dump(2) + "\n";
  }
  std::ostringstream out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
  out << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << cell_text(r[i]);
    out << '\n';
  }
  return out.str();
}

std::string table_ext(TableFormat f) { return f == TableFormat::Json ? ".json" : ".csv"; }

class OutputWriter {
 public:
  OutputWriter(const RunContext& ctx, RunOutput& out) : ctx_(ctx), out_(out) {
    std::error_code ec;
    std::filesystem::create_directories(ctx.out_dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + ctx.out_dir.string() + ": " + ec.message());
  }

  void write(const std::string& name, const std::string& content) {
    const auto path = ctx_.out_dir / name;
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write " + path.string());
    f << content;
    if (!f) throw ConfigError("failed writing " + path.string());
    out_.files.emplace_back(name);
  }

  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

  void write_table(const std::string& stem, const Table& t) {
    write(stem + table_ext(ctx_.format), table_text(t, ctx_.format));
  }

 private:
  const RunContext& ctx_;
  RunOutput& out_;
};

std::uint64_t require_seed(const Scenario& sc, const RunContext& ctx) {
  if (ctx.seed) return *ctx.seed;
  if (sc.tomography.seed) return *sc.tomography.seed;
  throw ConfigError("this scenario has stochastic stages but no seed (set tomography.seed or --seed)");
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string file_stem(const std::string& name) {
  std::string out;
  for (char c : name) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.') ? c : '_';
  return out;
}

const photonics::FiberSpec& single_fiber(const Scenario& sc, const std::string& command) {
  if (sc.fibers.size() != 1) throw ConfigError(command + " needs exactly one fiber ('fiber')");
  return sc.fibers.front();
}

tomography::CountOptions count_options(const Scenario& sc, double sigma_ps) {
  tomography::CountOptions opts;
  opts.pairs_per_setting = sc.tomography.pairs_per_setting;
  opts.duration_s = static_cast<double>(sc.tomography.pairs_per_setting) / sc.source.pair_rate_hz;
  opts.coincidence_window_ps = 2.0 * sc.window_factor * sigma_ps;
  return opts;
}

json bloch_json(const Eigen::Vector3d& r) { return json::array({r.x(), r.y(), r.z()}); }

json extremal_json(const ExtremalPurity& e) {
  return {{"min_purity", e.min_purity},
          {"max_purity", e.max_purity},
          {"argmin_bloch", bloch_json(e.argmin_bloch)},
          {"argmax_bloch", bloch_json(e.argmax_bloch)}};
}

json fiber_json(const photonics::FiberSpec& f) {
  return {{"name", f.name},
          {"length_km", f.length_km},
          {"group_index", f.group_index},
          {"dispersion_ps_nm_km", f.dispersion_ps_nm_km},
          {"attenuation_db_km", f.attenuation_db_km},
          {"excess_loss_db", f.excess_loss_db},
          {"depolarization_p", f.depolarization_p},
          {"chi_iz_offdiag", f.chi_iz_offdiag}};
}

json state_metrics_json(const DensityMatrix& rho) {
  return {{"concurrence", concurrence(rho)}, {"purity", purity(rho)}, {"chsh_s", chsh_max(rho)}};
}

// Linear interpolation of the first Δt (scanning upward) where C reaches `level`.
std::optional<double> crossing(const std::vector<timebin::SweepRow>& rows, double level) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& a = rows[i - 1];
    const auto& b = rows[i];
    if (a.concurrence < level && b.concurrence >= level) {
      const double t = (level - a.concurrence) / (b.concurrence - a.concurrence);
      return a.delta_t_ps + t * (b.delta_t_ps - a.delta_t_ps);
    }
  }
  return std::nullopt;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

ChiMatrix fiber_channel(const photonics::FiberSpec& fiber) {
  try {
    if (fiber.chi_iz_offdiag == 0.0) return depolarizing_chi(fiber.depolarization_p);
    return axis_biased_chi(fiber.depolarization_p, fiber.chi_iz_offdiag);
  } catch (const InvalidArgument& e) {
    throw ConfigError("fiber '" + fiber.name + "' channel: " + e.what());
  }
}

DensityMatrix distributed_state(const Scenario& sc, const photonics::FiberSpec& fiber, double delta_t_ps) {
  const auto after_fiber = apply_chi_one_side(fiber_channel(fiber), sc.source.state, Side::Second);
  const double sigma = photonics::detected_sigma_ps(fiber, sc.source.wavepacket);
  return timebin::effective_state(after_fiber, {delta_t_ps, sigma, sc.window_factor});
}

std::vector<ProjectorSetting> settings_for(const std::string& name) {
  if (name == "pauli36") return tomography::standard_settings();
  if (name == "bases9") {
    std::vector<ProjectorSetting> out;
    for (const char* a : {"H", "D", "R"}) {
      for (const char* b : {"H", "D", "R"}) out.push_back(ProjectorSetting::from_labels(a, b));
    }
    return out;
  }
  throw ConfigError("unknown setting scheme '" + name + "'");
}

void write_sweep_csv(std::ostream& out, const std::vector<timebin::SweepRow>& rows) {
  out << "delta_t_ps,concurrence,purity,chsh_s\n";
  for (const auto& r : rows) {
    out << serialize::format_double(r.delta_t_ps) << ',' << serialize::format_double(r.concurrence) << ','
        << serialize::format_double(r.purity) << ',' << serialize::format_double(r.chsh_s) << '\n';
  }
}

RunOutput run_latency(const Scenario& sc, const RunContext& ctx) {
  if (sc.fibers.size() != 2) throw ConfigError("latency needs exactly two fibers: [candidate, reference]");
  RunOutput out;
  out.seed = require_seed(sc, ctx);
  OutputWriter writer(ctx, out);

  const auto& lat = sc.latency;
  const double weight_sum = lat.peak_weights.early + lat.peak_weights.central + lat.peak_weights.late;
  Table hist{{"fiber", "time_us", "offset_ps", "counts", "model_counts"}, {}};
  json fibers = json::array();
  std::vector<double> delays;

  for (const auto& fiber : sc.fibers) {
    const double delay_us = photonics::propagation_delay_us(fiber);
    const double sigma = photonics::detected_sigma_ps(fiber, sc.source.wavepacket);
    const double rate = lat.coincidence_rate_hz.contains(fiber.name)
                            ? lat.coincidence_rate_hz.at(fiber.name)
                            : sc.source.pair_rate_hz * photonics::transmittance(fiber) * sc.detector.efficiency *
                                  sc.detector.efficiency;
    const double expected_events = rate * lat.duration_s;

    // Streams keyed by fiber name: the same fiber always yields the same histogram.
    auto gen = rng::make_stream(rng::derive_seed(out.seed, kLatencyEvents), fnv1a(fiber.name));
    const auto events = rng::poisson(gen, expected_events);

    const timebin::TimeBinConfig cfg{lat.delta_t_ps, sigma, sc.window_factor};
    const double half_range = lat.delta_t_ps + 6.0 * sigma;
    const auto nbins = static_cast<std::size_t>(std::ceil(2.0 * half_range / lat.bin_width_ps));
    const double start = -0.5 * static_cast<double>(nbins) * lat.bin_width_ps;
    std::vector<std::int64_t> counts(nbins, 0);

    std::uniform_real_distribution<double> pick(0.0, weight_sum);
    std::normal_distribution<double> jitter(0.0, sigma);
    std::int64_t outside = 0;
    for (std::uint64_t e = 0; e < events; ++e) {
      const double u = pick(gen);
      const double center = u < lat.peak_weights.early ? -lat.delta_t_ps
                            : u < lat.peak_weights.early + lat.peak_weights.central ? 0.0
                                                                                    : lat.delta_t_ps;
      const double t = center + jitter(gen);
      const double idx = std::floor((t - start) / lat.bin_width_ps);
      if (idx < 0.0 || idx >= static_cast<double>(nbins)) {
        ++outside;
        continue;
      }
      ++counts[static_cast<std::size_t>(idx)];
    }

    std::vector<double> centers(nbins);
    for (std::size_t b = 0; b < nbins; ++b) centers[b] = start + (static_cast<double>(b) + 0.5) * lat.bin_width_ps;
    const auto profile = timebin::three_peak_profile(cfg, lat.peak_weights, centers);
    for (std::size_t b = 0; b < nbins; ++b) {
      hist.rows.push_back({fiber.name, delay_us + centers[b] * 1e-6, centers[b], counts[b],
                           expected_events * profile[b] * lat.bin_width_ps / weight_sum});
    }

    delays.push_back(delay_us);
    fibers.push_back({{"fiber", fiber_json(fiber)},
                      {"delay_us", delay_us},
                      {"sigma_ps", sigma},
                      {"coincidence_rate_hz", rate},
                      {"expected_events", expected_events},
                      {"events", events},
                      {"events_outside_histogram", outside},
                      {"link_loss_db", photonics::link_loss_db(fiber)},
                      {"transmittance", photonics::transmittance(fiber)}});
  }

  const double difference = delays[1] - delays[0];
  json summary = {{"fibers", fibers},
                  {"delay_difference_us", difference},
                  {"relative_latency_reduction", delays[1] > 0.0 ? difference / delays[1] : 0.0},
                  {"duration_s", lat.duration_s},
                  {"delta_t_ps", lat.delta_t_ps},
                  {"seed", out.seed}};
  if (lat.reference_delay_difference_us) {
    const double ref = *lat.reference_delay_difference_us;
    summary["reference_delay_difference_us"] = ref;
    summary["delay_difference_deviation_us"] = difference - ref;
    summary["delay_difference_relative_deviation"] = ref != 0.0 ? (difference - ref) / ref : 0.0;
  }
  writer.write_table("latency_histogram", hist);
  writer.write_json("latency_summary.json", summary);
  out.summary = summary;
  return out;
}

RunOutput run_distribution(const Scenario& sc, const RunContext& ctx) {
  const auto& fiber = single_fiber(sc, "distribute");
  RunOutput out;
  out.seed = require_seed(sc, ctx);
  OutputWriter writer(ctx, out);

  const double sigma = photonics::detected_sigma_ps(fiber, sc.source.wavepacket);
  const auto rho_true = distributed_state(sc, fiber, sc.delta_t_ps);
  const auto settings = settings_for(sc.tomography.settings);
  const auto records = tomography::simulate_counts(rho_true, settings, count_options(sc, sigma), sc.detector,
                                                   rng::derive_seed(out.seed, kDistributionCounts));
  auto result = tomography::mle_reconstruct(records);
  if (sc.tomography.mc_replicates > 0) {
    const auto err = tomography::monte_carlo_errors(records, sc.tomography.mc_replicates,
                                                    rng::derive_seed(out.seed, kDistributionMonteCarlo), {},
                                                    ctx.threads);
    result.std_concurrence = err.std_concurrence;
    result.std_purity = err.std_purity;
    result.std_chsh = err.std_chsh;
    result.mc_samples = err.replicates;
    result.mc_failures = err.failures;
  }
  const auto eps = timebin::window_probabilities({sc.delta_t_ps, sigma, sc.window_factor});

  json summary = {{"fiber", fiber_json(fiber)},
                  {"source_state", sc.source.state_name},
                  {"delta_t_ps", sc.delta_t_ps},
                  {"sigma_ps", sigma},
                  {"window_probabilities", {{"eps0", eps.eps0}, {"eps1", eps.eps1}, {"eps_center", eps.eps_center}}},
                  {"model", state_metrics_json(rho_true)},
                  {"fidelity_to_model", fidelity(result.rho_hat, rho_true)},
                  {"tomography", tomography::result_to_json(result)},
                  {"pairs_per_setting", sc.tomography.pairs_per_setting},
                  {"settings", sc.tomography.settings},
                  {"seed", out.seed}};

  Table counts{{"setting_q1", "setting_q2", "n_00", "n_01", "n_10", "n_11", "duration_s"}, {}};
  for (const auto& r : records) {
    counts.rows.push_back({r.setting.label1, r.setting.label2, static_cast<std::int64_t>(r.counts[0]),
                           static_cast<std::int64_t>(r.counts[1]), static_cast<std::int64_t>(r.counts[2]),
                           static_cast<std::int64_t>(r.counts[3]), r.duration_s});
  }
  writer.write_table("counts", counts);
  writer.write("rho_hat.json", serialize::density_to_text(result.rho_hat));
  writer.write_json("distribution_result.json", summary);
  out.summary = summary;
  return out;
}

RunOutput run_sweep(const Scenario& sc, const RunContext& ctx) {
  if (!sc.sweep) throw ConfigError("sweep needs 'timebin.sweep' {start_ps, stop_ps, step_ps}");
  if (sc.fibers.empty()) throw ConfigError("sweep needs 'fiber' or 'fibers'");
  RunOutput out;
  if (sc.tomography.stochastic_sweep) out.seed = require_seed(sc, ctx);
  OutputWriter writer(ctx, out);

  const auto grid = timebin::make_grid(sc.sweep->start_ps, sc.sweep->stop_ps, sc.sweep->step_ps);
  const auto settings = settings_for(sc.tomography.settings);
  static constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

  json fibers = json::array();
  std::vector<Series> plot;
  for (std::size_t fi = 0; fi < sc.fibers.size(); ++fi) {
    const auto& fiber = sc.fibers[fi];
    const double sigma = photonics::detected_sigma_ps(fiber, sc.source.wavepacket);
    const auto after_fiber = apply_chi_one_side(fiber_channel(fiber), sc.source.state, Side::Second);
    const auto rows = timebin::sweep_concurrence_purity(after_fiber, sigma, grid, sc.window_factor);

    Table table{{"path", "delta_t_ps", "concurrence", "purity", "chsh_s"}, {}};
    for (const auto& r : rows) table.rows.push_back({std::string("model"), r.delta_t_ps, r.concurrence, r.purity, r.chsh_s});

    if (sc.tomography.stochastic_sweep) {
      const auto opts = count_options(sc, sigma);
      for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto rho = timebin::effective_state(after_fiber, {grid[k], sigma, sc.window_factor});
        const auto stream = rng::derive_seed(rng::derive_seed(out.seed, kSweepCounts), fnv1a(fiber.name) + k);
        const auto records = tomography::simulate_counts(rho, settings, opts, sc.detector, stream);
        const auto fit = tomography::mle_reconstruct(records);
        table.rows.push_back({std::string("tomography"), grid[k], fit.concurrence, fit.purity, fit.chsh_s});
      }
    }
    writer.write_table("sweep_" + file_stem(fiber.name), table);

    const double plateau = rows.back().concurrence;
    const auto& first = rows.front();
    fibers.push_back({{"fiber", fiber_json(fiber)},
                      {"sigma_ps", sigma},
                      {"plateau_concurrence", plateau},
                      {"drop_onset_ps", optional_json(timebin::drop_onset(rows, 0.95))},
                      {"drop_onset_6sigma", 6.0 * sigma},
                      {"half_plateau_crossing_ps", optional_json(crossing(rows, 0.5 * plateau))},
                      {"first_row", {{"delta_t_ps", first.delta_t_ps},
                                     {"concurrence", first.concurrence},
                                     {"purity", first.purity},
                                     {"chsh_s", first.chsh_s}}}});

    std::vector<double> c, g;
    for (const auto& r : rows) c.push_back(r.concurrence), g.push_back(r.purity);
    const std::string color = kColors[fi % std::size(kColors)];
    plot.push_back({fiber.name + " C", color, grid, c, false});
    plot.push_back({fiber.name + " purity", color, grid, g, true});
  }

  json summary = {{"fibers", fibers},
                  {"source_state", sc.source.state_name},
                  {"window_factor", sc.window_factor},
                  {"stochastic", sc.tomography.stochastic_sweep},
                  {"grid", {{"start_ps", sc.sweep->start_ps}, {"stop_ps", sc.sweep->stop_ps}, {"step_ps", sc.sweep->step_ps}}}};
  writer.write_json("sweep_summary.json", summary);
  writer.write("sweep.svg", line_chart_svg(plot, "Concurrence and purity vs time-bin spacing",
                                           "time-bin spacing (ps)", "value"));
  out.summary = summary;
  return out;
}

RunOutput run_process_tomo(const Scenario& sc, const RunContext& ctx) {
  const auto& fiber = single_fiber(sc, "process-tomo");
  RunOutput out;
  out.seed = require_seed(sc, ctx);
  OutputWriter writer(ctx, out);

  const auto chi_true = fiber_channel(fiber);
  const auto& source = sc.source.state;
  const auto joint_true = apply_chi_one_side(chi_true, source, Side::Second);
  const auto settings = settings_for(sc.tomography.settings);
  const auto opts = count_options(sc, sc.source.wavepacket.source_sigma_ps);

  const auto source_records = tomography::simulate_counts(source, settings, opts, sc.detector,
                                                          rng::derive_seed(out.seed, kProcessSourceCounts));
  const auto joint_records = tomography::simulate_counts(joint_true, settings, opts, sc.detector,
                                                         rng::derive_seed(out.seed, kProcessJointCounts));
  const auto source_fit = tomography::mle_reconstruct(source_records);
  const auto joint_fit = tomography::mle_reconstruct(joint_records);
  const auto& reference = sc.tomography.reference == "true" ? source : source_fit.rho_hat;

  const auto chi = tomography::ancilla_process_tomography(joint_fit.rho_hat, reference);
  const double p = chi.identity_weight();
  const double f_recovered = process_fidelity(chi, depolarizing_chi(p));
  const double f_configured = process_fidelity(chi, depolarizing_chi(fiber.depolarization_p));

  json summary = {
      {"fiber", fiber_json(fiber)},
      {"source_state", sc.source.state_name},
      {"reference", sc.tomography.reference},
      {"recovered_p", p},
      {"configured_p", fiber.depolarization_p},
      // Squared (Uhlmann) convention; the root convention is reported alongside.
      {"fidelity_to_depolarizing_recovered_p", f_recovered},
      {"fidelity_to_depolarizing_recovered_p_root", std::sqrt(f_recovered)},
      {"fidelity_to_depolarizing_configured_p", f_configured},
      {"fidelity_to_depolarizing_configured_p_root", std::sqrt(f_configured)},
      {"fidelity_to_true_channel", process_fidelity(chi, chi_true)},
      {"extremal_output_purity", extremal_json(extremal_output_purity(chi))},
      {"true_channel_extremal_output_purity", extremal_json(extremal_output_purity(chi_true))},
      {"chi", serialize::matrix_to_json(chi.matrix(), serialize::pauli_basis())},
      {"source_tomography", tomography::result_to_json(source_fit)},
      {"joint_tomography", tomography::result_to_json(joint_fit)},
      {"pairs_per_setting", sc.tomography.pairs_per_setting},
      {"seed", out.seed}};

  writer.write("chi.json", serialize::matrix_to_text(chi.matrix(), serialize::pauli_basis()));
  writer.write_json("process_report.json", summary);
  out.summary = summary;
  return out;
}

}  // namespace fiberlink::scenario
