#include "fiberlink/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "fiberlink/builtin_presets.hpp"
#include "fiberlink/error.hpp"
#include "fiberlink/manifest.hpp"
#include "fiberlink/serialize.hpp"

namespace fiberlink::scenario {

using nlohmann::json;

namespace {

constexpr int kMaxIncludeDepth = 8;

json parse_text(const std::string& text, const std::string& where) {
  try {
    return json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json resolve_includes(json doc, const std::filesystem::path& base_dir, int depth) {
  if (!doc.is_object()) throw ConfigError("scenario document must be a JSON object");
  if (!doc.contains("include")) return doc;
  if (depth >= kMaxIncludeDepth) throw ConfigError("include nesting too deep (cycle?)");
  json includes = doc["include"];
  doc.erase("include");
  if (includes.is_string()) includes = json::array({includes});
  if (!includes.is_array()) throw ConfigError("'include' must be a path or a list of paths");
  json merged = json::object();
  for (const auto& inc : includes) {
    if (!inc.is_string()) throw ConfigError("'include' entries must be strings");
    const auto path = base_dir / inc.get<std::string>();
    json child = resolve_includes(parse_text(read_file(path), path.string()), path.parent_path(), depth + 1);
    merged.merge_patch(child);
  }
  merged.merge_patch(doc);
  return merged;
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError("'" + where + "' must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) throw ConfigError("unknown key '" + key + "' in '" + where + "'");
  }
}

double number(const json& obj, const std::string& key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ConfigError("'" + where + "." + key + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError("'" + where + "." + key + "' must be finite");
  return d;
}

template <typename T>
void maybe(const json& obj, const std::string& key, const std::string& where, T& out) {
  if (!obj.contains(key)) return;
  if constexpr (std::is_same_v<T, double>) {
    out = number(obj, key, where);
  } else if constexpr (std::is_same_v<T, bool>) {
    if (!obj.at(key).is_boolean()) throw ConfigError("'" + where + "." + key + "' must be a boolean");
    out = obj.at(key).get<bool>();
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!obj.at(key).is_string()) throw ConfigError("'" + where + "." + key + "' must be a string");
    out = obj.at(key).get<std::string>();
  } else {
    const auto& v = obj.at(key);
    if (!v.is_number_integer() && !(v.is_number() && std::floor(v.get<double>()) == v.get<double>())) {
      throw ConfigError("'" + where + "." + key + "' must be an integer");
    }
    out = static_cast<T>(v.get<double>());
  }
}

const std::set<std::string> kFiberKeys{"preset",         "name",           "length_km",
                                       "group_index",    "dispersion_ps_nm_km", "attenuation_db_km",
                                       "excess_loss_db", "depolarization_p",    "chi_iz_offdiag"};

photonics::FiberSpec fiber_from_object(const json& obj, const std::string& name, const std::string& where) {
  photonics::FiberSpec f;
  f.name = name;
  maybe(obj, "length_km", where, f.length_km);
  maybe(obj, "group_index", where, f.group_index);
  maybe(obj, "dispersion_ps_nm_km", where, f.dispersion_ps_nm_km);
  maybe(obj, "attenuation_db_km", where, f.attenuation_db_km);
  maybe(obj, "excess_loss_db", where, f.excess_loss_db);
  maybe(obj, "depolarization_p", where, f.depolarization_p);
  maybe(obj, "chi_iz_offdiag", where, f.chi_iz_offdiag);
  return f;
}

photonics::FiberSpec parse_fiber(const json& j, const std::string& where) {
  if (j.is_string()) return fiber_preset(j.get<std::string>());
  check_keys(j, kFiberKeys, where);
  json merged = json::object();
  std::string name = "custom";
  if (j.contains("preset")) {
    if (!j["preset"].is_string()) throw ConfigError("'" + where + ".preset' must be a string");
    name = j["preset"].get<std::string>();
    fiber_preset(name);  // existence check
    merged = builtin_presets()["fibers"][name];
  }
  merged.merge_patch(j);
  merged.erase("preset");
  if (merged.contains("name")) {
    if (!merged["name"].is_string()) throw ConfigError("'" + where + ".name' must be a string");
    name = merged["name"].get<std::string>();
    merged.erase("name");
  }
  auto f = fiber_from_object(merged, name, where);
  try {
    f.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return f;
}

photonics::DetectorSpec parse_detector(const json& j) {
  json obj = j;
  if (j.is_string()) {
    const auto& dets = builtin_presets()["detectors"];
    if (!dets.contains(j.get<std::string>())) throw ConfigError("unknown detector preset '" + j.get<std::string>() + "'");
    obj = dets[j.get<std::string>()];
  }
  check_keys(obj, {"preset", "jitter_sigma_ps", "efficiency", "dark_rate_hz"}, "detector");
  if (obj.contains("preset")) {
    const auto& dets = builtin_presets()["detectors"];
    const auto name = obj["preset"].is_string() ? obj["preset"].get<std::string>() : "";
    if (!dets.contains(name)) throw ConfigError("unknown detector preset '" + name + "'");
    json base = dets[name];
    base.merge_patch(obj);
    base.erase("preset");
    obj = base;
  }
  photonics::DetectorSpec d;
  maybe(obj, "jitter_sigma_ps", "detector", d.jitter_sigma_ps);
  maybe(obj, "efficiency", "detector", d.efficiency);
  maybe(obj, "dark_rate_hz", "detector", d.dark_rate_hz);
  try {
    d.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return d;
}

std::pair<std::string, DensityMatrix> parse_state(const json& j) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "psi_minus") return {name, bell_psi_minus()};
    throw ConfigError("unknown source state '" + name + "'");
  }
  check_keys(j, {"werner_visibility", "werner_purity", "density_matrix"}, "source.state");
  if (j.size() != 1) throw ConfigError("'source.state' must have exactly one of werner_visibility, werner_purity, density_matrix");
  try {
    if (j.contains("werner_visibility")) {
      const double v = number(j, "werner_visibility", "source.state");
      return {"werner(v=" + serialize::format_double(v) + ")", werner(v)};
    }
    if (j.contains("werner_purity")) {
      const double g = number(j, "werner_purity", "source.state");
      return {"werner(purity=" + serialize::format_double(g) + ")", werner(werner_visibility_for_purity(g))};
    }
    return {"density_matrix", serialize::density_from_json(j["density_matrix"])};
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("source.state: ") + e.what());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("source.state: ") + e.what());
  }
}

SourceConfig parse_source(const json& j) {
  json obj = j;
  if (j.is_string()) {
    const auto& srcs = builtin_presets()["sources"];
    if (!srcs.contains(j.get<std::string>())) throw ConfigError("unknown source preset '" + j.get<std::string>() + "'");
    obj = srcs[j.get<std::string>()];
  }
  check_keys(obj, {"preset", "state", "wavepacket", "pair_rate_hz"}, "source");
  if (obj.contains("preset")) {
    const auto& srcs = builtin_presets()["sources"];
    const auto name = obj["preset"].is_string() ? obj["preset"].get<std::string>() : "";
    if (!srcs.contains(name)) throw ConfigError("unknown source preset '" + name + "'");
    json base = srcs[name];
    base.merge_patch(obj);
    base.erase("preset");
    obj = base;
  }
  SourceConfig s;
  if (obj.contains("state")) std::tie(s.state_name, s.state) = parse_state(obj["state"]);
  else s.state_name = "psi_minus";
  json wp = builtin_presets()["wavepacket"];
  if (obj.contains("wavepacket")) {
    check_keys(obj["wavepacket"], {"center_wavelength_nm", "spectral_fwhm_nm", "source_sigma_ps"}, "source.wavepacket");
    wp.merge_patch(obj["wavepacket"]);
  }
  maybe(wp, "center_wavelength_nm", "source.wavepacket", s.wavepacket.center_wavelength_nm);
  maybe(wp, "spectral_fwhm_nm", "source.wavepacket", s.wavepacket.spectral_fwhm_nm);
  maybe(wp, "source_sigma_ps", "source.wavepacket", s.wavepacket.source_sigma_ps);
  maybe(obj, "pair_rate_hz", "source", s.pair_rate_hz);
  try {
    s.wavepacket.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (!(s.pair_rate_hz > 0.0)) throw ConfigError("source.pair_rate_hz must be > 0");
  return s;
}

}  // namespace

const json& builtin_presets() {
  static const json presets = parse_text(detail::kBuiltinPresets, "built-in presets");
  return presets;
}

photonics::FiberSpec fiber_preset(const std::string& name) {
  const auto& fibers = builtin_presets()["fibers"];
  if (!fibers.contains(name)) throw ConfigError("unknown fiber preset '" + name + "'");
  auto f = fiber_from_object(fibers[name], name, "preset " + name);
  f.validate();
  return f;
}

std::vector<std::string> fiber_preset_names() {
  std::vector<std::string> names;
  for (const auto& [k, v] : builtin_presets()["fibers"].items()) names.push_back(k);
  return names;
}

double werner_visibility_for_purity(double purity_value) {
  if (!(purity_value >= 0.25 && purity_value <= 1.0)) throw InvalidArgument("Werner purity must lie in [1/4, 1]");
  return std::sqrt((4.0 * purity_value - 1.0) / 3.0);
}

std::string Scenario::hash() const { return sha256_hex(document.dump()); }

Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir) {
  Scenario sc;
  sc.document = resolve_includes(parse_text(text, "scenario"), base_dir, 0);
  const json& doc = sc.document;
  check_keys(doc, {"source", "fiber", "fibers", "detector", "timebin", "tomography", "latency", "outputs"}, "scenario");

  sc.source = parse_source(doc.value("source", json::object()));

  if (doc.contains("fiber") && doc.contains("fibers")) throw ConfigError("give either 'fiber' or 'fibers', not both");
  if (doc.contains("fiber")) sc.fibers.push_back(parse_fiber(doc["fiber"], "fiber"));
  if (doc.contains("fibers")) {
    if (!doc["fibers"].is_array() || doc["fibers"].empty()) throw ConfigError("'fibers' must be a non-empty list");
    for (std::size_t i = 0; i < doc["fibers"].size(); ++i) {
      sc.fibers.push_back(parse_fiber(doc["fibers"][i], "fibers[" + std::to_string(i) + "]"));
    }
  }

  sc.detector = parse_detector(doc.value("detector", json("ideal")));

  if (doc.contains("timebin")) {
    const auto& tb = doc["timebin"];
    check_keys(tb, {"delta_t_ps", "window_factor", "sweep"}, "timebin");
    maybe(tb, "delta_t_ps", "timebin", sc.delta_t_ps);
    maybe(tb, "window_factor", "timebin", sc.window_factor);
    if (tb.contains("sweep")) {
      const auto& sw = tb["sweep"];
      check_keys(sw, {"start_ps", "stop_ps", "step_ps"}, "timebin.sweep");
      SweepSpec spec;
      maybe(sw, "start_ps", "timebin.sweep", spec.start_ps);
      maybe(sw, "stop_ps", "timebin.sweep", spec.stop_ps);
      maybe(sw, "step_ps", "timebin.sweep", spec.step_ps);
      if (!(spec.step_ps > 0.0)) throw ConfigError("timebin.sweep.step_ps must be > 0");
      if (spec.start_ps < 0.0 || spec.stop_ps < spec.start_ps) throw ConfigError("timebin.sweep needs 0 <= start_ps <= stop_ps");
      sc.sweep = spec;
    }
  }
  if (sc.delta_t_ps < 0.0) throw ConfigError("timebin.delta_t_ps must be >= 0");
  if (!(sc.window_factor > 0.0)) throw ConfigError("timebin.window_factor must be > 0");

  if (doc.contains("tomography")) {
    const auto& t = doc["tomography"];
    check_keys(t, {"pairs_per_setting", "mc_replicates", "seed", "settings", "reference", "stochastic_sweep"}, "tomography");
    maybe(t, "pairs_per_setting", "tomography", sc.tomography.pairs_per_setting);
    maybe(t, "mc_replicates", "tomography", sc.tomography.mc_replicates);
    if (t.contains("seed")) {
      if (!t["seed"].is_number_unsigned()) throw ConfigError("'tomography.seed' must be a non-negative integer");
      sc.tomography.seed = t["seed"].get<std::uint64_t>();
    }
    maybe(t, "settings", "tomography", sc.tomography.settings);
    maybe(t, "reference", "tomography", sc.tomography.reference);
    maybe(t, "stochastic_sweep", "tomography", sc.tomography.stochastic_sweep);
  }
  if (sc.tomography.pairs_per_setting <= 0) throw ConfigError("tomography.pairs_per_setting must be > 0");
  if (sc.tomography.mc_replicates < 0 || sc.tomography.mc_replicates == 1) {
    throw ConfigError("tomography.mc_replicates must be 0 (off) or >= 2");
  }
  if (sc.tomography.settings != "pauli36" && sc.tomography.settings != "bases9") {
    throw ConfigError("tomography.settings must be 'pauli36' or 'bases9'");
  }
  if (sc.tomography.reference != "reconstructed" && sc.tomography.reference != "true") {
    throw ConfigError("tomography.reference must be 'reconstructed' or 'true'");
  }

  if (doc.contains("latency")) {
    const auto& l = doc["latency"];
    check_keys(l, {"duration_s", "bin_width_ps", "delta_t_ps", "coincidence_rate_hz", "reference_delay_difference_us", "peak_weights"}, "latency");
    maybe(l, "duration_s", "latency", sc.latency.duration_s);
    maybe(l, "bin_width_ps", "latency", sc.latency.bin_width_ps);
    maybe(l, "delta_t_ps", "latency", sc.latency.delta_t_ps);
    if (l.contains("coincidence_rate_hz")) {
      const auto& rates = l["coincidence_rate_hz"];
      if (!rates.is_object()) throw ConfigError("'latency.coincidence_rate_hz' must map fiber names to rates");
      for (const auto& [fiber, rate] : rates.items()) {
        const double r = number(rates, fiber, "latency.coincidence_rate_hz");
        if (r < 0.0) throw ConfigError("coincidence rate for '" + fiber + "' must be >= 0");
        sc.latency.coincidence_rate_hz[fiber] = r;
      }
    }
    if (l.contains("reference_delay_difference_us")) {
      sc.latency.reference_delay_difference_us = number(l, "reference_delay_difference_us", "latency");
    }
    if (l.contains("peak_weights")) {
      const auto& w = l["peak_weights"];
      check_keys(w, {"early", "central", "late"}, "latency.peak_weights");
      maybe(w, "early", "latency.peak_weights", sc.latency.peak_weights.early);
      maybe(w, "central", "latency.peak_weights", sc.latency.peak_weights.central);
      maybe(w, "late", "latency.peak_weights", sc.latency.peak_weights.late);
      try {
        sc.latency.peak_weights.validate();
      } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
      }
    }
  }
  if (!(sc.latency.duration_s > 0.0)) throw ConfigError("latency.duration_s must be > 0");
  if (!(sc.latency.bin_width_ps > 0.0)) throw ConfigError("latency.bin_width_ps must be > 0");
  if (sc.latency.delta_t_ps < 0.0) throw ConfigError("latency.delta_t_ps must be >= 0");

  if (doc.contains("outputs")) {
    if (!doc["outputs"].is_array()) throw ConfigError("'outputs' must be a list of artifact names");
    for (const auto& o : doc["outputs"]) {
      if (!o.is_string()) throw ConfigError("'outputs' entries must be strings");
      sc.outputs.push_back(o.get<std::string>());
    }
  }
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_file(path), path.parent_path().empty() ? "." : path.parent_path());
}

}  // namespace fiberlink::scenario
