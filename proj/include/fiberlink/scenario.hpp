#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fiberlink/photonics.hpp"
#include "fiberlink/quantum.hpp"
#include "fiberlink/timebin.hpp"

namespace fiberlink::scenario {

struct SweepSpec {
  double start_ps = 0.0;
  double stop_ps = 520.0;
  double step_ps = 20.0;
};

struct SourceConfig {
  std::string state_name;  // human-readable description of the state spec
  DensityMatrix state = bell_psi_minus();
  photonics::WavePacket wavepacket;
  double pair_rate_hz = 1e5;
};

struct TomographyConfig {
  std::int64_t pairs_per_setting = 1'000'000;
  int mc_replicates = 0;
  std::optional<std::uint64_t> seed;
  std::string settings = "pauli36";      // or "bases9"
  std::string reference = "reconstructed";  // process tomography: "reconstructed" or "true"
  bool stochastic_sweep = false;
};

struct LatencyConfig {
  double duration_s = 60.0;
  double bin_width_ps = 10.0;
  double delta_t_ps = 140.0;
  std::map<std::string, double> coincidence_rate_hz;  // by fiber name
  std::optional<double> reference_delay_difference_us;
  timebin::PeakWeights peak_weights;
};

/// A parsed, validated scenario file. Physical quantities carry unit suffixes
/// in their key names; fibers, detectors and sources may name built-in presets.
struct Scenario {
  nlohmann::json document;  // merged document after includes
  SourceConfig source;
  std::vector<photonics::FiberSpec> fibers;  // "fiber" yields one entry, "fibers" several
  photonics::DetectorSpec detector;
  double delta_t_ps = 520.0;
  double window_factor = 3.0;
  std::optional<SweepSpec> sweep;
  TomographyConfig tomography;
  LatencyConfig latency;
  std::vector<std::string> outputs;

  /// SHA-256 of the canonical serialization of `document`.
  std::string hash() const;
};

/// The built-in preset document (fibers, detectors, sources, wavepacket).
const nlohmann::json& builtin_presets();
photonics::FiberSpec fiber_preset(const std::string& name);
std::vector<std::string> fiber_preset_names();

/// Parses JSON text (comments allowed). `base_dir` resolves "include" paths.
Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir = ".");
Scenario load_scenario(const std::filesystem::path& path);

/// Werner visibility with purity γ: (1 + 3v²)/4 = γ.
double werner_visibility_for_purity(double purity);

}  // namespace fiberlink::scenario
