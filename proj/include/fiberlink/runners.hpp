#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fiberlink/channels.hpp"
#include "fiberlink/scenario.hpp"
#include "fiberlink/timebin.hpp"
#include "fiberlink/tomography.hpp"

namespace fiberlink::scenario {

enum class TableFormat { Csv, Json };

struct RunContext {
  std::filesystem::path out_dir = ".";
  TableFormat format = TableFormat::Csv;
  std::optional<std::uint64_t> seed;  // overrides the scenario seed
  unsigned threads = 0;               // Monte-Carlo workers, 0 = all cores
};

struct RunOutput {
  nlohmann::json summary;
  std::vector<std::filesystem::path> files;  // relative to out_dir
  std::uint64_t seed = 0;
};

/// Arrival-time histograms for fibers[0] (candidate) and fibers[1] (reference).
RunOutput run_latency(const Scenario& sc, const RunContext& ctx);
/// Source → fiber channel on photon 2 → time-bin overlap → tomography.
RunOutput run_distribution(const Scenario& sc, const RunContext& ctx);
/// Concurrence / purity / CHSH versus time-bin spacing for every configured fiber.
RunOutput run_sweep(const Scenario& sc, const RunContext& ctx);
/// Ancilla-assisted process tomography of the fiber's polarization channel.
RunOutput run_process_tomo(const Scenario& sc, const RunContext& ctx);

/// The polarization channel configured for a fiber.
ChiMatrix fiber_channel(const photonics::FiberSpec& fiber);

/// The two-photon state after the fiber channel and the time-bin stage.
DensityMatrix distributed_state(const Scenario& sc, const photonics::FiberSpec& fiber, double delta_t_ps);

std::vector<ProjectorSetting> settings_for(const std::string& name);

void write_sweep_csv(std::ostream& out, const std::vector<timebin::SweepRow>& rows);

}  // namespace fiberlink::scenario
