#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "fiberlink/error.hpp"
#include "fiberlink/manifest.hpp"
#include "fiberlink/runners.hpp"
#include "fiberlink/scenario.hpp"

namespace fs = std::filesystem;
using namespace fiberlink;
using namespace fiberlink::scenario;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::string format = "csv";
  unsigned threads = 0;
};

void add_common(CLI::App* sub, Options& opt, bool needs_output) {
  sub->add_option("--config", opt.config, "Scenario file (JSON, comments allowed)")->required();
  if (!needs_output) return;
  sub->add_option("--seed", opt.seed, "RNG seed; overrides tomography.seed");
  sub->add_option("--out-dir", opt.out_dir, "Directory for output files");
  sub->add_option("--format", opt.format, "Table format")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--threads", opt.threads, "Monte-Carlo worker threads (0 = all cores)");
}

using Runner = RunOutput (*)(const Scenario&, const RunContext&);

int run(const std::string& command, Runner runner, const Options& opt) {
  const auto started = utc_timestamp();
  const auto sc = load_scenario(opt.config);
  RunContext ctx;
  ctx.out_dir = opt.out_dir;
  ctx.format = opt.format == "json" ? TableFormat::Json : TableFormat::Csv;
  ctx.seed = opt.seed;
  ctx.threads = opt.threads;

  const auto out = runner(sc, ctx);

  RunManifest manifest;
  manifest.command = command;
  manifest.scenario_hash = sc.hash();
  manifest.tool_version = tool_version();
  manifest.seed = out.seed;
  manifest.started_at = started;
  manifest.finished_at = utc_timestamp();
  manifest.files = out.files;
  std::ofstream(fs::path(opt.out_dir) / "manifest.json") << manifest.to_json(opt.out_dir).dump(2) << '\n';

  std::cout << out.summary.dump(2) << '\n';
  return 0;
}

int validate(const Options& opt) {
  const auto sc = load_scenario(opt.config);
  std::cout << "ok " << opt.config << " sha256=" << sc.hash() << " fibers=";
  for (std::size_t i = 0; i < sc.fibers.size(); ++i) std::cout << (i ? "," : "") << sc.fibers[i].name;
  std::cout << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulate polarization-entanglement distribution over optical fibers"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);

  Options opt;
  struct Command {
    const char* name;
    const char* help;
    Runner runner;
  };
  const Command commands[] = {
      {"latency", "Arrival-time histograms and latency comparison of two fibers", run_latency},
      {"distribute", "Entanglement distribution through one fiber with state tomography", run_distribution},
      {"sweep", "Concurrence, purity and CHSH versus time-bin spacing", run_sweep},
      {"process-tomo", "Ancilla-assisted process tomography of the fiber channel", run_process_tomo},
  };
  for (const auto& c : commands) add_common(app.add_subcommand(c.name, c.help), opt, true);
  auto* validate_cmd = app.add_subcommand("validate-config", "Parse and validate a scenario file");
  add_common(validate_cmd, opt, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (validate_cmd->parsed()) return validate(opt);
    for (const auto& c : commands) {
      if (app.got_subcommand(c.name)) return run(c.name, c.runner, opt);
    }
  } catch (const InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}
