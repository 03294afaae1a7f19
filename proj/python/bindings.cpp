#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "fiberlink/channels.hpp"
#include "fiberlink/error.hpp"
#include "fiberlink/photonics.hpp"
#include "fiberlink/runners.hpp"
#include "fiberlink/scenario.hpp"
#include "fiberlink/timebin.hpp"
#include "fiberlink/tomography.hpp"

namespace py = pybind11;
using namespace fiberlink;

namespace {

// Python sees plain complex matrices; DensityMatrix/ChiMatrix validation runs on entry.
using PyMatrix = Eigen::MatrixXcd;

DensityMatrix as_density(const PyMatrix& m) { return DensityMatrix(m); }
ChiMatrix as_chi(const PyMatrix& m) {
  if (m.rows() != 4 || m.cols() != 4) throw InvalidArgument("chi matrix must be 4x4");
  return ChiMatrix(Mat4(m));
}

py::object to_python(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

Side side_of(int s) {
  if (s == 1) return Side::First;
  if (s == 2) return Side::Second;
  throw InvalidArgument("side must be 1 or 2");
}

py::dict result_dict(const tomography::TomographyResult& r) {
  py::dict d;
  d["rho"] = PyMatrix(r.rho_hat.matrix());
  d["concurrence"] = r.concurrence;
  d["purity"] = r.purity;
  d["chsh_s"] = r.chsh_s;
  d["std_concurrence"] = r.std_concurrence;
  d["std_purity"] = r.std_purity;
  d["std_chsh"] = r.std_chsh;
  d["log_likelihood"] = r.log_likelihood;
  d["iterations"] = r.iterations;
  d["converged"] = r.converged;
  return d;
}

py::dict fiber_dict(const photonics::FiberSpec& f) {
  py::dict d;
  d["name"] = f.name;
  d["length_km"] = f.length_km;
  d["group_index"] = f.group_index;
  d["dispersion_ps_nm_km"] = f.dispersion_ps_nm_km;
  d["attenuation_db_km"] = f.attenuation_db_km;
  d["excess_loss_db"] = f.excess_loss_db;
  d["depolarization_p"] = f.depolarization_p;
  d["chi_iz_offdiag"] = f.chi_iz_offdiag;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Polarization-entanglement distribution over optical fibers";
  m.attr("__version__") = FIBERLINK_VERSION;

  // states and metrics
  m.def("bell_psi_minus", [] { return PyMatrix(bell_psi_minus().matrix()); });
  m.def("werner", [](double v) { return PyMatrix(werner(v).matrix()); }, py::arg("visibility"));
  m.def("concurrence", [](const PyMatrix& r) { return concurrence(as_density(r)); }, py::arg("rho"));
  m.def("purity", [](const PyMatrix& r) { return purity(as_density(r)); }, py::arg("rho"));
  m.def("chsh_max", [](const PyMatrix& r) { return chsh_max(as_density(r)); }, py::arg("rho"));
  m.def("fidelity", [](const PyMatrix& a, const PyMatrix& b) { return fidelity(as_density(a), as_density(b)); },
        py::arg("a"), py::arg("b"));

  // photonics
  m.def("fiber_preset", [](const std::string& n) { return fiber_dict(scenario::fiber_preset(n)); }, py::arg("name"));
  m.def("fiber_preset_names", &scenario::fiber_preset_names);
  m.def("coherence_time_ps",
        [](double wl, double fwhm) {
          photonics::WavePacket wp;
          wp.center_wavelength_nm = wl;
          wp.spectral_fwhm_nm = fwhm;
          return photonics::coherence_time_ps(wp);
        },
        py::arg("center_wavelength_nm") = 1550.0, py::arg("spectral_fwhm_nm") = 0.859);
  m.def("detected_sigma_ps",
        [](const std::string& n) { return photonics::detected_sigma_ps(scenario::fiber_preset(n), {}); },
        py::arg("fiber"));
  m.def("propagation_delay_us", [](const std::string& n) { return photonics::propagation_delay_us(scenario::fiber_preset(n)); },
        py::arg("fiber"));

  // channels
  m.def("depolarizing_chi", [](double p) { return PyMatrix(depolarizing_chi(p).matrix()); }, py::arg("p"));
  m.def("axis_biased_chi", [](double p, double c) { return PyMatrix(axis_biased_chi(p, c).matrix()); },
        py::arg("p"), py::arg("iz_offdiag"));
  m.def("apply_chi_one_side",
        [](const PyMatrix& chi, const PyMatrix& rho, int side) {
          return PyMatrix(apply_chi_one_side(as_chi(chi), as_density(rho), side_of(side)).matrix());
        },
        py::arg("chi"), py::arg("rho"), py::arg("side") = 2);
  m.def("process_fidelity", [](const PyMatrix& a, const PyMatrix& b) { return process_fidelity(as_chi(a), as_chi(b)); },
        py::arg("a"), py::arg("b"));
  m.def("extremal_output_purity",
        [](const PyMatrix& chi) {
          const auto e = extremal_output_purity(as_chi(chi));
          return py::make_tuple(e.min_purity, e.max_purity);
        },
        py::arg("chi"));

  // time-bin model
  m.def("effective_state",
        [](const PyMatrix& rho, double dt, double sigma, double wf) {
          return PyMatrix(timebin::effective_state(as_density(rho), {dt, sigma, wf}).matrix());
        },
        py::arg("rho"), py::arg("delta_t_ps"), py::arg("sigma_ps"), py::arg("window_factor") = 3.0);
  m.def("sweep",
        [](const PyMatrix& rho, double sigma, const std::vector<double>& dts, double wf) {
          std::vector<std::tuple<double, double, double, double>> rows;
          for (const auto& r : timebin::sweep_concurrence_purity(as_density(rho), sigma, dts, wf))
            rows.emplace_back(r.delta_t_ps, r.concurrence, r.purity, r.chsh_s);
          return rows;
        },
        py::arg("rho"), py::arg("sigma_ps"), py::arg("delta_t_ps"), py::arg("window_factor") = 3.0,
        "Rows of (delta_t_ps, concurrence, purity, chsh_s).");

  // tomography
  m.def("reconstruct",
        [](const PyMatrix& rho, std::int64_t pairs, std::uint64_t seed, bool poisson, int replicates) {
          tomography::CountOptions o;
          o.pairs_per_setting = pairs;
          o.poisson = poisson;
          const auto settings = tomography::standard_settings();
          const auto records = tomography::simulate_counts(as_density(rho), settings, o, {0.0, 1.0, 0.0}, seed);
          py::gil_scoped_release release;
          auto result = replicates > 0 ? tomography::reconstruct_with_errors(records, replicates, seed + 1)
                                       : tomography::mle_reconstruct(records);
          py::gil_scoped_acquire acquire;
          return result_dict(result);
        },
        py::arg("rho"), py::arg("pairs_per_setting") = 1'000'000, py::arg("seed") = 0, py::arg("poisson") = true,
        py::arg("mc_replicates") = 0,
        "Simulate the 36-setting measurement of rho and reconstruct it by maximum likelihood.");

  // scenario runner
  m.def("run",
        [](const std::string& command, const std::filesystem::path& config, const std::filesystem::path& out_dir,
           std::optional<std::uint64_t> seed, const std::string& format) {
          const auto sc = scenario::load_scenario(config);
          scenario::RunContext ctx;
          ctx.out_dir = out_dir;
          ctx.seed = seed;
          if (format == "json") ctx.format = scenario::TableFormat::Json;
          else if (format != "csv") throw InvalidArgument("format must be 'csv' or 'json'");
          scenario::RunOutput out;
          if (command == "latency") out = scenario::run_latency(sc, ctx);
          else if (command == "distribute") out = scenario::run_distribution(sc, ctx);
          else if (command == "sweep") out = scenario::run_sweep(sc, ctx);
          else if (command == "process-tomo") out = scenario::run_process_tomo(sc, ctx);
          else throw InvalidArgument("unknown command '" + command + "'");
          return to_python(out.summary);
        },
        py::arg("command"), py::arg("config"), py::arg("out_dir"), py::arg("seed") = py::none(),
        py::arg("format") = "csv", "Run a scenario stage and return its summary as a dict.");
}
