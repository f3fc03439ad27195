#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <fstream>

#include "afcsim/afc_memory.hpp"
#include "afcsim/density_io.hpp"
#include "afcsim/entanglement_tests.hpp"
#include "afcsim/error.hpp"
#include "afcsim/experiment.hpp"
#include "afcsim/pipeline.hpp"
#include "afcsim/simulation.hpp"
#include "afcsim/tomography.hpp"

namespace py = pybind11;
using namespace afcsim;

namespace {

quantum::TwoQubitState state(const quantum::Matrix4& m) { return quantum::nearest_psd(m); }

py::dict metrics(const quantum::Matrix4& m) {
  const auto rho = state(m);
  py::dict d;
  d["fidelity"] = rho.expectation(quantum::bell_psi_plus());
  d["purity"] = quantum::purity(rho);
  d["concurrence"] = quantum::concurrence(rho);
  d["eof"] = quantum::entanglement_of_formation(rho);
  return d;
}

sim::Stage stage_of(const std::string& s) {
  if (s == "after") return sim::Stage::AfterStorage;
  if (s == "before") return sim::Stage::BeforeStorage;
  throw InvalidArgument("stage must be 'after' or 'before'");
}

py::object parse_json(const std::string& text) { return py::module_::import("json").attr("loads")(text); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multiplexed AFC memory entanglement simulator";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<FitError>(m, "FitError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

  m.def("afc_efficiency", py::overload_cast<double, double, double>(&memory::afc_efficiency), py::arg("d1"),
        py::arg("finesse") = 2.0, py::arg("d0") = 1.7);
  m.def("storage_time_ns", &memory::storage_time_ns, py::arg("teeth_spacing_mhz"));

  m.def("load_density_matrix", &quantum::load_density_matrix, py::arg("path"));
  m.def("metrics", &metrics, py::arg("rho"), "Fidelity to Psi+, purity, concurrence and EoF of the clipped matrix.");
  m.def(
      "fidelity", [](const quantum::Matrix4& a, const quantum::Matrix4& b) { return quantum::fidelity(state(a), state(b)); },
      py::arg("rho"), py::arg("sigma"));
  m.def(
      "analytic_S", [](const quantum::Matrix4& rho, double a, double ap, double b, double bp) {
        return bell::analytic_S(state(rho), {a, ap, b, bp});
      },
      py::arg("rho"), py::arg("alpha") = 0.0, py::arg("alpha_prime") = 1.5707963267948966,
      py::arg("beta") = 0.7853981633974483, py::arg("beta_prime") = -0.7853981633974483);
  m.def(
      "project_pair",
      [](const quantum::Matrix4& rho, double alpha, double beta) {
        return analyzer::project_pair(state(rho), alpha, beta);
      },
      py::arg("rho"), py::arg("alpha"), py::arg("beta"), "36 joint cell probabilities, idler_cell * 6 + signal_cell.");

  m.def(
      "reconstruct_counts_csv",
      [](const std::filesystem::path& path, const std::string& model) {
        std::ifstream in(path);
        if (!in) throw DataError("cannot open " + path.string());
        const auto rec = tomography::read_count_csv(in);
        const auto em = model == "equal" ? tomography::ExposureModel::EqualAcquisition
                                         : tomography::ExposureModel::PerSettingTotals;
        return tomography::mle_reconstruct(rec, em).rho.matrix();
      },
      py::arg("path"), py::arg("exposure_model") = "per_setting");

  m.def("default_fixture_dir", &pipeline::default_fixture_dir);
  m.def(
      "analyze_golden",
      [](const std::string& table, int trials, std::uint64_t seed) {
        const auto dir = pipeline::default_fixture_dir();
        pipeline::GoldenResult r;
        if (table == "table2") {
          r = pipeline::analyze_table2(dir);
        } else if (table == "table3") {
          r = pipeline::analyze_table3(dir, trials, seed);
        } else if (table == "table4") {
          r = pipeline::analyze_table4(dir);
        } else {
          throw InvalidArgument("table must be table2, table3 or table4");
        }
        py::dict d;
        d["report"] = parse_json(r.report.dump());
        d["checks"] = parse_json(pipeline::to_json(r.checks).dump());
        d["pass"] = pipeline::all_pass(r.checks);
        return d;
      },
      py::arg("table"), py::arg("trials") = 20, py::arg("seed") = 1);

  m.def(
      "normalize_config", [](const std::string& text) { return experiment::config_to_json(experiment::parse_config(text)); },
      py::arg("json_text"), "Validates a config and returns it with every default filled in.");

  m.def(
      "predict",
      [](const std::string& config_text, int channel, const std::string& stage, double alpha, double beta,
         double wall_s) {
        const auto c = experiment::parse_config(config_text);
        sim::Measurement meas;
        meas.idler_channel = meas.signal_channel = channel;
        meas.stage = stage_of(stage);
        meas.alpha = alpha;
        meas.beta = beta;
        meas.cycles = c.measure_cycles(wall_s);
        const auto p = sim::predict_measurement(c, meas);
        py::dict d;
        d["cells"] = p.cells;
        d["g2"] = p.g2;
        d["cycles"] = meas.cycles;
        return d;
      },
      py::arg("config_json"), py::arg("channel") = 0, py::arg("stage") = "after", py::arg("alpha") = 0.0,
      py::arg("beta") = 0.0, py::arg("wall_s") = 500.0);

  m.def(
      "simulate",
      [](const std::string& config_text, int channel, const std::string& stage, double alpha, double beta,
         double wall_s, std::uint64_t seed) {
        const auto c = experiment::parse_config(config_text);
        sim::Measurement meas;
        meas.idler_channel = meas.signal_channel = channel;
        meas.stage = stage_of(stage);
        meas.alpha = alpha;
        meas.beta = beta;
        meas.cycles = c.measure_cycles(wall_s);
        meas.seed = seed;
        meas.mode = c.analysis.sampling;
        sim::MeasurementResult r;
        {
          py::gil_scoped_release release;
          r = sim::simulate_measurement(c, meas);
        }
        py::dict d;
        d["cells"] = r.counts.cells;
        d["cycles"] = r.cycles;
        d["signal_cycles"] = r.counts.signal_cycles;
        d["joint_cycles"] = r.counts.joint_cycles;
        return d;
      },
      py::arg("config_json"), py::arg("channel") = 0, py::arg("stage") = "after", py::arg("alpha") = 0.0,
      py::arg("beta") = 0.0, py::arg("wall_s") = 10.0, py::arg("seed") = 1);
}
