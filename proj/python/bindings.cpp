#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ipmsim/diagnostics.hpp"
#include "ipmsim/errors.hpp"
#include "ipmsim/integrator.hpp"
#include "ipmsim/model.hpp"
#include "ipmsim/scenario.hpp"
#include "ipmsim/stability.hpp"

namespace py = pybind11;
using namespace ipmsim;

namespace {

py::array_t<double> sample_times(const Trajectory& traj) {
  py::array_t<double> out(static_cast<py::ssize_t>(traj.samples().size()));
  auto view = out.mutable_unchecked<1>();
  for (std::size_t i = 0; i < traj.samples().size(); ++i) view(static_cast<py::ssize_t>(i)) = traj.samples()[i].t;
  return out;
}

py::array_t<double> sample_states(const Trajectory& traj) {
  const auto n = static_cast<py::ssize_t>(traj.samples().size());
  py::array_t<double> out({n, static_cast<py::ssize_t>(kStateDim)});
  auto view = out.mutable_unchecked<2>();
  for (py::ssize_t i = 0; i < n; ++i) {
    const StateVector u = traj.samples()[static_cast<std::size_t>(i)].state.as_vector();
    for (std::size_t c = 0; c < kStateDim; ++c) view(i, static_cast<py::ssize_t>(c)) = u[c];
  }
  return out;
}

std::map<std::string, bool> verdicts(const ConditionVerdicts& v) {
  std::map<std::string, bool> out;
  for (const auto& [set, ok] : v) out.emplace(std::string(to_string(set)), ok);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Impulsive integrated pest management simulator and Floquet stability analyzer";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<IntegrationError>(m, "IntegrationError", PyExc_RuntimeError);

  py::enum_<ImpulseKind>(m, "ImpulseKind")
      .value("Bio", ImpulseKind::Bio)
      .value("Chem", ImpulseKind::Chem)
      .value("Both", ImpulseKind::Both);

  py::class_<ModelParameters>(m, "ModelParameters")
      .def(py::init<>())
      .def_readwrite("r", &ModelParameters::r)
      .def_readwrite("k", &ModelParameters::k)
      .def_readwrite("alpha", &ModelParameters::alpha)
      .def_readwrite("phi", &ModelParameters::phi)
      .def_readwrite("lambda_", &ModelParameters::lambda)
      .def_readwrite("c1", &ModelParameters::c1)
      .def_readwrite("c2", &ModelParameters::c2)
      .def_readwrite("d", &ModelParameters::d)
      .def_readwrite("delta", &ModelParameters::delta)
      .def_readwrite("theta", &ModelParameters::theta)
      .def_readwrite("gamma", &ModelParameters::gamma)
      .def_readwrite("mu", &ModelParameters::mu)
      .def_readwrite("m1", &ModelParameters::m1)
      .def_readwrite("m2", &ModelParameters::m2)
      .def("validate", &ModelParameters::validate);

  py::class_<ImpulseSchedule>(m, "ImpulseSchedule")
      .def(py::init([](std::optional<double> tau1, std::optional<double> tau2, double v_i, double s_i,
                       bool first_impulse_at_zero) {
             return ImpulseSchedule{tau1, tau2, v_i, s_i, first_impulse_at_zero};
           }),
           py::arg("tau1") = py::none(), py::arg("tau2") = py::none(), py::arg("v_i") = 0.0, py::arg("s_i") = 0.0,
           py::arg("first_impulse_at_zero") = true)
      .def_readwrite("tau1", &ImpulseSchedule::tau1)
      .def_readwrite("tau2", &ImpulseSchedule::tau2)
      .def_readwrite("v_i", &ImpulseSchedule::v_i)
      .def_readwrite("s_i", &ImpulseSchedule::s_i)
      .def_readwrite("first_impulse_at_zero", &ImpulseSchedule::first_impulse_at_zero);

  py::class_<SystemState>(m, "SystemState")
      .def(py::init([](double x, double y, double z, double v, double s) { return SystemState{x, y, z, v, s}; }),
           py::arg("x") = 0.0, py::arg("y") = 0.0, py::arg("z") = 0.0, py::arg("v") = 0.0, py::arg("s") = 0.0)
      .def_readwrite("x", &SystemState::x)
      .def_readwrite("y", &SystemState::y)
      .def_readwrite("z", &SystemState::z)
      .def_readwrite("v", &SystemState::v)
      .def_readwrite("s", &SystemState::s)
      .def("as_tuple", &SystemState::as_vector)
      .def("__repr__", [](const SystemState& st) {
        return "SystemState(" + std::to_string(st.x) + ", " + std::to_string(st.y) + ", " + std::to_string(st.z) +
               ", " + std::to_string(st.v) + ", " + std::to_string(st.s) + ")";
      });

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("rtol", &SolverConfig::rtol)
      .def_readwrite("atol", &SolverConfig::atol)
      .def_readwrite("h_init", &SolverConfig::h_init)
      .def_readwrite("h_max", &SolverConfig::h_max)
      .def_readwrite("dense_dt", &SolverConfig::dense_dt);

  py::class_<ImpulseEvent>(m, "ImpulseEvent")
      .def_readonly("t", &ImpulseEvent::t)
      .def_readonly("kind", &ImpulseEvent::kind);

  py::class_<EventRecord>(m, "EventRecord")
      .def_readonly("t", &EventRecord::t)
      .def_readonly("pre", &EventRecord::pre)
      .def_readonly("post", &EventRecord::post)
      .def_readonly("kind", &EventRecord::kind);

  py::class_<SolverStats>(m, "SolverStats")
      .def_readonly("accepted", &SolverStats::accepted)
      .def_readonly("rejected", &SolverStats::rejected)
      .def_readonly("rhs_evals", &SolverStats::rhs_evals)
      .def_readonly("error_estimate_sum", &SolverStats::error_estimate_sum)
      .def_readonly("max_local_error", &SolverStats::max_local_error)
      .def_readonly("clamped", &SolverStats::clamped);

  py::class_<Trajectory>(m, "Trajectory")
      .def_property_readonly("t", &sample_times, "Sample times, shape (n,)")
      .def_property_readonly("states", &sample_states, "Sample states, shape (n, 5) in x, y, z, v, s order")
      .def_property_readonly("events", &Trajectory::events)
      .def_property_readonly("stats", &Trajectory::stats)
      .def("at", &Trajectory::at, py::arg("t"))
      .def("to_csv", [](const Trajectory& traj) {
        std::ostringstream out;
        write_trajectory_csv(out, traj);
        return out.str();
      });

  py::class_<StabilityReport>(m, "StabilityReport")
      .def_readonly("period_T", &StabilityReport::period_T)
      .def_readonly("period_exact", &StabilityReport::period_exact)
      .def_readonly("analytic_multipliers", &StabilityReport::analytic_multipliers)
      .def_readonly("numeric_multipliers", &StabilityReport::numeric_multipliers)
      .def_property_readonly("condition_verdicts", [](const StabilityReport& r) { return verdicts(r.condition_verdicts); })
      .def_readonly("dominant_multiplier", &StabilityReport::dominant_multiplier)
      .def_readonly("stable", &StabilityReport::stable)
      .def_readonly("notes", &StabilityReport::notes)
      .def("to_text", [](const StabilityReport& r) { return to_key_value(r); });

  py::class_<DiagnosticsReport>(m, "DiagnosticsReport")
      .def_readonly("bound_M", &DiagnosticsReport::bound_M)
      .def_readonly("max_observed", &DiagnosticsReport::max_observed)
      .def_readonly("min_observed", &DiagnosticsReport::min_observed)
      .def_readonly("nonneg_ok", &DiagnosticsReport::nonneg_ok)
      .def_readonly("bound_ok", &DiagnosticsReport::bound_ok)
      .def_readonly("clamp_count", &DiagnosticsReport::clamp_count)
      .def_readonly("convergence_sup", &DiagnosticsReport::convergence_sup)
      .def_readonly("mean_pest_load", &DiagnosticsReport::mean_pest_load)
      .def_readonly("extinction_y", &DiagnosticsReport::extinction_y)
      .def_readonly("extinction_z", &DiagnosticsReport::extinction_z)
      .def("to_text", [](const DiagnosticsReport& r) { return to_key_value(r); });

  m.def("vector_field", py::overload_cast<const StateVector&, const ModelParameters&>(&vector_field), py::arg("u"),
        py::arg("params"));
  m.def("impulse_calendar",
        [](const ImpulseSchedule& s, double t0, double tf) { return impulse_calendar(s, {t0, tf}); },
        py::arg("schedule"), py::arg("t0"), py::arg("tf"));
  m.def(
      "integrate",
      [](const ModelParameters& p, const ImpulseSchedule& s, const SystemState& initial, double t0, double tf,
         const SolverConfig& cfg) {
        py::gil_scoped_release release;
        return integrate(p, s, initial, {t0, tf}, cfg);
      },
      py::arg("params"), py::arg("schedule"), py::arg("initial"), py::arg("t0"), py::arg("tf"),
      py::arg("config") = SolverConfig{});
  m.def("analytic_multipliers", &analytic_multipliers, py::arg("params"), py::arg("schedule"));
  m.def("monodromy", &monodromy, py::arg("params"), py::arg("schedule"));
  m.def("analyze_stability", &analyze_stability, py::arg("params"), py::arg("schedule"));
  m.def("check_conditions",
        [](const ModelParameters& p, const ImpulseSchedule& s) { return verdicts(check_conditions(p, s)); },
        py::arg("params"), py::arg("schedule"));
  m.def(
      "critical_period",
      [](const ModelParameters& p, double v_i, double s_i) -> py::object {
        const CriticalPeriod cp = critical_period(p, v_i, s_i);
        switch (cp.kind) {
          case CriticalPeriod::Kind::Zero:
            return py::float_(0.0);
          case CriticalPeriod::Kind::Finite:
            return py::float_(cp.value);
          case CriticalPeriod::Kind::Unbounded:
            break;
        }
        return py::none();
      },
      py::arg("params"), py::arg("v_i"), py::arg("s_i"),
      "Largest stabilizing common period; 0.0 if none stabilizes, None if every period does.");
  m.def("theoretical_bound", &theoretical_bound, py::arg("params"), py::arg("schedule"));
  m.def("verify_trajectory",
        [](const Trajectory& traj, const ModelParameters& p, const ImpulseSchedule& s) {
          return verify_trajectory(traj, p, s);
        },
        py::arg("trajectory"), py::arg("params"), py::arg("schedule"));

  m.def("preset_names", &preset_names);
  m.def("preset_text", [](const std::string& name) { return std::string(preset_text(name)); }, py::arg("name"));
  m.def(
      "run_preset",
      [](const std::string& name, const std::filesystem::path& out_dir) {
        const auto outcome = run_scenario(load_preset(name), out_dir);
        return outcome.written;
      },
      py::arg("name"), py::arg("out_dir"), "Runs a bundled preset and returns the written artifact paths.");
  m.def(
      "run_config",
      [](const std::filesystem::path& config, const std::filesystem::path& out_dir) {
        return run_scenario(load_scenario(config), out_dir).written;
      },
      py::arg("config"), py::arg("out_dir"));
}
