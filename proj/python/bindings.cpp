#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "fdgm/certify.hpp"
#include "fdgm/error.hpp"
#include "fdgm/scenario.hpp"

namespace py = pybind11;
using namespace fdgm;

namespace {

py::dict records_to_dict(const std::vector<MetricsRecord>& records) {
  std::vector<int> k;
  std::vector<double> d, gap, err, feas, fgap;
  for (const auto& r : records) {
    k.push_back(r.k);
    d.push_back(r.dual_value);
    gap.push_back(r.dual_gap);
    err.push_back(r.primal_error);
    feas.push_back(r.feasibility_gap);
    fgap.push_back(r.objective_gap);
  }
  py::dict out;
  out["k"] = k;
  out["D"] = d;
  out["dual_gap"] = gap;
  out["primal_err"] = err;
  out["feas_gap"] = feas;
  out["F_gap"] = fgap;
  return out;
}

ScenarioConfig preset_with(const std::string& name, std::optional<std::uint64_t> seed,
                           std::optional<int> horizon, std::optional<int> record_every) {
  auto c = make_preset(name);
  if (seed) apply_seed(c, *seed);
  if (horizon) c.horizon = *horizon;
  if (record_every) c.record_every = *record_every;
  return c;
}

py::dict outcome_to_dict(const ScenarioOutcome& o) {
  py::dict algos;
  for (const auto& a : o.algorithms) {
    py::dict entry = records_to_dict(a.records);
    entry["kind"] = to_string(a.kind);
    entry["step"] = a.resolved_step;
    if (a.certification) {
      py::dict fams;
      for (const auto& f : a.certification->families) fams[f.name.c_str()] = f.passed;
      entry["certification"] = fams;
    }
    algos[a.label.c_str()] = entry;
  }
  py::dict out;
  out["algorithms"] = algos;
  out["F_star"] = o.reference.F_star;
  out["x_star"] = o.reference.x_star;
  out["certification_passed"] = o.certification_passed();
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Distributed Fenchel dual gradient simulator";

  auto base = py::register_exception<Error>(m, "FdgmError");
  py::register_exception<InvalidInput>(m, "InvalidInput", base.ptr());
  py::register_exception<InvalidConfig>(m, "InvalidConfig", base.ptr());
  py::register_exception<OracleFailure>(m, "OracleFailure", base.ptr());
  py::register_exception<CertificationUnavailable>(m, "CertificationUnavailable", base.ptr());

  m.def("list_presets", [] {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& p : list_presets()) out.emplace_back(p.name, p.description);
    return out;
  });

  m.def(
      "preset_config",
      [](const std::string& name, std::optional<std::uint64_t> seed, std::optional<int> horizon) {
        std::ostringstream s;
        write_config(s, preset_with(name, seed, horizon, std::nullopt));
        return s.str();
      },
      py::arg("name"), py::arg("seed") = py::none(), py::arg("horizon") = py::none());

  m.def(
      "run_preset",
      [](const std::string& name, std::optional<std::uint64_t> seed, std::optional<int> horizon,
         std::optional<int> record_every, bool certify, std::optional<std::filesystem::path> out) {
        auto c = preset_with(name, seed, horizon, record_every);
        c.certify = c.certify || certify;
        ScenarioOutcome o;
        {
          py::gil_scoped_release release;
          o = execute_scenario(c, out);
        }
        return outcome_to_dict(o);
      },
      py::arg("name"), py::arg("seed") = py::none(), py::arg("horizon") = py::none(),
      py::arg("record_every") = py::none(), py::arg("certify") = false,
      py::arg("out") = py::none());

  m.def(
      "run_config",
      [](const std::string& text, std::optional<std::filesystem::path> out) {
        std::istringstream in(text);
        auto c = parse_config(in);
        ScenarioOutcome o;
        {
          py::gil_scoped_release release;
          o = execute_scenario(c, out);
        }
        return outcome_to_dict(o);
      },
      py::arg("config_text"), py::arg("out") = py::none());

  m.def(
      "conjugate_argmax",
      [](const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double gamma,
         const Eigen::VectorXd& lower, const Eigen::VectorXd& upper, const Eigen::VectorXd& w,
         double tol) { return conjugate_argmax(LocalProblem(a, b, gamma, lower, upper), w, tol); },
      py::arg("A"), py::arg("b"), py::arg("gamma"), py::arg("lower"), py::arg("upper"),
      py::arg("w"), py::arg("tol") = kDefaultOracleTolerance);

  m.def(
      "generate_sequence",
      [](const std::string& kind, int n, int window, int horizon, std::uint64_t seed) {
        auto seq = generate_sequence(sequence_kind_from_string(kind), n, window, horizon, seed);
        std::vector<std::vector<std::pair<int, int>>> out;
        for (const auto& g : seq.snapshots()) out.push_back(g.edges());
        return out;
      },
      py::arg("kind"), py::arg("n"), py::arg("B"), py::arg("horizon"), py::arg("seed"));
}
