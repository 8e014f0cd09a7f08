#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "relcheck/cli/session.hpp"
#include "relcheck/compare/compare.hpp"
#include "relcheck/compare/report.hpp"
#include "relcheck/depan/depan.hpp"
#include "relcheck/lang/parser.hpp"
#include "relcheck/lang/printer.hpp"
#include "relcheck/lang/typecheck.hpp"
#include "relcheck/partition/partition.hpp"
#include "relcheck/runtime/runtime.hpp"

namespace py = pybind11;
using namespace relcheck;

namespace {

lang::Program load(const std::string& source) {
  lang::Program p = lang::parse_or_throw(source);
  lang::typecheck(p);
  return p;
}

py::dict array_dict(const ArrayValue& a) {
  py::list dims;
  for (const auto& e : a.dims) dims.append(py::make_tuple(e.lo, e.hi));
  py::dict d;
  d["dims"] = dims;
  d["data"] = a.data;
  return d;
}

py::dict final_dict(const runtime::FinalState& fs) {
  py::dict out;
  for (const auto& [routine, arrays] : fs.arrays) {
    py::dict r;
    for (const auto& [name, value] : arrays) r[py::str(name)] = array_dict(value);
    out[py::str(routine)] = r;
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Relative debugging of serial programs against their SPMD counterparts";

  // Module-lifetime class object; `code` carries the error code.
  static PyObject* exc = py::exception<Error>(m, "RelcheckError").release().ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object err = py::handle(exc)(py::str(e.code() + ": " + e.what()));
      err.attr("code") = e.code();
      PyErr_SetObject(exc, err.ptr());
    }
  });

  m.def("format", [](const std::string& source) { return lang::pretty_print(load(source)); },
        "Parse, check and pretty-print a program");

  m.def("analyze", [](const std::string& source) {
    lang::Program p = load(source);
    return depan::describe_edges(p, depan::build_defuse(p));
  }, "Dependence edges with their ids, one per line");

  m.def("modifying_routines", [](const std::string& source, const std::string& array, const std::string& scope) {
    lang::Program p = load(source);
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& t : depan::modifying_routines(depan::build_defuse(p), array, scope))
      out.emplace_back(t.routine, t.array);
    return out;
  }, py::arg("source"), py::arg("array"), py::arg("scope"));

  m.def("parallelize",
        [](const std::string& source, const std::string& array, const std::string& routine, int dim, int nranks,
           const std::vector<int>& drop_edges) {
          lang::Program p = load(source);
          auto dist = partition::make_distribution(p, array, routine.empty() ? p.main().name : routine, dim, nranks);
          auto res = partition::parallelize(p, dist, depan::build_defuse(p), drop_edges);
          return py::make_tuple(lang::pretty_print(res.program), partition::to_json(res.db));
        },
        py::arg("source"), py::arg("array"), py::arg("routine") = "", py::arg("dim") = 1, py::arg("nranks") = 4,
        py::arg("drop_edges") = std::vector<int>{}, "SPMD source text and database JSON");

  m.def("block_bounds", &partition::block_bounds, py::arg("lo"), py::arg("hi"), py::arg("nranks"), py::arg("rank"));

  m.def("checksum", [](const std::vector<double>& v) { return compare::checksum(v); });

  m.def("compare_global", [](double serial, const std::vector<double>& partials, double tol) {
    return compare::compare_global(serial, partials, tol).pass;
  }, py::arg("serial"), py::arg("partials"), py::arg("tolerance"));

  m.def("execute", [](const std::string& source, int nranks) {
    lang::Program p = load(source);
    runtime::Runtime rt;
    runtime::RunResult r;
    {
      py::gil_scoped_release unlocked;
      r = p.form == lang::Form::Spmd ? runtime::run_spmd(rt, p, nranks, "") : runtime::run_serial(rt, p);
    }
    if (r.faulted) throw Error(r.fault_code, r.fault_message);
    py::list finals;
    for (const auto& f : r.finals) finals.append(final_dict(f));
    return finals;
  }, py::arg("source"), py::arg("nranks") = 1, "Final arrays of every process, rank order");

  m.def("run",
        [](const std::string& serial, const std::vector<std::string>& monitors, const std::string& distribute,
           int nranks, const std::string& mode, double tolerance, const std::vector<int>& drop_edges,
           std::optional<std::uint64_t> seed) {
          cli::SessionConfig cfg;
          cfg.serial_source = serial;
          cfg.distribute = cli::DistributeSpec::parse(distribute);
          cfg.nranks = nranks;
          cfg.drop_edges = drop_edges;
          cfg.mode.mode = compare::mode_from_string(mode);
          cfg.mode.tolerance = tolerance;
          cfg.sched_seed = seed;
          for (const auto& mon : monitors) cfg.monitors.push_back(cli::MonitorSpec::parse(mon));
          cli::SessionOutcome o;
          {
            py::gil_scoped_release unlocked;
            o = cli::orchestrate(cfg);
          }
          py::dict d;
          d["outcome"] = cli::to_string(o.kind);
          d["exit_code"] = o.exit_code();
          d["checkpoints"] = o.checkpoints;
          d["report"] = o.report ? py::object(py::str(compare::report_text(*o.report))) : py::object(py::none());
          d["message"] = cli::render_report(o);
          d["log"] = o.log;
          return d;
        },
        py::arg("serial"), py::arg("monitors"), py::arg("distribute"), py::arg("nranks") = 4,
        py::arg("mode") = "element", py::arg("tolerance") = 0.0, py::arg("drop_edges") = std::vector<int>{},
        py::arg("seed") = py::none(), "Relative-debugging session; report is JSON text or None");
}
