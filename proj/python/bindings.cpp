#include <map>
#include <string>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ttp/driver.hpp"
#include "ttp/error.hpp"
#include "ttp/instance.hpp"
#include "ttp/report.hpp"

namespace py = pybind11;
using namespace ttp;

namespace {

SolverConfig config_from(const std::map<std::string, std::string>& params) {
    SolverConfig c;
    for (const auto& [k, v] : params) {
        if (k == "method") c.method = parse_method(v);
        else set_param(c, k, v);
    }
    validate(c);
    return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Lagrangian dual bounds for train timetabling";

    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<MasterFailure>(m, "MasterFailure", PyExc_RuntimeError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    py::class_<Instance>(m, "Instance")
        .def_property_readonly("num_blocks", &Instance::num_blocks)
        .def_property_readonly("num_stations", &Instance::num_stations)
        .def_property_readonly("num_requests", &Instance::num_requests)
        .def_property_readonly("intervals", [](const Instance& i) { return i.grid.intervals(); })
        .def_property_readonly("num_cells", &Instance::num_cells)
        .def("to_json", &save_instance);

    m.def("load_instance", &load_instance_string, py::arg("text"));
    m.def("load_instance_file", &load_instance_file, py::arg("path"));
    m.def(
        "generate",
        [](const std::string& tmpl, std::uint64_t seed, const Overrides& overrides) {
            return generate_instance(parse_template(tmpl), seed, overrides);
        },
        py::arg("template"), py::arg("seed"), py::arg("overrides") = Overrides{});

    // Reports come back as JSON text; the package wrapper decodes them.
    m.def(
        "solve_json",
        [](const Instance& inst, const std::map<std::string, std::string>& params) {
            const SolverConfig c = config_from(params);
            SolveReport rep;
            {
                py::gil_scoped_release release;
                rep = run(inst, c);
            }
            return report_to_json(rep, inst).dump();
        },
        py::arg("instance"), py::arg("params") = std::map<std::string, std::string>{});
    m.def(
        "compare_json",
        [](const Instance& inst, const std::map<std::string, std::string>& params) {
            const SolverConfig c = config_from(params);
            ComparisonReport cmp;
            {
                py::gil_scoped_release release;
                cmp = compare(inst, c);
            }
            return comparison_to_json(cmp, inst).dump();
        },
        py::arg("instance"), py::arg("params") = std::map<std::string, std::string>{});
}
