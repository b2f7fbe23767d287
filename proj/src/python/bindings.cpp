#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>

#include "ermakov/audit.hpp"

namespace py = pybind11;

namespace {

using ermakov::audit::AuditConfig;
using ermakov::expr::Expression;
using ermakov::systems::ErmakovSystem;

py::object jsonToPy(const nlohmann::ordered_json& j) {
    namespace nj = nlohmann;
    switch (j.type()) {
        case nj::detail::value_t::null:
            return py::none();
        case nj::detail::value_t::boolean:
            return py::bool_(j.get<bool>());
        case nj::detail::value_t::number_integer:
            return py::int_(j.get<long long>());
        case nj::detail::value_t::number_unsigned:
            return py::int_(j.get<unsigned long long>());
        case nj::detail::value_t::number_float:
            return py::float_(j.get<double>());
        case nj::detail::value_t::string:
            return py::str(j.get<std::string>());
        case nj::detail::value_t::array: {
            py::list out;
            for (const auto& item : j) out.append(jsonToPy(item));
            return out;
        }
        case nj::detail::value_t::object: {
            py::dict out;
            for (const auto& [key, value] : j.items()) {
                out[py::str(key)] = jsonToPy(value);
            }
            return out;
        }
        default:
            return py::none();
    }
}

py::dict simulate(const ErmakovSystem& system, std::array<double, 4> ic, double t0, double t1,
                  double tol) {
    auto rhs = [&system](double t, std::span<const double> y, std::span<double> dy) {
        const auto a = ermakov::systems::cartesianRhs(system, {t, y[0], y[1], y[2], y[3]});
        dy[0] = y[2];
        dy[1] = y[3];
        dy[2] = a.ax;
        dy[3] = a.ay;
    };
    ermakov::dynamics::IntegrateOptions opt;
    opt.tolerance = tol;
    const auto traj = ermakov::dynamics::integrate(rhs, ic, t0, t1, opt);

    std::vector<double> t, x, yv, vx, vy;
    for (std::size_t i = 0; i < traj.sampleCount(); ++i) {
        t.push_back(traj.times()[i]);
        x.push_back(traj.states()[i][0]);
        yv.push_back(traj.states()[i][1]);
        vx.push_back(traj.states()[i][2]);
        vy.push_back(traj.states()[i][3]);
    }
    py::dict out;
    out["t"] = std::move(t);
    out["x"] = std::move(x);
    out["y"] = std::move(yv);
    out["vx"] = std::move(vx);
    out["vy"] = std::move(vy);
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "claim auditor for three classes of Ermakov dynamical systems";

    py::register_exception<ermakov::Error>(m, "ErmakovError");

    py::class_<Expression>(m, "Expression")
        .def_static("parse", &Expression::parse, py::arg("source"))
        .def("evaluate", &Expression::evaluate, py::arg("x"))
        .def("derivative", &Expression::derivative)
        .def("__str__", &Expression::str)
        .def("__repr__",
             [](const Expression& e) { return "Expression(\"" + e.str() + "\")"; });

    py::class_<ErmakovSystem>(m, "System")
        .def_static("from_json", &ErmakovSystem::fromJson, py::arg("text"))
        .def_static("from_file", &ErmakovSystem::fromJsonFile, py::arg("path"))
        .def("to_json", &ErmakovSystem::toJson)
        .def("__repr__",
             [](const ErmakovSystem& s) { return "System(" + s.toJson() + ")"; });

    m.def("parse_expression", &Expression::parse, py::arg("source"),
          "Parse an expression in the single free variable x.");

    m.def("simulate", &simulate, py::arg("system"), py::arg("ic"), py::arg("t0"),
          py::arg("t1"), py::arg("tol") = 1e-10,
          "Integrate the planar equations of motion; returns the accepted steps.");

    m.def(
        "run_audit",
        [](const std::string& configJson) {
            const auto cfg = AuditConfig::fromJson(configJson);
            const auto outcome = ermakov::audit::runAudit(cfg);
            return jsonToPy(outcome.report.toJson(true));
        },
        py::arg("config_json"),
        "Run the configured claims and return the report as a dict.");

    m.def("claim_registry",
          [] { return jsonToPy(ermakov::claims::registryToJson(ermakov::claims::defaultRegistry())); });

#ifdef ERMAKOV_VERSION
    m.attr("__version__") = ERMAKOV_VERSION;
#else
    m.attr("__version__") = "dev";
#endif
}
