#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "magbloch/bands.hpp"
#include "magbloch/errors.hpp"
#include "magbloch/flow.hpp"
#include "magbloch/quantum.hpp"
#include "magbloch/symbols.hpp"
#include "magbloch/thermo.hpp"

namespace py = pybind11;
using namespace magbloch;

namespace {

FluxRational flux_arg(const std::string& s) { return parse_flux(s); }

}  // namespace

PYBIND11_MODULE(_magbloch, m) {
    m.doc() = "Magnetic Bloch band geometry, semiclassical flow and thermodynamics";

    static py::exception<Error> error(m, "Error");
    static py::exception<ConfigError> config_error(m, "ConfigError", error.ptr());
    static py::exception<DegeneracyError> degeneracy_error(m, "DegeneracyError", error.ptr());
    static py::exception<NumericError> numeric_error(m, "NumericError", error.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ConfigError& e) {
            config_error(e.what());
        } catch (const DegeneracyError& e) {
            degeneracy_error(e.what());
        } catch (const NumericError& e) {
            numeric_error(e.what());
        } catch (const Error& e) {
            error(e.what());
        }
    });

    m.def("bloch_matrix", [](const std::string& flux, const Vec2& k) { return bloch_matrix(flux_arg(flux), k); },
          py::arg("flux"), py::arg("k"));

    py::class_<BandPoint>(m, "BandPoint")
        .def_readonly("energy", &BandPoint::energy)
        .def_readonly("velocity", &BandPoint::velocity)
        .def_readonly("curvature", &BandPoint::curvature)
        .def_readonly("moment", &BandPoint::moment)
        .def_readonly("projection", &BandPoint::projection);
    m.def("band_point", [](const std::string& flux, int band, const Vec2& k) { return band_point(flux_arg(flux), band, k); },
          py::arg("flux"), py::arg("band"), py::arg("k"));
    m.def("berry_curvature",
          [](const std::string& flux, int band, const Vec2& k) { return berry_curvature(flux_arg(flux), band, k); },
          py::arg("flux"), py::arg("band"), py::arg("k"));
    m.def(
        "magnetic_moment",
        [](const std::string& flux, int band, const Vec2& k, const std::string& form) {
            return magnetic_moment(flux_arg(flux), band, k, parse_moment_form(form));
        },
        py::arg("flux"), py::arg("band"), py::arg("k"), py::arg("form") = "standard");

    py::class_<ChernResult>(m, "ChernResult")
        .def_readonly("band", &ChernResult::band)
        .def_readonly("chern", &ChernResult::chern)
        .def_readonly("raw", &ChernResult::raw)
        .def_readonly("residual", &ChernResult::residual);
    m.def("chern_number", [](const std::string& flux, int band, int grid) { return chern_number(flux_arg(flux), band, grid); },
          py::arg("flux"), py::arg("band"), py::arg("grid") = 60);

    m.def(
        "trajectory",
        [](const std::string& flux, int band, double epsilon, double b, const Vec4& z0, double t_final, double dt,
           const std::string& scheme, const std::string& mode) {
            ClassicalSystem sys(flux_arg(flux), band, epsilon, b);
            Trajectory t = integrate(sys, z0, t_final, dt, parse_scheme(scheme), parse_field_mode(mode));
            Eigen::MatrixXd states(static_cast<Eigen::Index>(t.states.size()), 4);
            for (size_t i = 0; i < t.states.size(); ++i) states.row(static_cast<Eigen::Index>(i)) = t.states[i].transpose();
            return py::make_tuple(t.times, states, t.energy);
        },
        py::arg("flux"), py::arg("band"), py::arg("epsilon"), py::arg("b"), py::arg("z0"), py::arg("t_final"),
        py::arg("dt") = 0.01, py::arg("scheme") = "rk4", py::arg("mode") = "exact",
        "Returns (times, states[n, 4], energy) for z = (r1, r2, kappa1, kappa2).");

    auto params = [](double beta, double mu, double epsilon, double b, int grid) {
        ThermoParams p;
        p.beta = beta;
        p.mu = mu;
        p.epsilon = epsilon;
        p.b = b;
        p.grid = grid;
        p.validate();
        return p;
    };
    m.def(
        "pressure",
        [params](const std::string& flux, double beta, double mu, double epsilon, double b, int grid) {
            return pressure(flux_arg(flux), params(beta, mu, epsilon, b, grid));
        },
        py::arg("flux"), py::arg("beta"), py::arg("mu"), py::arg("epsilon") = 0.0, py::arg("b") = 0.0,
        py::arg("grid") = 64);
    m.def(
        "density",
        [params](const std::string& flux, double beta, double mu, double epsilon, double b, int grid) {
            return density(flux_arg(flux), params(beta, mu, epsilon, b, grid));
        },
        py::arg("flux"), py::arg("beta"), py::arg("mu"), py::arg("epsilon") = 0.0, py::arg("b") = 0.0,
        py::arg("grid") = 64);
    m.def(
        "magnetization",
        [params](const std::string& flux, double beta, double mu, const std::string& method, int grid) {
            return magnetization(flux_arg(flux), params(beta, mu, 0.0, 0.0, grid), parse_magnetization_method(method));
        },
        py::arg("flux"), py::arg("beta"), py::arg("mu"), py::arg("method") = "formula", py::arg("grid") = 64);
    m.def(
        "hall_current",
        [](const std::string& flux, int filled, const Vec2& field) {
            return hall_current(flux_arg(flux), filled, field).current;
        },
        py::arg("flux"), py::arg("filled"), py::arg("field"));

    m.def(
        "hsc_defect_order1",
        [](const std::string& flux, int band, double b, const Vec2& k, const Vec2& r, double moment_scale) {
            return hsc_defect_order1(flux_arg(flux), band, b, k, r, {}, moment_scale);
        },
        py::arg("flux"), py::arg("band"), py::arg("b"), py::arg("k"), py::arg("r"), py::arg("moment_scale") = 1.0);

    m.def(
        "equilibrium_compare",
        [](const std::string& flux, double b, const std::vector<int>& sizes) {
            EquilibriumScenario sc;
            sc.flux0 = flux_arg(flux);
            sc.b = b;
            sc.sizes = sizes;
            EquilibriumReport r = equilibrium_compare(sc);
            py::list rows;
            for (const EquilibriumRow& row : r.rows)
                rows.append(py::dict(py::arg("L") = row.L, py::arg("epsilon") = row.epsilon, py::arg("quantum") = row.quantum,
                                     py::arg("classical") = row.classical, py::arg("error") = row.error,
                                     py::arg("error_uncorrected") = row.error_uncorrected));
            return py::dict(py::arg("rows") = rows, py::arg("slope") = r.fit.slope,
                            py::arg("slope_uncorrected") = r.fit_uncorrected.slope);
        },
        py::arg("flux") = "1/3", py::arg("b") = 1.0, py::arg("sizes") = std::vector<int>{24, 48, 96});
}
