#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "sfio/config.hpp"
#include "sfio/damage_test.hpp"
#include "sfio/estimation.hpp"
#include "sfio/fio_solver.hpp"
#include "sfio/medium.hpp"
#include "sfio/random_field.hpp"
#include "sfio/reference_solver.hpp"

namespace py = pybind11;
using namespace sfio;

namespace {

RunConfig resolve(const std::optional<std::string>& config_json) {
    return config_json ? config_from_json(*config_json) : reference_config();
}

/// {"t": (n_t,), "ux": (n_sensors, n_t), "uy": (n_sensors, n_t), "sensor_ids": (n_sensors,)}
py::dict to_python(const std::vector<SignalRecord>& signals) {
    const std::size_t m = signals.size();
    const std::size_t n = m ? signals.front().size() : 0;
    py::array_t<double> t(n), ux({m, n}), uy({m, n});
    py::array_t<int> ids(m);
    auto tv = t.mutable_unchecked<1>();
    auto xv = ux.mutable_unchecked<2>();
    auto yv = uy.mutable_unchecked<2>();
    auto iv = ids.mutable_unchecked<1>();
    for (std::size_t k = 0; k < n; ++k) tv(k) = signals.front().t[k];
    for (std::size_t j = 0; j < m; ++j) {
        iv(j) = signals[j].sensor_id;
        for (std::size_t k = 0; k < n; ++k) {
            xv(j, k) = signals[j].ux[k];
            yv(j, k) = signals[j].uy[k];
        }
    }
    py::dict d;
    d["t"] = t;
    d["ux"] = ux;
    d["uy"] = uy;
    d["sensor_ids"] = ids;
    return d;
}

std::vector<SignalRecord> from_python(const py::dict& d) {
    const auto t = py::cast<std::vector<double>>(d["t"]);
    const auto ids = py::cast<std::vector<int>>(d["sensor_ids"]);
    const auto ux = py::cast<std::vector<std::vector<double>>>(d["ux"]);
    const auto uy = py::cast<std::vector<std::vector<double>>>(d["uy"]);
    if (ux.size() != ids.size() || uy.size() != ids.size())
        throw std::invalid_argument("signals: ux and uy need one row per sensor id");
    std::vector<SignalRecord> out(ids.size());
    for (std::size_t j = 0; j < ids.size(); ++j) {
        out[j].sensor_id = ids[j];
        out[j].t = t;
        out[j].ux = ux[j];
        out[j].uy = uy[j];
        out[j].validate();
    }
    return out;
}

Sidedness sidedness(const std::string& side) {
    if (side == "left") return Sidedness::Left;
    if (side == "right") return Sidedness::Right;
    if (side == "two") return Sidedness::Two;
    throw std::invalid_argument("side must be 'left', 'right' or 'two'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Stochastic FIO wave solver, reference FD solver, estimation and damage tests";

    m.def("reference_config_json", [] { return config_to_json(reference_config()); });
    m.def("config_hash", [](const std::string& json) { return config_hash(config_from_json(json)); },
          py::arg("config_json"));

    m.def("exp_autocov", &exp_autocov, py::arg("r"), py::arg("sigma"), py::arg("corr_length"));
    m.def(
        "wave_speeds",
        [](double E_gpa, double nu, double rho) {
            const WaveSpeeds w = wave_speeds(MaterialParams{E_gpa, nu, rho});
            return py::make_tuple(w.c_l, w.c_s);
        },
        py::arg("E_gpa"), py::arg("nu"), py::arg("rho") = 2.70);

    m.def(
        "solve_fio",
        [](double E_gpa, double nu, std::optional<std::string> config_json) {
            const RunConfig c = resolve(config_json);
            MaterialParams mp = c.material;
            mp.E_gpa = E_gpa;
            mp.nu = nu;
            std::vector<SignalRecord> s;
            {
                py::gil_scoped_release release;
                s = solve_deterministic(mp, c.excitation(), c.quadrature(), c.sensors);
            }
            return to_python(s);
        },
        py::arg("E_gpa") = 70.0, py::arg("nu") = 0.35, py::arg("config_json") = py::none());

    m.def(
        "solve_fio_stochastic",
        [](std::uint64_t seed, std::optional<std::string> config_json) {
            const RunConfig c = resolve(config_json);
            std::vector<SignalRecord> s;
            {
                py::gil_scoped_release release;
                s = solve_stochastic(sample_medium(c.medium_spec(), seed), c.excitation(), c.quadrature(), c.sensors);
            }
            return to_python(s);
        },
        py::arg("seed"), py::arg("config_json") = py::none());

    m.def(
        "simulate_fd",
        [](const std::string& scenario, std::uint64_t seed, bool homogeneous, std::optional<std::string> config_json) {
            const RunConfig c = resolve(config_json);
            DamageScenario sc = DamageScenario::standard(scenario_from_string(scenario));
            sc.crack = c.crack;
            std::vector<SignalRecord> s;
            {
                py::gil_scoped_release release;
                if (homogeneous) {
                    MaterialParams mp = c.material;
                    if (sc.kind == ScenarioKind::S2 || sc.kind == ScenarioKind::S3) mp.E_gpa = sc.E_mean_gpa;
                    s = fd_solve(HeterogeneousMedium::homogeneous(c.fd_grid(), mp), c.excitation(), c.sensors,
                                 c.fd_options())
                            .signals;
                } else {
                    s = simulate_specimen(sc, c.medium_spec(), seed, c.excitation(), c.sensors, c.fd_options(),
                                          c.fd_grid());
                }
            }
            return to_python(s);
        },
        py::arg("scenario") = "S1", py::arg("seed") = 0, py::arg("homogeneous") = false,
        py::arg("config_json") = py::none());

    m.def(
        "estimate_nominal",
        [](const py::dict& measured, std::optional<std::string> config_json) {
            const RunConfig c = resolve(config_json);
            const auto signals = from_python(measured);
            EstimationResult r;
            {
                py::gil_scoped_release release;
                const FioPlan plan(c.excitation(), c.quadrature(), c.sensors);
                r = estimate_nominal(signals, plan, c.fit_options());
            }
            py::dict d;
            d["E_gpa"] = r.E_opt;
            d["nu"] = r.nu_opt;
            d["objective"] = r.objective;
            d["iterations"] = r.iterations;
            d["converged"] = r.converged;
            d["restarted"] = r.restarted;
            return d;
        },
        py::arg("measured"), py::arg("config_json") = py::none());

    m.def(
        "fit_power_curve",
        [](const std::vector<double>& L, const std::vector<double>& y) {
            if (L.size() != y.size()) throw std::invalid_argument("L and y must have the same length");
            std::vector<std::pair<double, double>> pts;
            for (std::size_t k = 0; k < L.size(); ++k) pts.emplace_back(L[k], y[k]);
            const CalibrationCurve c = fit_power_curve(CurveKind::F, pts);
            return py::make_tuple(c.c0, c.c1);
        },
        py::arg("L"), py::arg("y"));

    m.def(
        "correct_bias",
        [](double L_E0, double sigma_E0, std::pair<double, double> f, std::pair<double, double> g, double sigma_ref) {
            CalibrationCurve fc, gc;
            fc.kind = CurveKind::F;
            std::tie(fc.c0, fc.c1) = f;
            gc.kind = CurveKind::G;
            std::tie(gc.c0, gc.c1) = g;
            const BiasCorrected b = correct_bias(L_E0, sigma_E0, fc, gc, sigma_ref);
            return py::make_tuple(b.L_star, b.sigma_star);
        },
        py::arg("L_E0"), py::arg("sigma_E0"), py::arg("f"), py::arg("g"), py::arg("sigma_ref") = 3.5);

    m.def(
        "p_value",
        [](double x, std::vector<double> null, const std::string& side) {
            std::sort(null.begin(), null.end());
            return p_value(x, null, sidedness(side));
        },
        py::arg("x"), py::arg("null"), py::arg("side"));

    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const std::invalid_argument& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        }
    });
}
