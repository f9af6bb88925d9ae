// Python surface for the curvature-flow laboratory: speeds, exact reference
// solutions, the flow driver and the lemma monitors.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pancake/diagnostics.hpp"

namespace py = pybind11;
using namespace pancake;

namespace {

FlowConfig config_from_dict(const py::dict& d) {
    FlowConfig cfg;
    for (auto item : d) {
        const std::string key = py::cast<std::string>(item.first);
        if (key == "N") {
            cfg.N = py::cast<int>(item.second);
        } else if (key == "cfl") {
            cfg.cfl = py::cast<double>(item.second);
        } else if (key == "scheme") {
            const auto v = py::cast<std::string>(item.second);
            cfg.scheme = v == "semi-implicit" ? Scheme::semi_implicit : Scheme::explicit_rk2;
        } else if (key == "symmetry_enforce") {
            cfg.symmetry_enforce = py::cast<bool>(item.second);
        } else if (key == "stop_kappa") {
            cfg.stop_kappa = py::cast<double>(item.second);
        } else if (key == "stop_area") {
            cfg.stop_area = py::cast<double>(item.second);
        } else if (key == "record_every") {
            cfg.record_every = py::cast<int>(item.second);
        } else if (key == "diff_backend") {
            const auto v = py::cast<std::string>(item.second);
            cfg.diff_backend = v == "spectral" ? DiffBackend::spectral : DiffBackend::fd4;
        } else if (key == "pole_band") {
            cfg.pole_band = py::cast<double>(item.second);
        } else if (key == "max_steps") {
            cfg.max_steps = py::cast<long>(item.second);
        } else if (key == "allow_unpinched") {
            cfg.allow_unpinched = py::cast<bool>(item.second);
        } else {
            throw py::value_error("unknown flow config key: " + key);
        }
    }
    return cfg;
}

py::dict record_to_dict(const DiagnosticsRecord& r) {
    py::dict d;
    d["t"] = r.t;
    d["t_sim"] = r.t_sim;
    d["h"] = r.h;
    d["ell"] = r.ell;
    d["A"] = r.A;
    d["rin"] = r.rin;
    d["rout"] = r.rout;
    d["phi_min"] = r.phi_min;
    d["phi_max"] = r.phi_max;
    d["min_kappa_minus_lambda"] = r.min_kappa_minus_lambda;
    d["max_ratio"] = r.max_ratio;
    d["lambda_integral"] = r.lambda_integral;
    d["lambda2_over_kappa_integral"] = r.lambda2_over_kappa_integral;
    d["tip_grim_dist"] = r.tip_grim_dist;
    d["area_rate_residual"] = r.area_rate_residual;
    return d;
}

py::dict bound_to_dict(const BoundReport& b) {
    py::dict d;
    d["name"] = b.name;
    d["pass"] = b.pass;
    d["applicable"] = b.applicable;
    d["worst_margin"] = b.worst_margin;
    d["witness_time"] = b.witness_time;
    d["slack_used"] = b.slack_used;
    d["frames_checked"] = b.frames_checked;
    d["note"] = b.note;
    return d;
}

py::dict fit_to_dict(const AsymptoticFit& f) {
    py::dict d;
    d["model"] = f.model;
    d["window"] = py::make_tuple(f.window[0], f.window[1]);
    d["coefficients"] = f.coefficients;
    d["stderrs"] = f.stderrs;
    d["target"] = f.target;
    d["residual_norm"] = f.residual_norm;
    d["note"] = f.note;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "curvature-flow laboratory: O(n)-invariant convex profiles under phi-flows";

    py::class_<SpeedFunction>(m, "Speed")
        .def_property_readonly("name", [](const SpeedFunction& s) { return s.name; })
        .def_property_readonly("n", [](const SpeedFunction& s) { return s.n; })
        .def("eval", &eval_reduced, py::arg("kappa"), py::arg("lambda_"))
        .def(
            "grad",
            [](const SpeedFunction& s, double k, double l) {
                const auto g = grad_reduced(s, k, l);
                return py::make_tuple(g.phi_kappa, g.phi_lambda);
            },
            py::arg("kappa"), py::arg("lambda_"))
        .def("constants",
             [](const SpeedFunction& s) {
                 const auto c = constants(s);
                 py::dict d;
                 d["phi1"] = c.phi1;
                 d["phidot1"] = c.phidot1;
                 d["taylor_C"] = c.taylor_C;
                 return d;
             })
        .def("check", [](const SpeedFunction& s) {
            const auto rep = check_admissible(s);
            py::dict d;
            d["all_pass"] = rep.all_pass;
            py::list conds;
            for (const auto& c : rep.conditions) {
                py::dict cd;
                cd["name"] = c.name;
                cd["pass"] = c.pass;
                cd["worst_violation"] = c.worst_violation;
                cd["witness"] = c.witness;
                conds.append(cd);
            }
            d["conditions"] = conds;
            return d;
        });

    m.def("make_speed", &make_speed, py::arg("id"), py::arg("n") = 2,
          "registry: mean | pr:<r> | gauss-root | mix:<id>:<w>,...");

    py::class_<SupportProfile>(m, "Profile")
        .def_property_readonly("sigma", [](const SupportProfile& p) { return p.sigma; })
        .def_property_readonly("N", [](const SupportProfile& p) { return p.N; })
        .def_property_readonly("t", [](const SupportProfile& p) { return p.t; })
        .def("displacements", [](const SupportProfile& p) {
            const auto d = displacements(p);
            py::dict out;
            out["h"] = d.h;
            out["ell"] = d.ell;
            out["A"] = d.A;
            out["rin"] = d.rin;
            out["rout"] = d.rout;
            return out;
        });

    m.def("circle_profile", &circle_profile, py::arg("r"), py::arg("N") = 512, py::arg("n") = 2,
          py::arg("t") = 0.0);
    m.def(
        "oval_profile",
        [](double t, int N) { return support_from_turning_angle(angenent_oval(t, N), t, 2); },
        py::arg("t"), py::arg("N") = 512,
        "support function of the Angenent oval timeslice (t < 0)");
    m.def(
        "oval_exact",
        [](double t) {
            py::dict d;
            d["h"] = oval_h(t);
            d["ell"] = oval_ell(t);
            d["a2"] = oval_a2(t);
            d["A"] = -2.0 * 3.14159265358979323846 * t;
            return d;
        },
        py::arg("t"));
    m.def(
        "grim_reaper",
        [](double t, int N) { return grim_reaper(t, N); },
        py::arg("t"), py::arg("N") = 512);

    m.def(
        "curvatures",
        [](const SupportProfile& p, const SpeedFunction& s) {
            const auto cd = curvatures_from_support(p, s);
            py::dict d;
            d["kappa"] = cd.kappa;
            d["lambda"] = cd.lambda;
            d["phi"] = cd.phi;
            return d;
        },
        py::arg("profile"), py::arg("speed"));

    py::class_<Trajectory>(m, "Trajectory")
        .def_property_readonly("T_ext", [](const Trajectory& t) { return t.T_ext; })
        .def_property_readonly("speed_id", [](const Trajectory& t) { return t.speed_id; })
        .def_property_readonly("seed_id", [](const Trajectory& t) { return t.seed_id; })
        .def_property_readonly("total_steps", [](const Trajectory& t) { return t.total_steps; })
        .def("records",
             [](const Trajectory& t) {
                 py::list out;
                 for (const auto& r : t.records) out.append(record_to_dict(r));
                 return out;
             })
        .def("frame", [](const Trajectory& t, size_t k) { return t.frames.at(k); })
        .def("__len__", [](const Trajectory& t) { return t.frames.size(); })
        .def(
            "monitors",
            [](const Trajectory& t, const SpeedFunction& s) {
                const auto suite = run_all_monitors(t, s);
                py::dict d;
                py::list bounds, fits;
                for (const auto& b : suite.bounds) bounds.append(bound_to_dict(b));
                for (const auto& f : suite.fits) fits.append(fit_to_dict(f));
                d["bounds"] = bounds;
                d["fits"] = fits;
                d["all_pass"] = suite.all_pass;
                return d;
            },
            py::arg("speed"))
        .def(
            "tip_grim_distance",
            [](const Trajectory& t, double at) { return tip_grim_distance(t, at); },
            py::arg("t"));

    m.def(
        "run_flow",
        [](const SupportProfile& seed, const SpeedFunction& s, const py::dict& cfg,
           const std::string& seed_id) {
            return run(seed, s, config_from_dict(cfg), seed_id);
        },
        py::arg("seed"), py::arg("speed"), py::arg("config") = py::dict(),
        py::arg("seed_id") = "custom");
    m.def(
        "evolve_from_oval",
        [](double R, const SpeedFunction& s, const py::dict& cfg) {
            return evolve_from_oval(R, s, config_from_dict(cfg));
        },
        py::arg("R"), py::arg("speed"), py::arg("config") = py::dict());
    m.def(
        "fit_area_asymptotics",
        [](const Trajectory& t, double lo, double hi) {
            return fit_to_dict(fit_area_asymptotics(t, {lo, hi}));
        },
        py::arg("traj"), py::arg("lo") = -7.0, py::arg("hi") = -2.0);
    m.def("geometry_fidelity", [](int N) { return geometry_fidelity(N); }, py::arg("N"));

    py::register_exception<ConvexityError>(m, "ConvexityError");
    py::register_exception<FlowError>(m, "FlowError");
}
