#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "mppctl/bsde_verify.hpp"
#include "mppctl/cli.hpp"
#include "mppctl/control_eval.hpp"
#include "mppctl/errors.hpp"
#include "mppctl/girsanov.hpp"
#include "mppctl/hamiltonian.hpp"
#include "mppctl/hjb.hpp"
#include "mppctl/instances.hpp"
#include "mppctl/io.hpp"
#include "mppctl/parallel.hpp"

namespace py = pybind11;
using namespace mppctl;

namespace {

py::array_t<double> field_values(const ValueField& v) {
    py::array_t<double> out({v.n_nodes(), v.n_states()});
    auto w = out.mutable_unchecked<2>();
    for (std::size_t n = 0; n < v.n_nodes(); ++n)
        for (std::size_t x = 0; x < v.n_states(); ++x) w(n, x) = v(n, x);
    return out;
}

py::dict cost_dict(const CostEstimate& e) {
    py::dict d;
    d["estimate"] = e.estimate;
    d["std_error"] = e.std_error;
    d["n_paths"] = e.n_paths;
    d["route"] = route_name(e.route);
    return d;
}

}  // namespace

PYBIND11_MODULE(_mppctl, m) {
    m.doc() = "Controlled marked point processes: simulation, HJB solvers and BSDE checks";

    py::register_exception<Error>(m, "MppctlError", PyExc_ValueError);

    py::class_<ModelSpec>(m, "ModelSpec")
        .def_static("from_json", [](const std::string& text) { return model_from_json(nlohmann::json::parse(text)); })
        .def("to_json", [](const ModelSpec& s) { return dump(model_to_json(s)); })
        .def_readonly("states", &ModelSpec::states)
        .def_readonly("actions", &ModelSpec::actions)
        .def_readonly("horizon", &ModelSpec::horizon)
        .def_readonly("time_grid", &ModelSpec::time_grid)
        .def_readonly("base_rate", &ModelSpec::base_rate)
        .def_readonly("terminal_cost", &ModelSpec::terminal_cost)
        .def_readonly("C_r", &ModelSpec::C_r)
        .def_readonly("C_l", &ModelSpec::C_l)
        .def_property_readonly("n_cells", &ModelSpec::n_cells)
        .def("refine", &refine_model, py::arg("factor"));

    m.def("load_model", &load_model, py::arg("path"));
    m.def("instance_d1", &instance_d1, py::arg("cells") = 10);
    m.def("instance_d2", &instance_d2, py::arg("cells") = 2);
    m.def("constant_model", &constant_model, py::arg("modifier"), py::arg("rate") = 1.0,
          py::arg("horizon") = 1.0, py::arg("marks") = 2, py::arg("cells") = 1);
    m.def("cumulative_A", &cumulative_A, py::arg("model"), py::arg("t"));
    m.def("beta_thresholds", [](const ModelSpec& s) {
        const auto b = beta_thresholds(s);
        py::dict d;
        d["beta_bsde"] = b.beta_bsde;
        d["beta_hjb"] = b.beta_hjb;
        d["beta_girsanov"] = b.beta_girsanov;
        return d;
    });
    m.def("lipschitz_L", [](const ModelSpec& s) { return lipschitz_constants(s).L; });

    py::class_<Policy>(m, "Policy")
        .def_static("constant", &Policy::constant, py::arg("model"), py::arg("action"))
        .def("__call__", &Policy::operator(), py::arg("cell"), py::arg("state"))
        .def_property_readonly("table", &Policy::table)
        .def("__eq__", [](const Policy& a, const Policy& b) { return a == b; });

    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("start_time", &Trajectory::start_time)
        .def_readonly("start_state", &Trajectory::start_state)
        .def_readonly("stream", &Trajectory::stream)
        .def_property_readonly("jumps", [](const Trajectory& t) {
            py::list out;
            for (const auto& j : t.jumps) out.append(py::make_tuple(j.time, j.mark));
            return out;
        });

    m.def("simulate_reference", &simulate_reference, py::arg("model"), py::arg("t0"), py::arg("x0"),
          py::arg("stream"), py::arg("seed") = 0);
    m.def("simulate_controlled", &simulate_controlled, py::arg("model"), py::arg("policy"), py::arg("t0"),
          py::arg("x0"), py::arg("stream"), py::arg("seed") = 0);
    m.def("state_at", &state_at, py::arg("trajectory"), py::arg("t"));

    m.def("likelihood", [](const ModelSpec& s, const Policy& p, const Trajectory& t) {
        return likelihood(s, p, t).terminal;
    });
    m.def("verify_normalization", [](const ModelSpec& s, const Policy& p, std::size_t n, std::uint64_t seed) {
        const auto r = verify_normalization(s, p, n, seed);
        return py::make_tuple(r.estimate, r.std_error);
    });

    m.def("hamiltonian", [](const ModelSpec& s, std::size_t cell, std::size_t x, const std::vector<double>& z) {
        const auto h = hamiltonian(s, cell, x, z);
        return py::make_tuple(h.value, h.argmin_action);
    });

    // Value fields are returned as (times, values[node, state]).
    m.def("hjb_march", [](const ModelSpec& s, std::size_t substeps) {
        const auto v = hjb_march(s, substeps);
        return py::make_tuple(v.times(), field_values(v));
    }, py::arg("model"), py::arg("substeps") = 1);
    m.def("policy_value", [](const ModelSpec& s, const Policy& p, std::size_t substeps) {
        const auto v = policy_value(s, p, substeps);
        return py::make_tuple(v.times(), field_values(v));
    }, py::arg("model"), py::arg("policy"), py::arg("substeps") = 1);
    m.def("hjb_picard", [](const ModelSpec& s, double beta, double tol, std::size_t max_iter) {
        const auto [v, rep] = hjb_picard(s, beta, tol, max_iter);
        py::dict d;
        d["deltas"] = rep.deltas;
        d["ratio"] = rep.ratio;
        d["iterations"] = rep.iterations;
        d["theoretical_ratio"] = rep.theoretical_ratio;
        return py::make_tuple(v.times(), field_values(v), d);
    }, py::arg("model"), py::arg("beta"), py::arg("tol") = 1e-7, py::arg("max_iter") = 1000);
    m.def("optimal_policy", [](const ModelSpec& s) { return policy_from_value(s, hjb_march(s)); });

    m.def("mc_cost_direct", [](const ModelSpec& s, const Policy& p, double t0, std::size_t x0, std::size_t n,
                               std::uint64_t seed) { return cost_dict(mc_cost_direct(s, p, t0, x0, n, seed)); });
    m.def("mc_cost_reweighted", [](const ModelSpec& s, const Policy& p, double t0, std::size_t x0, std::size_t n,
                                   std::uint64_t seed) { return cost_dict(mc_cost_reweighted(s, p, t0, x0, n, seed)); });
    m.def("brute_force_value", [](const ModelSpec& s, std::size_t coarse) {
        const auto r = brute_force_value(s, coarse);
        py::dict d;
        d["n_policies"] = r.n_policies;
        d["min_cost"] = r.min_cost;
        d["argmin"] = r.argmin;
        return d;
    });

    m.def("ito_check", [](const ModelSpec& s, std::uint64_t stream, std::uint64_t seed) {
        const auto f = random_ito_fields(s, stream, seed);
        const auto r = ito_identity_check(s, f.fhat, f.V, f.v0, simulate_reference(s, 0.0, 0, stream, seed));
        return py::make_tuple(r.residual_prima, r.residual_seconda, r.jumps);
    });
    m.def("bsde_residual", [](const ModelSpec& s, const Trajectory& t) { return bsde_residual(s, hjb_march(s), t); });

    m.def("set_threads", [](unsigned n) { set_thread_count(n); });
    m.def("run_cli", [](std::vector<std::string> args) {
        args.insert(args.begin(), "mppctl");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
    });
}
