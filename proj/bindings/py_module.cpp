#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pricemfg/calibration.hpp"
#include "pricemfg/errors.hpp"
#include "pricemfg/lq.hpp"
#include "pricemfg/model_config.hpp"
#include "pricemfg/monotonicity.hpp"
#include "pricemfg/price_solver.hpp"
#include "pricemfg/volterra.hpp"

namespace py = pybind11;
using namespace pricemfg;

namespace {

py::dict solve_equilibrium_json(const std::string& config_text, double tol_price,
                                double tol_balance, bool with_fields) {
    auto prob = parse_model_config(config_text);
    FixedPointConfig cfg;
    cfg.tol_price = tol_price;
    cfg.tol_balance = tol_balance;
    auto sol = solve_equilibrium(prob, cfg);

    py::dict out;
    std::vector<double> t(prob.time.n_nodes());
    for (int k = 0; k < prob.time.n_nodes(); ++k) t[k] = prob.time.t(k);
    out["t"] = t;
    out["varpi"] = sol.varpi.values;
    out["balance_residual"] = sol.balance_residual;
    out["iterations"] = sol.iterations;
    out["price_lipschitz"] = sol.varpi.lipschitz_estimate();
    if (with_fields) {
        out["x"] = prob.space.nodes();
        out["u"] = sol.u.raw();   // row-major [k * n_x + i]
        out["m"] = sol.m.raw();
        out["n_x"] = prob.space.n_nodes;
    }
    return out;
}

py::dict lq_dict(const LQSolution& lq) {
    py::dict out;
    out["theta"] = lq.theta();
    out["price"] = lq.price().values;
    out["mean_path"] = lq.mean_path();
    return out;
}

}  // namespace

PYBIND11_MODULE(_pricemfg, m) {
    m.doc() = "Electricity price formation: MFG solvers, LQ models, calibration";

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<NonConvergenceError>(m, "NonConvergenceError");
    py::register_exception<NumericalError>(m, "NumericalError");

    m.def(
        "hamiltonian_eval",
        [](double c, double epsilon, double eta, double kappa, double x, double p) {
            HamiltonianSpec spec(c, epsilon,
                                 eta > 0.0 ? PotentialSpec::quadratic(eta, kappa)
                                           : PotentialSpec::zero());
            auto d = hamiltonian_eval(spec, x, p);
            return py::make_tuple(d.H, d.dp, d.dpp, d.dx);
        },
        py::arg("c"), py::arg("epsilon") = 0.0, py::arg("eta") = 0.0, py::arg("kappa") = 0.0,
        py::arg("x") = 0.0, py::arg("p") = 0.0,
        "Returns (H, D_p H, D^2_pp H, D_x H) for H = p^2/(2c) - V(x)");

    py::class_<SupplySchedule>(m, "SupplySchedule")
        .def(py::init([](std::vector<double> times, std::vector<double> values, bool cubic) {
                 return SupplySchedule(std::move(times), std::move(values),
                                       cubic ? SupplySchedule::Interp::Cubic
                                             : SupplySchedule::Interp::Linear);
             }),
             py::arg("times"), py::arg("values"), py::arg("cubic") = true)
        .def("value", &SupplySchedule::value)
        .def("derivative", &SupplySchedule::derivative)
        .def("K", &SupplySchedule::K)
        .def("integral_from_start", &SupplySchedule::integral_from_start)
        .def("with_zero_mean", &SupplySchedule::with_zero_mean);

    py::class_<LQSolution>(m, "LQSolution")
        .def_property_readonly("theta", &LQSolution::theta)
        .def_property_readonly("price", [](const LQSolution& s) { return s.price().values; })
        .def_property_readonly("mean_path", &LQSolution::mean_path)
        .def("mu", &LQSolution::mu, py::arg("x"), py::arg("t"))
        .def("value", &LQSolution::value, py::arg("x"), py::arg("t"))
        .def("value_gradient", &LQSolution::value_gradient, py::arg("x"), py::arg("t"));

    m.def(
        "solve_lq",
        [](double c, double gamma, double zeta, double x_bar, const SupplySchedule& supply,
           double horizon, int n_t) {
            return solve_lq_quadratic_terminal(c, gamma, zeta, x_bar, supply,
                                               TimeGrid(horizon, n_t));
        },
        py::arg("c"), py::arg("gamma"), py::arg("zeta"), py::arg("x_bar"), py::arg("supply"),
        py::arg("horizon"), py::arg("n_t"),
        "State-independent quadratic model: Theta = -gamma (K(0) + x_bar - zeta), "
        "price = Theta - c Q(t)");

    m.def(
        "agent_trajectory",
        [](double c, double gamma, double horizon, int n_t,
           const std::function<double(double)>& Q, double x0, double x_bar0) {
            auto tr = agent_trajectory(c, gamma, TimeGrid(horizon, n_t), Q, x0, x_bar0);
            return py::make_tuple(tr.position, tr.mean);
        },
        py::arg("c"), py::arg("gamma"), py::arg("horizon"), py::arg("n_t"), py::arg("Q"),
        py::arg("x0"), py::arg("x_bar0"));

    m.def(
        "solve_potential_model",
        [](double c, double eta, double kappa, double gamma, double zeta, double x_bar,
           const SupplySchedule& supply, double horizon, int n_t) {
            PotentialModelParams p{c, eta, kappa, gamma, zeta, x_bar};
            auto [state, price] = solve_potential_model(p, supply, TimeGrid(horizon, n_t));
            py::dict out;
            out["pi0"] = state.pi0;
            out["C1"] = state.c1;
            out["C2"] = state.c2;
            out["omega"] = state.omega;
            out["price"] = price.values;
            out["pi"] = state.pi;
            out["xi"] = state.xi;
            out["theta0"] = state.theta0;
            out["theta1"] = state.theta1;
            out["theta2"] = state.theta2;
            return out;
        },
        py::arg("c"), py::arg("eta"), py::arg("kappa"), py::arg("gamma"), py::arg("zeta"),
        py::arg("x_bar"), py::arg("supply"), py::arg("horizon"), py::arg("n_t"));

    m.def("volterra_solve_trapezoid", &volterra_solve_trapezoid, py::arg("kernel"), py::arg("f"),
          py::arg("dt"), "Solve w + k*w = f by trapezoidal product integration");

    m.def(
        "calibrate",
        [](const std::vector<double>& tq, const std::vector<double>& q,
           const std::vector<double>& tr, const std::vector<double>& ref) {
            auto fit = calibrate(tq, q, tr, ref);
            py::dict out;
            out["c"] = fit.c_hat;
            out["theta"] = fit.theta_hat;
            out["rms"] = fit.rms_error;
            out["residuals"] = fit.residuals;
            return out;
        },
        py::arg("times_q"), py::arg("q"), py::arg("times_ref"), py::arg("ref"),
        "OLS for the affine law varpi = Theta - c Q");

    m.def(
        "normalize_demand",
        [](std::vector<double> times, std::vector<double> demand, double agents) {
            auto d = ingest_demand_samples(std::move(times), std::move(demand), agents);
            return py::make_tuple(d.times, d.values);
        },
        py::arg("times"), py::arg("demand"), py::arg("agents") = 1.0,
        "Per-agent supply Q = -demand/N with the time mean removed");

    m.def("solve_equilibrium", &solve_equilibrium_json, py::arg("config_json"),
          py::arg("tol_price") = 1e-7, py::arg("tol_balance") = 1e-3,
          py::arg("with_fields") = false,
          "Full price fixed point from a JSON model configuration");

    m.def(
        "run_monotonicity_trials",
        [](int trials, std::uint64_t seed, int n_x, int n_t, int threads) {
            auto rep = run_monotonicity_trials(trials, seed, n_x, n_t, threads);
            py::dict out;
            out["trials"] = rep.trials;
            out["min_gap"] = rep.min_gap;
            out["violations"] = rep.violations;
            return out;
        },
        py::arg("trials") = 1000, py::arg("seed") = 20240901ull, py::arg("n_x") = 48,
        py::arg("n_t") = 32, py::arg("threads") = 1);

    m.def(
        "wasserstein1",
        [](double x_min, double x_max, const std::vector<double>& a,
           const std::vector<double>& b) {
            return wasserstein1(SpaceGrid(x_min, x_max, (int)a.size()), a, b);
        },
        py::arg("x_min"), py::arg("x_max"), py::arg("m_a"), py::arg("m_b"),
        "Exact 1-D 1-Wasserstein distance between grid densities");

    m.attr("__version__") = "0.1.0";
}
