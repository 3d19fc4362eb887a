#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "pricemfg/calibration.hpp"
#include "pricemfg/csv.hpp"
#include "pricemfg/errors.hpp"
#include "pricemfg/lq.hpp"
#include "pricemfg/model_config.hpp"
#include "pricemfg/monotonicity.hpp"
#include "pricemfg/price_solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pricemfg;

namespace {

constexpr const char* kVersion = "0.1.0";

struct GlobalArgs {
    std::string config;
    std::string out = "out";
    std::uint64_t seed = 0;
    double tol_price = 1e-7;
    double tol_balance = 1e-3;
    int max_iters = 150;
    bool dump_fields = false;
    std::string scheme = "godunov";
    int gradient_order = 1;
};

int thread_budget() {
    int hw = (int)std::thread::hardware_concurrency();
    if (hw < 1) hw = 1;
    if (const char* env = std::getenv("PRICE_MFG_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1) hw = std::min(hw, cap);
    }
    return hw;
}

void write_manifest(const GlobalArgs& args, const std::string& command) {
    fs::create_directories(args.out);
    json m;
    m["command"] = command;
    m["config"] = args.config;
    m["out"] = args.out;
    m["seed"] = args.seed;
    m["tol_price"] = args.tol_price;
    m["tol_balance"] = args.tol_balance;
    m["version"] = kVersion;
    const auto now = std::chrono::system_clock::now();
    m["timestamp_unix"] = std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
    std::ofstream(fs::path(args.out) / "manifest.json") << m.dump(2) << "\n";
}

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

SupplySchedule supply_from_json(const json& j, double horizon) {
    auto interp = SupplySchedule::Interp::Cubic;
    if (j.contains("interpolation") && j["interpolation"] == "linear")
        interp = SupplySchedule::Interp::Linear;
    if (j.contains("inline")) {
        std::vector<double> ts = j["inline"].at("times").get<std::vector<double>>();
        std::vector<double> vs = j["inline"].at("values").get<std::vector<double>>();
        auto s = SupplySchedule(std::move(ts), std::move(vs), interp);
        if (!s.covers(horizon)) throw ConfigError("supply does not cover [0, horizon]");
        return s;
    }
    if (j.contains("path")) {
        std::ifstream f(j["path"].get<std::string>());
        if (!f) throw ConfigError("cannot open supply csv");
        std::string line;
        if (!std::getline(f, line)) throw ConfigError("supply csv is empty");
        const char sep = line.find(';') != std::string::npos ? ';' : ',';
        std::vector<double> ts, vs;
        while (std::getline(f, line)) {
            if (line.empty()) continue;
            std::stringstream ss(line);
            std::string a, b;
            std::getline(ss, a, sep);
            std::getline(ss, b, sep);
            ts.push_back(std::stod(a));
            vs.push_back(std::stod(b));
        }
        auto s = SupplySchedule(std::move(ts), std::move(vs), interp);
        if (!s.covers(horizon)) throw ConfigError("supply csv does not cover [0, horizon]");
        return s;
    }
    throw ConfigError("supply needs 'inline' or 'path'");
}

double number(const json& j, const char* key) {
    if (!j.contains(key)) throw ConfigError(std::string("missing key '") + key + "'");
    return j.at(key).get<double>();
}

int cmd_solve(const GlobalArgs& args) {
    auto prob = load_model_config(args.config);
    write_manifest(args, "solve");

    FixedPointConfig cfg;
    cfg.tol_price = args.tol_price;
    cfg.tol_balance = args.tol_balance;
    cfg.max_iters = args.max_iters;
    if (args.scheme == "semilagrangian")
        cfg.hjb.scheme = HJBConfig::Scheme::SemiLagrangian;
    else if (args.scheme != "godunov")
        throw ConfigError("solve: --scheme must be godunov or semilagrangian");
    cfg.hjb.gradient_order = args.gradient_order;
    auto sol = solve_equilibrium(prob, cfg);

    const fs::path out(args.out);
    {
        CsvWriter w((out / "price.csv").string(), {"t", "varpi", "residual"});
        for (int k = 0; k <= prob.time.n_steps; ++k)
            w.row({prob.time.t(k), sol.varpi[k], sol.balance_residual[k]});
    }
    {
        CsvWriter w((out / "convergence.csv").string(),
                    {"iteration", "price_change", "balance_residual"});
        for (const auto& h : sol.history)
            w.row({(double)h.iteration, h.price_change, h.balance_residual});
    }
    if (args.dump_fields) {
        CsvWriter wu((out / "u.csv").string(), {"t", "x", "u", "u_x"});
        CsvWriter wm((out / "m.csv").string(), {"t", "x", "m"});
        for (int k = 0; k <= prob.time.n_steps; ++k)
            for (int i = 0; i < prob.space.n_nodes; ++i) {
                wu.row({prob.time.t(k), prob.space.x(i), sol.u.at(i, k), sol.u.gradient(i, k)});
                wm.row({prob.time.t(k), prob.space.x(i), sol.m.at(i, k)});
            }
    }
    json summary;
    summary["iterations"] = sol.iterations;
    summary["balance_sup"] = sol.balance_sup();
    summary["price_lipschitz"] = sol.varpi.lipschitz_estimate();
    summary["energy_diagnostic"] =
        energy_estimate_diagnostic(prob.spec, sol.u, sol.m, sol.varpi, prob.initial);
    summary["second_order_diagnostic"] = second_order_diagnostic(prob.spec, sol.u, sol.m);
    double u_min = sol.u.raw()[0], u_max = u_min;
    for (double v : sol.u.raw()) {
        u_min = std::min(u_min, v);
        u_max = std::max(u_max, v);
    }
    summary["u_min"] = u_min;  // reported, not enforced
    summary["u_max"] = u_max;
    summary["tol_price"] = cfg.tol_price;
    summary["tol_balance"] = cfg.tol_balance;
    std::ofstream(out / "summary.json") << summary.dump(2) << "\n";
    std::cout << "solve: converged in " << sol.iterations
              << " iterations, balance residual " << sol.balance_sup() << "\n";
    return 0;
}

int cmd_lq(const GlobalArgs& args) {
    json j = json::parse(slurp(args.config));
    write_manifest(args, "lq");
    const double c = number(j, "c"), gamma = number(j, "gamma"), zeta = number(j, "zeta");
    const double x_bar = number(j, "x_bar"), T = number(j, "horizon");
    const TimeGrid tg(T, (int)number(j, "n_t"));
    auto supply = supply_from_json(j.at("supply"), T);

    auto lq = solve_lq_quadratic_terminal(c, gamma, zeta, x_bar, supply, tg);
    const fs::path out(args.out);
    {
        CsvWriter w((out / "lq.csv").string(), {"t", "varpi", "x_bar", "xi", "pi"});
        for (int k = 0; k <= tg.n_steps; ++k)
            w.row({tg.t(k), lq.price()[k], lq.mean_path()[k], lq.mean_path()[k], -lq.theta()});
    }
    if (j.contains("trajectories")) {
        auto x0s = j["trajectories"].get<std::vector<double>>();
        std::vector<std::string> header = {"t"};
        for (double x0 : x0s) header.push_back("x0_" + std::to_string(x0));
        CsvWriter w((out / "trajectories.csv").string(), header);
        std::vector<AgentTrajectory> trs;
        for (double x0 : x0s)
            trs.push_back(agent_trajectory(c, gamma, tg, supply.as_function(), x0, x_bar));
        for (int k = 0; k <= tg.n_steps; ++k) {
            std::vector<double> row = {tg.t(k)};
            for (const auto& tr : trs) row.push_back(tr.position[k]);
            w.row(row);
        }
    }
    json summary;
    summary["theta"] = lq.theta();
    summary["K0"] = supply.K(0.0);
    summary["price_lipschitz"] = lq.price().lipschitz_estimate();
    std::ofstream(out / "summary.json") << summary.dump(2) << "\n";
    std::cout << "lq: Theta = " << lq.theta() << "\n";
    return 0;
}

int cmd_potential(const GlobalArgs& args) {
    json j = json::parse(slurp(args.config));
    write_manifest(args, "potential");
    PotentialModelParams p;
    p.c = number(j, "c");
    p.eta = number(j, "eta");
    p.kappa = number(j, "kappa");
    p.gamma = number(j, "gamma");
    p.zeta = number(j, "zeta");
    p.x_bar = number(j, "x_bar");
    const double T = number(j, "horizon");
    const TimeGrid tg(T, (int)number(j, "n_t"));
    auto supply = supply_from_json(j.at("supply"), T);

    auto [state, price] = solve_potential_model(p, supply, tg);
    const fs::path out(args.out);
    {
        CsvWriter w((out / "potential.csv").string(), {"t", "varpi", "x_bar", "xi", "pi"});
        for (int k = 0; k <= tg.n_steps; ++k)
            w.row({tg.t(k), price[k], state.xi[k], state.xi[k], state.pi[k]});
    }
    if (j.contains("trajectories")) {
        // agent drift -(varpi + theta1 + 2 theta2 x)/c from the quadratic ansatz
        auto x0s = j["trajectories"].get<std::vector<double>>();
        std::vector<std::string> header = {"t"};
        for (double x0 : x0s) header.push_back("x0_" + std::to_string(x0));
        CsvWriter w((out / "trajectories.csv").string(), header);
        const double dt = tg.dt();
        std::vector<std::vector<double>> paths;
        for (double x0 : x0s) {
            std::vector<double> path(tg.n_nodes());
            double x = x0;
            path[0] = x;
            for (int k = 0; k < tg.n_steps; ++k) {
                auto drift = [&](int node, double xv) {
                    return -(price[node] + state.theta1[node] + 2.0 * state.theta2[node] * xv) /
                           p.c;
                };
                const double k1 = drift(k, x);
                const double k2 = drift(k, x + 0.5 * dt * k1);
                const double k3 = drift(k + 1, x + 0.5 * dt * k2);
                const double k4 = drift(k + 1, x + dt * k3);
                x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                path[k + 1] = x;
            }
            paths.push_back(std::move(path));
        }
        for (int k = 0; k <= tg.n_steps; ++k) {
            std::vector<double> row = {tg.t(k)};
            for (const auto& path : paths) row.push_back(path[k]);
            w.row(row);
        }
    }
    json summary;
    summary["pi0"] = state.pi0;
    summary["C1"] = state.c1;
    summary["C2"] = state.c2;
    summary["omega"] = state.omega;
    summary["lambda"] = state.lambda;
    summary["pi0_residual"] = state.pi0_residual;
    std::ofstream(out / "summary.json") << summary.dump(2) << "\n";
    std::cout << "potential: Pi(0) = " << state.pi0 << ", C1 = " << state.c1
              << ", C2 = " << state.c2 << "\n";
    return 0;
}

int cmd_calibrate(const GlobalArgs& args, const std::string& demand_path,
                  const std::string& reference_path, double agents) {
    write_manifest(args, "calibrate");
    auto demand = ingest_demand_file(demand_path, agents);

    std::ifstream rf(reference_path);
    if (!rf) throw ConfigError("cannot open " + reference_path);
    std::string line;
    if (!std::getline(rf, line)) throw ConfigError("reference csv is empty");
    const char sep = line.find(';') != std::string::npos ? ';' : ',';
    std::vector<double> rt, rv;
    while (std::getline(rf, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string a, b;
        std::getline(ss, a, sep);
        std::getline(ss, b, sep);
        rt.push_back(std::stod(a));
        rv.push_back(std::stod(b));
    }

    auto fit = calibrate(demand.times, demand.values, rt, rv);
    auto forecast = price_forecast(fit, demand.times, demand.values);

    const fs::path out(args.out);
    {
        CsvWriter w((out / "calibration.csv").string(), {"t", "Q", "price_fit", "residual"});
        for (size_t i = 0; i < demand.times.size(); ++i) {
            const double resid = (i < fit.residuals.size()) ? fit.residuals[i] : 0.0;
            w.row({demand.times[i], demand.values[i], forecast.price[i], resid});
        }
    }
    json summary;
    summary["c"] = fit.c_hat;
    summary["Theta"] = fit.theta_hat;
    summary["rms"] = fit.rms_error;
    summary["c_projected"] = fit.c_projected;
    summary["peak_to_peak"] = forecast.peak_to_peak;
    std::ofstream(out / "summary.json") << summary.dump(2) << "\n";
    std::cout << "calibrate: c = " << fit.c_hat << ", Theta = " << fit.theta_hat
              << ", rms = " << fit.rms_error << "\n";
    return 0;
}

struct VerifyCheck {
    std::string name;
    bool pass;
    double value;
    double threshold;
};

int cmd_verify(const GlobalArgs& args) {
    int trials = 1000;
    std::uint64_t seed = args.seed ? args.seed : 20240901ull;
    if (!args.config.empty()) {
        json j = json::parse(slurp(args.config));
        if (j.contains("trials")) trials = j["trials"].get<int>();
        if (j.contains("seed")) seed = j["seed"].get<std::uint64_t>();
    }
    write_manifest(args, "verify");
    std::vector<VerifyCheck> checks;

    {
        auto rep = run_monotonicity_trials(trials, seed, 48, 32, thread_budget());
        checks.push_back({"monotonicity_min_gap", rep.min_gap >= -1e-8, rep.min_gap, -1e-8});
        json mono = {{"trials", rep.trials}, {"min_gap", rep.min_gap}, {"violations", rep.violations}};
        std::ofstream(fs::path(args.out) / "monotonicity.json") << mono.dump(2) << "\n";
    }

    {
        SpaceGrid g(-6.0, 6.0, 241);
        TimeGrid tg(1.0, 160);
        HamiltonianSpec spec(1.0, 0.0);
        auto supply = SupplySchedule::from_function(
            [](double t) { return std::sin(2.0 * M_PI * t); }, tg.horizon, 321);
        ModelProblem prob(g, tg, spec, TerminalCost::quadratic(1.0, 0.0),
                          InitialDensity::gaussian(g, 0.0, 0.6), supply);
        FixedPointConfig cfg;
        cfg.tol_price = args.tol_price;
        cfg.tol_balance = args.tol_balance;
        auto sol = solve_equilibrium(prob, cfg);
        auto lq = solve_lq_quadratic_terminal(1.0, 1.0, 0.0, prob.initial.mean(), supply, tg);

        double price_err = 0.0;
        for (int k = 0; k <= tg.n_steps; ++k)
            price_err = std::max(price_err, std::abs(sol.varpi[k] - lq.price()[k]));
        checks.push_back({"lq_vs_pde_price", price_err <= 1e-2, price_err, 1e-2});
        checks.push_back(
            {"balance_residual", sol.balance_sup() <= args.tol_balance, sol.balance_sup(),
             args.tol_balance});

        double mass_err = 0.0;
        for (int k = 0; k <= tg.n_steps; ++k)
            mass_err = std::max(mass_err, std::abs(sol.m.mass(k) - 1.0));
        checks.push_back({"mass_conservation", mass_err <= 1e-10, mass_err, 1e-10});
        checks.push_back({"density_positivity", sol.m.min_value() >= 0.0, sol.m.min_value(), 0.0});
        checks.push_back({"price_lipschitz_finite", std::isfinite(sol.varpi.lipschitz_estimate()),
                          sol.varpi.lipschitz_estimate(), 0.0});
    }

    {
        std::vector<double> t(97), q(97), ref(97);
        for (int i = 0; i < 97; ++i) {
            t[i] = 24.0 * i / 96.0;
            q[i] = std::sin(2.0 * M_PI * t[i] / 24.0);
            ref[i] = 0.3 - 0.00172 * q[i];
        }
        auto fit = calibrate(t, q, t, ref);
        const double rel = std::abs(fit.c_hat - 0.00172) / 0.00172;
        checks.push_back({"calibration_identifiability", rel <= 1e-12, rel, 1e-12});
    }

    bool all = true;
    json out_checks = json::array();
    for (const auto& c : checks) {
        all = all && c.pass;
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " value=" << c.value
                  << " threshold=" << c.threshold << "\n";
        out_checks.push_back(
            {{"name", c.name}, {"pass", c.pass}, {"value", c.value}, {"threshold", c.threshold}});
    }
    json rep = {{"checks", out_checks}, {"all_pass", all}};
    std::ofstream(fs::path(args.out) / "verify_report.json") << rep.dump(2) << "\n";
    std::cout << (all ? "verify: all invariants hold\n" : "verify: INVARIANT VIOLATIONS\n");
    return all ? 0 : 5;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Electricity price formation: constrained MFG solvers and calibration"};
    app.require_subcommand(1);

    GlobalArgs args;
    app.add_option("--config", args.config, "JSON configuration file");
    app.add_option("--out", args.out, "Output directory");
    app.add_option("--seed", args.seed, "Random seed (verify)");
    app.add_option("--tol-price", args.tol_price, "Fixed-point sup-norm tolerance");
    app.add_option("--tol-balance", args.tol_balance, "Balance residual tolerance");
    app.add_option("--max-iters", args.max_iters, "Fixed-point iteration budget");
    app.fallthrough();

    auto* solve = app.add_subcommand("solve", "Solve the coupled HJB/transport/price system");
    solve->add_flag("--dump-fields", args.dump_fields, "Also write u.csv and m.csv");
    solve->add_option("--scheme", args.scheme, "HJB scheme: godunov | semilagrangian");
    solve->add_option("--gradient-order", args.gradient_order,
                      "Gradient reconstruction order for the Godunov flux (1 or 2)");
    auto* lq = app.add_subcommand("lq", "Closed-form state-independent quadratic model");
    auto* pot = app.add_subcommand("potential", "Quadratic-potential model (Volterra price)");
    auto* cal = app.add_subcommand("calibrate", "Least-squares fit of (c, Theta) to a reference price");
    std::string demand_path, reference_path;
    double agents = 1.0;
    cal->add_option("--demand", demand_path, "Demand CSV (time_hours,value)")->required();
    cal->add_option("--reference", reference_path, "Reference price CSV")->required();
    cal->add_option("--agents", agents, "Agent count N for per-agent scaling");
    auto* verify = app.add_subcommand("verify", "Run the invariant/property suite");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) {
            if (args.config.empty()) throw ConfigError("solve: --config is required");
            return cmd_solve(args);
        }
        if (lq->parsed()) {
            if (args.config.empty()) throw ConfigError("lq: --config is required");
            return cmd_lq(args);
        }
        if (pot->parsed()) {
            if (args.config.empty()) throw ConfigError("potential: --config is required");
            return cmd_potential(args);
        }
        if (cal->parsed()) return cmd_calibrate(args, demand_path, reference_path, agents);
        if (verify->parsed()) return cmd_verify(args);
    } catch (const NonConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        for (size_t i = 0; i < e.residual_history.size(); ++i)
            std::cerr << "  iteration " << (i + 1) << ": price change " << e.residual_history[i]
                      << "\n";
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
