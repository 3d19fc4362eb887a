// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failures. Tolerances are fixed here, not tuned at run time.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "pricemfg/calibration.hpp"
#include "pricemfg/lq.hpp"
#include "pricemfg/monotonicity.hpp"
#include "pricemfg/price_solver.hpp"
#include "pricemfg/volterra.hpp"

using namespace pricemfg;

namespace {

int failures = 0;

void report(int criterion, bool pass, const char* what, double value, double threshold) {
    std::printf("%s criterion %2d: %s (value %.6g, threshold %.6g)\n", pass ? "PASS" : "FAIL",
                criterion, what, value, threshold);
    if (!pass) ++failures;
}

struct LQRun {
    double price_err;
    double balance;
    double lipschitz;
    double mass_err;
    double min_density;
    double seconds;
};

LQRun lq_vs_solver_run(double T, int n_x, int n_t, double x_lo, double x_hi) {
    const auto start = std::chrono::steady_clock::now();
    SpaceGrid g(x_lo, x_hi, n_x);
    TimeGrid tg(T, n_t);
    HamiltonianSpec spec(1.0, 0.0);
    auto supply = SupplySchedule::from_function(
        [T](double t) { return std::sin(2.0 * M_PI * t / T); }, T, 4 * n_t + 1);
    // gamma = 1, zeta = x_bar
    ModelProblem prob(g, tg, spec, TerminalCost::quadratic(1.0, 0.0),
                      InitialDensity::gaussian(g, 0.0, 0.6), supply);
    FixedPointConfig cfg;
    cfg.tol_balance = 1.0;  // the balance criterion is measured, not enforced
    cfg.hjb.gradient_order = 2;  // limited reconstruction; exact for LQ gradients
    cfg.hjb.cfl_safety = 0.3;
    auto sol = solve_equilibrium(prob, cfg);
    auto lq = solve_lq_quadratic_terminal(1.0, 1.0, prob.initial.mean(), prob.initial.mean(),
                                          supply, tg);
    LQRun out{};
    for (int k = 0; k <= tg.n_steps; ++k)
        out.price_err = std::max(out.price_err, std::abs(sol.varpi[k] - lq.price()[k]));
    out.balance = sol.balance_sup();
    out.lipschitz = sol.varpi.lipschitz_estimate();
    for (int k = 0; k <= tg.n_steps; ++k)
        out.mass_err = std::max(out.mass_err, std::abs(sol.m.mass(k) - 1.0));
    out.min_density = sol.m.min_value();
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

void criterion_1_and_10() {
    // 24 h horizon, n_x = 201, n_t = 480, V = 0, quadratic terminal with
    // zeta = x_bar, mean-zero unit-amplitude supply. Price amplitude is c = 1.
    const auto day = lq_vs_solver_run(24.0, 201, 480, -6.0, 14.0);
    report(1, day.price_err <= 1e-2 && day.seconds <= 30.0,
           "LQ closed form vs general solver on the day profile", day.price_err, 1e-2);
    std::printf("        (runtime %.2f s, limit 30 s)\n", day.seconds);

    // One space-time refinement: the error shrinks ~O(dx + dt) and the
    // discrete price Lipschitz estimate stays within 10%.
    const auto fine = lq_vs_solver_run(24.0, 401, 960, -6.0, 14.0);
    const bool shrink = fine.price_err <= day.price_err / 1.4;
    std::printf("        (refined error %.6g, coarse %.6g)\n", fine.price_err, day.price_err);
    if (!shrink) {
        std::printf("FAIL criterion  1b: refinement did not shrink the LQ error ~O(dx+dt)\n");
        ++failures;
    }
    const double lip_var = std::abs(fine.lipschitz - day.lipschitz) /
                           std::max(std::abs(day.lipschitz), 1e-300);
    report(10, lip_var <= 0.10, "price Lipschitz estimate stable under refinement", lip_var, 0.10);
}

void criterion_2_and_8() {
    // Balance bound on the verify-suite problem plus mass/positivity across
    // the equilibrium and stressed transport runs.
    SpaceGrid g(-6.0, 6.0, 241);
    TimeGrid tg(1.0, 160);
    HamiltonianSpec spec(1.0, 0.0);
    auto supply = SupplySchedule::from_function(
        [](double t) { return std::sin(2.0 * M_PI * t); }, tg.horizon, 641);
    ModelProblem prob(g, tg, spec, TerminalCost::quadratic(1.0, 0.0),
                      InitialDensity::gaussian(g, 0.0, 0.6), supply);
    FixedPointConfig cfg;
    cfg.tol_balance = 1.0;
    auto sol = solve_equilibrium(prob, cfg);
    report(2, sol.balance_sup() <= 1e-3, "balance constraint after convergence",
           sol.balance_sup(), 1e-3);

    double mass_err = 0.0;
    for (int k = 0; k <= tg.n_steps; ++k)
        mass_err = std::max(mass_err, std::abs(sol.m.mass(k) - 1.0));
    double min_density = sol.m.min_value();

    // stressed transport matrix: compressive, oscillating, and diffusive runs
    auto m0 = InitialDensity::gaussian(g, 0.0, 0.5);
    for (double eps : {0.0, 0.02}) {
        for (int mode = 0; mode < 2; ++mode) {
            GridField b(g, tg);
            for (int k = 0; k <= tg.n_steps; ++k)
                for (int i = 0; i < g.n_nodes; ++i)
                    b.at(i, k) = mode == 0
                                     ? -0.8 * std::tanh(g.x(i)) + 0.3 * std::sin(5.0 * tg.t(k))
                                     : 1.2 * std::cos(2.0 * M_PI * tg.t(k));
            auto m = solve_fp(DriftField(std::move(b)), m0, eps, tg);
            for (int k = 0; k <= tg.n_steps; ++k)
                mass_err = std::max(mass_err, std::abs(m.mass(k) - 1.0));
            if (eps == 0.0) min_density = std::min(min_density, m.min_value());
        }
    }
    const bool pass8 = mass_err <= 1e-10 && min_density >= 0.0;
    report(8, pass8, "mass conservation and positivity across the matrix", mass_err, 1e-10);
    std::printf("        (min density %.3g, required >= 0)\n", min_density);
}

void criterion_3() {
    auto Q = [](double t) { return std::sin(2.0 * M_PI * t / 24.0); };
    TimeGrid tg(24.0, 480);
    auto tr = agent_trajectory(1.0, 1.0, tg, Q, 2.0, 0.5);
    double worst = 0.0;
    for (int k = 0; k <= tg.n_steps; ++k) {
        const double integral =
            (24.0 / (2.0 * M_PI)) * (1.0 - std::cos(2.0 * M_PI * tg.t(k) / 24.0));
        worst = std::max(worst, std::abs(tr.mean[k] - 0.5 - integral));
    }
    report(3, worst <= 1e-8, "conservation of energy along the RK4 mean path", worst, 1e-8);
}

void criterion_4() {
    const double T = 24.0;
    auto Qfun = [T](double t) { return 0.8 * std::sin(2.0 * M_PI * t / T); };
    auto supply = SupplySchedule::from_function(Qfun, T, 961);
    TimeGrid tg(T, 480);
    auto lq_a = solve_lq_quadratic_terminal(0.7, 1.3, 0.4, 0.1, supply, tg);
    auto lq_b = solve_lq_quadratic_terminal(0.7, 1.3, -1.0, 0.1, supply, tg);
    auto tr_a = agent_trajectory(0.7, 1.3, tg, Qfun, 1.5, lq_a.x_bar());
    auto tr_b = agent_trajectory(0.7, 1.3, tg, Qfun, 1.5, lq_b.x_bar());
    double worst = 0.0;
    for (int k = 0; k <= tg.n_steps; ++k)
        worst = std::max(worst, std::abs(tr_a.position[k] - tr_b.position[k]));
    report(4, worst == 0.0 && lq_a.theta() != lq_b.theta(),
           "zeta-independence of agent trajectories (exact)", worst, 0.0);
}

void criterion_5() {
    const double f0 = 2.0, T = 1.0;
    auto kernel = [](double t) { return std::sinh(t); };  // eta = 1, c = 1
    auto err_at = [&](int n) {
        std::vector<double> f(n + 1, f0);
        auto w = volterra_solve_trapezoid(kernel, f, T / n);
        double err = 0.0;
        for (int j = 0; j <= n; ++j) {
            const double t = T * j / n;
            err = std::max(err, std::abs(w[j] - f0 * (1.0 - 0.5 * t * t)));
        }
        return err;
    };
    const double e1 = err_at(64), e2 = err_at(128);
    const double ratio = e1 / e2;
    report(5, ratio >= 3.5 && ratio <= 4.5 && e1 <= 1e-3,
           "trapezoidal Volterra matches Laplace closed form at O(dt^2)", ratio, 4.0);
}

void criterion_6() {
    const double c = 1.0, gamma = 1.0, zeta = 0.2, x_bar = 0.1, T = 1.0;
    auto supply =
        SupplySchedule::from_function([](double t) { return 0.5 * std::cos(4.0 * t); }, T, 801);
    TimeGrid tg(T, 200);
    PotentialModelParams p{c, 1e-6, 0.4, gamma, zeta, x_bar};
    auto [state, price] = solve_potential_model(p, supply, tg);
    auto lq = solve_lq_quadratic_terminal(c, gamma, zeta, x_bar, supply, tg);
    double worst = 0.0;
    for (int k = 0; k <= tg.n_steps; ++k)
        worst = std::max(worst, std::abs(price[k] - lq.price()[k]));
    report(6, worst <= 1e-4, "eta -> 0 degeneration to the V = 0 price", worst, 1e-4);
}

void criterion_7() {
    auto rep = run_monotonicity_trials(1000, 123456789ull);
    report(7, rep.min_gap >= -1e-8 && rep.violations == 0,
           "monotonicity gap over 1000 boundary-compatible pairs", rep.min_gap, -1e-8);
}

void criterion_9() {
    // Noiseless identifiability.
    const double c_true = 0.00172, theta_true = 0.3;
    const int n = 240;
    std::vector<double> t(n), q(n), ref(n);
    for (int i = 0; i < n; ++i) {
        t[i] = 24.0 * i / (n - 1.0);
        q[i] = std::sin(2.0 * M_PI * t[i] / 24.0) + 0.3 * std::cos(4.0 * M_PI * t[i] / 24.0);
        ref[i] = theta_true - c_true * q[i];
    }
    auto fit = calibrate(t, q, t, ref);
    const double rel = std::max(std::abs(fit.c_hat - c_true) / c_true,
                                std::abs(fit.theta_hat - theta_true) / std::abs(theta_true));
    report(9, rel <= 1e-12, "noiseless calibration recovers (c, Theta)", rel, 1e-12);

    // Noisy recovery: 500 Monte Carlo trials, sigma = 5% of the price
    // amplitude, success = both parameters within 3 standard errors. The
    // reference price series behind the published wear constant is an
    // external input; this property-based check substitutes for reproducing
    // its exact fitted value.
    double mq = 0.0, sq = 0.0;
    for (double v : q) mq += v;
    mq /= n;
    for (double v : q) sq += (v - mq) * (v - mq);
    double amp = 0.0;
    for (double v : q) amp = std::max(amp, std::abs(c_true * v));
    const double sigma = 0.05 * amp;
    const double se_c = sigma / std::sqrt(sq);
    const double se_theta = sigma * std::sqrt(1.0 / n + mq * mq / sq);

    std::mt19937_64 rng(777);
    std::normal_distribution<double> noise(0.0, sigma);
    int hits = 0;
    const int trials = 500;
    for (int trial = 0; trial < trials; ++trial) {
        std::vector<double> noisy(n);
        for (int i = 0; i < n; ++i) noisy[i] = theta_true - c_true * q[i] + noise(rng);
        auto f = calibrate(t, q, t, noisy);
        if (std::abs(f.c_hat - c_true) <= 3.0 * se_c &&
            std::abs(f.theta_hat - theta_true) <= 3.0 * se_theta)
            ++hits;
    }
    const double frac = (double)hits / trials;
    bool pass = hits >= (int)(0.95 * trials);
    std::printf("%s criterion  9b: noisy calibration within 3 SE in %.1f%% of %d trials "
                "(threshold 95%%)\n",
                pass ? "PASS" : "FAIL", 100.0 * frac, trials);
    if (!pass) ++failures;
}

}  // namespace

int main() {
    criterion_1_and_10();
    criterion_2_and_8();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_9();
    if (failures == 0)
        std::printf("acceptance: all criteria PASS\n");
    else
        std::printf("acceptance: %d criteria FAILED\n", failures);
    return failures;
}
