#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "pricemfg/errors.hpp"
#include "pricemfg/hjb.hpp"
#include "pricemfg/lq.hpp"

using namespace pricemfg;

namespace {

double sup_error_vs(const ValueField& u, const std::function<double(double, double)>& ref,
                    int skip_boundary = 0) {
    double worst = 0.0;
    for (int k = 0; k <= u.time().n_steps; ++k)
        for (int i = skip_boundary; i < u.space().n_nodes - skip_boundary; ++i)
            worst = std::max(worst, std::abs(u.at(i, k) - ref(u.space().x(i), u.time().t(k))));
    return worst;
}

}  // namespace

TEST_CASE("zero data gives the zero solution") {
    SpaceGrid g(-2.0, 2.0, 41);
    TimeGrid tg(1.0, 20);
    HamiltonianSpec spec(1.0, 0.0);
    auto u = solve_hjb(spec, TerminalCost::quadratic(0.0, 0.0), PricePath::constant(tg, 0.0), g, tg);
    CHECK(sup_error_vs(u, [](double, double) { return 0.0; }) <= 1e-14);
}

TEST_CASE("constant price, flat terminal: u = -(T-t) w0^2 / (2c)") {
    SpaceGrid g(-2.0, 2.0, 41);
    TimeGrid tg(1.5, 30);
    const double c = 2.0, w0 = 0.8;
    HamiltonianSpec spec(c, 0.0);
    auto u = solve_hjb(spec, TerminalCost::quadratic(0.0, 0.0), PricePath::constant(tg, w0), g, tg);
    auto ref = [&](double, double t) { return -(tg.horizon - t) * w0 * w0 / (2.0 * c); };
    CHECK(sup_error_vs(u, ref) <= 1e-12);

    SUBCASE("semi-Lagrangian scheme agrees within its control resolution") {
        HJBConfig cfg;
        cfg.scheme = HJBConfig::Scheme::SemiLagrangian;
        auto usl = solve_hjb(spec, TerminalCost::quadratic(0.0, 0.0), PricePath::constant(tg, w0),
                             g, tg, cfg);
        CHECK(sup_error_vs(usl, ref) <= 2e-3);
    }
}

TEST_CASE("terminal condition is matched exactly") {
    SpaceGrid g(-3.0, 3.0, 61);
    TimeGrid tg(1.0, 16);
    HamiltonianSpec spec(0.5, 0.0, PotentialSpec::quadratic(0.7, 0.3));
    auto term = TerminalCost::quadratic(1.2, -0.4);
    auto u = solve_hjb(spec, term, PricePath::constant(tg, 0.3), g, tg);
    auto samples = term.sample(g);
    for (int i = 0; i < g.n_nodes; ++i) CHECK(u.at(i, tg.n_steps) == samples[i]);
}

TEST_CASE("LQ closed form reproduced within grid tolerance, improving under refinement") {
    const double c = 1.0, gamma = 1.0, T = 2.0;
    auto Qfun = [T](double t) { return 0.8 * std::sin(2.0 * M_PI * t / T); };
    auto supply = SupplySchedule::from_function(Qfun, T, 257);

    auto run = [&](int n_x, int n_t) {
        SpaceGrid g(-6.0, 6.0, n_x);
        TimeGrid tg(T, n_t);
        auto lq = solve_lq_quadratic_terminal(c, gamma, 0.0, 0.0, supply, tg);
        HamiltonianSpec spec(c, 0.0);
        auto u = solve_hjb(spec, TerminalCost::quadratic(gamma, 0.0), lq.price(), g, tg);
        double worst = 0.0;
        for (int k = 0; k <= tg.n_steps; ++k)
            for (int i = 0; i < g.n_nodes; ++i) {
                const double x = g.x(i);
                if (std::abs(x) > 4.0) continue;  // outside the truncation margin
                worst = std::max(worst, std::abs(u.at(i, k) - lq.value(x, tg.t(k))));
            }
        return worst;
    };

    const double coarse = run(121, 80);
    const double fine = run(241, 160);
    CHECK(coarse <= 0.08);
    CHECK(fine <= coarse / 1.4);  // ~O(dx + dt)
}

TEST_CASE("limited second-order gradients sharpen the LQ reproduction") {
    const double c = 1.0, gamma = 1.0, T = 2.0;
    auto supply = SupplySchedule::from_function(
        [T](double t) { return 0.8 * std::sin(2.0 * M_PI * t / T); }, T, 257);
    SpaceGrid g(-6.0, 6.0, 121);
    TimeGrid tg(T, 80);
    auto lq = solve_lq_quadratic_terminal(c, gamma, 0.0, 0.0, supply, tg);
    HamiltonianSpec spec(c, 0.0);

    auto err_for = [&](int order) {
        HJBConfig cfg;
        cfg.gradient_order = order;
        cfg.cfl_safety = 0.2;  // push the time error down; compare the spatial part
        auto u = solve_hjb(spec, TerminalCost::quadratic(gamma, 0.0), lq.price(), g, tg, cfg);
        double worst = 0.0;
        for (int k = 0; k <= tg.n_steps; ++k)
            for (int i = 0; i < g.n_nodes; ++i)
                if (std::abs(g.x(i)) <= 4.0)
                    worst = std::max(worst, std::abs(u.at(i, k) - lq.value(g.x(i), tg.t(k))));
        return worst;
    };
    const double first = err_for(1), second = err_for(2);
    CHECK(second <= first / 3.0);  // the LQ value is quadratic in x
    CHECK(second <= 0.02);
}

TEST_CASE("slice Lipschitz constant is uniform over randomized bounded prices") {
    SpaceGrid g(-4.0, 4.0, 81);
    TimeGrid tg(1.0, 40);
    const double gamma = 1.0, eta = 0.3;
    HamiltonianSpec spec(1.0, 0.0, PotentialSpec::quadratic(eta, 0.0));
    auto term = TerminalCost::quadratic(gamma, 0.0);

    const double lip_bound = gamma * 4.0 + tg.horizon * eta * 4.0;  // Lip(uT) + T Lip(V)
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> p(tg.n_nodes());
        const double a = unif(rng), b = unif(rng), ph = unif(rng);
        for (int k = 0; k < tg.n_nodes(); ++k) {
            const double s = tg.t(k);
            p[k] = a * std::cos(2.0 * M_PI * s + ph) + 0.5 * b;
        }
        auto u = solve_hjb(spec, term, PricePath(tg, p), g, tg);
        for (int k = 0; k <= tg.n_steps; ++k) CHECK(u.lipschitz_slice(k) <= lip_bound + 0.05);
    }
}

TEST_CASE("discrete comparison principle: ordered terminal data stays ordered") {
    SpaceGrid g(-3.0, 3.0, 61);
    TimeGrid tg(1.0, 24);
    HamiltonianSpec spec(1.0, 0.0, PotentialSpec::quadratic(0.4, -0.2));
    auto price = PricePath::constant(tg, 0.4);

    std::vector<double> lo_vals(g.n_nodes), hi_vals(g.n_nodes);
    for (int i = 0; i < g.n_nodes; ++i) {
        const double x = g.x(i);
        lo_vals[i] = 0.5 * x * x;
        hi_vals[i] = 0.5 * x * x + 0.3 + 0.2 * std::sin(2.0 * x);
    }
    for (auto scheme : {HJBConfig::Scheme::UpwindGodunov, HJBConfig::Scheme::SemiLagrangian}) {
        HJBConfig cfg;
        cfg.scheme = scheme;
        auto u1 = solve_hjb(spec, TerminalCost::tabulated(lo_vals), price, g, tg, cfg);
        auto u2 = solve_hjb(spec, TerminalCost::tabulated(hi_vals), price, g, tg, cfg);
        for (int k = 0; k <= tg.n_steps; ++k)
            for (int i = 0; i < g.n_nodes; ++i) CHECK(u1.at(i, k) <= u2.at(i, k) + 1e-12);
    }
}

TEST_CASE("semiconcavity stays below the data bound across random prices") {
    // second difference of u(., t) is at most max(uT'') + (T - t) max(V'').
    SpaceGrid g(-4.0, 4.0, 81);
    TimeGrid tg(1.0, 40);
    const double eta = 0.6;
    HamiltonianSpec spec(1.0, 0.0, PotentialSpec::quadratic(eta, 0.3));

    std::vector<double> term(g.n_nodes);
    double d2max = 0.0;
    for (int i = 0; i < g.n_nodes; ++i) {
        const double x = g.x(i);
        term[i] = 0.6 * x * x + 0.3 * std::sin(1.7 * x);  // convex-ish wiggle
    }
    for (int i = 1; i + 1 < g.n_nodes; ++i)
        d2max = std::max(d2max, (term[i + 1] - 2 * term[i] + term[i - 1]) /
                                    (g.dx() * g.dx()));

    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int trial = 0; trial < 6; ++trial) {
        std::vector<double> p(tg.n_nodes());
        const double a = unif(rng), b = unif(rng);
        for (int k = 0; k < tg.n_nodes(); ++k)
            p[k] = a * std::cos(2.0 * M_PI * tg.t(k)) + 0.4 * b;
        auto u = solve_hjb(spec, TerminalCost::tabulated(term), PricePath(tg, p), g, tg);
        auto rep = semiconcavity_report(u);
        for (int k = 0; k <= tg.n_steps; ++k) {
            const double bound = d2max + (tg.horizon - tg.t(k)) * eta + 1e-6;
            CHECK(rep[k] <= bound);
        }
    }
}

TEST_CASE("vanishing viscosity: differences shrink with epsilon") {
    SpaceGrid g(-4.0, 4.0, 81);
    TimeGrid tg(1.0, 40);
    auto term = TerminalCost::quadratic(1.0, 0.0);
    auto price = PricePath::constant(tg, 0.5);

    auto solve_eps = [&](double eps) {
        HamiltonianSpec spec(1.0, eps);
        return solve_hjb(spec, term, price, g, tg);
    };
    auto u0 = solve_eps(0.0);
    auto diff = [&](const ValueField& a) {
        double worst = 0.0;
        for (size_t j = 0; j < a.raw().size(); ++j)
            worst = std::max(worst, std::abs(a.raw()[j] - u0.raw()[j]));
        return worst;
    };
    const double d3 = diff(solve_eps(1e-3));
    const double d4 = diff(solve_eps(1e-4));
    CHECK(d4 < d3);
    CHECK(d3 <= 0.05);
}

TEST_CASE("semiconcavity report") {
    SpaceGrid g(-4.0, 4.0, 81);
    TimeGrid tg(1.0, 20);

    SUBCASE("quadratic terminal data: bound equals gamma at t = T") {
        HamiltonianSpec spec(1.0, 0.0);
        auto u = solve_hjb(spec, TerminalCost::quadratic(1.5, 0.0), PricePath::constant(tg, 0.2),
                           g, tg);
        auto rep = semiconcavity_report(u);
        CHECK(rep.back() == doctest::Approx(1.5).epsilon(1e-9));
    }
    SUBCASE("zero data: exactly zero") {
        HamiltonianSpec spec(1.0, 0.0);
        auto u = solve_hjb(spec, TerminalCost::quadratic(0.0, 0.0), PricePath::constant(tg, 0.0),
                           g, tg);
        auto rep = semiconcavity_report(u);
        for (double r : rep) CHECK(std::abs(r) <= 1e-14);
    }
    SUBCASE("LQ closed form: gamma / (1 + gamma (T-t)/c) per slice") {
        const double c = 1.0, gamma = 2.0, T = 1.0;
        auto supply = SupplySchedule::constant(0.0, T);
        auto lq = solve_lq_quadratic_terminal(c, gamma, 0.0, 0.0, supply, tg);
        ValueField u(g, tg);
        for (int k = 0; k <= tg.n_steps; ++k)
            for (int i = 0; i < g.n_nodes; ++i) u.at(i, k) = lq.value(g.x(i), tg.t(k));
        auto rep = semiconcavity_report(u);
        for (int k = 0; k <= tg.n_steps; ++k) {
            const double expect = gamma / (1.0 + gamma * (T - tg.t(k)) / c);
            CHECK(rep[k] == doctest::Approx(expect).epsilon(1e-7));
        }
    }
}

TEST_CASE("CFL budget violation raises a configuration error") {
    SpaceGrid g(-2.0, 2.0, 201);
    TimeGrid tg(1.0, 4);
    HamiltonianSpec spec(0.01, 0.0);  // huge drift 1/c
    HJBConfig cfg;
    cfg.max_substeps = 2;
    CHECK_THROWS_AS(solve_hjb(spec, TerminalCost::quadratic(1.0, 0.0),
                              PricePath::constant(tg, 5.0), g, tg, cfg),
                    ConfigError);
}
