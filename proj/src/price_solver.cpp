#include "pricemfg/price_solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pricemfg/errors.hpp"

namespace pricemfg {

void FixedPointConfig::validate() const {
    if (!(damping > 0.0 && damping <= 1.0))
        throw ConfigError("FixedPointConfig: damping must be in (0, 1]");
    if (max_iters < 1) throw ConfigError("FixedPointConfig: max_iters must be >= 1");
    if (!(tol_price > 0.0) || !(tol_balance > 0.0))
        throw ConfigError("FixedPointConfig: tolerances must be > 0");
    hjb.validate();
}

double initial_price(const HamiltonianSpec& spec, const SpaceGrid& grid,
                     const std::vector<double>& ux0, const InitialDensity& initial, double Q0) {
    const auto w = trapezoid_weights(grid);
    const auto& m0 = initial.values();
    auto F = [&](double theta) {
        double acc = 0.0;
        for (int i = 0; i < grid.n_nodes; ++i)
            acc += w[i] * m0[i] * spec.dp_kinetic(theta + ux0[i]);
        return acc + Q0;
    };
    auto dF = [&](double theta) {
        (void)theta;
        double acc = 0.0;
        for (int i = 0; i < grid.n_nodes; ++i) acc += w[i] * m0[i] * spec.dpp_kinetic();
        return acc;
    };

    // Expanding bracket around a linear guess, then bisection; F is strictly
    // increasing because D_pH is.
    double guess = -spec.c * Q0;
    double radius = std::max(1.0, std::abs(guess));
    double lo = guess - radius, hi = guess + radius;
    int expansions = 0;
    while (F(lo) > 0.0 || F(hi) < 0.0) {
        radius *= 2.0;
        lo = guess - radius;
        hi = guess + radius;
        if (++expansions > 80)
            throw NumericalError("initial_price: bracket not found; data non-finite or degenerate");
    }
    for (int it = 0; it < 80 && hi - lo > 1e-9 * (1.0 + std::abs(guess)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (F(mid) <= 0.0 ? lo : hi) = mid;
    }
    double theta = 0.5 * (lo + hi);
    for (int it = 0; it < 50; ++it) {
        const double f = F(theta);
        if (std::abs(f) <= 1e-12) break;
        theta -= f / dF(theta);
    }
    return theta;
}

namespace {

// Slice integrals feeding the price ODE right-hand side.
struct OdeSliceData {
    std::vector<double> numerator_term;  // int (D2pp*DxH + eps*D3ppp*u_xx^2) m dx per node k
    std::vector<double> denominator;     // int D2pp m dx per node k
};

OdeSliceData ode_slice_data(const HamiltonianSpec& spec, const ValueField& u,
                            const DensityField& m) {
    const SpaceGrid& g = u.space();
    const int nt = u.time().n_steps;
    const auto w = trapezoid_weights(g);
    OdeSliceData out;
    out.numerator_term.assign(nt + 1, 0.0);
    out.denominator.assign(nt + 1, 0.0);
    const double d2pp = spec.dpp_kinetic();
    const double d3 = spec.dppp_kinetic();  // 0 for the quadratic kinetic part
    for (int k = 0; k <= nt; ++k) {
        double num = 0.0, den = 0.0;
        for (int i = 0; i < g.n_nodes; ++i) {
            const double mi = m.at(i, k);
            const double dxH = -spec.potential.slope(g, i);
            double term = d2pp * dxH;
            if (spec.epsilon > 0.0 && d3 != 0.0) {
                const double uxx = u.second_difference(i, k);
                term += spec.epsilon * d3 * uxx * uxx;
            }
            num += w[i] * mi * term;
            den += w[i] * mi * d2pp;
        }
        out.numerator_term[k] = num;
        out.denominator[k] = den;
    }
    return out;
}

double lerp_nodes(const std::vector<double>& v, double k_frac) {
    const int k = std::min((int)k_frac, (int)v.size() - 2);
    const double a = k_frac - k;
    return (1.0 - a) * v[k] + a * v[k + 1];
}

}  // namespace

PricePath integrate_price_ode(const HamiltonianSpec& spec, const ValueField& u,
                              const DensityField& m, const SupplySchedule& supply, double theta0) {
    const TimeGrid& tg = u.time();
    const double dt = tg.dt();
    const OdeSliceData data = ode_slice_data(spec, u, m);

    const double theta_floor = spec.convexity_floor();
    for (double den : data.denominator)
        if (den < 0.5 * theta_floor)
            throw NumericalError("integrate_price_ode: degenerate mass in the balance denominator");

    // The right-hand side does not depend on theta, so RK4 reduces to Simpson
    // quadrature. The -Q'/den part is integrated through the exact increment
    // of the supply interpolant (its antiderivative is known; literal stage
    // evaluation would leak O(dt^3) error at the monotone-cubic joints).
    auto den_at = [&](double t) {
        return lerp_nodes(data.denominator, std::clamp(t / dt, 0.0, (double)tg.n_steps));
    };
    auto g_at = [&](double t) {
        const double kf = std::clamp(t / dt, 0.0, (double)tg.n_steps);
        return -lerp_nodes(data.numerator_term, kf) / lerp_nodes(data.denominator, kf);
    };

    std::vector<double> theta(tg.n_nodes());
    theta[0] = theta0;
    for (int k = 0; k < tg.n_steps; ++k) {
        const double t = tg.t(k);
        const double dQ = supply.value(t + dt) - supply.value(t);
        const double supply_part = -dQ / den_at(t + 0.5 * dt);
        const double pot_part = dt / 6.0 * (g_at(t) + 4.0 * g_at(t + 0.5 * dt) + g_at(t + dt));
        theta[k + 1] = theta[k] + supply_part + pot_part;
    }
    return PricePath(tg, std::move(theta));
}

std::vector<double> balance_residual(const HamiltonianSpec& spec, const ValueField& u,
                                     const DensityField& m, const PricePath& varpi,
                                     const SupplySchedule& supply) {
    const SpaceGrid& g = u.space();
    const TimeGrid& tg = u.time();
    const auto w = trapezoid_weights(g);
    std::vector<double> r(tg.n_nodes());
    for (int k = 0; k <= tg.n_steps; ++k) {
        double acc = 0.0;
        for (int i = 0; i < g.n_nodes; ++i)
            acc += w[i] * m.at(i, k) * spec.dp_kinetic(varpi[k] + u.gradient(i, k));
        r[k] = acc + supply.value(tg.t(k));
    }
    return r;
}

namespace {

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a[i] - b[i]));
    return s;
}

// Type-II Anderson mixing over a short history of (iterate, map output)
// pairs. Solves the small regularized least-squares problem on residual
// differences; falls back to the damped Picard step when degenerate.
class AndersonMixer {
public:
    explicit AndersonMixer(int depth) : depth_(depth) {}

    void reset() {
        iterates_.clear();
        outputs_.clear();
    }

    void push(const std::vector<double>& x, const std::vector<double>& fx) {
        iterates_.push_back(x);
        outputs_.push_back(fx);
        if ((int)iterates_.size() > depth_ + 1) {
            iterates_.erase(iterates_.begin());
            outputs_.erase(outputs_.begin());
        }
    }

    // next iterate, or empty when there is not enough usable history
    std::vector<double> step() const {
        const int h = (int)iterates_.size();
        if (depth_ < 1 || h < 2) return {};
        const int m = h - 1;  // difference columns
        const size_t n = iterates_.back().size();

        auto resid = [&](int j) {
            std::vector<double> r(n);
            for (size_t i = 0; i < n; ++i) r[i] = outputs_[j][i] - iterates_[j][i];
            return r;
        };
        const std::vector<double> rn = resid(h - 1);
        std::vector<std::vector<double>> dr(m), df(m);
        for (int j = 0; j < m; ++j) {
            dr[j].resize(n);
            df[j].resize(n);
            const auto rj = resid(j);
            const auto rj1 = resid(j + 1);
            for (size_t i = 0; i < n; ++i) {
                dr[j][i] = rj1[i] - rj[i];
                df[j][i] = outputs_[j + 1][i] - outputs_[j][i];
            }
        }

        // normal equations (m x m) with Tikhonov regularization
        std::vector<std::vector<double>> G(m, std::vector<double>(m, 0.0));
        std::vector<double> b(m, 0.0);
        double scale = 0.0;
        for (int a = 0; a < m; ++a) {
            for (int c = a; c < m; ++c) {
                double s = 0.0;
                for (size_t i = 0; i < n; ++i) s += dr[a][i] * dr[c][i];
                G[a][c] = G[c][a] = s;
            }
            scale = std::max(scale, G[a][a]);
            for (size_t i = 0; i < n; ++i) b[a] += dr[a][i] * rn[i];
        }
        if (!(scale > 0.0)) return {};
        for (int a = 0; a < m; ++a) G[a][a] += 1e-12 * scale;

        // Gaussian elimination with partial pivoting on the tiny system
        std::vector<double> gamma(b);
        for (int col = 0; col < m; ++col) {
            int piv = col;
            for (int r = col + 1; r < m; ++r)
                if (std::abs(G[r][col]) > std::abs(G[piv][col])) piv = r;
            if (std::abs(G[piv][col]) < 1e-300) return {};
            std::swap(G[piv], G[col]);
            std::swap(gamma[piv], gamma[col]);
            for (int r = col + 1; r < m; ++r) {
                const double f = G[r][col] / G[col][col];
                for (int c2 = col; c2 < m; ++c2) G[r][c2] -= f * G[col][c2];
                gamma[r] -= f * gamma[col];
            }
        }
        for (int r = m - 1; r >= 0; --r) {
            for (int c2 = r + 1; c2 < m; ++c2) gamma[r] -= G[r][c2] * gamma[c2];
            gamma[r] /= G[r][r];
            if (std::abs(gamma[r]) > 50.0) return {};  // untrustworthy extrapolation
        }

        std::vector<double> next(outputs_.back());
        for (int j = 0; j < m; ++j)
            for (size_t i = 0; i < n; ++i) next[i] -= gamma[j] * df[j][i];
        return next;
    }

private:
    int depth_;
    std::vector<std::vector<double>> iterates_;
    std::vector<std::vector<double>> outputs_;
};

}  // namespace

EquilibriumSolution solve_equilibrium(const ModelProblem& problem, const FixedPointConfig& config) {
    config.validate();
    if (!problem.supply.covers(problem.time.horizon))
        throw ConfigError("solve_equilibrium: supply schedule does not cover [0, T]");

    const TimeGrid& tg = problem.time;
    const int nn = tg.n_nodes();
    const auto Qgrid = problem.supply_on_grid();

    // Start from w(t) = -c Q(t): exact shape for V = 0, good start otherwise.
    std::vector<double> varpi(nn);
    for (int k = 0; k < nn; ++k) varpi[k] = -problem.spec.c * Qgrid[k];
    if (config.initial_guess) {
        if ((int)config.initial_guess->values.size() != nn)
            throw ConfigError("solve_equilibrium: initial guess grid mismatch");
        varpi = config.initial_guess->values;
    }

    double damping = config.damping;
    std::vector<IterationRecord> history;
    AndersonMixer mixer(config.anderson_depth);
    double last_change = std::numeric_limits<double>::infinity();

    ValueField u;
    DensityField m;
    std::vector<double> theta_vals;

    for (int it = 1; it <= config.max_iters; ++it) {
        const PricePath price(tg, varpi);
        u = solve_hjb(problem.spec, problem.terminal, price, problem.space, tg, config.hjb);
        const DriftField drift = DriftField::from_solution(problem.spec, u, price);
        m = solve_fp(drift, problem.initial, problem.spec.epsilon, tg, config.fp);

        const double theta0 =
            initial_price(problem.spec, problem.space, u.gradient_slice(0), problem.initial,
                          problem.supply.value(0.0));
        const PricePath theta = integrate_price_ode(problem.spec, u, m, problem.supply, theta0);
        theta_vals = theta.values;

        const double change = sup_diff(theta_vals, varpi);
        const auto resid = balance_residual(problem.spec, u, m, price, problem.supply);
        double resid_sup = 0.0;
        for (double r : resid) resid_sup = std::max(resid_sup, std::abs(r));
        history.push_back({it, change, resid_sup});

        // Distance-to-fixed-point estimate from the observed contraction, so
        // independent runs stop within tol_price of the same limit.
        const double ratio =
            (std::isfinite(last_change) && last_change > 0.0) ? change / last_change : 1.0;
        const double err_est = change / (1.0 - std::clamp(ratio, 0.0, 0.95));

        if (err_est <= config.tol_price) {
            EquilibriumSolution sol{std::move(u), std::move(m), price, resid, it, history};
            if (sol.balance_sup() > config.tol_balance)
                throw NumericalError("solve_equilibrium: price converged but balance residual " +
                                     std::to_string(sol.balance_sup()) + " exceeds tolerance");
            return sol;
        }

        // Residual grew: damp harder and restart the mixer history.
        if (change > last_change * 1.2) {
            damping = std::max(0.05, 0.5 * damping);
            mixer.reset();
        }
        last_change = change;

        mixer.push(varpi, theta_vals);
        std::vector<double> next = mixer.step();
        if (next.empty()) {
            next.resize(nn);
            for (int k = 0; k < nn; ++k)
                next[k] = (1.0 - damping) * varpi[k] + damping * theta_vals[k];
        }
        varpi = std::move(next);
    }

    std::vector<double> changes;
    for (const auto& h : history) changes.push_back(h.price_change);
    throw NonConvergenceError("solve_equilibrium: no fixed point within " +
                                  std::to_string(config.max_iters) + " iterations",
                              changes);
}

double energy_estimate_diagnostic(const HamiltonianSpec& spec, const ValueField& u,
                                  const DensityField& m, const PricePath& varpi,
                                  const InitialDensity& initial) {
    const SpaceGrid& g = u.space();
    const TimeGrid& tg = u.time();
    const auto w = trapezoid_weights(g);
    const auto& m0 = initial.values();
    std::vector<double> slice(tg.n_nodes());
    for (int k = 0; k <= tg.n_steps; ++k) {
        double acc = 0.0;
        for (int i = 0; i < g.n_nodes; ++i) {
            const double H = spec.kinetic(varpi[k] + u.gradient(i, k)) - spec.potential.value(g, i);
            acc += w[i] * H * (m0[i] + m.at(i, k));
        }
        slice[k] = acc;
    }
    double total = 0.5 * (slice.front() + slice.back());
    for (int k = 1; k < tg.n_steps; ++k) total += slice[k];
    total *= tg.dt();
    if (!std::isfinite(total))
        throw NumericalError("energy_estimate_diagnostic: non-finite value");
    return total;
}

double second_order_diagnostic(const HamiltonianSpec& spec, const ValueField& u,
                               const DensityField& m) {
    const SpaceGrid& g = u.space();
    const TimeGrid& tg = u.time();
    const auto w = trapezoid_weights(g);
    std::vector<double> slice(tg.n_nodes());
    for (int k = 0; k <= tg.n_steps; ++k) {
        double acc = 0.0;
        for (int i = 1; i + 1 < g.n_nodes; ++i) {
            const double uxx = u.second_difference(i, k);
            acc += w[i] * spec.dpp_kinetic() * uxx * uxx * m.at(i, k);
        }
        slice[k] = acc;
    }
    double total = 0.5 * (slice.front() + slice.back());
    for (int k = 1; k < tg.n_steps; ++k) total += slice[k];
    return total * tg.dt();
}

}  // namespace pricemfg
