#include "pricemfg/lq.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pricemfg/errors.hpp"
#include "pricemfg/volterra.hpp"

namespace pricemfg {

LQSolution::LQSolution(double c, double gamma, double zeta, double x_bar, SupplySchedule supply,
                       const TimeGrid& grid)
    : c_(c), gamma_(gamma), zeta_(zeta), x_bar_(x_bar), supply_(std::move(supply)), grid_(grid),
      mean_path_(grid.n_nodes()) {
    if (!(c > 0.0)) throw ConfigError("LQSolution: c must be > 0");
    if (!(gamma >= 0.0)) throw ConfigError("LQSolution: gamma must be >= 0");
    if (!supply_.covers(grid.horizon))
        throw ConfigError("LQSolution: supply schedule does not cover [0, T]");
    theta_ = -gamma_ * (supply_.K(0.0) + x_bar_ - zeta_);
    std::vector<double> p(grid.n_nodes());
    for (int k = 0; k < grid.n_nodes(); ++k) {
        p[k] = theta_ - c_ * supply_.value(grid.t(k));
        mean_path_[k] = x_bar_ + supply_.integral_from_start(grid.t(k));
    }
    price_ = PricePath(grid, std::move(p));
}

double LQSolution::mu(double x, double t) const {
    const double z = supply_.K(t) + x - zeta_;
    const double beta = 1.0 + gamma_ * (grid_.horizon - t) / c_;
    return -(gamma_ * z + theta_) / beta;
}

double LQSolution::value(double x, double t) const {
    const double T = grid_.horizon;
    const double K = supply_.K(t);
    const double z = K + x - zeta_;
    const double beta = 1.0 + gamma_ * (T - t) / c_;
    const double quad =
        (gamma_ * z * z + ((t - T) / c_) * theta_ * (2.0 * gamma_ * z + theta_)) / (2.0 * beta);
    return quad + theta_ * K - 0.5 * c_ * supply_.integral_of_square(t, T);
}

double LQSolution::value_gradient(double x, double t) const {
    const double T = grid_.horizon;
    const double z = supply_.K(t) + x - zeta_;
    const double beta = 1.0 + gamma_ * (T - t) / c_;
    return gamma_ * (z - (T - t) * theta_ / c_) / beta;
}

LQSolution solve_lq_quadratic_terminal(double c, double gamma, double zeta, double x_bar,
                                       const SupplySchedule& supply, const TimeGrid& grid) {
    return LQSolution(c, gamma, zeta, x_bar, supply, grid);
}

namespace {

// Piecewise-linear interpolant of the terminal-cost slope, constant beyond
// the table; nondecreasing whenever the table is convex.
class TerminalSlope {
public:
    TerminalSlope(const TerminalCost& terminal, const SpaceGrid& grid)
        : terminal_(terminal), grid_(grid) {
        if (terminal.kind == TerminalCost::Kind::Tabulated) {
            slopes_.resize(grid.n_nodes);
            const auto v = terminal.sample(grid);
            const double dx = grid.dx();
            const int n = grid.n_nodes;
            slopes_[0] = (v[1] - v[0]) / dx;
            slopes_[n - 1] = (v[n - 1] - v[n - 2]) / dx;
            for (int i = 1; i + 1 < n; ++i) slopes_[i] = (v[i + 1] - v[i - 1]) / (2.0 * dx);
        }
    }

    double operator()(double y) const {
        if (terminal_.kind == TerminalCost::Kind::Quadratic)
            return terminal_.gamma * (y - terminal_.zeta);
        const double dx = grid_.dx();
        const double s = (y - grid_.x_min) / dx;
        if (s <= 0.0) return slopes_.front();
        if (s >= grid_.n_nodes - 1) return slopes_.back();
        const int j = std::min((int)s, grid_.n_nodes - 2);
        const double a = s - j;
        return (1.0 - a) * slopes_[j] + a * slopes_[j + 1];
    }

    bool convex() const {
        if (terminal_.kind == TerminalCost::Kind::Quadratic) return terminal_.gamma >= 0.0;
        for (size_t i = 0; i + 1 < slopes_.size(); ++i)
            if (slopes_[i + 1] < slopes_[i] - 1e-12) return false;
        return true;
    }

private:
    TerminalCost terminal_;
    SpaceGrid grid_;
    std::vector<double> slopes_;
};

double bisect_increasing(const std::function<double(double)>& g, double lo, double hi, int iters) {
    for (int it = 0; it < iters; ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) <= 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Expand [lo, hi] around seed until g changes sign (g increasing).
void expand_bracket(const std::function<double(double)>& g, double seed, double& lo, double& hi,
                    const char* what) {
    double radius = 1.0 + std::abs(seed);
    lo = seed - radius;
    hi = seed + radius;
    int guard = 0;
    while (g(lo) > 0.0 || g(hi) < 0.0) {
        radius *= 2.0;
        lo = seed - radius;
        hi = seed + radius;
        if (++guard > 80)
            throw NumericalError(std::string(what) + ": root bracket expansion failed");
    }
}

}  // namespace

GeneralLQResult lq_general_terminal(double c, const TerminalCost& terminal,
                                    const InitialDensity& initial, const SupplySchedule& supply,
                                    const TimeGrid& grid) {
    if (!(c > 0.0)) throw ConfigError("lq_general_terminal: c must be > 0");
    const SpaceGrid& g = initial.grid();
    const TerminalSlope ubar_x(terminal, g);
    if (!ubar_x.convex())
        throw ConfigError("lq_general_terminal: terminal cost is not convex; mu(Theta) not unique");

    const double T = grid.horizon;
    const double K0 = supply.K(0.0);
    const auto w = trapezoid_weights(g);
    const auto& m0 = initial.values();

    // mu solves  mu + ubar_x(x + mu T / c + K0) = -Theta  (increasing in mu).
    auto solve_mu = [&](double theta, double x) {
        auto h = [&](double mu) { return mu + ubar_x(x + mu * T / c + K0) + theta; };
        double lo, hi;
        expand_bracket(h, -theta, lo, hi, "lq_general_terminal(mu)");
        return bisect_increasing(h, lo, hi, 100);
    };

    // Theta residual G(Theta) = Theta + int u_x(x, 0) dm0, u_x = -Theta - mu.
    std::vector<double> mu_vals(g.n_nodes);
    auto G = [&](double theta) {
        double acc = 0.0;
        for (int i = 0; i < g.n_nodes; ++i) {
            mu_vals[i] = solve_mu(theta, g.x(i));
            acc += w[i] * m0[i] * (-theta - mu_vals[i]);
        }
        return theta + acc;
    };

    double lo, hi;
    expand_bracket(G, 0.0, lo, hi, "lq_general_terminal(Theta)");
    double theta = bisect_increasing(G, lo, hi, 100);
    double resid = G(theta);
    // Secant polish.
    for (int it = 0; it < 30 && std::abs(resid) > 1e-12; ++it) {
        const double d = 1e-7 * (1.0 + std::abs(theta));
        const double slope = (G(theta + d) - resid) / d;
        if (slope == 0.0) break;
        theta -= resid / slope;
        resid = G(theta);
    }

    GeneralLQResult out;
    out.theta = theta;
    out.theta_residual = std::abs(resid);
    out.mu0 = mu_vals;
    std::vector<double> p(grid.n_nodes());
    for (int k = 0; k < grid.n_nodes(); ++k) p[k] = theta - c * supply.value(grid.t(k));
    out.price = PricePath(grid, std::move(p));
    return out;
}

AgentTrajectory agent_trajectory(double c, double gamma, const TimeGrid& grid,
                                 const std::function<double(double)>& Q, double x0,
                                 double x_bar0) {
    const double T = grid.horizon;
    const double dt = grid.dt();
    auto pull = [&](double t) { return gamma / (1.0 + (T - t) * gamma / c); };

    AgentTrajectory out;
    out.position.resize(grid.n_nodes());
    out.mean.resize(grid.n_nodes());
    double x = x0, xb = x_bar0;
    out.position[0] = x;
    out.mean[0] = xb;
    for (int k = 0; k < grid.n_steps; ++k) {
        const double t = grid.t(k);
        auto f = [&](double s, double xs, double xbs) { return (xbs - xs) * pull(s) + Q(s); };
        const double q1 = Q(t), qm = Q(t + 0.5 * dt), q2 = Q(t + dt);
        const double k1x = f(t, x, xb), k1b = q1;
        const double k2x = f(t + 0.5 * dt, x + 0.5 * dt * k1x, xb + 0.5 * dt * k1b), k2b = qm;
        const double k3x = f(t + 0.5 * dt, x + 0.5 * dt * k2x, xb + 0.5 * dt * k2b), k3b = qm;
        const double k4x = f(t + dt, x + dt * k3x, xb + dt * k3b), k4b = q2;
        x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        xb += dt / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
        out.position[k + 1] = x;
        out.mean[k + 1] = xb;
    }
    return out;
}

std::pair<PotentialModelState, PricePath> solve_potential_model(const PotentialModelParams& p,
                                                                const SupplySchedule& supply,
                                                                const TimeGrid& grid) {
    if (!(p.c > 0.0)) throw ConfigError("solve_potential_model: c must be > 0");
    if (!(p.eta >= 0.0)) throw ConfigError("solve_potential_model: eta must be >= 0");
    if (!supply.covers(grid.horizon))
        throw ConfigError("solve_potential_model: supply schedule does not cover [0, T]");

    const double T = grid.horizon;
    const double omega = std::sqrt(p.eta / p.c);
    if (omega * T > 40.0)
        throw ConfigError("solve_potential_model: omega*T = " + std::to_string(omega * T) +
                          " too stiff; exponential kernel exhausts double precision");

    // Internal grid: refine until omega * dt is small; price is read back on
    // the caller grid nodes (even indices) and RK4 midpoints (odd indices).
    int refine = 2;
    while (omega * grid.dt() / refine > 0.05 && refine < (1 << 20)) refine *= 2;
    const int nf = grid.n_steps * refine;
    const double dtf = T / nf;

    const double pidot0_over_omega = -std::sqrt(p.eta * p.c) * (p.x_bar - p.kappa);
    auto kernel = [omega](double t) { return omega == 0.0 ? 0.0 : omega * std::sinh(omega * t); };

    std::vector<double> w_fine;
    std::vector<double> f_fine(nf + 1);
    auto solve_for_pi0 = [&](double pi0) {
        const double c1 = 0.5 * (pi0 + pidot0_over_omega);
        const double c2 = 0.5 * (pi0 - pidot0_over_omega);
        for (int j = 0; j <= nf; ++j) {
            const double t = j * dtf;
            f_fine[j] = -c1 * std::exp(omega * t) - c2 * std::exp(-omega * t) -
                        p.c * supply.value(t);
        }
        w_fine = volterra_solve_trapezoid(kernel, f_fine, dtf);
    };

    // Backward theta ODEs, integrated on the fine grid so that every RK4
    // stage lands on a node where the Volterra price is known exactly.
    // theta2 is autonomous and runs at step dtf; theta1 and theta0 run at
    // step 2*dtf with stages on fine nodes (refine is a power of two).
    const int nt = grid.n_steps;
    const int nh = nf / 2;
    std::vector<double> th2f(nf + 1), th1h(nh + 1), th0h(nh + 1);
    {
        th2f[nf] = 0.5 * p.gamma;
        auto f2 = [&](double v) { return 2.0 * v * v / p.c - 0.5 * p.eta; };
        for (int j = nf; j > 0; --j) {
            const double k1 = f2(th2f[j]);
            const double k2 = f2(th2f[j] - 0.5 * dtf * k1);
            const double k3 = f2(th2f[j] - 0.5 * dtf * k2);
            const double k4 = f2(th2f[j] - dtf * k3);
            th2f[j - 1] = th2f[j] - dtf / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
    }

    auto theta1_at_zero = [&]() {
        const double h = 2.0 * dtf;
        auto f1 = [&](int fine_idx, double v) {
            return 2.0 * th2f[fine_idx] * (v + w_fine[fine_idx]) / p.c + p.eta * p.kappa;
        };
        th1h[nh] = -p.gamma * p.zeta;
        for (int j = nh; j > 0; --j) {
            const int f = 2 * j;  // fine index of t_j on the half grid
            const double k1 = f1(f, th1h[j]);
            const double k2 = f1(f - 1, th1h[j] - 0.5 * h * k1);
            const double k3 = f1(f - 1, th1h[j] - 0.5 * h * k2);
            const double k4 = f1(f - 2, th1h[j] - h * k3);
            th1h[j - 1] = th1h[j] - h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        return th1h[0];
    };

    // Pi(0) closes through Pi(0) = theta1(0) + 2 theta2(0) x_bar. The map is
    // affine in Pi(0), so a guarded secant lands in a couple of steps.
    auto residual = [&](double pi0) {
        solve_for_pi0(pi0);
        return pi0 - (theta1_at_zero() + 2.0 * th2f[0] * p.x_bar);
    };

    double a = p.gamma * (supply.K(0.0) + p.x_bar - p.zeta);  // eta -> 0 closed form
    double b = a + 0.5 * (1.0 + std::abs(a));
    double ra = residual(a), rb = residual(b);
    if (ra == rb)
        throw NumericalError("solve_potential_model: Pi(0) residual does not respond to Pi(0)");
    double pi0 = a, rc = ra;
    for (int it = 0; it < 60 && std::abs(rc) > 1e-11 * (1.0 + std::abs(pi0)); ++it) {
        pi0 = b - rb * (b - a) / (rb - ra);
        rc = residual(pi0);
        a = b;
        ra = rb;
        b = pi0;
        rb = rc;
        if (ra == rb) break;
    }
    if (std::abs(rc) > 1e-6 * (1.0 + std::abs(pi0)))
        throw NumericalError("solve_potential_model: Pi(0) closure did not converge; residual " +
                             std::to_string(rc));
    solve_for_pi0(pi0);
    theta1_at_zero();

    // theta0 backward on the half grid by Simpson; theta1 at fine midpoints
    // by linear interpolation (only the recorded path, not the closure).
    {
        auto f0 = [&](int fine_idx, double th1_val) {
            const double wp = w_fine[fine_idx] + th1_val;
            return wp * wp / (2.0 * p.c) - 0.5 * p.eta * p.kappa * p.kappa;
        };
        th0h[nh] = 0.5 * p.gamma * p.zeta * p.zeta;
        const double h = 2.0 * dtf;
        for (int j = nh; j > 0; --j) {
            const int f = 2 * j;
            const double k1 = f0(f, th1h[j]);
            const double k2 = f0(f - 1, 0.5 * (th1h[j] + th1h[j - 1]));
            const double k4 = f0(f - 2, th1h[j - 1]);
            th0h[j - 1] = th0h[j] - h / 6.0 * (k1 + 4.0 * k2 + k4);
        }
    }

    PotentialModelState state;
    state.pi0 = pi0;
    state.c1 = 0.5 * (pi0 + pidot0_over_omega);
    state.c2 = 0.5 * (pi0 - pidot0_over_omega);
    state.omega = omega;
    state.pi0_residual = std::abs(rc);
    state.theta0.resize(nt + 1);
    state.theta1.resize(nt + 1);
    state.theta2.resize(nt + 1);
    for (int k = 0; k <= nt; ++k) {
        state.theta2[k] = th2f[k * refine];
        state.theta1[k] = th1h[k * refine / 2];
        state.theta0[k] = th0h[k * refine / 2];
    }
    state.pi.resize(nt + 1);
    state.xi.resize(nt + 1);
    state.kernel.resize(nt + 1);
    state.forcing.resize(nt + 1);
    std::vector<double> price_vals(nt + 1);
    for (int k = 0; k <= nt; ++k) {
        const double t = grid.t(k);
        price_vals[k] = w_fine[k * refine];
        state.pi[k] = -price_vals[k] - p.c * supply.value(t);
        state.xi[k] = p.x_bar + supply.integral_from_start(t);
        state.kernel[k] = kernel(t);
        state.forcing[k] = f_fine[k * refine];
    }
    return {std::move(state), PricePath(grid, std::move(price_vals))};
}

MomentResiduals moment_consistency(double c, double eta, double kappa, const ValueField& u,
                                   const DensityField& m, const PricePath& varpi) {
    const SpaceGrid& g = u.space();
    const TimeGrid& tg = u.time();
    const auto w = trapezoid_weights(g);
    const int nt = tg.n_steps;
    std::vector<double> pi(nt + 1), xi(nt + 1);
    for (int k = 0; k <= nt; ++k) {
        double acc_pi = 0.0, acc_xi = 0.0;
        for (int i = 0; i < g.n_nodes; ++i) {
            acc_pi += w[i] * u.gradient(i, k) * m.at(i, k);
            acc_xi += w[i] * g.x(i) * m.at(i, k);
        }
        pi[k] = acc_pi;
        xi[k] = acc_xi;
    }
    MomentResiduals out;
    const double dt = tg.dt();
    for (int k = 1; k < nt; ++k) {
        const double dpi = (pi[k + 1] - pi[k - 1]) / (2.0 * dt);
        const double dxi = (xi[k + 1] - xi[k - 1]) / (2.0 * dt);
        out.pi_equation = std::max(out.pi_equation, std::abs(dpi + eta * (xi[k] - kappa)));
        out.xi_equation = std::max(out.xi_equation, std::abs(dxi + (varpi[k] + pi[k]) / c));
    }
    return out;
}

}  // namespace pricemfg
