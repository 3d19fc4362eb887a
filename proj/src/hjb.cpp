#include "pricemfg/hjb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pricemfg/errors.hpp"
#include "pricemfg/tridiag.hpp"

namespace pricemfg {

void HJBConfig::validate() const {
    if (!(cfl_safety > 0.0 && cfl_safety <= 1.0))
        throw ConfigError("HJBConfig: cfl_safety must be in (0, 1]");
    if (max_substeps < 1) throw ConfigError("HJBConfig: max_substeps must be >= 1");
    if (gradient_order != 1 && gradient_order != 2)
        throw ConfigError("HJBConfig: gradient_order must be 1 or 2");
}

namespace {

// Godunov numerical Hamiltonian for convex H0 with minimum at q = 0:
// max(H0(max(q_minus, 0)), H0(min(q_plus, 0))).
inline double godunov_kinetic(double q_minus, double q_plus, double c) {
    const double a = std::max(q_minus, 0.0);
    const double b = std::min(q_plus, 0.0);
    const double q = std::max(a, -b);
    return q * q / (2.0 * c);
}

void check_finite(std::span<const double> u, int k) {
    for (double v : u)
        if (!std::isfinite(v))
            throw NumericalError("solve_hjb: non-finite value at time index " + std::to_string(k), k);
}

inline double minmod(double a, double b) {
    if (a * b <= 0.0) return 0.0;
    return std::abs(a) < std::abs(b) ? a : b;
}

// One explicit Godunov step of size dtau (backward in t = forward in tau).
void godunov_substep(const HamiltonianSpec& spec, const SpaceGrid& g, double varpi, double dtau,
                     int gradient_order, const std::vector<double>& u, std::vector<double>& out,
                     std::vector<double>& rhs_scratch, std::vector<double>& tri_scratch,
                     const std::vector<double>& V, std::vector<double>& lower,
                     std::vector<double>& diag, std::vector<double>& upper) {
    const int n = g.n_nodes;
    const double dx = g.dx();
    const double eps = spec.epsilon;

    // interface slope at i+1/2 and curvature at node i (0 past the walls)
    auto slope = [&](int j) { return (u[j + 1] - u[j]) / dx; };
    auto curv = [&](int i) {
        if (i < 1 || i > n - 2) return 0.0;
        return (slope(i) - slope(i - 1)) / dx;
    };

    for (int i = 0; i < n; ++i) {
        double dm, dp;
        if (i == 0) {
            dp = slope(0);
            dm = dp;  // ghost from linear extrapolation of u
        } else if (i == n - 1) {
            dm = slope(n - 2);
            dp = dm;
        } else {
            dm = slope(i - 1);
            dp = slope(i);
            if (gradient_order == 2) {
                dm += 0.5 * dx * minmod(curv(i - 1), curv(i));
                dp -= 0.5 * dx * minmod(curv(i), curv(i + 1));
            }
        }
        const double ham = godunov_kinetic(varpi + dm, varpi + dp, spec.c) - V[i];
        rhs_scratch[i] = u[i] - dtau * ham;
    }

    if (eps <= 0.0) {
        out = rhs_scratch;
        return;
    }
    // Implicit diffusion: (I - dtau*eps*L) out = rhs, L zero at the boundary
    // rows (consistent with the extrapolated-gradient boundary).
    const double r = dtau * eps / (dx * dx);
    for (int i = 0; i < n; ++i) {
        const bool interior = (i > 0 && i < n - 1);
        lower[i] = interior ? -r : 0.0;
        upper[i] = interior ? -r : 0.0;
        diag[i] = interior ? 1.0 + 2.0 * r : 1.0;
    }
    out = rhs_scratch;
    solve_tridiagonal(lower, diag, upper, out, tri_scratch);
}

// Semi-Lagrangian step: discrete minimisation over the control grid with
// linear interpolation of the next slice.
void semilagrangian_substep(const HamiltonianSpec& spec, const SpaceGrid& g, double varpi,
                            double dtau, double alpha_max, const std::vector<double>& u,
                            std::vector<double>& out, const std::vector<double>& V,
                            std::vector<double>& tri_scratch, std::vector<double>& lower,
                            std::vector<double>& diag, std::vector<double>& upper) {
    const int n = g.n_nodes;
    const double dx = g.dx();
    const int n_ctrl = std::max<int>(41, (int)std::ceil(4.0 * alpha_max * dtau / dx) | 1);

    auto interp = [&](double x) {
        const double s = std::clamp((x - g.x_min) / dx, 0.0, (double)(n - 1));
        const int j = std::min((int)s, n - 2);
        const double a = s - j;
        return (1.0 - a) * u[j] + a * u[j + 1];
    };

    for (int i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (int m = 0; m < n_ctrl; ++m) {
            const double a = -alpha_max + 2.0 * alpha_max * m / (n_ctrl - 1);
            const double run = 0.5 * spec.c * a * a + varpi * a + V[i];
            const double cand = dtau * run + interp(g.x(i) + a * dtau);
            best = std::min(best, cand);
        }
        out[i] = best;
    }
    if (spec.epsilon > 0.0) {
        const double r = dtau * spec.epsilon / (dx * dx);
        for (int i = 0; i < n; ++i) {
            const bool interior = (i > 0 && i < n - 1);
            lower[i] = interior ? -r : 0.0;
            upper[i] = interior ? -r : 0.0;
            diag[i] = interior ? 1.0 + 2.0 * r : 1.0;
        }
        solve_tridiagonal(lower, diag, upper, out, tri_scratch);
    }
}

}  // namespace

ValueField solve_hjb(const HamiltonianSpec& spec, const TerminalCost& terminal,
                     const PricePath& price, const SpaceGrid& sgrid, const TimeGrid& tgrid,
                     const HJBConfig& config) {
    config.validate();
    if (price.grid.n_nodes() != tgrid.n_nodes())
        throw ConfigError("solve_hjb: price path and time grid are inconsistent");

    const int n = sgrid.n_nodes;
    const int nt = tgrid.n_steps;
    const double dx = sgrid.dx();
    const double dt = tgrid.dt();

    ValueField u(sgrid, tgrid);
    std::vector<double> V(n);
    for (int i = 0; i < n; ++i) V[i] = spec.potential.value(sgrid, i);

    auto term = terminal.sample(sgrid);
    std::copy(term.begin(), term.end(), u.slice(nt).begin());

    // Gradient bound used for control brackets and the CFL estimate: the
    // Lipschitz constant of u never exceeds Lip(terminal) + T * Lip(V).
    double lip_term = 0.0, lip_V = 0.0;
    for (int i = 0; i + 1 < n; ++i) {
        lip_term = std::max(lip_term, std::abs(term[i + 1] - term[i]) / dx);
        lip_V = std::max(lip_V, std::abs(V[i + 1] - V[i]) / dx);
    }
    double price_max = 0.0;
    for (double w : price.values) price_max = std::max(price_max, std::abs(w));
    const double grad_bound = lip_term + tgrid.horizon * lip_V;

    std::vector<double> cur(term), next(n), rhs(n), tri(n), lo(n), di(n), up(n);

    for (int k = nt - 1; k >= 0; --k) {
        // max |D_p H| on this slice from the actual gradients.
        double qmax = 1e-12;
        for (int i = 0; i + 1 < n; ++i)
            qmax = std::max(qmax, std::abs(price_max + std::abs(cur[i + 1] - cur[i]) / dx));
        qmax = std::max(qmax, price_max);

        long n_sub;
        if (config.scheme == HJBConfig::Scheme::UpwindGodunov) {
            n_sub = (long)std::ceil(dt * qmax / (config.cfl_safety * dx * spec.c));
        } else {
            n_sub = 1;  // semi-Lagrangian is unconditionally monotone
        }
        n_sub = std::max<long>(n_sub, 1);
        if (n_sub > config.max_substeps)
            throw ConfigError("solve_hjb: CFL needs " + std::to_string(n_sub) +
                              " substeps at step " + std::to_string(k) +
                              "; beyond budget (refine the grid or raise max_substeps)");
        const double dtau = dt / n_sub;
        const double alpha_max = (price_max + grad_bound) / spec.c * 1.5 + dx / dt;

        for (long s = 0; s < n_sub; ++s) {
            // backward time inside the interval, price interpolated linearly
            const double t = tgrid.t(k + 1) - (s + 0.5) * dtau;
            const double w = price.at_time(t);
            if (config.scheme == HJBConfig::Scheme::UpwindGodunov) {
                godunov_substep(spec, sgrid, w, dtau, config.gradient_order, cur, next, rhs, tri,
                                V, lo, di, up);
            } else {
                semilagrangian_substep(spec, sgrid, w, dtau, alpha_max, cur, next, V, tri, lo, di, up);
            }
            cur.swap(next);
        }
        check_finite(cur, k);
        std::copy(cur.begin(), cur.end(), u.slice(k).begin());
    }
    return u;
}

std::vector<double> semiconcavity_report(const ValueField& u) {
    const int n = u.space().n_nodes;
    const int nt = u.time().n_steps;
    const double dx2 = u.space().dx() * u.space().dx();
    std::vector<double> out(nt + 1, 0.0);
    for (int k = 0; k <= nt; ++k) {
        double m = -std::numeric_limits<double>::infinity();
        for (int i = 1; i + 1 < n; ++i)
            m = std::max(m, (u.at(i + 1, k) - 2.0 * u.at(i, k) + u.at(i - 1, k)) / dx2);
        out[k] = m;
    }
    return out;
}

}  // namespace pricemfg
