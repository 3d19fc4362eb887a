#include "pricemfg/fp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pricemfg/errors.hpp"
#include "pricemfg/tridiag.hpp"

namespace pricemfg {

DriftField DriftField::from_solution(const HamiltonianSpec& spec, const ValueField& u,
                                     const PricePath& price) {
    GridField b(u.space(), u.time());
    for (int k = 0; k <= u.time().n_steps; ++k) {
        const double w = price[k];
        for (int i = 0; i < u.space().n_nodes; ++i)
            b.at(i, k) = -spec.dp_kinetic(w + u.gradient(i, k));
    }
    return DriftField(std::move(b));
}

namespace {

// One conservative upwind substep. fluxes[j] lives at interface j+1/2.
void upwind_substep(const SpaceGrid& g, double dtau, const std::vector<double>& b_iface,
                    const std::vector<double>& w_cell, std::vector<double>& m,
                    std::vector<double>& flux) {
    const int n = g.n_nodes;
    for (int j = 0; j + 1 < n; ++j) {
        const double b = b_iface[j];
        flux[j] = std::max(b, 0.0) * m[j] + std::min(b, 0.0) * m[j + 1];
    }
    for (int i = 0; i < n; ++i) {
        const double f_right = (i < n - 1) ? flux[i] : 0.0;
        const double f_left = (i > 0) ? flux[i - 1] : 0.0;
        m[i] -= dtau * (f_right - f_left) / w_cell[i];
    }
}

void diffusion_substep(const SpaceGrid& g, double dtau, double eps,
                       const std::vector<double>& w_cell, std::vector<double>& m,
                       std::vector<double>& lo, std::vector<double>& di, std::vector<double>& up,
                       std::vector<double>& tri) {
    const int n = g.n_nodes;
    const double dx = g.dx();
    for (int i = 0; i < n; ++i) {
        const double r = dtau * eps / (dx * w_cell[i]);
        lo[i] = (i > 0) ? -r : 0.0;
        up[i] = (i < n - 1) ? -r : 0.0;
        di[i] = 1.0 + ((i > 0) ? r : 0.0) + ((i < n - 1) ? r : 0.0);
    }
    solve_tridiagonal(lo, di, up, m, tri);
}

}  // namespace

DensityField solve_fp(const DriftField& drift, const InitialDensity& initial, double epsilon,
                      const TimeGrid& tgrid, const FPConfig& config) {
    const SpaceGrid& g = drift.values.space();
    if (drift.values.time().n_nodes() != tgrid.n_nodes())
        throw ConfigError("solve_fp: drift and time grid are inconsistent");
    if ((int)initial.values().size() != g.n_nodes)
        throw ConfigError("solve_fp: initial density grid mismatch");
    if (!(epsilon >= 0.0)) throw ConfigError("solve_fp: epsilon must be >= 0");

    const int n = g.n_nodes;
    const int nt = tgrid.n_steps;
    const double dt = tgrid.dt();

    const auto w_cell = trapezoid_weights(g);
    const double w_min = w_cell.front();

    DensityField m(g, tgrid);
    std::copy(initial.values().begin(), initial.values().end(), m.slice(0).begin());

    std::vector<double> cur(initial.values());
    std::vector<double> b_iface(n - 1), flux(n - 1);
    std::vector<double> lo(n), di(n), up(n), tri(n);

    for (int k = 0; k < nt; ++k) {
        double bmax = 0.0;
        for (int i = 0; i < n; ++i)
            bmax = std::max(bmax, std::max(std::abs(drift.values.at(i, k)),
                                           std::abs(drift.values.at(i, k + 1))));
        long n_sub = (long)std::ceil(2.0 * dt * bmax / (config.cfl_safety * w_min));
        n_sub = std::max<long>(n_sub, 1);
        if (n_sub > config.max_substeps)
            throw ConfigError("solve_fp: CFL needs " + std::to_string(n_sub) +
                              " substeps at step " + std::to_string(k));
        const double dtau = dt / n_sub;

        for (long s = 0; s < n_sub; ++s) {
            const double a = (s + 0.5) / n_sub;  // time fraction inside the step
            for (int j = 0; j + 1 < n; ++j) {
                const double bk = 0.5 * (drift.values.at(j, k) + drift.values.at(j + 1, k));
                const double bk1 = 0.5 * (drift.values.at(j, k + 1) + drift.values.at(j + 1, k + 1));
                b_iface[j] = (1.0 - a) * bk + a * bk1;
            }
            upwind_substep(g, dtau, b_iface, w_cell, cur, flux);
            if (epsilon > 0.0) diffusion_substep(g, dtau, epsilon, w_cell, cur, lo, di, up, tri);
        }

        for (double v : cur)
            if (!std::isfinite(v))
                throw NumericalError("solve_fp: non-finite density at step " + std::to_string(k), k);
        const double boundary_mass = w_cell.front() * cur.front() + w_cell.back() * cur.back();
        if (boundary_mass > config.boundary_mass_tol)
            throw NumericalError("solve_fp: boundary mass " + std::to_string(boundary_mass) +
                                     " at step " + std::to_string(k) +
                                     "; domain margin too small",
                                 k);
        std::copy(cur.begin(), cur.end(), m.slice(k + 1).begin());
    }
    return m;
}

double wasserstein1(const SpaceGrid& grid, const std::vector<double>& m_a,
                    const std::vector<double>& m_b) {
    const int n = grid.n_nodes;
    const double dx = grid.dx();
    // CDFs by cumulative trapezoid, then L1 distance between them.
    double Fa = 0.0, Fb = 0.0, prev = 0.0, acc = 0.0;
    for (int i = 0; i + 1 < n; ++i) {
        const double cur_diff = std::abs(Fa - Fb);
        if (i > 0) acc += 0.5 * (prev + cur_diff) * dx;
        prev = cur_diff;
        Fa += 0.5 * (m_a[i] + m_a[i + 1]) * dx;
        Fb += 0.5 * (m_b[i] + m_b[i + 1]) * dx;
    }
    acc += 0.5 * (prev + std::abs(Fa - Fb)) * dx;
    return acc;
}

double wasserstein1_continuity(const DensityField& m) {
    const double sdt = std::sqrt(m.time().dt());
    double worst = 0.0;
    for (int k = 0; k < m.time().n_steps; ++k) {
        const double d = wasserstein1(m.space(), m.slice_vec(k), m.slice_vec(k + 1));
        worst = std::max(worst, d / sdt);
    }
    return worst;
}

std::vector<std::vector<double>> fp_operator_matrix(const SpaceGrid& grid,
                                                    const std::vector<double>& drift) {
    const int n = grid.n_nodes;
    const auto w = trapezoid_weights(grid);
    std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
    for (int j = 0; j + 1 < n; ++j) {
        const double b = 0.5 * (drift[j] + drift[j + 1]);
        const double bp = std::max(b, 0.0), bm = std::min(b, 0.0);
        A[j][j] -= bp / w[j];
        A[j][j + 1] -= bm / w[j];
        A[j + 1][j] += bp / w[j + 1];
        A[j + 1][j + 1] += bm / w[j + 1];
    }
    return A;
}

std::vector<std::vector<double>> advection_operator_matrix(const SpaceGrid& grid,
                                                           const std::vector<double>& drift) {
    const int n = grid.n_nodes;
    const auto w = trapezoid_weights(grid);
    std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
    // Upwind transport at velocity D_p H = -b, interface-sampled so that the
    // cell-weighted pairing with the FP operator cancels exactly.
    for (int j = 0; j + 1 < n; ++j) {
        const double b = 0.5 * (drift[j] + drift[j + 1]);
        const double bp = std::max(b, 0.0), bm = std::min(b, 0.0);
        A[j][j + 1] -= bp / w[j];
        A[j][j] += bp / w[j];
        A[j + 1][j + 1] -= bm / w[j + 1];
        A[j + 1][j] += bm / w[j + 1];
    }
    return A;
}

}  // namespace pricemfg
