#include "pricemfg/monotonicity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include "pricemfg/errors.hpp"

namespace pricemfg {

bool Triple::boundary_compatible(const std::vector<double>& m0, const std::vector<double>& uT,
                                 double positivity_floor) const {
    const int n = m.space().n_nodes;
    const int nt = m.time().n_steps;
    for (int i = 0; i < n; ++i) {
        if (m.at(i, 0) != m0[i]) return false;
        if (u.at(i, nt) != uT[i]) return false;
    }
    return m.min_value() > positivity_floor;
}

namespace {

// Centered gradient, one-sided at the walls (the ValueField stencil).
void gradient(const SpaceGrid& g, std::span<const double> f, std::vector<double>& out) {
    const int n = g.n_nodes;
    const double dx = g.dx();
    out[0] = (f[1] - f[0]) / dx;
    out[n - 1] = (f[n - 1] - f[n - 2]) / dx;
    for (int i = 1; i + 1 < n; ++i) out[i] = (f[i + 1] - f[i - 1]) / (2.0 * dx);
}

// Negative transpose of the gradient under uniform weights, so that
// sum div(z)_i y_i = sum z_i (grad y)_i exactly.
void divergence(const SpaceGrid& g, const std::vector<double>& z, std::vector<double>& out) {
    const int n = g.n_nodes;
    const double dx = g.dx();
    std::fill(out.begin(), out.end(), 0.0);
    out[0] += z[0] / dx;
    out[1] -= z[0] / dx;
    out[n - 1] -= z[n - 1] / dx;
    out[n - 2] += z[n - 1] / dx;
    for (int i = 1; i + 1 < n; ++i) {
        out[i + 1] -= z[i] / (2.0 * dx);
        out[i - 1] += z[i] / (2.0 * dx);
    }
}

// Symmetric Neumann Laplacian.
void laplacian(const SpaceGrid& g, std::span<const double> f, std::vector<double>& out) {
    const int n = g.n_nodes;
    const double dx2 = g.dx() * g.dx();
    out[0] = (f[1] - f[0]) / dx2;
    out[n - 1] = (f[n - 2] - f[n - 1]) / dx2;
    for (int i = 1; i + 1 < n; ++i) out[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / dx2;
}

}  // namespace

OperatorImage apply_A(const Triple& w, const HamiltonianSpec& spec, const SupplySchedule& supply) {
    const SpaceGrid& g = w.u.space();
    const TimeGrid& tg = w.u.time();
    if (w.m.space().n_nodes != g.n_nodes || w.m.time().n_nodes() != tg.n_nodes() ||
        (int)w.varpi.values.size() != tg.n_nodes())
        throw ConfigError("apply_A: grid mismatch inside the triple");

    const int n = g.n_nodes;
    const int nt = tg.n_steps;
    const double dt = tg.dt();
    const double dx = g.dx();
    const double eps = spec.epsilon;

    OperatorImage img;
    img.u_row = GridField(g, tg);
    img.m_row = GridField(g, tg);
    img.balance.assign(nt + 1, 0.0);

    std::vector<double> grad(n), lap(n), flux(n), div(n), V(n);
    for (int i = 0; i < n; ++i) V[i] = spec.potential.value(g, i);

    for (int k = 0; k <= nt; ++k) {
        gradient(g, w.u.slice(k), grad);
        const double varpi = w.varpi[k];

        double bal = 0.0;
        for (int i = 0; i < n; ++i) bal += dx * w.m.at(i, k) * spec.dp_kinetic(varpi + grad[i]);
        img.balance[k] = bal + supply.value(tg.t(k));

        if (k < nt) {  // u-row on [0, nt)
            laplacian(g, w.u.slice(k), lap);
            for (int i = 0; i < n; ++i) {
                const double q = varpi + grad[i];
                const double H = spec.kinetic(q) - V[i];
                img.u_row.at(i, k) =
                    (w.u.at(i, k + 1) - w.u.at(i, k)) / dt + eps * lap[i] - H;
            }
        }
        if (k > 0) {  // m-row on (0, nt]
            laplacian(g, w.m.slice(k), lap);
            for (int i = 0; i < n; ++i) flux[i] = w.m.at(i, k) * spec.dp_kinetic(varpi + grad[i]);
            divergence(g, flux, div);
            for (int i = 0; i < n; ++i) {
                img.m_row.at(i, k) =
                    (w.m.at(i, k) - w.m.at(i, k - 1)) / dt - eps * lap[i] - div[i];
            }
        }
    }
    return img;
}

double monotonicity_gap(const Triple& w, const Triple& wt, const HamiltonianSpec& spec,
                        const SupplySchedule& supply) {
    const SpaceGrid& g = w.u.space();
    const TimeGrid& tg = w.u.time();
    if (wt.u.space().n_nodes != g.n_nodes || wt.u.time().n_nodes() != tg.n_nodes())
        throw ConfigError("monotonicity_gap: the two triples live on different grids");
    // The A1 block cancels only when u - ut vanishes at t = T and m - mt at
    // t = 0; refuse pairs that do not share boundary data.
    for (int i = 0; i < g.n_nodes; ++i) {
        if (w.m.at(i, 0) != wt.m.at(i, 0) || w.u.at(i, tg.n_steps) != wt.u.at(i, tg.n_steps))
            throw std::invalid_argument("monotonicity_gap: triples are not boundary-compatible");
    }
    if (w.m.min_value() < 0.0 || wt.m.min_value() < 0.0)
        throw std::invalid_argument("monotonicity_gap: densities must be nonnegative");

    const OperatorImage A = apply_A(w, spec, supply);
    const OperatorImage At = apply_A(wt, spec, supply);

    const int n = g.n_nodes;
    const int nt = tg.n_steps;
    const double dxdt = g.dx() * tg.dt();

    double gap = 0.0;
    for (int k = 0; k < nt; ++k)
        for (int i = 0; i < n; ++i)
            gap += dxdt * (A.u_row.at(i, k) - At.u_row.at(i, k)) * (w.m.at(i, k) - wt.m.at(i, k));
    for (int k = 1; k <= nt; ++k)
        for (int i = 0; i < n; ++i)
            gap += dxdt * (A.m_row.at(i, k) - At.m_row.at(i, k)) * (w.u.at(i, k) - wt.u.at(i, k));
    for (int k = 1; k < nt; ++k)
        gap += tg.dt() * (A.balance[k] - At.balance[k]) *
               (w.varpi[k] - wt.varpi[k]);
    return gap;
}

namespace {

struct BumpSet {
    double amp[3], center[3], width[3], phase[3];
};

Triple random_triple(std::mt19937_64& rng, const SpaceGrid& g, const TimeGrid& tg,
                     const std::vector<double>& m0, const std::vector<double>& uT) {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const int n = g.n_nodes;
    const int nt = tg.n_steps;
    const double T = tg.horizon;
    const double span = g.x_max - g.x_min;

    auto draw_bumps = [&](double amp_scale) {
        BumpSet b;
        for (int j = 0; j < 3; ++j) {
            b.amp[j] = amp_scale * unif(rng);
            b.center[j] = g.x_min + 0.5 * span + 0.3 * span * unif(rng);
            b.width[j] = 0.08 * span * (1.5 + unif(rng) * 0.5);
            b.phase[j] = unif(rng);
        }
        return b;
    };
    auto eval = [](const BumpSet& b, double x, double s) {
        double acc = 0.0;
        for (int j = 0; j < 3; ++j) {
            const double z = (x - b.center[j]) / b.width[j];
            acc += b.amp[j] * std::exp(-z * z) * std::cos(1.5 * s + 3.0 * b.phase[j]);
        }
        return acc;
    };

    Triple tr;
    tr.u = ValueField(g, tg);
    tr.m = DensityField(g, tg);
    const BumpSet bu = draw_bumps(0.8);
    const BumpSet bm = draw_bumps(1.2);

    // Smooth random price: three Fourier modes.
    std::vector<double> p(nt + 1);
    double a1 = unif(rng), a2 = unif(rng), a3 = unif(rng), ph = unif(rng);
    for (int k = 0; k <= nt; ++k) {
        const double s = tg.t(k) / T;
        p[k] = 0.6 * (a1 * std::cos(2.0 * M_PI * s + ph) + a2 * std::sin(4.0 * M_PI * s) +
                      0.5 * a3);
    }
    tr.varpi = PricePath(tg, std::move(p));

    for (int k = 0; k <= nt; ++k) {
        const double t = tg.t(k);
        const double ufac = (T - t) / T;
        for (int i = 0; i < n; ++i)
            tr.u.at(i, k) = uT[i] + ufac * eval(bu, g.x(i), t / T);

        if (k == 0) {
            for (int i = 0; i < n; ++i) tr.m.at(i, 0) = m0[i];
            continue;
        }
        const double mfac = t / T;
        double mass = 0.0;
        for (int i = 0; i < n; ++i) {
            const double v = m0[i] * std::exp(mfac * eval(bm, g.x(i), t / T));
            tr.m.at(i, k) = v;
        }
        auto sl = tr.m.slice(k);
        mass = 0.5 * (sl.front() + sl.back());
        for (int i = 1; i + 1 < n; ++i) mass += sl[i];
        mass *= g.dx();
        for (int i = 0; i < n; ++i) tr.m.at(i, k) /= mass;
    }
    return tr;
}

}  // namespace

TrialReport run_monotonicity_trials(int n_trials, std::uint64_t seed, int n_x, int n_t,
                                    int threads) {
    const SpaceGrid g(-3.0, 3.0, n_x);
    const TimeGrid tg(1.0, n_t);
    const HamiltonianSpec spec(1.0, 0.01, PotentialSpec::quadratic(0.5, 0.2));
    const SupplySchedule supply = SupplySchedule::from_function(
        [](double t) { return 0.3 * std::sin(2.0 * M_PI * t); }, tg.horizon, 65);

    // Shared boundary data: strictly positive density, quadratic terminal.
    std::vector<double> m0(g.n_nodes), uT(g.n_nodes);
    {
        double mass = 0.0;
        for (int i = 0; i < g.n_nodes; ++i) {
            const double x = g.x(i);
            m0[i] = std::exp(-0.5 * x * x / 0.64) + 1e-4;
            uT[i] = 0.5 * (x - 0.1) * (x - 0.1);
        }
        std::vector<double> tmp(m0);
        mass = trapezoid(g, tmp);
        for (double& v : m0) v /= mass;
    }

    threads = std::max(1, threads);
    std::vector<double> min_gaps(threads, std::numeric_limits<double>::infinity());
    std::vector<int> violations(threads, 0);

    auto worker = [&](int tid) {
        for (int trial = tid; trial < n_trials; trial += threads) {
            std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * (trial + 1)));
            const Triple w = random_triple(rng, g, tg, m0, uT);
            const Triple wt = random_triple(rng, g, tg, m0, uT);
            const double gap = monotonicity_gap(w, wt, spec, supply);
            min_gaps[tid] = std::min(min_gaps[tid], gap);
            if (gap < -1e-8) ++violations[tid];
        }
    };
    if (threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t);
        for (auto& th : pool) th.join();
    }

    TrialReport rep;
    rep.trials = n_trials;
    rep.min_gap = *std::min_element(min_gaps.begin(), min_gaps.end());
    rep.violations = 0;
    for (int v : violations) rep.violations += v;
    return rep;
}

}  // namespace pricemfg
