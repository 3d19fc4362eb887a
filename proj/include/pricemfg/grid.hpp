#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace pricemfg {

// Uniform grid on [0, T], nodes t_k = k*dt, k = 0..n_t. Times in hours.
struct TimeGrid {
    double horizon = 0.0;  // T [h]
    int n_steps = 0;       // number of steps; n_steps+1 nodes

    TimeGrid() = default;
    TimeGrid(double T, int n_t) : horizon(T), n_steps(n_t) {
        if (!(T > 0.0)) throw std::invalid_argument("TimeGrid: horizon must be > 0");
        if (n_t < 2) throw std::invalid_argument("TimeGrid: n_t must be >= 2");
    }

    double dt() const { return horizon / n_steps; }
    int n_nodes() const { return n_steps + 1; }
    double t(int k) const { return k * dt(); }

    std::vector<double> nodes() const {
        std::vector<double> out(n_nodes());
        for (int k = 0; k <= n_steps; ++k) out[k] = t(k);
        return out;
    }
};

// Uniform grid on [x_min, x_max]. Charge in kWh.
struct SpaceGrid {
    double x_min = 0.0;
    double x_max = 0.0;
    int n_nodes = 0;

    SpaceGrid() = default;
    SpaceGrid(double xmin, double xmax, int n_x) : x_min(xmin), x_max(xmax), n_nodes(n_x) {
        if (!(xmin < xmax)) throw std::invalid_argument("SpaceGrid: x_min must be < x_max");
        if (n_x < 3) throw std::invalid_argument("SpaceGrid: n_x must be >= 3");
    }

    double dx() const { return (x_max - x_min) / (n_nodes - 1); }
    double x(int i) const { return x_min + i * dx(); }

    std::vector<double> nodes() const {
        std::vector<double> out(n_nodes);
        for (int i = 0; i < n_nodes; ++i) out[i] = x(i);
        return out;
    }
};

// Trapezoidal weights: dx at interior nodes, dx/2 at the ends. This is the
// quadrature used for every spatial integral in the project, so that the
// conservative solvers and the diagnostics agree on what "mass" means.
inline std::vector<double> trapezoid_weights(const SpaceGrid& g) {
    std::vector<double> w(g.n_nodes, g.dx());
    w.front() *= 0.5;
    w.back() *= 0.5;
    return w;
}

inline double trapezoid(const SpaceGrid& g, const std::vector<double>& f) {
    double s = 0.5 * (f.front() + f.back());
    for (int i = 1; i + 1 < g.n_nodes; ++i) s += f[i];
    return s * g.dx();
}

}  // namespace pricemfg
