#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "pricemfg/grid.hpp"

namespace pricemfg {

// Agent distribution at t = 0: nonnegative node values, trapezoidal mass 1.
class InitialDensity {
public:
    InitialDensity(const SpaceGrid& grid, std::vector<double> values)
        : grid_(grid), values_(std::move(values)) {
        if ((int)values_.size() != grid.n_nodes)
            throw std::invalid_argument("InitialDensity: size mismatch");
        double vmax = 0.0;
        for (double v : values_) {
            if (!std::isfinite(v) || v < 0.0)
                throw std::invalid_argument("InitialDensity: values must be finite and >= 0");
            vmax = std::max(vmax, v);
        }
        const double mass = trapezoid(grid_, values_);
        if (!(mass > 0.0)) throw std::invalid_argument("InitialDensity: zero mass");
        for (double& v : values_) v /= mass;
        vmax /= mass;
        // Effective support must sit inside the truncated domain; the margin
        // rule keeps boundary influence below solver tolerances.
        if (values_.front() > 1e-8 * vmax || values_.back() > 1e-8 * vmax)
            throw std::invalid_argument(
                "InitialDensity: support touches the domain boundary; widen [x_min, x_max]");
        mean_ = 0.0;
        auto w = trapezoid_weights(grid_);
        for (int i = 0; i < grid_.n_nodes; ++i) mean_ += w[i] * grid_.x(i) * values_[i];
    }

    // Gaussian bump truncated to the grid and renormalized.
    static InitialDensity gaussian(const SpaceGrid& grid, double mean, double sigma) {
        if (!(sigma > 0.0)) throw std::invalid_argument("InitialDensity: sigma must be > 0");
        std::vector<double> v(grid.n_nodes);
        for (int i = 0; i < grid.n_nodes; ++i) {
            const double z = (grid.x(i) - mean) / sigma;
            v[i] = std::exp(-0.5 * z * z);
        }
        return InitialDensity(grid, std::move(v));
    }

    const SpaceGrid& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    double mean() const { return mean_; }
    double mass() const { return trapezoid(grid_, values_); }

private:
    SpaceGrid grid_;
    std::vector<double> values_;
    double mean_ = 0.0;
};

// Price path on a TimeGrid [$ kW^-1 h^-1].
struct PricePath {
    TimeGrid grid;
    std::vector<double> values;

    PricePath() = default;
    PricePath(const TimeGrid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
        if ((int)values.size() != g.n_nodes())
            throw std::invalid_argument("PricePath: size mismatch");
        for (double x : values)
            if (!std::isfinite(x)) throw std::invalid_argument("PricePath: non-finite value");
    }

    static PricePath constant(const TimeGrid& g, double v) {
        return PricePath(g, std::vector<double>(g.n_nodes(), v));
    }

    double operator[](int k) const { return values[k]; }

    // Linear interpolation between time nodes.
    double at_time(double t) const {
        const double dt = grid.dt();
        double s = std::clamp(t / dt, 0.0, (double)grid.n_steps);
        int k = std::min((int)s, grid.n_steps - 1);
        double a = s - k;
        return (1.0 - a) * values[k] + a * values[k + 1];
    }

    // max |w_{k+1} - w_k| / dt
    double lipschitz_estimate() const {
        double m = 0.0;
        for (int k = 0; k + 1 < (int)values.size(); ++k)
            m = std::max(m, std::abs(values[k + 1] - values[k]));
        return m / grid.dt();
    }
};

// Space-time scalar field stored time-major: data[k * n_x + i].
class GridField {
public:
    GridField() = default;
    GridField(const SpaceGrid& sg, const TimeGrid& tg)
        : space_(sg), time_(tg), data_((size_t)tg.n_nodes() * sg.n_nodes, 0.0) {}

    const SpaceGrid& space() const { return space_; }
    const TimeGrid& time() const { return time_; }

    double& at(int i, int k) { return data_[(size_t)k * space_.n_nodes + i]; }
    double at(int i, int k) const { return data_[(size_t)k * space_.n_nodes + i]; }

    std::span<double> slice(int k) {
        return {data_.data() + (size_t)k * space_.n_nodes, (size_t)space_.n_nodes};
    }
    std::span<const double> slice(int k) const {
        return {data_.data() + (size_t)k * space_.n_nodes, (size_t)space_.n_nodes};
    }
    std::vector<double> slice_vec(int k) const {
        auto s = slice(k);
        return {s.begin(), s.end()};
    }

    const std::vector<double>& raw() const { return data_; }
    std::vector<double>& raw() { return data_; }

private:
    SpaceGrid space_;
    TimeGrid time_;
    std::vector<double> data_;
};

// Value function u(x_i, t_k). u(.,T) equals the terminal cost samples exactly.
class ValueField : public GridField {
public:
    using GridField::GridField;

    // u_x by centered differences, one-sided at the boundary.
    double gradient(int i, int k) const {
        const int n = space().n_nodes;
        const double dx = space().dx();
        if (i == 0) return (at(1, k) - at(0, k)) / dx;
        if (i == n - 1) return (at(n - 1, k) - at(n - 2, k)) / dx;
        return (at(i + 1, k) - at(i - 1, k)) / (2.0 * dx);
    }

    std::vector<double> gradient_slice(int k) const {
        std::vector<double> g(space().n_nodes);
        for (int i = 0; i < space().n_nodes; ++i) g[i] = gradient(i, k);
        return g;
    }

    // Centered second difference; copies neighbours at the boundary.
    double second_difference(int i, int k) const {
        const int n = space().n_nodes;
        const double dx2 = space().dx() * space().dx();
        const int j = std::clamp(i, 1, n - 2);
        return (at(j + 1, k) - 2.0 * at(j, k) + at(j - 1, k)) / dx2;
    }

    // max |u_x| over a time slice.
    double lipschitz_slice(int k) const {
        double m = 0.0;
        for (int i = 0; i < space().n_nodes; ++i) m = std::max(m, std::abs(gradient(i, k)));
        return m;
    }
};

// Agent density m(x_i, t_k): nonnegative, trapezoidal mass 1 per slice.
class DensityField : public GridField {
public:
    using GridField::GridField;

    double mass(int k) const {
        auto s = slice(k);
        double acc = 0.5 * (s.front() + s.back());
        for (int i = 1; i + 1 < (int)s.size(); ++i) acc += s[i];
        return acc * space().dx();
    }

    double min_value() const {
        double m = raw().empty() ? 0.0 : raw()[0];
        for (double v : raw()) m = std::min(m, v);
        return m;
    }

    double mean(int k) const {
        auto w = trapezoid_weights(space());
        double acc = 0.0;
        for (int i = 0; i < space().n_nodes; ++i) acc += w[i] * space().x(i) * at(i, k);
        return acc;
    }
};

}  // namespace pricemfg
