#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "pricemfg/grid.hpp"

namespace pricemfg {

// Charge-preference potential V(x). Either analytic or tabulated on a grid.
struct PotentialSpec {
    enum class Kind { Zero, Quadratic, Tabulated };

    Kind kind = Kind::Zero;
    double eta = 0.0;    // penalty strength, quadratic case: V = eta/2 (x-kappa)^2
    double kappa = 0.0;  // set point [kWh]
    std::vector<double> table;  // node values when tabulated

    static PotentialSpec zero() { return {}; }

    static PotentialSpec quadratic(double eta, double kappa) {
        if (!(eta >= 0.0)) throw std::invalid_argument("PotentialSpec: eta must be >= 0");
        PotentialSpec p;
        p.kind = Kind::Quadratic;
        p.eta = eta;
        p.kappa = kappa;
        return p;
    }

    static PotentialSpec tabulated(std::vector<double> values) {
        for (double v : values)
            if (!std::isfinite(v)) throw std::invalid_argument("PotentialSpec: non-finite table value");
        PotentialSpec p;
        p.kind = Kind::Tabulated;
        p.table = std::move(values);
        return p;
    }

    double value(const SpaceGrid& g, int i) const {
        switch (kind) {
            case Kind::Zero: return 0.0;
            case Kind::Quadratic: {
                const double d = g.x(i) - kappa;
                return 0.5 * eta * d * d;
            }
            case Kind::Tabulated: return table.at(i);
        }
        return 0.0;
    }

    // V'(x_i): analytic when possible, centered/one-sided differences for tables.
    double slope(const SpaceGrid& g, int i) const {
        switch (kind) {
            case Kind::Zero: return 0.0;
            case Kind::Quadratic: return eta * (g.x(i) - kappa);
            case Kind::Tabulated: {
                const double dx = g.dx();
                const int n = g.n_nodes;
                if (i == 0) return (table[1] - table[0]) / dx;
                if (i == n - 1) return (table[n - 1] - table[n - 2]) / dx;
                return (table[i + 1] - table[i - 1]) / (2.0 * dx);
            }
        }
        return 0.0;
    }
};

// Terminal cost u(x,T). Quadratic gamma/2 (x-zeta)^2 or tabulated.
struct TerminalCost {
    enum class Kind { Quadratic, Tabulated };

    Kind kind = Kind::Quadratic;
    double gamma = 0.0;  // curvature [$ / kWh^2]
    double zeta = 0.0;   // target charge [kWh]
    std::vector<double> table;

    static TerminalCost quadratic(double gamma, double zeta) {
        if (!(gamma >= 0.0)) throw std::invalid_argument("TerminalCost: gamma must be >= 0");
        TerminalCost t;
        t.gamma = gamma;
        t.zeta = zeta;
        return t;
    }

    static TerminalCost tabulated(std::vector<double> values) {
        for (double v : values)
            if (!std::isfinite(v)) throw std::invalid_argument("TerminalCost: non-finite table value");
        TerminalCost t;
        t.kind = Kind::Tabulated;
        t.table = std::move(values);
        return t;
    }

    double value(const SpaceGrid& g, int i) const {
        if (kind == Kind::Quadratic) {
            const double d = g.x(i) - zeta;
            return 0.5 * gamma * d * d;
        }
        return table.at(i);
    }

    std::vector<double> sample(const SpaceGrid& g) const {
        if (kind == Kind::Tabulated && (int)table.size() != g.n_nodes)
            throw std::invalid_argument("TerminalCost: table size does not match grid");
        std::vector<double> out(g.n_nodes);
        for (int i = 0; i < g.n_nodes; ++i) out[i] = value(g, i);
        return out;
    }
};

// Derivatives of H at one (x, p) point.
struct HamiltonianDerivs {
    double H;      // H(x, p)
    double dp;     // D_p H
    double dpp;    // D^2_pp H
    double dx;     // D_x H
};

// Separable Hamiltonian H(x,p) = p^2/(2c) - V(x). The kinetic part is the
// Legendre transform of the quadratic flow cost c a^2 / 2, so D^2_xp H = 0
// identically and D^3_ppp H = 0.
struct HamiltonianSpec {
    double c = 1.0;        // battery wear constant [$ kW^-2 h^-1]
    double epsilon = 0.0;  // diffusion [kWh^2 / h]
    PotentialSpec potential;

    HamiltonianSpec() = default;
    HamiltonianSpec(double c_, double eps, PotentialSpec pot = PotentialSpec::zero())
        : c(c_), epsilon(eps), potential(std::move(pot)) {
        if (!(c > 0.0)) throw std::invalid_argument("HamiltonianSpec: c must be > 0");
        if (!(epsilon >= 0.0)) throw std::invalid_argument("HamiltonianSpec: epsilon must be >= 0");
    }

    double kinetic(double p) const { return p * p / (2.0 * c); }
    double dp_kinetic(double p) const { return p / c; }
    double dpp_kinetic() const { return 1.0 / c; }
    double dppp_kinetic() const { return 0.0; }

    // Uniform convexity constant theta in D^2_pp H >= theta.
    double convexity_floor() const { return 1.0 / c; }
};

inline HamiltonianDerivs hamiltonian_eval(const HamiltonianSpec& spec, const SpaceGrid& grid,
                                          int i, double p) {
    if (!std::isfinite(p)) throw std::domain_error("hamiltonian_eval: non-finite momentum");
    HamiltonianDerivs d;
    d.H = spec.kinetic(p) - spec.potential.value(grid, i);
    d.dp = spec.dp_kinetic(p);
    d.dpp = spec.dpp_kinetic();
    d.dx = -spec.potential.slope(grid, i);
    return d;
}

// Point-wise overload for analytic potentials (no grid needed).
inline HamiltonianDerivs hamiltonian_eval(const HamiltonianSpec& spec, double x, double p) {
    if (!std::isfinite(x) || !std::isfinite(p))
        throw std::domain_error("hamiltonian_eval: non-finite input");
    if (spec.potential.kind == PotentialSpec::Kind::Tabulated)
        throw std::invalid_argument("hamiltonian_eval: tabulated potential needs a grid");
    double V = 0.0, Vx = 0.0;
    if (spec.potential.kind == PotentialSpec::Kind::Quadratic) {
        const double d = x - spec.potential.kappa;
        V = 0.5 * spec.potential.eta * d * d;
        Vx = spec.potential.eta * d;
    }
    return {spec.kinetic(p) - V, spec.dp_kinetic(p), spec.dpp_kinetic(), -Vx};
}

}  // namespace pricemfg
