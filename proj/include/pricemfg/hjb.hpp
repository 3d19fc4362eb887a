#pragma once

#include <vector>

#include "pricemfg/fields.hpp"
#include "pricemfg/hamiltonian.hpp"

namespace pricemfg {

struct HJBConfig {
    enum class Scheme { UpwindGodunov, SemiLagrangian };

    Scheme scheme = Scheme::UpwindGodunov;
    double cfl_safety = 0.9;        // in (0, 1]
    long max_substeps = 200000;     // per time-grid step
    // 1: plain one-sided gradients (monotone, discrete comparison holds).
    // 2: minmod-limited reconstruction feeding the same Godunov flux; exact
    //    for quadratic-in-x solutions, TVD but not classically monotone.
    int gradient_order = 1;

    void validate() const;
};

// Solves the backward equation  -u_t + H(x, w(t) + u_x) = eps * u_xx  with
// u(x,T) = terminal data, marching from T to 0.
//
// eps = 0: explicit monotone Godunov flux for the convex kinetic part, with
// CFL sub-stepping. eps > 0: same explicit Hamiltonian, diffusion implicit
// via a tridiagonal solve. One-sided differences at the domain boundary
// (linear extrapolation of u_x).
ValueField solve_hjb(const HamiltonianSpec& spec, const TerminalCost& terminal,
                     const PricePath& price, const SpaceGrid& sgrid, const TimeGrid& tgrid,
                     const HJBConfig& config = {});

// Per-slice maximum of (u(x+h) - 2u(x) + u(x-h)) / h^2 (interior nodes).
std::vector<double> semiconcavity_report(const ValueField& u);

}  // namespace pricemfg
