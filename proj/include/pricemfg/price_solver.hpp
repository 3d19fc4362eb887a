#pragma once

#include <optional>
#include <vector>

#include "pricemfg/fp.hpp"
#include "pricemfg/hjb.hpp"
#include "pricemfg/problem.hpp"

namespace pricemfg {

struct FixedPointConfig {
    double damping = 0.5;        // lambda in (0, 1]
    int max_iters = 150;
    double tol_price = 1e-7;     // sup-norm stop on the price update
    double tol_balance = 1e-3;   // sup-norm bound on the balance residual
    int anderson_depth = 5;      // residual history for the accelerator; 0 = plain Picard
    HJBConfig hjb;
    FPConfig fp;
    std::optional<PricePath> initial_guess;

    void validate() const;
};

struct IterationRecord {
    int iteration;
    double price_change;      // sup |varpi_{n+1} - varpi_n|
    double balance_residual;  // sup_t |int D_pH m dx + Q|
};

struct EquilibriumSolution {
    ValueField u;
    DensityField m;
    PricePath varpi;
    std::vector<double> balance_residual;  // per time node
    int iterations = 0;
    std::vector<IterationRecord> history;

    double balance_sup() const {
        double s = 0.0;
        for (double r : balance_residual) s = std::max(s, std::abs(r));
        return s;
    }
};

// Unique root theta0 of  int D_pH(x, theta + u_x(x,0)) dm0 + Q(0) = 0.
// D_pH is strictly increasing in p, so the root is found by expanding
// bracket + bisection, then polished with Newton to |F| <= 1e-12.
double initial_price(const HamiltonianSpec& spec, const SpaceGrid& grid,
                     const std::vector<double>& ux0, const InitialDensity& initial, double Q0);

// RK4 integration of the price ODE
//   theta' = [ -Q' - int (D2pp H * Dx H + eps * D3ppp H * u_xx^2) m dx ]
//            / int D2pp H m dx
// on the time grid of u and m. For the quadratic kinetic part D3ppp = 0 and
// D2pp = 1/c, which reduces the right side to -c Q' + int V'(x) m dx.
PricePath integrate_price_ode(const HamiltonianSpec& spec, const ValueField& u,
                              const DensityField& m, const SupplySchedule& supply, double theta0);

// Balance residual r(t_k) = int D_pH(x, w + u_x) m dx + Q(t_k).
std::vector<double> balance_residual(const HamiltonianSpec& spec, const ValueField& u,
                                     const DensityField& m, const PricePath& varpi,
                                     const SupplySchedule& supply);

// Damped fixed-point iteration on w -> theta(w): solve HJB under w, transport
// the density, rebuild the price from the initial balance and the price ODE.
// Anderson mixing over a short residual history accelerates the (often slowly
// contracting) Picard map; on residual increase the damping is reduced
// geometrically and the history restarts.
EquilibriumSolution solve_equilibrium(const ModelProblem& problem,
                                      const FixedPointConfig& config = {});

// int_0^T int H(x, w + u_x) (m0 + m) dx dt; finite for admissible solutions.
double energy_estimate_diagnostic(const HamiltonianSpec& spec, const ValueField& u,
                                  const DensityField& m, const PricePath& varpi,
                                  const InitialDensity& initial);

// int_0^T int D^2_pp H u_xx^2 m dx dt, the second-order quantity that stays
// bounded uniformly in epsilon; reported, never enforced.
double second_order_diagnostic(const HamiltonianSpec& spec, const ValueField& u,
                               const DensityField& m);

}  // namespace pricemfg
