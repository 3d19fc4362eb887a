#pragma once

#include <functional>
#include <vector>

#include "pricemfg/fields.hpp"
#include "pricemfg/hamiltonian.hpp"
#include "pricemfg/supply.hpp"

namespace pricemfg {

// Closed-form solution of the state-independent quadratic model: the price is
// affine in the supply, w(t) = Theta - c Q(t), with constant Theta.
class LQSolution {
public:
    LQSolution(double c, double gamma, double zeta, double x_bar, SupplySchedule supply,
               const TimeGrid& grid);

    double theta() const { return theta_; }
    const PricePath& price() const { return price_; }
    const std::vector<double>& mean_path() const { return mean_path_; }
    const TimeGrid& grid() const { return grid_; }

    // mu = theta_agent - Theta for the agent at (x, t).
    double mu(double x, double t) const;
    // Closed-form value function u_Theta.
    double value(double x, double t) const;
    double value_gradient(double x, double t) const;

    double c_wear() const { return c_; }
    double gamma() const { return gamma_; }
    double zeta() const { return zeta_; }
    double x_bar() const { return x_bar_; }
    const SupplySchedule& supply() const { return supply_; }

private:
    double c_, gamma_, zeta_, x_bar_, theta_;
    SupplySchedule supply_;
    TimeGrid grid_;
    PricePath price_;
    std::vector<double> mean_path_;
};

// Theta = -gamma (K(0) + x_bar - zeta); price, mean path and value closure.
LQSolution solve_lq_quadratic_terminal(double c, double gamma, double zeta, double x_bar,
                                       const SupplySchedule& supply, const TimeGrid& grid);

// General convex terminal cost: inner root-solve for mu(Theta, x), outer
// scalar solve of Theta = -int u_x(x, 0) dm0.
struct GeneralLQResult {
    double theta = 0.0;
    PricePath price;
    std::vector<double> mu0;          // mu(Theta, x_i) at t = 0 on the density grid
    double theta_residual = 0.0;      // |Theta + int u_x(.,0) dm0|
};

GeneralLQResult lq_general_terminal(double c, const TerminalCost& terminal,
                                    const InitialDensity& initial, const SupplySchedule& supply,
                                    const TimeGrid& grid);

// RK4 integration of the closed agent/mean system
//   x' = (xbar - x) gamma / (1 + (T - t) gamma / c) + Q(t),  xbar' = Q(t).
struct AgentTrajectory {
    std::vector<double> position;  // x(t_k)
    std::vector<double> mean;      // xbar(t_k)
};

AgentTrajectory agent_trajectory(double c, double gamma, const TimeGrid& grid,
                                 const std::function<double(double)>& Q, double x0, double x_bar0);

// Quadratic-potential model of the averaged dynamics
//   Xi' = -(w + Pi)/c,  Pi' = -eta (Xi - kappa),
// closed by the balance constraint w = -Pi - c Q. Pi solves
//   Pi'' - omega^2 Pi = omega^2 w  with omega = sqrt(eta / c),
// which turns the constraint into the Volterra equation
//   w + (k * w) = f,  k(t) = omega sinh(omega t),
//   f(t) = -C1 e^{omega t} - C2 e^{-omega t} - c Q(t),
// where C1, C2 are fixed by Pi(0) and Pi'(0) = -eta (x_bar - kappa). Pi(0)
// itself closes through the quadratic value-function ansatz
//   u = theta0(t) + theta1(t) x + theta2(t) x^2.
struct PotentialModelState {
    double pi0 = 0.0;            // converged Pi(0)
    double c1 = 0.0, c2 = 0.0;   // exponential coefficients
    double omega = 0.0;
    double lambda = 1.0;         // kernel multiplier in w = f - lambda (k*w)
    std::vector<double> pi;      // Pi(t_k)
    std::vector<double> xi;      // Xi(t_k)
    std::vector<double> kernel;  // k(t_k)
    std::vector<double> forcing; // f(t_k)
    std::vector<double> theta0, theta1, theta2;
    double pi0_residual = 0.0;
};

struct PotentialModelParams {
    double c = 1.0;
    double eta = 0.0;
    double kappa = 0.0;
    double gamma = 0.0;
    double zeta = 0.0;
    double x_bar = 0.0;
};

std::pair<PotentialModelState, PricePath> solve_potential_model(const PotentialModelParams& p,
                                                                const SupplySchedule& supply,
                                                                const TimeGrid& grid);

// Residuals of the averaged dynamics recovered from full solver fields:
// Pi = int u_x m dx and Xi = int x m dx, differentiated in time.
struct MomentResiduals {
    double pi_equation = 0.0;  // sup | dPi/dt + eta (Xi - kappa) |
    double xi_equation = 0.0;  // sup | dXi/dt + (w + Pi)/c |
};

MomentResiduals moment_consistency(double c, double eta, double kappa, const ValueField& u,
                                   const DensityField& m, const PricePath& varpi);

}  // namespace pricemfg
