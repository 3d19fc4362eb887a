#pragma once

#include <cstdint>
#include <vector>

#include "pricemfg/fields.hpp"
#include "pricemfg/hamiltonian.hpp"
#include "pricemfg/supply.hpp"

namespace pricemfg {

// One point w = (m, u, varpi) of the discrete operator domain. The D^b_+
// variant additionally requires m > 0 everywhere and exact boundary data
// m(.,0) = m0, u(.,T) = uT.
struct Triple {
    DensityField m;
    ValueField u;
    PricePath varpi;

    bool boundary_compatible(const std::vector<double>& m0, const std::vector<double>& uT,
                             double positivity_floor = 1e-8) const;
};

// Rows of A[w]. The three components are discretised with the stencils the
// solvers share: centered gradient G (one-sided at the walls), divergence
// -G^T, symmetric Neumann Laplacian, uniform-dx quadrature. Time derivatives
// are forward differences; the u-row lives on slices 0..n_t-1, the m-row on
// slices 1..n_t, which makes the A1 pairing telescope to the (vanishing)
// boundary term for boundary-compatible pairs.
struct OperatorImage {
    GridField u_row;               // u_t + eps u_xx - H(x, w + u_x); valid k = 0..n_t-1
    GridField m_row;               // m_t - eps m_xx - div(m D_pH); valid k = 1..n_t
    std::vector<double> balance;   // int m D_pH dx + Q(t_k); all k
};

OperatorImage apply_A(const Triple& w, const HamiltonianSpec& spec, const SupplySchedule& supply);

// <A[w] - A[wt], w - wt> with the pairing int int (m mt + u ut) dx dt +
// int varpi varpit dt. Nonnegative up to rounding for boundary-compatible
// pairs with positive densities.
double monotonicity_gap(const Triple& w, const Triple& wt, const HamiltonianSpec& spec,
                        const SupplySchedule& supply);

struct TrialReport {
    int trials = 0;
    double min_gap = 0.0;
    int violations = 0;  // gap < -1e-8
};

// Seeded Monte Carlo over randomized smooth boundary-compatible pairs.
TrialReport run_monotonicity_trials(int n_trials, std::uint64_t seed, int n_x = 48, int n_t = 32,
                                    int threads = 1);

}  // namespace pricemfg
