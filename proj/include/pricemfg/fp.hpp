#pragma once

#include <vector>

#include "pricemfg/fields.hpp"
#include "pricemfg/hamiltonian.hpp"

namespace pricemfg {

// Optimal drift b(x_i, t_k) = -D_p H(x_i, w(t_k) + u_x(x_i, t_k)) [kW].
struct DriftField {
    GridField values;

    DriftField() = default;
    explicit DriftField(GridField v) : values(std::move(v)) {}

    static DriftField from_solution(const HamiltonianSpec& spec, const ValueField& u,
                                    const PricePath& price);
};

struct FPConfig {
    double cfl_safety = 0.9;
    long max_substeps = 200000;
    // Fraction of mass allowed in the outermost cells before the run is
    // declared boundary-starved.
    double boundary_mass_tol = 1e-6;
};

// Conservative upwind finite-volume transport with implicit centered
// diffusion. Vertex-centered cells carry the trapezoid weights (half cells
// at the boundary), so the trapezoidal mass is conserved to rounding and the
// upwind fluxes keep m >= 0 when eps = 0. Zero flux at both ends.
DensityField solve_fp(const DriftField& drift, const InitialDensity& initial, double epsilon,
                      const TimeGrid& tgrid, const FPConfig& config = {});

// Exact 1-D 1-Wasserstein distance between two node densities on the same
// grid: the L1 distance between their CDFs.
double wasserstein1(const SpaceGrid& grid, const std::vector<double>& m_a,
                    const std::vector<double>& m_b);

// max over k of d1(m(t_k), m(t_{k+1})) / sqrt(dt): the discrete Holder-1/2
// quotient of the density path.
double wasserstein1_continuity(const DensityField& m);

// Dense matrices of the spatial operators on one time slice, for the duality
// check: the conservative FP operator is exactly the negative transpose of
// the upwind advection operator linearising the HJB transport term.
std::vector<std::vector<double>> fp_operator_matrix(const SpaceGrid& grid,
                                                    const std::vector<double>& drift);
std::vector<std::vector<double>> advection_operator_matrix(const SpaceGrid& grid,
                                                           const std::vector<double>& drift);

}  // namespace pricemfg
