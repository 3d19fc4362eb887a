#pragma once

#include "pricemfg/fields.hpp"
#include "pricemfg/grid.hpp"
#include "pricemfg/hamiltonian.hpp"
#include "pricemfg/supply.hpp"

namespace pricemfg {

// Everything that defines one instance of the constrained MFG: grids,
// Hamiltonian data, terminal cost, initial distribution and production curve.
struct ModelProblem {
    SpaceGrid space;
    TimeGrid time;
    HamiltonianSpec spec;
    TerminalCost terminal = TerminalCost::quadratic(0.0, 0.0);
    InitialDensity initial;
    SupplySchedule supply;

    ModelProblem(SpaceGrid sg, TimeGrid tg, HamiltonianSpec hs, TerminalCost tc,
                 InitialDensity init, SupplySchedule sup)
        : space(sg), time(tg), spec(std::move(hs)), terminal(std::move(tc)),
          initial(std::move(init)), supply(std::move(sup)) {}

    std::vector<double> supply_on_grid() const {
        std::vector<double> q(time.n_nodes());
        for (int k = 0; k < time.n_nodes(); ++k) q[k] = supply.value(time.t(k));
        return q;
    }
};

}  // namespace pricemfg
