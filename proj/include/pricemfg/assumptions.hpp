#pragma once

#include <array>
#include <string>

#include "pricemfg/fields.hpp"
#include "pricemfg/hamiltonian.hpp"

namespace pricemfg {

struct AssumptionCheck {
    bool pass = true;
    double constant = 0.0;  // the bound the check measured, when meaningful
    std::string note;
};

// A1: uniformly convex flow cost, potential bounded below (growth proxy on tables).
// A2: V and terminal cost Lipschitz (constants reported on the grid domain).
// A3: |V''|, |u_T''| bounded (refinement ratio flags kinks in tables).
// A4: |m0''|, |u_T''| bounded.
// A5: D^2_pp H >= theta > 0 and D^3_ppp H bounded.
// A6: V and terminal cost convex (second-difference sign).
struct AssumptionReport {
    std::array<AssumptionCheck, 6> checks;

    const AssumptionCheck& a(int k) const { return checks.at(k - 1); }
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

AssumptionReport validate_assumptions(const HamiltonianSpec& spec, const TerminalCost& terminal,
                                      const InitialDensity& initial);

}  // namespace pricemfg
