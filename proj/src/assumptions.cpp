#include "pricemfg/assumptions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pricemfg {

namespace {

struct TableStats {
    double lip = 0.0;      // max |first difference| / dx
    double d2_max = 0.0;   // max |second difference| / dx^2
    double d2_min = 0.0;   // min signed second difference / dx^2
    double d2_ratio = 1.0; // d2_max(fine) / d2_max(coarse); ~2 flags a kink
};

TableStats table_stats(const std::vector<double>& v, double dx) {
    TableStats s;
    const int n = (int)v.size();
    for (int i = 0; i + 1 < n; ++i)
        s.lip = std::max(s.lip, std::abs(v[i + 1] - v[i]) / dx);
    double d2max = 0.0, d2min = std::numeric_limits<double>::infinity();
    for (int i = 1; i + 1 < n; ++i) {
        const double d2 = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (dx * dx);
        d2max = std::max(d2max, std::abs(d2));
        d2min = std::min(d2min, d2);
    }
    s.d2_max = d2max;
    s.d2_min = (n >= 3) ? d2min : 0.0;
    // Second difference on the every-other-node subsample: a genuine kink
    // doubles the bound when the spacing halves.
    double coarse = 0.0;
    for (int i = 2; i + 2 < n; i += 2) {
        const double d2 = (v[i + 2] - 2.0 * v[i] + v[i - 2]) / (4.0 * dx * dx);
        coarse = std::max(coarse, std::abs(d2));
    }
    s.d2_ratio = (coarse > 0.0) ? d2max / coarse : 1.0;
    return s;
}

bool decreasing_toward_boundary(const std::vector<double>& v) {
    const double tol = 1e-12 * (1.0 + std::abs(v.front()) + std::abs(v.back()));
    return v.front() < v[1] - tol || v.back() < v[v.size() - 2] - tol;
}

}  // namespace

AssumptionReport validate_assumptions(const HamiltonianSpec& spec, const TerminalCost& terminal,
                                      const InitialDensity& initial) {
    AssumptionReport rep;
    const SpaceGrid& g = initial.grid();
    const double dx = g.dx();

    std::vector<double> vpot(g.n_nodes), vterm = terminal.sample(g);
    for (int i = 0; i < g.n_nodes; ++i) vpot[i] = spec.potential.value(g, i);
    const TableStats sv = table_stats(vpot, dx);
    const TableStats su = table_stats(vterm, dx);
    const TableStats sm = table_stats(initial.values(), dx);

    // A1: the quadratic flow cost is uniformly convex whenever c > 0; the
    // potential must not fall off toward the truncated boundary.
    auto& a1 = rep.checks[0];
    a1.constant = spec.c;
    a1.pass = spec.c > 0.0;
    if (spec.potential.kind == PotentialSpec::Kind::Tabulated &&
        decreasing_toward_boundary(vpot)) {
        a1.pass = false;
        a1.note = "potential decreases toward the domain boundary; bounded-below on R not plausible";
    }

    // A2: Lipschitz constants on the truncated domain.
    auto& a2 = rep.checks[1];
    a2.constant = std::max(sv.lip, su.lip);
    a2.pass = std::isfinite(a2.constant);

    // A3: bounded second derivatives; kink detection for tables.
    auto& a3 = rep.checks[2];
    a3.constant = std::max(sv.d2_max, su.d2_max);
    a3.pass = std::isfinite(a3.constant);
    const bool v_table = spec.potential.kind == PotentialSpec::Kind::Tabulated;
    const bool u_table = terminal.kind == TerminalCost::Kind::Tabulated;
    if ((v_table && sv.d2_ratio > 1.5) || (u_table && su.d2_ratio > 1.5)) {
        a3.pass = false;
        a3.note = "second difference grows under refinement (kink in tabulated data)";
    }

    // A4: second-difference bounds for the initial density and terminal data.
    auto& a4 = rep.checks[3];
    a4.constant = std::max(sm.d2_max, su.d2_max);
    a4.pass = std::isfinite(a4.constant);
    if (sm.d2_ratio > 1.5) {
        a4.pass = false;
        a4.note = "initial density second difference grows under refinement";
    }

    // A5: D^2_pp H = 1/c >= theta and D^3_ppp H = 0 for the quadratic kinetic part.
    auto& a5 = rep.checks[4];
    a5.constant = spec.convexity_floor();
    a5.pass = a5.constant > 0.0 && std::isfinite(a5.constant);

    // A6: convexity of V and terminal cost.
    auto& a6 = rep.checks[5];
    double d2min = 0.0;
    if (spec.potential.kind == PotentialSpec::Kind::Quadratic) d2min = std::min(d2min, spec.potential.eta);
    if (v_table) d2min = std::min(d2min, sv.d2_min);
    if (terminal.kind == TerminalCost::Kind::Quadratic) d2min = std::min(d2min, terminal.gamma);
    else d2min = std::min(d2min, su.d2_min);
    const double conv_tol = 1e-9 * (1.0 + std::max(sv.d2_max, su.d2_max));
    a6.constant = d2min;
    a6.pass = d2min >= -conv_tol;
    if (!a6.pass) a6.note = "negative second difference detected";

    return rep;
}

}  // namespace pricemfg
