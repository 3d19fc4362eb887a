"""Electricity price formation: constrained MFG solvers, LQ models, calibration.

The heavy lifting lives in the compiled ``_pricemfg`` extension; this package
re-exports its surface.
"""

try:  # wheel layout: extension inside the package
    from ._pricemfg import (  # noqa: F401
        ConfigError,
        NonConvergenceError,
        NumericalError,
        LQSolution,
        SupplySchedule,
        __version__,
        agent_trajectory,
        calibrate,
        hamiltonian_eval,
        normalize_demand,
        run_monotonicity_trials,
        solve_equilibrium,
        solve_lq,
        solve_potential_model,
        volterra_solve_trapezoid,
        wasserstein1,
    )
except ImportError:  # in-tree build: extension on sys.path
    from _pricemfg import (  # noqa: F401
        ConfigError,
        NonConvergenceError,
        NumericalError,
        LQSolution,
        SupplySchedule,
        __version__,
        agent_trajectory,
        calibrate,
        hamiltonian_eval,
        normalize_demand,
        run_monotonicity_trials,
        solve_equilibrium,
        solve_lq,
        solve_potential_model,
        volterra_solve_trapezoid,
        wasserstein1,
    )

__all__ = [
    "ConfigError",
    "NonConvergenceError",
    "NumericalError",
    "LQSolution",
    "SupplySchedule",
    "agent_trajectory",
    "calibrate",
    "hamiltonian_eval",
    "normalize_demand",
    "run_monotonicity_trials",
    "solve_equilibrium",
    "solve_lq",
    "solve_potential_model",
    "volterra_solve_trapezoid",
    "wasserstein1",
]
