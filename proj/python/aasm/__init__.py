from ._aasm import (
    Problem,
    SolverError,
    compute_reference,
    iterations_to_tol,
    momentum_update,
    restart_test,
    run_experiment,
)

__all__ = [
    "Problem",
    "SolverError",
    "compute_reference",
    "iterations_to_tol",
    "momentum_update",
    "restart_test",
    "run_experiment",
]
