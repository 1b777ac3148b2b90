"""Package-wide numeric defaults and verification tolerances."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Defaults:
    """Budgets and tolerances used as call-site defaults.

    The verification tolerances are consumed by the test suite and by the
    ``bench`` command; they live here so a single place controls how tightly
    the structural identities are checked.
    """

    # capacity budgets
    term_budget: int = 100_000
    grid_max_points: int = 2_000_000
    grid_max_dim: int = 4

    # box-constrained solver
    solver_tol: float = 1e-8
    solver_max_iter: int = 100_000

    # trainer
    fit_tol: float = 1e-8
    fit_max_iter: int = 2_000

    # verification tolerances
    sandwich_atol: float = 1e-9
    convexity_atol: float = 1e-9
    scaling_rtol: float = 1e-12
    reduction_rtol: float = 1e-8
    conjugation_rtol: float = 1e-10
    affine_direction_atol: float = 1e-10
    gradient_fd_rtol: float = 1e-6
    hessian_fd_rtol: float = 1e-4
    param_gradient_fd_rtol: float = 1e-5


DEFAULTS = Defaults()
