import logging
from typing import Callable

import numpy as np
from scipy.linalg import LinAlgError, solve_banded

from ..classical import HamiltonianSystem
from ..conf import conf
from ..dynamics import step_count
from ..exceptions import BandedSolveError
from .operators import LOWER, UPPER, hamiltonian_assembly
from .states import Wavefunction

logger = logging.getLogger(conf.APP_NAME)

StepHook = Callable[[int, Wavefunction], None]


def propagate_cn(
    psi0: Wavefunction,
    hsys: HamiltonianSystem,
    t0: float,
    t1: float,
    dt: float,
    hbar: float = 1.0,
    order: int | None = None,
    on_step: StepHook | None = None,
) -> Wavefunction:
    """
    Crank–Nicolson from t0 to t1 with the Hamiltonian sampled at each step midpoint.

    Solves (1 + iδtĤ/2ħ)ψ_{k+1} = (1 − iδtĤ/2ħ)ψ_k with a banded LU per step. The
    step count is round(|t1 − t0|/δt); ``on_step(k, ψ_k)`` is called after every step.
    """
    steps, h = step_count(t0, t1, dt)
    grid = psi0.grid
    assembly = hamiltonian_assembly(hsys, grid, hbar, order)
    factor = 0.5j * h / hbar
    psi = psi0.values.copy()

    logger.debug("Crank-Nicolson: %d steps of %g on %d points", steps, h, grid.n)
    for k in range(steps):
        H = assembly.at(t0 + (k + 0.5) * h)
        lhs = factor * H.bands
        lhs[UPPER] += 1.0
        rhs = psi - factor * H.matvec(psi)
        try:
            psi = solve_banded((LOWER, UPPER), lhs, rhs, check_finite=False)
        except (LinAlgError, ValueError) as e:
            raise BandedSolveError(f"banded solve failed at step {k + 1}: {e}") from e
        if not np.all(np.isfinite(psi)):
            raise BandedSolveError(f"banded solve produced non-finite values at step {k + 1}")
        if on_step is not None:
            now = t1 if k + 1 == steps else t0 + (k + 1) * h
            on_step(k + 1, Wavefunction(psi, grid, now))

    return Wavefunction(psi, grid, t1)
