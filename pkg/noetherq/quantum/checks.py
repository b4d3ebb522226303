"""Residual and eigenvalue checks for grid states."""

import logging
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from ..classical import HamiltonianSystem
from ..conf import conf
from ..exceptions import ZeroNormError
from ..noether import ConservedQuantity
from ..parametrize import Constraint, constraint_hamiltonian
from .grid import Grid1D
from .operators import GridOperator, charge_assembly, hamiltonian_assembly
from .propagation import propagate_cn
from .states import StateBuilder, Wavefunction

logger = logging.getLogger(conf.APP_NAME)


class EigenCheck(NamedTuple):
    q_estimate: float
    residual: float
    imaginary: float


@dataclass(frozen=True, eq=False)
class ExpectationTrack:
    times: np.ndarray
    values: np.ndarray

    @property
    def max_relative_change(self) -> float:
        reference = abs(self.values[0])
        spread = float(np.max(np.abs(self.values - self.values[0])))
        return spread / reference if reference else spread


def _l2(v: np.ndarray) -> float:
    return float(np.linalg.norm(v))


def _nonzero_norm(psi: Wavefunction) -> float:
    norm = _l2(psi.values)
    if norm == 0:
        raise ZeroNormError(f"state at t={psi.t!r} has zero norm")
    return norm


def _schrodinger_defect(
    H: GridOperator, psi_builder: StateBuilder, t: float, dt: float, hbar: float
) -> float:
    # ‖(−iħ∂ₜ + Ĥ)ψ‖ / ‖ψ‖ with a central difference in t
    if dt <= 0:
        raise ValueError(f"time step must be positive, got {dt!r}")
    psi = psi_builder(t)
    norm = _nonzero_norm(psi)
    rate = (psi_builder(t + dt).values - psi_builder(t - dt).values) / (2 * dt)
    return _l2(H.matvec(psi) - 1j * hbar * rate) / norm


def tdse_residual(
    psi_builder: StateBuilder,
    hsys: HamiltonianSystem,
    grid: Grid1D,
    t: float,
    dt: float,
    hbar: float = 1.0,
    order: int | None = None,
) -> float:
    """‖Ĥ(t)ψ − iħ∂ₜψ‖₂ / ‖ψ‖₂ for the states produced by ``psi_builder``."""
    H = hamiltonian_assembly(hsys, grid, hbar, order).at(t)
    return _schrodinger_defect(H, psi_builder, t, dt, hbar)


def constraint_check(
    system: Constraint | HamiltonianSystem,
    psi_builder: StateBuilder,
    grid: Grid1D,
    t: float,
    dt: float,
    hbar: float = 1.0,
    order: int | None = None,
) -> float:
    """
    ‖φ̂ψ‖₂ / ‖ψ‖₂ for the quantized primary constraint φ̂ = −iħ∂ₜ + Ĥ.

    Given a :class:`Constraint` the Hamiltonian is read back from φ; the number is
    the same one :func:`tdse_residual` returns.
    """
    hsys = constraint_hamiltonian(system) if isinstance(system, Constraint) else system
    H = hamiltonian_assembly(hsys, grid, hbar, order).at(t)
    return _schrodinger_defect(H, psi_builder, t, dt, hbar)


def eigencheck_Q(
    cq: ConservedQuantity,
    psi: Wavefunction,
    grid: Grid1D | None = None,
    hbar: float = 1.0,
    order: int | None = None,
) -> EigenCheck:
    """Rayleigh quotient of Q̂(ψ.t) and the eigen-residual ‖Q̂ψ − qψ‖₂ / ‖ψ‖₂."""
    grid = grid or psi.grid
    norm = _nonzero_norm(psi)
    Q = charge_assembly(cq, grid, hbar, order).at(psi.t)
    applied = Q.matvec(psi)
    rayleigh = complex(np.vdot(psi.values, applied)) / norm**2
    q = rayleigh.real
    imaginary = abs(rayleigh.imag)
    if imaginary > conf.RAYLEIGH_IMAG_TOLERANCE * max(abs(q), 1.0):
        logger.warning(
            "Rayleigh quotient of %s at t=%g has imaginary part %.3g",
            cq.label or "Q", psi.t, imaginary,
        )
    residual = _l2(applied - q * psi.values) / norm
    return EigenCheck(q, residual, imaginary)


def trial_states(grid: Grid1D, count: int = 3) -> list[Wavefunction]:
    """Smooth, well-localized Gaussian wave packets with drift, inside the box."""
    width = (grid.x_max - grid.x_min) / 24
    centers = np.linspace(-1.0, 1.0, count) * width * 2 + (grid.x_max + grid.x_min) / 2
    x = grid.x
    states = []
    for k, center in enumerate(centers):
        kick = (k + 1) / width
        values = np.exp(-(((x - center) / width) ** 2) / 2 + 1j * kick * x)
        states.append(Wavefunction(values, grid))
    return states


def conservation_defect(
    cq: ConservedQuantity,
    grid: Grid1D,
    t: float,
    dt: float = 1e-5,
    hbar: float = 1.0,
    order: int | None = None,
    trials: Sequence[Wavefunction] | None = None,
) -> float:
    """
    max over trial states of ‖(iħ∂Q̂/∂t + [Q̂, Ĥ])φ‖₂ / ‖φ‖₂.

    The commutator is applied to states, not compared entrywise; for a conserved
    charge the defect falls at the stencil order under refinement.
    """
    if cq.hamiltonian is None:
        raise ValueError("conserved quantity carries no Hamiltonian")
    charge = charge_assembly(cq, grid, hbar, order)
    H = hamiltonian_assembly(cq.hamiltonian, grid, hbar, order).at(t)
    Q, later, earlier = charge.at(t), charge.at(t + dt), charge.at(t - dt)

    worst = 0.0
    for phi in trials or trial_states(grid):
        norm = _nonzero_norm(phi)
        v = phi.values
        rate = (later.matvec(v) - earlier.matvec(v)) / (2 * dt)
        commutator = Q.matvec(H.matvec(v)) - H.matvec(Q.matvec(v))
        worst = max(worst, _l2(1j * hbar * rate + commutator) / norm)
    return worst


def track_expectation(
    cq: ConservedQuantity,
    psi0: Wavefunction,
    t1: float,
    dt: float,
    hbar: float = 1.0,
    order: int | None = None,
    every: int = 1,
) -> tuple[Wavefunction, ExpectationTrack]:
    """Rayleigh quotient of Q̂(t) along a Crank–Nicolson run from ``psi0.t`` to ``t1``."""
    if cq.hamiltonian is None:
        raise ValueError("conserved quantity carries no Hamiltonian")
    charge = charge_assembly(cq, psi0.grid, hbar, order)
    times = [psi0.t]
    values = [charge.at(psi0.t).rayleigh(psi0).real]

    def record(k: int, psi: Wavefunction) -> None:
        if k % every == 0:
            times.append(psi.t)
            values.append(charge.at(psi.t).rayleigh(psi).real)

    final = propagate_cn(psi0, cq.hamiltonian, psi0.t, t1, dt, hbar, order, on_step=record)
    if times[-1] != final.t:
        times.append(final.t)
        values.append(charge.at(final.t).rayleigh(final).real)
    return final, ExpectationTrack(np.array(times), np.array(values))
