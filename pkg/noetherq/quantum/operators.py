"""
Banded grid operators for one-dimensional quantization.

A phase-space expression α(t)p² + b(x, t)p + V(x, t) is mapped to

    −ħ²α(t)∂² − iħ(B·D + D·B)/2 + V

with B = diag(b), D the central first difference and ∂² the central second
difference, both of the configured stencil order. The symmetric combination of the
linear-in-p part is the Weyl ordering of b(x)p; for b = βx it reproduces
−iħβ(x∂ₓ + ½). ψ vanishes outside the grid (Dirichlet), so every assembled matrix
is exactly Hermitian.

Matrices are held in LAPACK banded layout: ``bands[u + i - j, j] = A[i, j]`` with
two sub- and two super-diagonals.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from ..classical import HamiltonianSystem
from ..conf import conf
from ..exceptions import (
    GridError,
    InvalidExpressionError,
    UnboundVariableError,
    UnsupportedOperatorError,
)
from ..expr import ZERO, Expr, coefficients, compile_expr, free_symbols, substitute
from ..noether import ConservedQuantity
from .grid import Grid1D

logger = logging.getLogger(conf.APP_NAME)

LOWER = UPPER = 2
OFFSETS = range(-LOWER, UPPER + 1)

# weights at offsets -2..2, before dividing by Δx² and Δx
SECOND_DIFFERENCE = {
    2: (0.0, 1.0, -2.0, 1.0, 0.0),
    4: (-1 / 12, 16 / 12, -30 / 12, 16 / 12, -1 / 12),
}
FIRST_DIFFERENCE = {
    2: (0.0, -1 / 2, 0.0, 1 / 2, 0.0),
    4: (1 / 12, -8 / 12, 0.0, 8 / 12, -1 / 12),
}


def _columns(d: int, n: int) -> slice:
    # columns j holding A[j - d, j]
    return slice(max(d, 0), n + min(d, 0))


@dataclass(frozen=True, eq=False)
class GridOperator:
    bands: np.ndarray
    grid: Grid1D
    t: float = 0.0
    order: int = conf.STENCIL_ORDER
    label: str = ""

    def __post_init__(self):
        if self.bands.shape != (LOWER + UPPER + 1, self.grid.n):
            raise GridError(f"banded storage has shape {self.bands.shape}")

    @property
    def n(self) -> int:
        return self.grid.n

    def diagonal(self, d: int = 0) -> np.ndarray:
        """Entries A[i, i + d]."""
        return self.bands[UPPER - d, _columns(d, self.n)]

    def matvec(self, v) -> np.ndarray:
        v = np.asarray(v.values if hasattr(v, "values") else v, dtype=np.complex128)
        n = self.n
        out = self.bands[UPPER] * v
        for d in OFFSETS:
            if d > 0:
                out[: n - d] += self.bands[UPPER - d, d:] * v[d:]
            elif d < 0:
                out[-d:] += self.bands[UPPER - d, : n + d] * v[: n + d]
        return out

    def hermiticity_defect(self, skip: int = LOWER) -> float:
        """max |A − A†| over rows at least ``skip`` away from either end."""
        n = self.n
        worst = 0.0
        for d in range(0, UPPER + 1):
            upper = self.diagonal(d)
            lower = self.diagonal(-d)
            # upper[k] = A[k, k+d], lower[k] = A[k+d, k]
            rows = slice(skip, max(skip, n - d - skip))
            gap = np.abs(upper[rows] - np.conj(lower[rows]))
            if gap.size:
                worst = max(worst, float(gap.max()))
        return worst

    def to_sparse(self) -> sparse.csr_matrix:
        diagonals = [self.diagonal(d) for d in OFFSETS]
        return sparse.diags(diagonals, list(OFFSETS), shape=(self.n, self.n), format="csr")

    def to_dense(self) -> np.ndarray:
        return self.to_sparse().toarray()

    def rayleigh(self, v) -> complex:
        """⟨v, Av⟩ / ⟨v, v⟩ in the grid's ℓ² inner product."""
        v = np.asarray(v.values if hasattr(v, "values") else v, dtype=np.complex128)
        return complex(np.vdot(v, self.matvec(v)) / np.vdot(v, v))


class OperatorAssembly:
    """
    Recipe that turns a phase-space expression into a :class:`GridOperator` at any t.

    The expression is split by powers of the momentum once; the coefficient
    functions are compiled and evaluated on the grid per call.
    """

    def __init__(
        self,
        expression: Expr,
        hsys: HamiltonianSystem,
        grid: Grid1D,
        hbar: float = 1.0,
        order: int | None = None,
        label: str = "",
    ):
        if hsys.dof != 1:
            raise UnsupportedOperatorError(
                f"grid quantization needs one degree of freedom, got {hsys.dof}"
            )
        order = conf.STENCIL_ORDER if order is None else order
        if order not in SECOND_DIFFERENCE:
            raise GridError(f"stencil order must be one of {sorted(SECOND_DIFFERENCE)}")
        if hbar <= 0:
            raise GridError(f"ħ must be positive, got {hbar!r}")

        self.grid, self.hbar, self.order, self.label = grid, hbar, order, label
        x, p, t = hsys.coords[0], hsys.momenta[0], hsys.time
        expression = substitute(expression, hsys.params)

        try:
            parts = coefficients(expression, [p])
        except InvalidExpressionError as e:
            raise UnsupportedOperatorError(f"{label or 'operator'}: {e}") from e
        beyond = sorted(k for (k,) in parts if k not in (0, 1, 2))
        if beyond:
            raise UnsupportedOperatorError(
                f"{label or 'operator'} has {p}^{beyond[-1]} terms; only powers "
                f"0, 1 and 2 of {p} can be quantized on the grid"
            )

        kinetic = parts.get((2,), ZERO)
        self.cross = parts.get((1,), ZERO)
        self.potential = parts.get((0,), ZERO)
        if x in free_symbols(kinetic):
            raise UnsupportedOperatorError(
                f"{p}² coefficient depends on {x}: operator ordering is ambiguous"
            )
        stray = (
            free_symbols(kinetic) | free_symbols(self.cross) | free_symbols(self.potential)
        ) - {x, t}
        if stray:
            raise UnboundVariableError(stray)

        self.kinetic = kinetic
        self._alpha = compile_expr(kinetic, [t])
        self._b = None if self.cross.is_value(0) else compile_expr(self.cross, [x, t])
        self._v = compile_expr(self.potential, [x, t])
        logger.debug(
            "Assembly %s: kinetic %s, cross %s, potential %s",
            label, kinetic, self.cross, self.potential,
        )

    def _on_grid(self, fn, t: float) -> np.ndarray:
        with np.errstate(all="ignore"):
            values = np.broadcast_to(
                np.asarray(fn(self.grid.x, t), dtype=float), (self.grid.n,)
            )
        if not np.all(np.isfinite(values)):
            raise GridError(f"{self.label or 'operator'} coefficient not finite at t={t!r}")
        return values

    def at(self, t: float) -> GridOperator:
        n, dx, hbar = self.grid.n, self.grid.spacing, self.hbar
        alpha = float(self._alpha(t))
        b = None if self._b is None else self._on_grid(self._b, t)
        second = SECOND_DIFFERENCE[self.order]
        first = FIRST_DIFFERENCE[self.order]

        bands = np.zeros((LOWER + UPPER + 1, n), dtype=np.complex128)
        index = np.arange(n)
        for k, d in enumerate(OFFSETS):
            cols = _columns(d, n)
            kinetic = -(hbar**2) * alpha * second[k] / dx**2
            band = np.full(index[cols].size, kinetic, dtype=np.complex128)
            if b is not None and first[k]:
                j = index[cols]
                band += -1j * hbar * first[k] / dx * (b[j - d] + b[j]) / 2
            bands[UPPER - d, cols] = band
        bands[UPPER] += self._on_grid(self._v, t)
        return GridOperator(bands, self.grid, t, self.order, self.label)

    __call__ = at


def hamiltonian_assembly(
    hsys: HamiltonianSystem, grid: Grid1D, hbar: float = 1.0, order: int | None = None
) -> OperatorAssembly:
    return OperatorAssembly(hsys.hamiltonian, hsys, grid, hbar, order, label="H")


def charge_assembly(
    cq: ConservedQuantity, grid: Grid1D, hbar: float = 1.0, order: int | None = None
) -> OperatorAssembly:
    if cq.hamiltonian is None:
        raise UnsupportedOperatorError(
            "conserved quantity carries no phase-space system to quantize in"
        )
    return OperatorAssembly(
        cq.q_phase, cq.hamiltonian, grid, hbar, order, label=cq.label or "Q"
    )


def assemble_hamiltonian(
    hsys: HamiltonianSystem,
    grid: Grid1D,
    t: float = 0.0,
    hbar: float = 1.0,
    order: int | None = None,
) -> GridOperator:
    return hamiltonian_assembly(hsys, grid, hbar, order).at(t)


def assemble_Q(
    cq: ConservedQuantity,
    grid: Grid1D,
    t: float = 0.0,
    hbar: float = 1.0,
    order: int | None = None,
) -> GridOperator:
    """Q̂(t) with the xp cross term in symmetric order."""
    return charge_assembly(cq, grid, hbar, order).at(t)
