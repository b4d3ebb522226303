import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.special import eval_hermite, gammaln

from ..conf import conf
from ..exceptions import GridError, ModelError, OverdampedError, ZeroNormError
from ..utils import write_csv
from .grid import Grid1D

logger = logging.getLogger(conf.APP_NAME)


@dataclass(frozen=True, eq=False)
class Wavefunction:
    """
    Complex samples of ψ(x, t) on a grid.

    Values must be finite. A zero state is representable; operations that divide by
    the norm raise :class:`ZeroNormError` instead.
    """

    values: np.ndarray
    grid: Grid1D
    t: float = 0.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.complex128)
        if values.shape != (self.grid.n,):
            raise GridError(
                f"wavefunction has shape {values.shape}, grid has {self.grid.n} points"
            )
        if not np.all(np.isfinite(values)):
            raise GridError("wavefunction has non-finite entries")
        object.__setattr__(self, "values", values)

    def norm_squared(self) -> float:
        """Trapezoidal ∫|ψ|² dx."""
        return float(np.trapezoid(np.abs(self.values) ** 2, self.grid.x))

    def norm(self) -> float:
        return math.sqrt(self.norm_squared())

    def inner(self, other: "Wavefunction") -> complex:
        """Trapezoidal ⟨self, other⟩, antilinear in ``self``."""
        return complex(np.trapezoid(np.conj(self.values) * other.values, self.grid.x))

    def normalized(self) -> "Wavefunction":
        norm = self.norm()
        if norm == 0:
            raise ZeroNormError("cannot normalize the zero state")
        return Wavefunction(self.values / norm, self.grid, self.t)

    def fidelity(self, other: "Wavefunction") -> float:
        """|⟨ψ|φ⟩| / (‖ψ‖ ‖φ‖), insensitive to a global phase."""
        denominator = self.norm() * other.norm()
        if denominator == 0:
            raise ZeroNormError("fidelity of a zero state")
        return abs(self.inner(other)) / denominator

    def distance(self, other: "Wavefunction") -> float:
        """L² distance ‖ψ − φ‖ on the shared grid."""
        diff = self.values - other.values
        return math.sqrt(float(np.trapezoid(np.abs(diff) ** 2, self.grid.x)))

    def to_csv(self, path: str | Path) -> Path:
        rows = zip(self.grid.x, self.values.real, self.values.imag)
        return write_csv(path, ("x", "re", "im"), rows)


StateBuilder = Callable[[float], Wavefunction]


@dataclass(frozen=True)
class DampedOscillator:
    """Parameters of the quantized damped oscillator; ``gamma`` is the damping rate Γ."""

    m: float = 1.0
    omega0: float = 1.0
    gamma: float = 0.0
    hbar: float = 1.0

    def __post_init__(self):
        if self.m <= 0 or self.hbar <= 0 or self.omega0 <= 0:
            raise ModelError("m, ω₀ and ħ must be positive")

    @property
    def omega_squared(self) -> float:
        return self.omega0**2 - self.gamma**2

    @property
    def omega(self) -> float:
        """Underdamped frequency √(ω₀² − Γ²)."""
        w2 = self.omega_squared
        if w2 <= 0:
            raise OverdampedError(
                f"ω² = ω₀² − Γ² = {w2:g} ≤ 0: no underdamped states "
                f"(ω₀={self.omega0:g}, Γ={self.gamma:g})"
            )
        return math.sqrt(w2)

    def eigenvalue(self, n: int) -> float:
        """(n + ½)ħω, the charge carried by the n-th state."""
        return (n + 0.5) * self.hbar * self.omega

    def grid(
        self, half_width: float = conf.GRID_HALF_WIDTH, n: int = conf.GRID_POINTS
    ) -> Grid1D:
        return Grid1D.for_oscillator(self.m, self.omega, self.hbar, half_width, n)


def _log_normalization(n: int, m: float, omega: float, hbar: float) -> float:
    # log of (mω/πħ)^{1/4} / (2ⁿ n!)^{1/2}
    return 0.25 * math.log(m * omega / (math.pi * hbar)) - 0.5 * (
        n * math.log(2.0) + float(gammaln(n + 1))
    )


def analytic_dho_state(
    n: int, params: DampedOscillator, grid: Grid1D, t: float = 0.0
) -> Wavefunction:
    """
    The n-th pure state of the damped oscillator at time ``t``.

    ψ_n = N_n H_n(√(mω/ħ) e^{Γt} x) exp(−(m/2ħ)(ω + iΓ) e^{2Γt} x²)
    · exp(−i(n + ½)ωt + Γt/2), with physicists' Hermite polynomials. The state is
    normalized in the continuum at every t; a trapezoidal norm that misses 1 by more
    than the configured deficit is logged as a warning (the box is too small).
    """
    if n < 0:
        raise ValueError(f"mode index must be non-negative, got {n}")
    m, gamma, hbar = params.m, params.gamma, params.hbar
    omega = params.omega
    x = grid.x

    scale = math.exp(gamma * t)
    y = math.sqrt(m * omega / hbar) * scale * x
    envelope = -(m / (2 * hbar)) * complex(omega, gamma) * scale**2 * x**2
    phase = complex(0.5 * gamma * t, -(n + 0.5) * omega * t)
    log_norm = _log_normalization(n, m, omega, hbar)

    with np.errstate(over="ignore", under="ignore"):
        values = eval_hermite(n, y) * np.exp(envelope + phase + log_norm)

    psi = Wavefunction(values, grid, t)
    deficit = abs(1.0 - psi.norm_squared())
    if deficit > conf.NORM_DEFICIT_WARNING:
        logger.warning(
            "State n=%d at t=%g has norm deficit %.3g on a grid of %d points over "
            "[%g, %g]; enlarge the box or refine",
            n, t, deficit, grid.n, grid.x_min, grid.x_max,
        )
    return psi


def dho_builder(n: int, params: DampedOscillator, grid: Grid1D) -> StateBuilder:
    """``t ↦ analytic_dho_state(n, params, grid, t)`` for the residual checks."""

    def build(t: float) -> Wavefunction:
        return analytic_dho_state(n, params, grid, t)

    return build
