import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .classical import LagrangianSystem, euler_lagrange
from .conf import conf
from .exceptions import (
    ConvergenceError,
    DegenerateInputError,
    IntegrationError,
    InvalidExpressionError,
    ModelError,
    OverdampedError,
)
from .expr import ZERO, Expr, coefficients, compile_expr, substitute
from .parametrize import ParametrizedSystem, lifted_euler_lagrange
from .utils import write_csv

logger = logging.getLogger(conf.APP_NAME)

State = tuple[Sequence[float], Sequence[float]]


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    Fixed-step samples ``(t_k, q_k, q̇_k)``.

    ``h`` is the effective signed step; a backward run has ``h < 0`` and decreasing
    times.
    """

    times: np.ndarray
    q: np.ndarray  # (samples, dof)
    qd: np.ndarray
    h: float
    coords: tuple[str, ...]
    velocities: tuple[str, ...]
    time: str = "t"
    params: dict = field(default_factory=dict)
    integrator: str = "rk4"

    def __len__(self) -> int:
        return len(self.times)

    @property
    def final_state(self) -> State:
        return self.q[-1].copy(), self.qd[-1].copy()

    def columns(self) -> list[np.ndarray]:
        return [self.times, *self.q.T, *self.qd.T]

    def to_csv(self, path: str | Path) -> Path:
        header = [self.time, *self.coords, *self.velocities]
        return write_csv(path, header, zip(*self.columns()))


@dataclass(frozen=True, eq=False)
class DriftReport:
    label: str
    values: np.ndarray
    max_relative_drift: float
    floor: float = conf.DRIFT_FLOOR

    @property
    def initial(self) -> float:
        return float(self.values[0])

    @property
    def final(self) -> float:
        return float(self.values[-1])


@dataclass(frozen=True)
class ConvergenceResult:
    order: float
    steps: tuple[float, ...]
    errors: tuple[float, ...]


# --------------------------------------------------------------------------- #
# Acceleration field
# --------------------------------------------------------------------------- #
class AccelerationField:
    """
    Solves A(q, q̇, t) q̈ = −c(q, q̇, t) from residuals linear in the accelerations.

    The coefficient matrix and right-hand side are extracted symbolically once and
    compiled for scalar evaluation.
    """

    def __init__(
        self,
        residuals: Sequence[Expr],
        accelerations: Sequence[str],
        time: str,
        coords: Sequence[str],
        velocities: Sequence[str],
    ):
        self.dof = len(accelerations)
        names = [time, *coords, *velocities]
        matrix, rhs = [], []
        for residual in residuals:
            try:
                parts = coefficients(residual, accelerations)
            except InvalidExpressionError as e:
                raise ModelError(f"equations of motion not linear in q̈: {e}") from e
            row = [ZERO] * self.dof
            constant = ZERO
            for exponents, coefficient in parts.items():
                degree = sum(exponents)
                if degree == 0:
                    constant = coefficient
                elif degree == 1 and 1 in exponents:
                    row[exponents.index(1)] = coefficient
                else:
                    raise ModelError("equations of motion not linear in q̈")
            matrix.append([compile_expr(a, names, backend="math") for a in row])
            rhs.append(compile_expr(constant, names, backend="math"))
        self._matrix = matrix
        self._rhs = rhs

    def __call__(self, t: float, q: np.ndarray, qd: np.ndarray) -> np.ndarray:
        args = (t, *q, *qd)
        try:
            if self.dof == 1:
                a = self._matrix[0][0](*args)
                if a == 0:
                    raise IntegrationError(f"q̈ coefficient vanishes at t={t!r}")
                return np.array([-self._rhs[0](*args) / a])
            A = np.array([[f(*args) for f in row] for row in self._matrix])
            b = np.array([-f(*args) for f in self._rhs])
            return np.linalg.solve(A, b)
        except (np.linalg.LinAlgError, ZeroDivisionError, OverflowError, ValueError) as e:
            raise IntegrationError(f"cannot solve for q̈ at t={t!r}: {e}") from e


def _rk4(
    accel: AccelerationField,
    q0: np.ndarray,
    v0: np.ndarray,
    t0: float,
    h: float,
    steps: int,
    clock: Callable[[float], float] = lambda s: s,
):
    """Classical RK4 on (q, q̇); ``clock`` maps the integration variable to time."""
    n = len(q0)
    times = t0 + h * np.arange(steps + 1)
    qs = np.empty((steps + 1, n))
    vs = np.empty((steps + 1, n))
    qs[0], vs[0] = q0, v0
    q, v = np.array(q0, dtype=float), np.array(v0, dtype=float)
    for k in range(steps):
        s = times[k]
        k1q, k1v = v, accel(clock(s), q, v)
        k2q = v + 0.5 * h * k1v
        k2v = accel(clock(s + 0.5 * h), q + 0.5 * h * k1q, k2q)
        k3q = v + 0.5 * h * k2v
        k3v = accel(clock(s + 0.5 * h), q + 0.5 * h * k2q, k3q)
        k4q = v + h * k3v
        k4v = accel(clock(s + h), q + h * k3q, k4q)
        q = q + h / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q)
        v = v + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
        qs[k + 1], vs[k + 1] = q, v
    return times, qs, vs


def step_count(t0: float, t1: float, h: float) -> tuple[int, float]:
    """Number of uniform steps and the signed effective step from t0 to t1."""
    if not (math.isfinite(t0) and math.isfinite(t1) and math.isfinite(h)):
        raise DegenerateInputError("integration bounds and step must be finite")
    if h <= 0:
        raise DegenerateInputError(f"step must be positive, got {h!r}")
    span = t1 - t0
    steps = round(abs(span) / h)
    if span == 0 or steps == 0:
        raise DegenerateInputError(f"zero-length integration from {t0!r} to {t1!r}")
    return steps, span / steps


def _initial(sys_dof: int, initial: State) -> tuple[np.ndarray, np.ndarray]:
    q0, v0 = (np.atleast_1d(np.asarray(x, dtype=float)) for x in initial)
    if q0.shape != (sys_dof,) or v0.shape != (sys_dof,):
        raise DegenerateInputError(
            f"initial state needs {sys_dof} positions and {sys_dof} velocities"
        )
    return q0, v0


# --------------------------------------------------------------------------- #
# Public API
# --------------------------------------------------------------------------- #
def integrate(
    sys: LagrangianSystem, initial: State, t0: float, t1: float, h: float
) -> Trajectory:
    """
    Integrate the Euler–Lagrange equations with fixed-step RK4.

    The number of steps is ``round(|t1 − t0| / h)``; the effective step is recorded
    on the trajectory. ``t1 < t0`` integrates backward.
    """
    steps, h_eff = step_count(t0, t1, h)
    q0, v0 = _initial(sys.dof, initial)
    bound = sys.bound()
    accel = AccelerationField(
        euler_lagrange(bound), bound.accelerations, bound.time, bound.coords, bound.velocities
    )
    logger.debug("RK4 %s: %d steps of %r", sys.name or "system", steps, h_eff)
    times, qs, vs = _rk4(accel, q0, v0, t0, h_eff, steps)
    return Trajectory(
        times=times,
        q=qs,
        qd=vs,
        h=h_eff,
        coords=sys.coords,
        velocities=sys.velocities,
        time=sys.time,
        params=dict(sys.params),
    )


def integrate_parametrized(
    ps: ParametrizedSystem,
    initial: State,
    t0: float,
    t1: float,
    h: float,
    gauge: float = 1.0,
) -> Trajectory:
    """
    Integrate the lifted equations in τ with the gauge q̇⁰ = ``gauge``.

    The τ-step is ``h / gauge`` so samples line up with :func:`integrate`; the
    returned trajectory is expressed in physical time (q⁰) and d/dt velocities.
    """
    if not gauge > 0:
        raise DegenerateInputError(f"gauge q̇⁰ must be positive, got {gauge!r}")
    steps, h_eff = step_count(t0, t1, h)
    q0, v0 = _initial(ps.origin.dof, initial)
    bound = ps.bound()
    lifted = bound.as_lagrangian()
    fixed = {
        bound.time_velocity: gauge,
        lifted.accelerations[0]: 0,
    }
    residuals = [substitute(r, fixed) for r in lifted_euler_lagrange(bound)[1:]]
    accel = AccelerationField(
        residuals,
        lifted.accelerations[1:],
        bound.time_coordinate,
        bound.origin.coords,
        bound.origin.velocities,
    )
    tau_step = h_eff / gauge
    _, qs, vs = _rk4(
        accel, q0, gauge * v0, 0.0, tau_step, steps, clock=lambda tau: t0 + gauge * tau
    )
    return Trajectory(
        times=t0 + h_eff * np.arange(steps + 1),
        q=qs,
        qd=vs / gauge,
        h=h_eff,
        coords=ps.origin.coords,
        velocities=ps.origin.velocities,
        time=ps.origin.time,
        params=dict(ps.params),
        integrator=f"rk4-parametrized(gauge={gauge:g})",
    )


def monitor(traj: Trajectory, quantity: Expr, label: str = "") -> DriftReport:
    """Evaluate ``quantity(q, q̇, t)`` along the samples and report its drift."""
    names = [traj.time, *traj.coords, *traj.velocities]
    bound = substitute(quantity, traj.params)
    with np.errstate(all="ignore"):
        values = compile_expr(bound, names)(*traj.columns())
    values = np.broadcast_to(np.asarray(values, dtype=float), traj.times.shape).copy()
    reference = max(abs(values[0]), conf.DRIFT_FLOOR)
    drift = float(np.max(np.abs(values - values[0])) / reference)
    if not math.isfinite(drift):
        drift = math.inf
    return DriftReport(label=label or str(quantity), values=values, max_relative_drift=drift)


def convergence_order(
    sys: LagrangianSystem,
    initial: State,
    t0: float,
    t1: float,
    steps: Sequence[float],
    quantity: Expr | None = None,
    reference: Callable[[float], np.ndarray] | None = None,
) -> ConvergenceResult:
    """
    Log-log slope of the error against the step size.

    With ``quantity`` the error is its drift; otherwise the endpoint error of the
    coordinates against ``reference(t1)`` or, without an oracle, against a run at an
    eighth of the smallest step.
    """
    if len(steps) < 2:
        raise DegenerateInputError("need at least two step sizes")
    hs, errors = [], []
    if quantity is None and reference is None:
        fine = integrate(sys, initial, t0, t1, min(steps) / 8)
        target = fine.q[-1]
    elif quantity is None:
        target = np.atleast_1d(reference(t1))
    for h in steps:
        traj = integrate(sys, initial, t0, t1, h)
        if quantity is not None:
            error = monitor(traj, quantity).max_relative_drift
        else:
            error = float(np.max(np.abs(traj.q[-1] - target)))
        hs.append(abs(traj.h))
        errors.append(error)
    errors_arr = np.asarray(errors)
    if np.any(errors_arr <= 0) or not np.all(np.isfinite(errors_arr)):
        raise ConvergenceError(f"errors must be positive and finite, got {errors}")
    order = float(np.polyfit(np.log(hs), np.log(errors_arr), 1)[0])
    logger.debug("Measured order %.3f from steps %s", order, hs)
    return ConvergenceResult(order=order, steps=tuple(hs), errors=tuple(errors))


def underdamped_solution(
    t, x0: float, v0: float, gamma: float, omega0: float, t0: float = 0.0
) -> tuple[np.ndarray, np.ndarray]:
    """
    Closed form of ẍ + 2Γẋ + ω₀²x = 0 for ω² = ω₀² − Γ² > 0.

    Returns ``(x, ẋ)`` at the times ``t``.
    """
    omega_sq = omega0**2 - gamma**2
    if omega_sq <= 0:
        raise OverdampedError(f"ω² = ω0² − Γ² = {omega_sq!r} ≤ 0")
    omega = math.sqrt(omega_sq)
    s = np.asarray(t, dtype=float) - t0
    b = (v0 + gamma * x0) / omega
    decay = np.exp(-gamma * s)
    cos, sin = np.cos(omega * s), np.sin(omega * s)
    x = decay * (x0 * cos + b * sin)
    xd = -gamma * x + decay * (-x0 * omega * sin + b * omega * cos)
    return x, xd

