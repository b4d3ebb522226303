import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, NamedTuple

import numpy as np

from .conf import conf
from .exceptions import (
    EvaluationDivisionError,
    EvaluationDomainError,
    InvalidExpressionError,
    ModelError,
    NonQuadraticError,
    SingularHessianError,
    UnboundVariableError,
)
from .expr import (
    ZERO,
    Expr,
    coefficients,
    diff,
    equivalent,
    evaluate,
    free_symbols,
    is_zero,
    simplify,
    substitute,
    total,
    total_derivative,
    var,
)

logger = logging.getLogger(conf.APP_NAME)

Number = Fraction | float

LEGENDRE_SPOT_CHECKS = 100
LEGENDRE_SPOT_TOLERANCE = 1e-12


# --------------------------------------------------------------------------- #
# Systems
# --------------------------------------------------------------------------- #
@dataclass(frozen=True, eq=False)
class LagrangianSystem:
    """
    A Lagrangian ``L(q, qd, t)`` with its naming conventions.

    Velocity names default to the coordinate name plus ``conf.VELOCITY_SUFFIX``
    and momentum names to ``conf.MOMENTUM_PREFIX`` plus the coordinate. ``params``
    holds the numeric values of physical constants; they stay symbolic in ``lagrangian``
    until :meth:`bound` substitutes them.
    """

    coords: tuple[str, ...]
    lagrangian: Expr
    params: Mapping[str, Number] = field(default_factory=dict)
    time: str = "t"
    velocities: tuple[str, ...] = ()
    momenta: tuple[str, ...] = ()
    name: str = ""

    def __post_init__(self):
        coords = tuple(self.coords)
        if not coords:
            raise ModelError("a system needs at least one coordinate")
        object.__setattr__(self, "coords", coords)
        object.__setattr__(
            self,
            "velocities",
            tuple(self.velocities) or tuple(q + conf.VELOCITY_SUFFIX for q in coords),
        )
        object.__setattr__(
            self,
            "momenta",
            tuple(self.momenta) or tuple(conf.MOMENTUM_PREFIX + q for q in coords),
        )
        object.__setattr__(self, "params", dict(self.params))

        if len(self.velocities) != len(coords) or len(self.momenta) != len(coords):
            raise ModelError("one velocity and one momentum name per coordinate")
        names = [
            *coords,
            *self.velocities,
            *self.accelerations,
            *self.momenta,
            self.time,
            *self.params,
        ]
        clashes = {n for n in names if names.count(n) > 1}
        if clashes:
            raise ModelError(f"name(s) used twice: {', '.join(sorted(clashes))}")

        allowed = {*coords, *self.velocities, self.time, *self.params}
        unbound = free_symbols(self.lagrangian) - allowed
        if unbound:
            raise UnboundVariableError(unbound)

    @property
    def dof(self) -> int:
        return len(self.coords)

    @property
    def accelerations(self) -> tuple[str, ...]:
        return tuple(q + conf.ACCELERATION_SUFFIX for q in self.coords)

    def bound(self) -> "LagrangianSystem":
        """Same system with every parameter substituted as a constant."""
        return LagrangianSystem(
            coords=self.coords,
            lagrangian=substitute(self.lagrangian, self.params),
            params={},
            time=self.time,
            velocities=self.velocities,
            momenta=self.momenta,
            name=self.name,
        )

    def with_params(self, **overrides: Number) -> "LagrangianSystem":
        unknown = set(overrides) - set(self.params)
        if unknown:
            raise UnboundVariableError(unknown)
        return LagrangianSystem(
            coords=self.coords,
            lagrangian=self.lagrangian,
            params={**self.params, **overrides},
            time=self.time,
            velocities=self.velocities,
            momenta=self.momenta,
            name=self.name,
        )


@dataclass(frozen=True, eq=False)
class HamiltonianSystem:
    coords: tuple[str, ...]
    momenta: tuple[str, ...]
    time: str
    hamiltonian: Expr
    params: Mapping[str, Number] = field(default_factory=dict)
    # q̇^i as expressions in (q, p, t)
    velocities_of: tuple[Expr, ...] = ()
    origin: LagrangianSystem | None = None

    @property
    def dof(self) -> int:
        return len(self.coords)

    def bound(self) -> "HamiltonianSystem":
        return HamiltonianSystem(
            coords=self.coords,
            momenta=self.momenta,
            time=self.time,
            hamiltonian=substitute(self.hamiltonian, self.params),
            params={},
            velocities_of=tuple(substitute(v, self.params) for v in self.velocities_of),
            origin=self.origin.bound() if self.origin else None,
        )


# --------------------------------------------------------------------------- #
# Lagrangian side
# --------------------------------------------------------------------------- #
def momenta(sys: LagrangianSystem) -> list[Expr]:
    """p_i = ∂L/∂q̇^i."""
    return [simplify(diff(sys.lagrangian, v)) for v in sys.velocities]


def time_derivative(e: Expr, sys: LagrangianSystem) -> Expr:
    """d/dt along a curve: chain rule through q, q̇ and the explicit time."""
    rates = {q: var(v) for q, v in zip(sys.coords, sys.velocities)}
    rates |= {v: var(a) for v, a in zip(sys.velocities, sys.accelerations)}
    return total_derivative(e, rates, explicit=sys.time)


def euler_lagrange(sys: LagrangianSystem) -> list[Expr]:
    """
    Residuals δL/δq^i = ∂L/∂q^i − d/dt(∂L/∂q̇^i), one per coordinate.

    Accelerations appear as the coordinate name plus ``conf.ACCELERATION_SUFFIX``.
    """
    residuals = []
    for q, v in zip(sys.coords, sys.velocities):
        momentum = diff(sys.lagrangian, v)
        residuals.append(
            simplify(diff(sys.lagrangian, q) - time_derivative(momentum, sys))
        )
    return residuals


def energy(sys: LagrangianSystem) -> Expr:
    """E = q̇^i ∂L/∂q̇^i − L."""
    return simplify(
        total(var(v) * diff(sys.lagrangian, v) for v in sys.velocities) - sys.lagrangian
    )


class EnergyRate(NamedTuple):
    rate: Expr
    conserved: bool


def energy_rate(sys: LagrangianSystem) -> EnergyRate:
    """On-shell dE/dt = −∂L/∂t, flagged when identically zero."""
    rate = simplify(-diff(sys.lagrangian, sys.time))
    return EnergyRate(rate, is_zero(rate))


def energy_balance(sys: LagrangianSystem) -> Expr:
    """
    Off-shell dE/dt = −q̇^i δL/δq^i − ∂L/∂t.

    The sign follows the residual convention of :func:`euler_lagrange`; on shell only
    −∂L/∂t survives.
    """
    residuals = euler_lagrange(sys)
    return simplify(
        -total(var(v) * r for v, r in zip(sys.velocities, residuals))
        - diff(sys.lagrangian, sys.time)
    )


def velocity_hessian(sys: LagrangianSystem) -> list[list[Expr]]:
    return [
        [simplify(diff(diff(sys.lagrangian, a), b)) for b in sys.velocities]
        for a in sys.velocities
    ]


def is_regular(sys: LagrangianSystem) -> bool:
    """Velocity Hessian determinant not identically zero."""
    return not is_zero(_determinant(velocity_hessian(sys)))


def _quadratic_parts(sys: LagrangianSystem):
    """Split L = ½ q̇ᵀAq̇ + b·q̇ + c."""
    n = sys.dof
    try:
        parts = coefficients(sys.lagrangian, sys.velocities)
    except InvalidExpressionError as e:
        raise NonQuadraticError(f"velocities enter non-polynomially: {e}") from e

    A = [[ZERO] * n for _ in range(n)]
    b = [ZERO] * n
    c = ZERO
    for exponents, coefficient in parts.items():
        degree = sum(exponents)
        if any(not isinstance(k, int) or k < 0 for k in exponents) or degree > 2:
            raise NonQuadraticError(
                f"term of velocity degree {exponents} is outside the quadratic class"
            )
        if degree == 0:
            c = coefficient
        elif degree == 1:
            b[exponents.index(1)] = coefficient
        elif 2 in exponents:
            i = exponents.index(2)
            A[i][i] = simplify(2 * coefficient)
        else:
            i, j = [k for k, e in enumerate(exponents) if e == 1]
            A[i][j] = A[j][i] = coefficient
    return A, b, c


def _determinant(matrix: list[list[Expr]]) -> Expr:
    n = len(matrix)
    if n == 1:
        return matrix[0][0]
    if n == 2:
        return simplify(matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0])
    terms = []
    for j in range(n):
        if is_zero(matrix[0][j]):
            continue
        sign = 1 if j % 2 == 0 else -1
        terms.append(sign * matrix[0][j] * _determinant(_minor(matrix, 0, j)))
    return simplify(total(terms))


def _minor(matrix, row: int, col: int):
    return [
        [value for j, value in enumerate(line) if j != col]
        for i, line in enumerate(matrix)
        if i != row
    ]


def _inverse(matrix: list[list[Expr]]) -> list[list[Expr]]:
    n = len(matrix)
    det = _determinant(matrix)
    if is_zero(det):
        raise SingularHessianError(
            "velocity Hessian is singular (degenerate Lagrangian); "
            "time-reparametrized systems are handled by noetherq.parametrize"
        )
    if n == 1:
        return [[simplify(1 / det)]]
    inverse = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            sign = 1 if (i + j) % 2 == 0 else -1
            cofactor = sign * _determinant(_minor(matrix, i, j))
            inverse[j][i] = simplify(cofactor / det)
    return inverse


# --------------------------------------------------------------------------- #
# Legendre transform
# --------------------------------------------------------------------------- #
def legendre(sys: LagrangianSystem) -> HamiltonianSystem:
    """
    Hamiltonian of a Lagrangian quadratic in the velocities.

    With L = ½ q̇ᵀAq̇ + b·q̇ + c the momenta are p = Aq̇ + b, so
    q̇ = A⁻¹(p − b) and H = ½ (p − b)ᵀA⁻¹(p − b) − c.
    """
    A, b, c = _quadratic_parts(sys)
    inverse = _inverse(A)
    shifted = [var(p) - b_i for p, b_i in zip(sys.momenta, b)]
    velocities_of = tuple(
        simplify(total(inverse[i][j] * shifted[j] for j in range(sys.dof)))
        for i in range(sys.dof)
    )
    hamiltonian = simplify(
        total(s * v for s, v in zip(shifted, velocities_of)) / 2 - c
    )
    hsys = HamiltonianSystem(
        coords=sys.coords,
        momenta=sys.momenta,
        time=sys.time,
        hamiltonian=hamiltonian,
        params=sys.params,
        velocities_of=velocities_of,
        origin=sys,
    )
    _check_legendre(sys, hsys)
    return hsys


def to_velocity_space(e: Expr, sys: LagrangianSystem) -> Expr:
    """Substitute p_i = ∂L/∂q̇^i."""
    return simplify(substitute(e, dict(zip(sys.momenta, momenta(sys)))))


def to_phase_space(e: Expr, hsys: HamiltonianSystem) -> Expr:
    """Substitute q̇^i = q̇^i(q, p, t)."""
    if hsys.origin is None:
        return e
    return simplify(
        substitute(e, dict(zip(hsys.origin.velocities, hsys.velocities_of)))
    )


def _check_legendre(sys: LagrangianSystem, hsys: HamiltonianSystem) -> None:
    """H(q, ∂L/∂q̇, t) must equal q̇·p − L."""
    p = momenta(sys)
    reproduced = substitute(hsys.hamiltonian, dict(zip(sys.momenta, p)))
    expected = total(var(v) * p_i for v, p_i in zip(sys.velocities, p)) - sys.lagrangian
    if equivalent(reproduced, expected):
        return

    rng = np.random.default_rng(conf.DEFAULT_SEED)
    names = [*sys.coords, *sys.velocities, sys.time]
    checked = 0
    for _ in range(LEGENDRE_SPOT_CHECKS):
        binding = dict(zip(names, rng.uniform(-2.0, 2.0, len(names))))
        binding |= {k: float(v) for k, v in sys.params.items()}
        try:
            got, want = evaluate(reproduced, binding), evaluate(expected, binding)
        except (EvaluationDivisionError, EvaluationDomainError):
            continue
        checked += 1
        if abs(got - want) > LEGENDRE_SPOT_TOLERANCE * max(1.0, abs(want)):
            raise ModelError(
                f"Legendre transform is inconsistent at {binding}: {got!r} != {want!r}"
            )
    if checked == 0:
        raise ModelError("Legendre consistency could not be evaluated at any point")
    logger.warning(
        "Legendre consistency of %s certified numerically at %d points only",
        sys.name or "system",
        checked,
    )


# --------------------------------------------------------------------------- #
# Hamiltonian side
# --------------------------------------------------------------------------- #
def poisson(F: Expr, G: Expr, hsys: HamiltonianSystem) -> Expr:
    """{F, G} = ∂F/∂q^i ∂G/∂p_i − ∂G/∂q^i ∂F/∂p_i."""
    return simplify(
        total(
            diff(F, q) * diff(G, p) - diff(G, q) * diff(F, p)
            for q, p in zip(hsys.coords, hsys.momenta)
        )
    )


def total_time_derivative(F: Expr, hsys: HamiltonianSystem) -> Expr:
    """Ḟ = ∂F/∂t + {F, H}."""
    return simplify(diff(F, hsys.time) + poisson(F, hsys.hamiltonian, hsys))


def hamilton_equations(hsys: HamiltonianSystem) -> tuple[list[Expr], list[Expr]]:
    """(q̇^i, ṗ_i) = (∂H/∂p_i, −∂H/∂q^i)."""
    H = hsys.hamiltonian
    return (
        [simplify(diff(H, p)) for p in hsys.momenta],
        [simplify(-diff(H, q)) for q in hsys.coords],
    )
