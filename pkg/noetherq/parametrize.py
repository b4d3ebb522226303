"""
Time reparametrization of a Lagrangian system.

Physical time becomes the coordinate ``q0`` and the evolution parameter is τ. The
coordinate velocities keep their names but now mean d/dτ; the time velocity is
``q0`` plus the velocity suffix. The lifted Lagrangian is homogeneous of degree one
in the τ-velocities, its canonical Hamiltonian vanishes and the momenta obey one
primary constraint φ = p̄₀ + H ≈ 0.
"""

import logging
from dataclasses import dataclass

from .classical import HamiltonianSystem, LagrangianSystem, euler_lagrange, legendre
from .classical import momenta as lagrangian_momenta
from .conf import conf
from .exceptions import ModelError
from .expr import (
    ZERO,
    Expr,
    coefficients,
    diff,
    is_zero,
    rename,
    simplify,
    substitute,
    total,
    var,
)

logger = logging.getLogger(conf.APP_NAME)

EVOLUTION_PARAMETER = "tau"


@dataclass(frozen=True, eq=False)
class ParametrizedSystem:
    origin: LagrangianSystem
    lbar: Expr
    # θ^i = q̇^i / q̇⁰
    theta: tuple[Expr, ...]

    @property
    def time_coordinate(self) -> str:
        return conf.TIME_COORDINATE

    @property
    def time_velocity(self) -> str:
        return conf.TIME_COORDINATE + conf.VELOCITY_SUFFIX

    @property
    def time_momentum(self) -> str:
        return conf.TIME_MOMENTUM

    @property
    def coords(self) -> tuple[str, ...]:
        return (self.time_coordinate, *self.origin.coords)

    @property
    def velocities(self) -> tuple[str, ...]:
        return (self.time_velocity, *self.origin.velocities)

    @property
    def momenta(self) -> tuple[str, ...]:
        return (self.time_momentum, *self.origin.momenta)

    @property
    def params(self):
        return self.origin.params

    def as_lagrangian(self) -> LagrangianSystem:
        """The lifted Lagrangian as an ordinary system evolving in τ."""
        return LagrangianSystem(
            coords=self.coords,
            lagrangian=self.lbar,
            params=self.params,
            time=EVOLUTION_PARAMETER,
            velocities=self.velocities,
            momenta=self.momenta,
            name=f"{self.origin.name}[lifted]" if self.origin.name else "",
        )

    def bound(self) -> "ParametrizedSystem":
        return lift(self.origin.bound())

    def to_lifted(self, e: Expr) -> Expr:
        """Rename the physical time of ``e`` to the time coordinate."""
        return rename(e, {self.origin.time: self.time_coordinate})

    def to_physical(self, e: Expr) -> Expr:
        return rename(e, {self.time_coordinate: self.origin.time})


@dataclass(frozen=True, eq=False)
class Constraint:
    phi: Expr
    system: ParametrizedSystem

    @property
    def time_momentum(self) -> str:
        return self.system.time_momentum


def lift(sys: LagrangianSystem) -> ParametrizedSystem:
    """L̄ = L(q, θ, q⁰)·q̇⁰ with θ^i = q̇^i/q̇⁰ and t ↦ q⁰."""
    reserved = {
        conf.TIME_COORDINATE,
        conf.TIME_COORDINATE + conf.VELOCITY_SUFFIX,
        conf.TIME_MOMENTUM,
        EVOLUTION_PARAMETER,
    }
    taken = reserved & {*sys.coords, *sys.velocities, *sys.momenta, *sys.params}
    if taken:
        raise ModelError(
            f"name(s) reserved for the parametrized form: {', '.join(sorted(taken))}"
        )

    time_velocity = var(conf.TIME_COORDINATE + conf.VELOCITY_SUFFIX)
    theta = tuple(var(v) / time_velocity for v in sys.velocities)
    mapping = {sys.time: var(conf.TIME_COORDINATE)}
    mapping |= dict(zip(sys.velocities, theta))
    lbar = simplify(substitute(sys.lagrangian, mapping) * time_velocity)
    logger.debug("Lifted %s: %s", sys.name or "system", lbar)
    return ParametrizedSystem(origin=sys, lbar=lbar, theta=theta)


def extended_momenta(ps: ParametrizedSystem) -> list[Expr]:
    """p̄_A = ∂L̄/∂q̇^A, time momentum first."""
    return lagrangian_momenta(ps.as_lagrangian())


def homogeneity_residual(ps: ParametrizedSystem) -> Expr:
    """q̇^A ∂L̄/∂q̇^A − L̄, zero for a degree-one homogeneous L̄."""
    return simplify(
        total(var(v) * diff(ps.lbar, v) for v in ps.velocities) - ps.lbar
    )


def canonical_hamiltonian(ps: ParametrizedSystem) -> Expr:
    """H̄ = q̇^A p̄_A − L̄ with p̄_A = ∂L̄/∂q̇^A; identically zero."""
    return simplify(
        total(var(v) * p for v, p in zip(ps.velocities, extended_momenta(ps)))
        - ps.lbar
    )


def lifted_euler_lagrange(ps: ParametrizedSystem) -> list[Expr]:
    """δL̄/δq^A in τ, time coordinate first."""
    return euler_lagrange(ps.as_lagrangian())


def primary_constraint(ps: ParametrizedSystem) -> Constraint:
    """
    φ = p̄₀ + H(q, q⁰, p̄).

    Raises whatever :func:`noetherq.classical.legendre` raises for the origin system.
    """
    hsys = legendre(ps.origin)
    phi = simplify(var(ps.time_momentum) + ps.to_lifted(hsys.hamiltonian))

    parts = coefficients(phi, [ps.time_momentum])
    if not set(parts) <= {(0,), (1,)} or not parts.get((1,), ZERO).is_value(1):
        raise ModelError(f"constraint is not in p0 normal form: {phi}")

    # p̄₀ = −H must hold on the lifted momenta
    on_momenta = substitute(phi, dict(zip(ps.momenta, extended_momenta(ps))))
    if not is_zero(on_momenta):
        logger.warning(
            "Primary constraint of %s not certified symbolically", ps.origin.name
        )
    return Constraint(phi=phi, system=ps)


def constraint_hamiltonian(constraint: Constraint) -> HamiltonianSystem:
    """The p̄₀-free part of φ, back in physical time: the Hamiltonian it came from."""
    ps = constraint.system
    parts = coefficients(constraint.phi, [constraint.time_momentum])
    hamiltonian = simplify(ps.to_physical(parts.get((0,), ZERO)))
    origin = legendre(ps.origin)
    return HamiltonianSystem(
        coords=ps.origin.coords,
        momenta=ps.origin.momenta,
        time=ps.origin.time,
        hamiltonian=hamiltonian,
        params=ps.params,
        velocities_of=origin.velocities_of,
        origin=ps.origin,
    )
