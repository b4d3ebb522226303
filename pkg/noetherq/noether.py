"""
Noether variations, charges and the determining-equation solver.

Generators are written in the lifted configuration variables: the time coordinate
(``q0``; the physical time name is accepted and renamed) and the coordinates.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np
import scipy.linalg

from .classical import (
    HamiltonianSystem,
    LagrangianSystem,
    legendre,
    time_derivative,
    to_velocity_space,
    total_time_derivative,
)
from .classical import euler_lagrange as classical_euler_lagrange
from .conf import conf
from .exceptions import InvalidGeneratorError, ModelError
from .expr import (
    ONE,
    ZERO,
    Expr,
    as_expr,
    canonical,
    coefficients,
    compile_expr,
    const,
    diff,
    equivalent,
    free_symbols,
    is_zero,
    simplify,
    substitute,
    total,
    var,
)
from .parametrize import (
    ParametrizedSystem,
    extended_momenta,
    lifted_euler_lagrange,
)

logger = logging.getLogger(conf.APP_NAME)


# --------------------------------------------------------------------------- #
# Types
# --------------------------------------------------------------------------- #
@dataclass(frozen=True, eq=False)
class SymmetryGenerator:
    """Point transformation δq⁰ = ε ξ⁰(q, q⁰), δq^i = ε ξ^i(q, q⁰)."""

    xi0: Expr
    xi: tuple[Expr, ...]

    def __post_init__(self):
        object.__setattr__(self, "xi0", as_expr(self.xi0))
        object.__setattr__(self, "xi", tuple(as_expr(x) for x in self.xi))

    @property
    def components(self) -> tuple[Expr, ...]:
        return (self.xi0, *self.xi)

    def scaled(self, factor) -> "SymmetryGenerator":
        return SymmetryGenerator(
            simplify(self.xi0 * factor), tuple(simplify(x * factor) for x in self.xi)
        )

    def __str__(self):
        return f"({', '.join(str(c) for c in self.components)})"


@dataclass(frozen=True, eq=False)
class ConservedQuantity:
    q_phase: Expr
    q_velocity: Expr
    generator: SymmetryGenerator
    label: str = ""
    hamiltonian: HamiltonianSystem | None = None
    # noether_variation reduced to a literal zero
    certified: bool = True


@dataclass(frozen=True, eq=False)
class AnsatzBasis:
    basis0: tuple[Expr, ...]
    basis: tuple[tuple[Expr, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "basis0", tuple(as_expr(b) for b in self.basis0))
        object.__setattr__(
            self, "basis", tuple(tuple(as_expr(b) for b in terms) for terms in self.basis)
        )
        if not self.basis0 and not any(self.basis):
            raise InvalidGeneratorError("ansatz basis is empty")

    @property
    def unknowns(self) -> list[tuple[int, Expr]]:
        """(component, term) per unknown coefficient; component 0 is ξ⁰."""
        slots = [(0, term) for term in self.basis0]
        for i, terms in enumerate(self.basis, start=1):
            slots.extend((i, term) for term in terms)
        return slots

    def substituted(self, mapping) -> "AnsatzBasis":
        return AnsatzBasis(
            basis0=tuple(substitute(b, mapping) for b in self.basis0),
            basis=tuple(tuple(substitute(b, mapping) for b in terms) for terms in self.basis),
        )

    def generator(self, values: Sequence) -> SymmetryGenerator:
        components = [ZERO] * (len(self.basis) + 1)
        for (slot, term), value in zip(self.unknowns, values):
            if value != 0:
                components[slot] = components[slot] + const(value) * term
        return SymmetryGenerator(
            simplify(components[0]), tuple(simplify(c) for c in components[1:])
        )


@dataclass(frozen=True)
class Sampler:
    """Collocation settings for :func:`solve_determining`."""

    samples_per_unknown: int = conf.SAMPLES_PER_UNKNOWN
    coordinate_box: tuple[float, float] = conf.SAMPLE_BOX_COORDINATES
    time_box: tuple[float, float] = conf.SAMPLE_BOX_TIME
    rtol: float = conf.NULLSPACE_RTOL
    seed: int = conf.DEFAULT_SEED


@dataclass(frozen=True)
class DeterminingSolution:
    generators: tuple[SymmetryGenerator, ...]
    singular_values: tuple[float, ...]
    rank: int
    unknowns: int
    rows: int
    warnings: tuple[str, ...] = field(default_factory=tuple)

    def __iter__(self) -> Iterator[SymmetryGenerator]:
        return iter(self.generators)

    def __len__(self) -> int:
        return len(self.generators)

    def __getitem__(self, index: int) -> SymmetryGenerator:
        return self.generators[index]


# --------------------------------------------------------------------------- #
# Variation and charge
# --------------------------------------------------------------------------- #
def _lifted_generator(ps: ParametrizedSystem, g: SymmetryGenerator) -> SymmetryGenerator:
    if len(g.xi) != len(ps.origin.coords):
        raise InvalidGeneratorError(
            f"generator has {len(g.xi)} spatial components, system has "
            f"{len(ps.origin.coords)} coordinates"
        )
    lifted = SymmetryGenerator(ps.to_lifted(g.xi0), tuple(ps.to_lifted(x) for x in g.xi))
    allowed = {*ps.coords, *ps.params}
    for component in lifted.components:
        stray = free_symbols(component) - allowed
        if stray:
            raise InvalidGeneratorError(
                f"generator may only depend on {', '.join(ps.coords)}; "
                f"found {', '.join(sorted(stray))}"
            )
    return lifted


def _rate(component: Expr, coords: Sequence[str], velocities: Sequence[str]) -> Expr:
    """ξ̇ = ∂ξ/∂q^A q̇^A."""
    return total(diff(component, q) * var(v) for q, v in zip(coords, velocities))


def noether_variation(ps: ParametrizedSystem, g: SymmetryGenerator) -> Expr:
    """ξ(L̄) = ξ^A ∂L̄/∂q^A + ξ̇^A ∂L̄/∂q̇^A, summed over the lifted coordinates."""
    g = _lifted_generator(ps, g)
    terms = []
    for component, q, v in zip(g.components, ps.coords, ps.velocities):
        if component.is_value(0):
            continue
        terms.append(component * diff(ps.lbar, q))
        terms.append(_rate(component, ps.coords, ps.velocities) * diff(ps.lbar, v))
    return simplify(total(terms))


def parametrized_charge(ps: ParametrizedSystem, g: SymmetryGenerator) -> Expr:
    """Q = ξ⁰p̄₀ + ξ^i p̄_i with the momenta as functions of the τ-velocities."""
    g = _lifted_generator(ps, g)
    return simplify(
        total(c * p for c, p in zip(g.components, extended_momenta(ps)))
    )


def charge(
    ps: ParametrizedSystem, g: SymmetryGenerator, label: str = ""
) -> ConservedQuantity:
    """
    Q = −ξ⁰H + ξ^i p_i in physical time, with its velocity form.

    When ``noether_variation`` does not reduce to zero the charge is still built
    but flagged uncertified.
    """
    variation = noether_variation(ps, g)
    certified = is_zero(variation)
    if not certified:
        logger.warning(
            "Generator %s is not a symmetry of %s; variation %s",
            g,
            ps.origin.name or "system",
            variation,
        )
    lifted = _lifted_generator(ps, g)
    hsys = legendre(ps.origin)
    q_phase = simplify(
        -ps.to_physical(lifted.xi0) * hsys.hamiltonian
        + total(
            ps.to_physical(x) * var(p) for x, p in zip(lifted.xi, ps.origin.momenta)
        )
    )
    q_velocity = to_velocity_space(q_phase, ps.origin)

    # the τ-velocity charge at q̇⁰ = 1 is the same function
    gauge_fixed = ps.to_physical(
        substitute(parametrized_charge(ps, g), {ps.time_velocity: ONE})
    )
    if not equivalent(gauge_fixed, q_velocity):
        logger.warning("Charge of %s differs from its parametrized form", g)

    return ConservedQuantity(
        q_phase=q_phase,
        q_velocity=q_velocity,
        generator=g,
        label=label,
        hamiltonian=hsys,
        certified=certified,
    )


def verify_conserved(cq: ConservedQuantity, hsys: HamiltonianSystem) -> Expr:
    """∂Q/∂t + {Q, H}; zero certifies conservation."""
    return total_time_derivative(cq.q_phase, hsys)


def noether_identity_residual(ps: ParametrizedSystem, g: SymmetryGenerator) -> Expr:
    """
    dQ/dτ − ξ(L̄) + ξ^A δL̄/δq^A, zero off-shell for any generator.
    """
    lifted_sys = ps.as_lagrangian()
    q = parametrized_charge(ps, g)
    lifted = _lifted_generator(ps, g)
    balance = total(
        c * r for c, r in zip(lifted.components, lifted_euler_lagrange(ps))
    )
    return simplify(time_derivative(q, lifted_sys) - noether_variation(ps, g) + balance)


# --------------------------------------------------------------------------- #
# Unparametrized point symmetries
# --------------------------------------------------------------------------- #
def point_variation(sys: LagrangianSystem, xi: Sequence[Expr]) -> Expr:
    """ξ(L) = ξ^i ∂L/∂q^i + ξ̇^i ∂L/∂q̇^i with ξ^i(q, t)."""
    xi = _point_generator(sys, xi)
    terms = []
    for component, q, v in zip(xi, sys.coords, sys.velocities):
        rate = _rate(component, sys.coords, sys.velocities) + diff(component, sys.time)
        terms.append(component * diff(sys.lagrangian, q))
        terms.append(rate * diff(sys.lagrangian, v))
    return simplify(total(terms))


def point_charge(sys: LagrangianSystem, xi: Sequence[Expr]) -> Expr:
    """Q = ξ^i ∂L/∂q̇^i."""
    xi = _point_generator(sys, xi)
    return simplify(total(c * diff(sys.lagrangian, v) for c, v in zip(xi, sys.velocities)))


def point_identity_residual(sys: LagrangianSystem, xi: Sequence[Expr]) -> Expr:
    """dQ/dt − ξ(L) + ξ^i δL/δq^i."""
    xi = _point_generator(sys, xi)
    balance = total(c * r for c, r in zip(xi, classical_euler_lagrange(sys)))
    return simplify(
        time_derivative(point_charge(sys, xi), sys) - point_variation(sys, xi) + balance
    )


def _point_generator(sys: LagrangianSystem, xi: Sequence[Expr]) -> list[Expr]:
    xi = [as_expr(x) for x in xi]
    if len(xi) != sys.dof:
        raise InvalidGeneratorError(f"expected {sys.dof} components, got {len(xi)}")
    allowed = {*sys.coords, sys.time, *sys.params}
    for component in xi:
        stray = free_symbols(component) - allowed
        if stray:
            raise InvalidGeneratorError(
                f"generator may not depend on {', '.join(sorted(stray))}"
            )
    return xi


# --------------------------------------------------------------------------- #
# Determining equations
# --------------------------------------------------------------------------- #
def default_basis(ps: ParametrizedSystem) -> AnsatzBasis:
    """ξ⁰ ∈ span{1, q⁰}; ξ^i ∈ span{1, q^j..., q⁰}."""
    q0 = var(ps.time_coordinate)
    spatial = (ONE, *(var(q) for q in ps.origin.coords), q0)
    return AnsatzBasis(basis0=(ONE, q0), basis=tuple(spatial for _ in ps.origin.coords))


def solve_determining(
    ps: ParametrizedSystem,
    basis: AnsatzBasis | None = None,
    sampler: Sampler | None = None,
) -> DeterminingSolution:
    """
    Generators in the span of ``basis`` with ξ(L̄) = 0 identically.

    ξ(L̄) is linear in the unknown coefficients. Its coefficients of each
    τ-velocity monomial are exact functions of the configuration; collocating them
    at random configurations gives a linear system whose numerical null space is
    taken by SVD. Null vectors are reduced to row-echelon form; each one's pivot
    columns are then pinned in the exact rational equations (one per monomial of
    those coefficient functions), which fixes the remaining coefficients exactly, so
    parameters such as Γ = 1e-8 come back as written. The result is normalized
    (largest coefficient ±1, leading ξ⁰ coefficient non-positive) and kept only when
    the variation vanishes exactly.
    """
    basis = (basis or default_basis(ps)).substituted(ps.params)
    sampler = sampler or Sampler()
    bound = ps.bound()
    unknowns = basis.unknowns
    K = len(unknowns)
    warnings: list[str] = []

    # exact per-unknown variations, split by velocity monomial
    blocks: dict[tuple, list[Expr]] = {}
    for k, (slot, term) in enumerate(unknowns):
        components = [ZERO] * (len(basis.basis) + 1)
        components[slot] = term
        g = SymmetryGenerator(components[0], tuple(components[1:]))
        variation = noether_variation(bound, g)
        for exponents, coefficient in coefficients(variation, bound.velocities).items():
            blocks.setdefault(exponents, [ZERO] * K)[k] = coefficient

    config = bound.coords
    stray = set().union(*(free_symbols(c) for row in blocks.values() for c in row))
    stray -= set(config)
    if stray:
        raise ModelError(
            f"determining equations depend on {', '.join(sorted(stray))}; "
            "bind every parameter"
        )

    M = sampler.samples_per_unknown * K
    rng = np.random.default_rng(sampler.seed)
    points = [rng.uniform(*sampler.time_box, M)]
    points += [rng.uniform(*sampler.coordinate_box, M) for _ in ps.origin.coords]

    rows = []
    with np.errstate(all="ignore"):
        for exponents in sorted(blocks):
            block = np.empty((M, K))
            for k, coefficient in enumerate(blocks[exponents]):
                block[:, k] = compile_expr(coefficient, config)(*points)
            rows.append(block)
    matrix = np.vstack(rows) if rows else np.zeros((0, K))
    matrix = matrix[np.all(np.isfinite(matrix), axis=1)]
    scale = np.max(np.abs(matrix), axis=1, initial=0.0)
    matrix = matrix[scale > 0] / scale[scale > 0, None]
    logger.debug("Collocation matrix %s for %d unknowns", matrix.shape, K)

    if matrix.shape[0] == 0:
        singular_values = np.zeros(0)
        rank = 0
        null = np.eye(K)
    else:
        _, singular_values, vh = scipy.linalg.svd(matrix)
        threshold = sampler.rtol * singular_values[0]
        rank = int(np.sum(singular_values > threshold))
        null = vh[rank:].T
        warnings += _rank_warnings(singular_values, threshold)

    exact_rows = _exact_rows(blocks, K)
    reduced = _reduced_rows(null.T)
    pinned = [pivot for pivot, _ in reduced]
    generators = []
    for pivot, vector in reduced:
        exact = _solve_pinned(exact_rows, K, {p: Fraction(int(p == pivot)) for p in pinned})
        if exact is None:
            logger.debug("Exact equations reject pivot %d; rationalizing the null vector", pivot)
            values = _rationalize(_normalize(list(vector), unknowns, conf.RATIONAL_TOLERANCE))
        else:
            values = _normalize(exact, unknowns)
        g = basis.generator(values)
        if not is_zero(noether_variation(bound, g)):
            message = f"candidate {g} failed the exact symmetry check"
            logger.warning(message)
            warnings.append(message)
            continue
        generators.append(g)

    logger.info(
        "Determining system: %d unknowns, rank %d, %d generator(s)",
        K,
        rank,
        len(generators),
    )
    return DeterminingSolution(
        generators=tuple(generators),
        singular_values=tuple(float(s) for s in singular_values),
        rank=rank,
        unknowns=K,
        rows=int(matrix.shape[0]),
        warnings=tuple(warnings),
    )


def _rank_warnings(singular_values: np.ndarray, threshold: float) -> list[str]:
    if threshold <= 0:
        return []
    decades = conf.RANK_GAP_DECADES
    messages = []
    for s in singular_values:
        if s > 0 and abs(np.log10(s / threshold)) < decades:
            message = (
                f"ambiguous rank: singular value {s:.3e} lies within {decades:g} "
                f"decades of the threshold {threshold:.3e}"
            )
            logger.warning(message)
            messages.append(message)
    return messages


def _reduced_rows(vectors: np.ndarray, tol: float = 1e-12) -> list[tuple[int, np.ndarray]]:
    """Row-reduced echelon form of the rows of ``vectors``, with each row's pivot column."""
    a = np.array(vectors, dtype=float)
    n_rows, n_cols = a.shape
    row = 0
    pivots = []
    for col in range(n_cols):
        if row >= n_rows:
            break
        pivot = row + int(np.argmax(np.abs(a[row:, col])))
        if abs(a[pivot, col]) <= tol:
            continue
        a[[row, pivot]] = a[[pivot, row]]
        a[row] /= a[row, col]
        for other in range(n_rows):
            if other != row:
                a[other] -= a[other, col] * a[row]
        pivots.append(col)
        row += 1
    return [(pivots[i], a[i]) for i in range(row)]


def _exact_rows(blocks: dict[tuple, list[Expr]], K: int) -> list[list[Fraction]]:
    """One rational equation per (velocity monomial, configuration monomial) pair."""
    rows: dict[tuple, list[Fraction]] = {}
    for exponents, column in blocks.items():
        for k, coefficient in enumerate(column):
            for mono, c in canonical(coefficient).items():
                rows.setdefault((exponents, mono), [Fraction(0)] * K)[k] += c
    return [row for row in rows.values() if any(row)]


def _fraction_rref(a: list[list[Fraction]], n_cols: int) -> list[int]:
    """In-place reduced row-echelon form over the first ``n_cols`` columns; pivot columns."""
    pivots = []
    row = 0
    for col in range(n_cols):
        pivot = next((r for r in range(row, len(a)) if a[r][col] != 0), None)
        if pivot is None:
            continue
        a[row], a[pivot] = a[pivot], a[row]
        lead = a[row][col]
        a[row] = [v / lead for v in a[row]]
        for other in range(len(a)):
            factor = a[other][col]
            if other != row and factor != 0:
                a[other] = [v - factor * w for v, w in zip(a[other], a[row])]
        pivots.append(col)
        row += 1
    return pivots


def _solve_pinned(
    rows: list[list[Fraction]], K: int, pinned: dict[int, Fraction]
) -> list[Fraction] | None:
    """
    Exact solution of ``rows · c = 0`` with the ``pinned`` entries of ``c`` fixed.

    Unknowns the equations leave free are set to zero. Returns None when the pinned
    values admit no solution.
    """
    free = [k for k in range(K) if k not in pinned]
    augmented = [
        [row[k] for k in free] + [-sum((row[k] * v for k, v in pinned.items()), Fraction(0))]
        for row in rows
    ]
    pivots = _fraction_rref(augmented, len(free))
    if any(row[-1] != 0 for row in augmented[len(pivots):]):
        return None
    values = dict(pinned)
    values.update({k: Fraction(0) for k in free})
    for row, col in zip(augmented, pivots):
        values[free[col]] = row[-1]
    return [values[k] for k in range(K)]


def _normalize(values: Sequence, unknowns: list[tuple[int, Expr]], tol: float = 0.0) -> list:
    """Largest entry ±1; the leading ξ⁰ coefficient non-positive, else the first entry positive."""
    largest = max(abs(v) for v in values)
    values = [v / largest for v in values]
    significant = [abs(v) > tol for v in values]
    time_part = [k for k, (slot, _) in enumerate(unknowns) if slot == 0 and significant[k]]
    if time_part:
        flip = values[time_part[0]] > 0
    else:
        flip = values[significant.index(True)] < 0
    return [-v for v in values] if flip else values


def _rationalize(values: Sequence[float]) -> list[Fraction | float]:
    # fallback when the exact equations are stricter than the collocated ones
    limits = (conf.RATIONAL_MAX_DENOMINATOR, *conf.RATIONAL_WIDER_DENOMINATORS)
    snapped_values = []
    for value in values:
        for limit in limits:
            snapped = Fraction(float(value)).limit_denominator(limit)
            if abs(float(snapped) - value) <= conf.RATIONAL_TOLERANCE:
                snapped_values.append(snapped)
                break
        else:
            snapped_values.append(float(value))
    return snapped_values
