from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from pathlib import Path

from ..classical import HamiltonianSystem, LagrangianSystem, legendre
from ..conf import conf
from ..dynamics import Trajectory, integrate
from ..exceptions import ModelError
from ..models import Model
from ..noether import ConservedQuantity, DeterminingSolution, Sampler, charge, solve_determining
from ..parametrize import ParametrizedSystem, lift
from ..quantum import DampedOscillator, Grid1D


@dataclass(eq=False)
class ReproductionContext:
    """Lazily computed pipeline stages shared by the reproduction checks."""

    model: Model
    options: object = None
    out_dir: Path | None = None

    def _param(self, role: str) -> Fraction:
        quantum = self.model.spec.quantum
        name = getattr(quantum, role, None) if quantum else None
        if role == "damping" and name is None:
            return Fraction(0)
        if name is None or name not in self.model.system.params:
            raise ModelError(f"model {self.model.name} does not declare its {role} parameter")
        return Fraction(self.model.system.params[name])

    @cached_property
    def mass(self) -> Fraction:
        return self._param("mass")

    @cached_property
    def omega0(self) -> Fraction:
        return self._param("omega0")

    @cached_property
    def damping(self) -> Fraction:
        return self._param("damping")

    @property
    def seed(self) -> int:
        return getattr(self.options, "seed", None) or conf.DEFAULT_SEED

    @cached_property
    def bound(self) -> LagrangianSystem:
        return self.model.system.bound()

    @cached_property
    def ps(self) -> ParametrizedSystem:
        return lift(self.bound)

    @cached_property
    def hsys(self) -> HamiltonianSystem:
        return legendre(self.bound)

    @cached_property
    def solution(self) -> DeterminingSolution:
        return solve_determining(self.ps, self.model.basis(), Sampler(seed=self.seed))

    @cached_property
    def charges(self) -> list[ConservedQuantity]:
        return [
            charge(self.ps, g, label=f"Q{i}") for i, g in enumerate(self.solution, start=1)
        ]

    @property
    def primary_charge(self) -> ConservedQuantity | None:
        return self.charges[0] if len(self.charges) == 1 else None

    @cached_property
    def trajectory(self) -> Trajectory:
        section = self.model.spec.classical
        if section is None:
            raise ModelError(f"model {self.model.name} has no [classical] section")
        dof = self.bound.dof
        initial = (section.initial[:dof], section.initial[dof:])
        return integrate(self.bound, initial, section.t0, section.t1, section.h)

    @cached_property
    def oscillator(self) -> DampedOscillator:
        return self.model.oscillator()

    @cached_property
    def grid(self) -> Grid1D:
        quantum = self.model.spec.quantum
        return self.oscillator.grid(quantum.half_width, quantum.n)

    @property
    def stencil(self) -> int:
        return self.model.spec.quantum.stencil
