"""
Model files: plain text ``[section]`` / ``key = value`` documents describing a
Lagrangian system, its parameters and the inputs of the verification pipelines.

Built-in models ship in ``builtin/`` and are addressed by name.
"""

import configparser
import logging
from dataclasses import dataclass, replace
from fractions import Fraction
from importlib import resources
from pathlib import Path

from pydantic import ValidationError

from ..classical import LagrangianSystem
from ..conf import conf
from ..exceptions import ExprSyntaxError, ModelError, UnboundVariableError
from ..expr import Expr, free_symbols, parse, rename
from ..noether import AnsatzBasis
from ..quantum import DampedOscillator
from .schema import ModelFile

logger = logging.getLogger(conf.APP_NAME)

SUFFIX = ".model"


@dataclass(frozen=True, eq=False)
class Model:
    spec: ModelFile
    system: LagrangianSystem
    source: str = ""

    @property
    def name(self) -> str:
        return self.spec.model.name

    def with_params(self, **overrides) -> "Model":
        values = {k: Fraction(str(v)) for k, v in overrides.items()}
        return replace(self, system=self.system.with_params(**values))

    def basis(self) -> AnsatzBasis | None:
        """The declared ansatz in lifted variables, or None for the solver default."""
        ansatz = self.spec.ansatz
        if ansatz is None:
            return None
        return build_basis(self.system, ansatz.xi0, ansatz.xi)

    def oscillator(self) -> DampedOscillator:
        quantum = self.spec.quantum
        if quantum is None:
            raise ModelError(f"model {self.name} has no [quantum] section")
        params = self.system.params

        def value(name: str | None) -> float:
            if name is None:
                return 0.0
            if name not in params:
                raise ModelError(f"[quantum] refers to unknown parameter {name!r}")
            return float(params[name])

        return DampedOscillator(
            m=value(quantum.mass),
            omega0=value(quantum.omega0),
            gamma=value(quantum.damping),
            hbar=quantum.hbar,
        )


def build_basis(
    system: LagrangianSystem, xi0: list[str], xi: dict[str, list[str]]
) -> AnsatzBasis:
    """Parse basis terms; physical time is written as the time coordinate."""
    unknown = set(xi) - set(system.coords)
    if unknown:
        raise ModelError(f"ansatz for unknown coordinate(s): {', '.join(sorted(unknown))}")
    allowed = {*system.coords, system.time, conf.TIME_COORDINATE, *system.params}

    def term(text: str) -> Expr:
        e = parse(text)
        stray = free_symbols(e) - allowed
        if stray:
            raise UnboundVariableError(stray)
        return rename(e, {system.time: conf.TIME_COORDINATE})

    return AnsatzBasis(
        basis0=tuple(term(t) for t in xi0),
        basis=tuple(tuple(term(t) for t in xi.get(q, ())) for q in system.coords),
    )


def _sections(text: str, source: str) -> dict:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as e:
        raise ModelError(f"{source}: {e}") from e

    raw: dict = {}
    for section in parser.sections():
        items = dict(parser.items(section))
        if section == "ansatz":
            ansatz: dict = {"xi": {}}
            for key, value in items.items():
                if key.startswith("xi."):
                    ansatz["xi"][key[3:]] = value
                else:
                    ansatz[key] = value
            items = ansatz
        raw[section] = items
    return raw


def parse_model(text: str, source: str = "<string>") -> Model:
    try:
        spec = ModelFile.model_validate(_sections(text, source))
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()
        )
        raise ModelError(f"{source}: {problems}") from e

    try:
        lagrangian = parse(spec.model.lagrangian)
    except ExprSyntaxError as e:
        raise ModelError(f"{source}: lagrangian: {e}") from e

    system = LagrangianSystem(
        coords=tuple(spec.model.coordinates),
        lagrangian=lagrangian,
        params=spec.param_values(),
        time=spec.model.time,
        velocities=tuple(spec.model.velocities),
        momenta=tuple(spec.model.momenta),
        name=spec.model.name,
    )
    model = Model(spec=spec, system=system, source=source)
    # fail early on a malformed ansatz
    model.basis()
    logger.debug("Loaded model %s from %s", model.name, source)
    return model


def builtin_models() -> list[str]:
    folder = resources.files(__package__) / "builtin"
    return sorted(
        entry.name.removesuffix(SUFFIX)
        for entry in folder.iterdir()
        if entry.name.endswith(SUFFIX)
    )


def builtin_text(name: str) -> str:
    if name not in builtin_models():
        raise ModelError(
            f"no built-in model {name!r}; choose from {', '.join(builtin_models())}"
        )
    return (resources.files(__package__) / "builtin" / f"{name}{SUFFIX}").read_text()


def load_model(ref: str | Path) -> Model:
    """Load a model from a file path or a built-in model name."""
    path = Path(ref)
    if path.is_file():
        return parse_model(path.read_text(encoding="utf-8"), source=str(path))
    if path.suffix or len(path.parts) > 1:
        raise ModelError(f"model file {str(ref)!r} not found")
    return parse_model(builtin_text(str(ref)), source=f"builtin:{ref}")


__all__ = [
    "Model",
    "ModelFile",
    "build_basis",
    "builtin_models",
    "builtin_text",
    "load_model",
    "parse_model",
]
