from fractions import Fraction

from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..conf import conf


def _split(value):
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


class ModelSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    coordinates: list[str] = Field(min_length=1)
    lagrangian: str
    time: str = "t"
    velocities: list[str] = []
    momenta: list[str] = []

    @field_validator("coordinates", "velocities", "momenta", mode="before")
    @classmethod
    def split_lists(cls, value):
        return _split(value)


class AnsatzSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    xi0: list[str] = []
    # coordinate name -> basis terms of ξ for that coordinate
    xi: dict[str, list[str]] = {}

    @field_validator("xi0", mode="before")
    @classmethod
    def split_lists(cls, value):
        return _split(value)

    @field_validator("xi", mode="before")
    @classmethod
    def split_each(cls, value):
        if isinstance(value, dict):
            return {k: _split(v) for k, v in value.items()}
        return value


class ClassicalSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    initial: list[float]
    t0: float = 0.0
    t1: float = 20.0
    h: float = Field(default=1e-3, gt=0)

    @field_validator("initial", mode="before")
    @classmethod
    def split_lists(cls, value):
        return _split(value)


class QuantumSection(BaseModel):
    """Which parameters play m, ω₀ and Γ, plus grid and sampling choices."""

    model_config = ConfigDict(extra="forbid")

    mass: str = "m"
    omega0: str = "omega0"
    damping: str | None = None
    hbar: float = Field(default=1.0, gt=0)
    half_width: float = Field(default=conf.GRID_HALF_WIDTH, gt=0)
    n: int = Field(default=conf.GRID_POINTS, ge=16)
    stencil: int = conf.STENCIL_ORDER
    modes: list[int] = [0]
    times: list[float] = [0.0]
    dt: float = Field(default=1e-5, gt=0)

    @field_validator("modes", "times", mode="before")
    @classmethod
    def split_lists(cls, value):
        return _split(value)


class ModelFile(BaseModel):
    """Validated content of a ``.model`` file; parameters stay exact decimal text."""

    model_config = ConfigDict(extra="forbid")

    model: ModelSection
    params: dict[str, str] = {}
    ansatz: AnsatzSection | None = None
    classical: ClassicalSection | None = None
    quantum: QuantumSection | None = None

    @field_validator("params")
    @classmethod
    def exact_numbers(cls, value: dict[str, str]) -> dict[str, str]:
        for name, text in value.items():
            try:
                Fraction(text.strip())
            except (ValueError, ZeroDivisionError):
                raise ValueError(f"parameter {name} = {text!r} is not a number")
        return {name: text.strip() for name, text in value.items()}

    def param_values(self) -> dict[str, Fraction]:
        return {name: Fraction(text) for name, text in self.params.items()}
