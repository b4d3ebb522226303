import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..conf import conf
from ..exceptions import GridError

MIN_POINTS = 16


@dataclass(frozen=True, eq=False)
class Grid1D:
    """Uniform grid on [x_min, x_max], endpoints included."""

    x_min: float
    x_max: float
    n: int = conf.GRID_POINTS

    def __post_init__(self):
        if self.n < MIN_POINTS:
            raise GridError(f"grid needs at least {MIN_POINTS} points, got {self.n}")
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise GridError("grid bounds must be finite")
        if self.x_min >= self.x_max:
            raise GridError(f"empty grid interval [{self.x_min}, {self.x_max}]")

    @classmethod
    def centered(cls, half_width: float, n: int = conf.GRID_POINTS) -> "Grid1D":
        return cls(-half_width, half_width, n)

    @classmethod
    def for_oscillator(
        cls,
        m: float,
        omega: float,
        hbar: float = 1.0,
        half_width: float = conf.GRID_HALF_WIDTH,
        n: int = conf.GRID_POINTS,
    ) -> "Grid1D":
        """Box of ``half_width`` oscillator lengths √(ħ/mω)."""
        if m <= 0 or omega <= 0 or hbar <= 0:
            raise GridError("oscillator length needs m, ω and ħ positive")
        return cls.centered(half_width * math.sqrt(hbar / (m * omega)), n)

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @cached_property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n)

    def __len__(self) -> int:
        return self.n

    def refined(self) -> "Grid1D":
        """Same box, spacing halved."""
        return Grid1D(self.x_min, self.x_max, 2 * self.n - 1)

    def describe(self) -> dict:
        return {"n": self.n, "x_min": self.x_min, "x_max": self.x_max}
