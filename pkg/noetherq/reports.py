import json
import math
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel, Field

from .conf import conf
from .utils import format_float


class CheckResult(BaseModel):
    name: str
    passed: bool
    value: float | None = None
    tolerance: float | None = None
    detail: str = ""


class RunReport(BaseModel):
    """Machine-readable outcome of one CLI or API run."""

    command: str
    version: str = conf.APP_VERSION
    seed: int | None = None
    model: str | None = None
    inputs: dict[str, Any] = Field(default_factory=dict)
    derived: dict[str, Any] = Field(default_factory=dict)
    results: dict[str, Any] = Field(default_factory=dict)
    checks: list[CheckResult] = Field(default_factory=list)
    warnings: list[str] = Field(default_factory=list)
    outputs: list[str] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(
        self,
        name: str,
        passed: bool,
        value: float | None = None,
        tolerance: float | None = None,
        detail: str = "",
    ) -> CheckResult:
        result = CheckResult(
            name=name,
            passed=bool(passed),
            value=None if value is None else float(value),
            tolerance=tolerance,
            detail=detail,
        )
        self.checks.append(result)
        return result

    def summary(self) -> dict:
        failed = [c.name for c in self.checks if not c.passed]
        return {
            "passed": self.passed,
            "checks": len(self.checks),
            "failed": failed,
        }

    def write(self, out_dir: str | Path, filename: str = "report.json") -> Path:
        path = Path(out_dir) / filename
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(dumps(self) + "\n", encoding="utf-8")
        return path


def _plain(value: Any) -> Any:
    if isinstance(value, BaseModel):
        data = value.model_dump(mode="python")
        if isinstance(value, RunReport):
            data["summary"] = value.summary()
        return _plain(data)
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if isinstance(value, (str, bool, int, float)) or value is None:
        return value
    return str(value)


def _encode(value: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(value, bool) or value is None or isinstance(value, (str, int)):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, float):
        return format_float(value) if math.isfinite(value) else "null"
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [
            f"{pad}{json.dumps(k, ensure_ascii=False)}: {_encode(v, indent, level + 1)}"
            for k, v in value.items()
        ]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if not value:
        return "[]"
    items = [f"{pad}{_encode(v, indent, level + 1)}" for v in value]
    return "[\n" + ",\n".join(items) + "\n" + end + "]"


def dumps(payload: Any, indent: int = 2) -> str:
    """
    JSON text with floats at 17 significant digits and non-finite numbers as null.

    Key order follows insertion order, so equal inputs give byte-identical output.
    """
    return _encode(_plain(payload), indent, 0)
