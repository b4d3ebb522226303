import csv
import importlib
from pathlib import Path
from typing import Iterable, Sequence

import httpx


async def send_post_request(
    url: str,
    payload: dict,
    api_key: str | None = None,
    timeout: httpx.Timeout = httpx.Timeout(10.0, connect=5.0),
) -> None:
    """POST a finished run entry to the caller's callback URL."""
    headers = {"Content-Type": "application/json"}
    if api_key:
        headers["X-Api-Key"] = api_key

    async with httpx.AsyncClient(timeout=timeout) as client:
        resp = await client.post(url, content=payload_text(payload), headers=headers)
        resp.raise_for_status()


def load_module(path: str) -> dict:
    """UPPERCASE public names of a settings module."""
    module = importlib.import_module(path)
    return {k: getattr(module, k) for k in dir(module) if k.isupper() and not k.startswith("_")}


def load_class(path: str, factory: dict | None = None):
    """Instantiate ``package.module.Class`` with the registry's constructor kwargs."""
    mod_path, _, attr = path.rpartition(".")
    clazz = getattr(importlib.import_module(mod_path), attr)
    return clazz(**(factory or {}))


def format_float(value: float) -> str:
    """17 significant digits; shared by the JSON and CSV writers."""
    return format(float(value), ".17g")


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[float]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_float(value) for value in row])
    return path


def payload_text(payload) -> str:
    # imported lazily, reports pulls in pydantic models that import conf
    from .reports import dumps

    return dumps(payload)
