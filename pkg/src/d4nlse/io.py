"""Run configuration and tabular output (CSV with a metadata block, or JSON)."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .errors import OutputError, PreconditionError

FORMAT_VERSION = 1


@dataclass
class RunConfig:
    """Every parameter that affects a run; keys mirror the command-line flags."""

    command: str = "ground"
    J: float = 1.0
    gamma_re: float = 0.0
    gamma_im: float = 0.0
    gamma_phase: float | None = None
    L: int = 29
    dt: float = 0.1
    tol: float = 1e-10
    max_steps: int = 20000
    seed: int = 0
    restarts: int = 8
    grid_re: str | None = None
    grid_im: str | None = None
    grid: str | None = None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        data = json.loads(text)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise PreconditionError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def save(self, path) -> None:
        try:
            Path(path).write_text(self.to_json() + "\n")
        except OSError as exc:
            raise OutputError(f"cannot write config {path}: {exc}") from exc

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            return cls.from_json(Path(path).read_text())
        except OSError as exc:
            raise OutputError(f"cannot read config {path}: {exc}") from exc


def parse_grid(spec: str) -> np.ndarray:
    """``"a:b:n"`` -> ``linspace(a, b, n)``."""
    try:
        a, b, n = spec.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError:
        raise PreconditionError(f"grid must look like a:b:n, got {spec!r}") from None
    if n < 1:
        raise PreconditionError("grid needs at least one point")
    return np.linspace(a, b, n)


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    s = "" if v is None else str(v)
    if any(c in s for c in ',"\n'):
        s = '"' + s.replace('"', '""') + '"'
    return s


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    return v


def render_csv(records, meta: dict, columns=None) -> str:
    columns = list(columns or (records[0].keys() if records else []))
    lines = [f"# {k}: {json.dumps(_json_value(v), sort_keys=True)}" for k, v in meta.items()]
    lines.append(",".join(columns))
    lines += [",".join(_cell(r.get(c)) for c in columns) for r in records]
    return "\n".join(lines) + "\n"


def render_json(records, meta: dict) -> str:
    doc = {"meta": _json_value(meta), "rows": [_json_value(dict(r)) for r in records]}
    return json.dumps(doc, indent=1, allow_nan=False) + "\n"


def write_table(records, fmt: str = "csv", path=None, meta: dict | None = None, columns=None) -> str:
    """Write records (dicts with a common key set) and return the rendered text.

    Floats go out with 17 significant digits in CSV; JSON uses the shortest
    exact representation and ``null`` for non-finite values.  ``path=None``
    or ``"-"`` only renders.
    """
    records = list(records)
    meta = {"format_version": FORMAT_VERSION, **(meta or {})}
    if fmt == "csv":
        text = render_csv(records, meta, columns)
    elif fmt == "json":
        text = render_json(records, meta)
    else:
        raise PreconditionError(f"unknown format {fmt!r}")
    if path not in (None, "-"):
        try:
            with open(path, "w", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            raise OutputError(f"cannot write {path}: {exc}") from exc
    return text


def read_json_table(path):
    """``(meta, rows)`` from a file written with ``fmt="json"``."""
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc}") from exc
    return doc["meta"], doc["rows"]
