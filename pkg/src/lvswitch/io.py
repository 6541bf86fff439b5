"""Config parsing and file writers.

Floats are written with 17 significant digits (``%.17g``) so that parsing
the output recovers every value bitwise; infinities are written as ``inf``.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .env_model import EnvPair, Environment, validate_pair
from .errors import ConfigError

ENV_FIELDS = ("a", "b", "c", "d", "alpha", "beta")


def fmt(value) -> str:
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return "%.17g" % value


def _environment(doc, label: str) -> Environment:
    if not isinstance(doc, dict):
        raise ConfigError(f"{label}: expected an object with fields {', '.join(ENV_FIELDS)}")
    values = {}
    for name in ENV_FIELDS:
        if name not in doc:
            raise ConfigError(f"{label}.{name}: missing field")
        raw = doc[name]
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise ConfigError(f"{label}.{name}: expected a number, got {raw!r}")
        values[name] = float(raw)
    extra = sorted(set(doc) - set(ENV_FIELDS))
    if extra:
        raise ConfigError(f"{label}: unknown field(s) {', '.join(extra)}")
    try:
        return Environment(**values)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{label}: {exc}") from exc


def parse_pair(doc) -> EnvPair:
    """Validated pair from ``{"env0": {...}, "env1": {...}}``."""
    if not isinstance(doc, dict):
        raise ConfigError("config: expected a JSON object with keys env0 and env1")
    envs = []
    for key in ("env0", "env1"):
        if key not in doc:
            raise ConfigError(f"{key}: missing environment")
        envs.append(_environment(doc[key], key))
    return validate_pair(*envs)


def load_pair(path) -> EnvPair:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read pair file {path}: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"pair file {path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    return parse_pair(doc)


def pair_document(pair: EnvPair) -> dict:
    return {"env0": pair.env0.as_dict(), "env1": pair.env1.as_dict()}


# ---------------------------------------------------------------------------
# writers


def write_csv(path, header, rows, comments=()) -> None:
    lines = [f"# {c}" for c in comments]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path) -> tuple:
    """``(header, rows)`` with numeric cells parsed as floats; comments skipped."""
    header, rows = None, []
    for line in Path(path).read_text().splitlines():
        if not line or line.startswith("#"):
            continue
        cells = line.split(",")
        if header is None:
            header = cells
            continue
        parsed = []
        for cell in cells:
            try:
                parsed.append(float(cell))
            except ValueError:
                parsed.append(cell)
        rows.append(parsed)
    return header, rows


def write_polylines(path, arcs: dict) -> None:
    lines = ["x,y"]
    for name, arc in arcs.items():
        lines.append(f"# arc={name}")
        lines.extend(f"{fmt(x)},{fmt(y)}" for x, y in np.asarray(arc))
    Path(path).write_text("\n".join(lines) + "\n")


def read_polylines(path) -> dict:
    arcs, current = {}, None
    for line in Path(path).read_text().splitlines()[1:]:
        if line.startswith("# arc="):
            current = line[len("# arc="):]
            arcs[current] = []
        elif line:
            arcs[current].append([float(v) for v in line.split(",")])
    return {name: np.array(points) for name, points in arcs.items()}


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        # JSON has no infinities; keep them as strings
        return value if math.isfinite(value) else fmt(value)
    return value


def dumps(doc) -> str:
    """JSON text; Python's float repr is the shortest exact round-trip form."""
    return json.dumps(_jsonable(doc), indent=2, sort_keys=False) + "\n"


def write_json(path, doc) -> None:
    Path(path).write_text(dumps(doc))


def manifest_path(out) -> Path:
    out = Path(out)
    return out.with_name(out.name + ".manifest.json")
