"""Problem and report files.

Both are UTF-8 JSON documents. The writer here is deterministic: keys keep
insertion order, floats carry 17 significant digits so every value round-trips
exactly, and nothing time- or host-dependent is emitted.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

from .dual import SolverConfig
from .spectral import CoefficientSequence, QuadratureConfig

TOOL_NAME = "majorant"
TOOL_VERSION = "0.1.0"

# top-level option keys that mirror CLI flags
OPTION_KEYS = ("mode", "strict", "points", "tol", "out")


class SchemaError(ValueError):
    """Malformed input; the message starts with the offending field path."""

    def __init__(self, path: str, problem: str):
        super().__init__(f"{path}: {problem}")
        self.path = path


# --- deterministic writer ---------------------------------------------------------


def format_float(v: float) -> str:
    if not math.isfinite(v):
        raise ValueError(f"non-finite float {v!r} cannot be serialized")
    s = format(v, ".17g")
    if not any(ch in s for ch in ".en"):
        s += ".0"
    return s


def _emit(obj: Any, indent: int, out: list[str]) -> None:
    pad = "  " * indent
    if obj is None or isinstance(obj, (bool, str)):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(format_float(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for i, (k, v) in enumerate(obj.items()):
            if not isinstance(k, str):
                raise TypeError(f"object keys must be strings, got {k!r}")
            out.append(f"{pad}  {json.dumps(k, ensure_ascii=False)}: ")
            _emit(v, indent + 1, out)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(obj, (list, tuple)):
        if not obj:
            out.append("[]")
            return
        # flat records such as coefficient entries stay on one line
        if all(isinstance(v, dict) and all(not isinstance(x, (dict, list)) for x in v.values()) for v in obj):
            out.append("[\n")
            for i, v in enumerate(obj):
                inner = ", ".join(f"{json.dumps(k)}: {_scalar(x)}" for k, x in v.items())
                out.append(f"{pad}  {{{inner}}}")
                out.append(",\n" if i < len(obj) - 1 else "\n")
            out.append(pad + "]")
            return
        out.append("[\n")
        for i, v in enumerate(obj):
            out.append(pad + "  ")
            _emit(v, indent + 1, out)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(pad + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def _scalar(x: Any) -> str:
    out: list[str] = []
    _emit(x, 0, out)
    return "".join(out)


def dumps(obj: Any) -> str:
    out: list[str] = []
    _emit(obj, 0, out)
    out.append("\n")
    return "".join(out)


def loads(text: str) -> Any:
    return json.loads(text)


# --- coefficient records ------------------------------------------------------------


def coefficient_records(c: CoefficientSequence) -> list[dict]:
    return [{"n": int(n), "re": float(v.real), "im": float(v.imag)} for n, v in c.items()]


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(path, f"expected a number, got {value!r}")
    v = float(value)
    if not math.isfinite(v):
        raise SchemaError(path, "must be finite")
    return v


def _integer(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        if isinstance(value, float) and value.is_integer():
            return int(value)
        raise SchemaError(path, f"expected an integer, got {value!r}")
    return value


def parse_records(raw: Any, path: str, require_nonzero: bool = True) -> tuple[tuple[int, float, float], ...]:
    if not isinstance(raw, list):
        raise SchemaError(path, "expected a list of {n, re, im} records")
    seen: set[int] = set()
    recs = []
    for i, rec in enumerate(raw):
        where = f"{path}[{i}]"
        if not isinstance(rec, dict):
            raise SchemaError(where, "expected an object with keys n, re, im")
        extra = set(rec) - {"n", "re", "im"}
        if extra:
            raise SchemaError(f"{where}.{sorted(extra)[0]}", "unknown key")
        if "n" not in rec:
            raise SchemaError(f"{where}.n", "missing")
        n = _integer(rec["n"], f"{where}.n")
        if n in seen:
            raise SchemaError(f"{where}.n", f"duplicate frequency {n}")
        seen.add(n)
        recs.append((n, _number(rec.get("re", 0.0), f"{where}.re"), _number(rec.get("im", 0.0), f"{where}.im")))
    if require_nonzero and not any(re or im for _, re, im in recs):
        raise SchemaError(path, "needs at least one nonzero coefficient")
    return tuple(sorted(recs))


def records_to_sequence(recs) -> CoefficientSequence:
    return CoefficientSequence({n: complex(re, im) for n, re, im in recs})


def _records_json(recs) -> list[dict]:
    return [{"n": n, "re": re, "im": im} for n, re, im in recs]


# --- config sections -------------------------------------------------------------------


def _section(raw: Any, path: str, cls) -> dict:
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise SchemaError(path, "expected an object")
    known = {f.name: f for f in fields(cls)}
    out = {}
    for key in sorted(raw):
        if key not in known:
            raise SchemaError(f"{path}.{key}", "unknown setting")
        default = getattr(cls(), key)
        v = raw[key]
        if isinstance(default, bool):
            if not isinstance(v, bool):
                raise SchemaError(f"{path}.{key}", f"expected true/false, got {v!r}")
        elif isinstance(default, str):
            if not isinstance(v, str):
                raise SchemaError(f"{path}.{key}", f"expected a string, got {v!r}")
        elif isinstance(default, int) or (default is None and key == "base_grid"):
            v = None if v is None else _integer(v, f"{path}.{key}")
        else:
            v = _number(v, f"{path}.{key}")
        out[key] = v
    try:
        cls(**out)
    except ValueError as exc:
        raise SchemaError(path, str(exc)) from None
    return out


def _options(raw: dict) -> dict:
    out = {}
    for key in OPTION_KEYS:
        if key not in raw:
            continue
        v = raw[key]
        if key == "mode":
            if v not in ("partial", "full"):
                raise SchemaError("mode", f"expected 'partial' or 'full', got {v!r}")
        elif key == "strict":
            if not isinstance(v, bool):
                raise SchemaError("strict", f"expected true/false, got {v!r}")
        elif key == "points":
            v = _integer(v, "points")
        elif key == "tol":
            v = _number(v, "tol")
        elif key == "out":
            if not isinstance(v, str):
                raise SchemaError("out", f"expected a path string, got {v!r}")
        out[key] = v
    return out


# --- problem file -----------------------------------------------------------------------


@dataclass(frozen=True)
class ProblemFile:
    """Parsed problem: order j, coefficient records and optional overrides.

    Only settings present in the file are stored, so serializing gives back the
    normalized input rather than a copy padded with defaults.
    """

    j: int
    records: tuple[tuple[int, float, float], ...]
    solver: dict = field(default_factory=dict)
    quadrature: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)

    @property
    def f(self) -> CoefficientSequence:
        return records_to_sequence(self.records)

    def solver_config(self, **overrides) -> SolverConfig:
        cfg = dict(self.solver)
        cfg.update({k: v for k, v in overrides.items() if v is not None})
        return SolverConfig(**cfg)

    def quadrature_config(self, **overrides) -> QuadratureConfig:
        cfg = dict(self.quadrature)
        cfg.update({k: v for k, v in overrides.items() if v is not None})
        return QuadratureConfig(**cfg)

    def to_json(self) -> dict:
        out: dict[str, Any] = {"j": self.j, "coefficients": _records_json(self.records)}
        if self.solver:
            out["solver"] = dict(self.solver)
        if self.quadrature:
            out["quadrature"] = dict(self.quadrature)
        out.update(self.options)
        return out


TOP_LEVEL_KEYS = {"j", "coefficients", "solver", "quadrature", *OPTION_KEYS}


def parse_problem(raw: Any, min_j: int = 2) -> ProblemFile:
    if not isinstance(raw, dict):
        raise SchemaError("(root)", "expected a JSON object")
    for key in sorted(raw):
        if key not in TOP_LEVEL_KEYS:
            raise SchemaError(key, "unknown key")
    if "j" not in raw:
        raise SchemaError("j", "missing")
    j = _integer(raw["j"], "j")
    if j < min_j:
        raise SchemaError("j", f"must be >= {min_j}, got {j}")
    if "coefficients" not in raw:
        raise SchemaError("coefficients", "missing")
    return ProblemFile(
        j=j,
        records=parse_records(raw["coefficients"], "coefficients"),
        solver=_section(raw.get("solver"), "solver", SolverConfig),
        quadrature=_section(raw.get("quadrature"), "quadrature", QuadratureConfig),
        options=_options(raw),
    )


def normalize_problem(raw: dict) -> dict:
    """Canonical form of a valid problem document, derived without the parser."""
    out: dict[str, Any] = {
        "j": int(raw["j"]),
        "coefficients": [
            {"n": int(r["n"]), "re": float(r.get("re", 0.0)), "im": float(r.get("im", 0.0))}
            for r in sorted(raw["coefficients"], key=lambda r: int(r["n"]))
        ],
    }
    for section, cls in (("solver", SolverConfig), ("quadrature", QuadratureConfig)):
        if raw.get(section):
            defaults = cls()
            out[section] = {
                k: float(v) if isinstance(getattr(defaults, k), float) else v for k, v in sorted(raw[section].items())
            }
    for key in OPTION_KEYS:
        if key in raw:
            out[key] = float(raw[key]) if key == "tol" else raw[key]
    return out


# --- verify input -----------------------------------------------------------------------


@dataclass(frozen=True)
class VerifyInput:
    j: int
    f: CoefficientSequence
    H: CoefficientSequence
    F: CoefficientSequence | None
    tol: float | None = None


def parse_verify(raw: Any) -> VerifyInput:
    if not isinstance(raw, dict):
        raise SchemaError("(root)", "expected a JSON object")
    for key in sorted(raw):
        if key not in {"j", "f", "H", "F", "tol"}:
            raise SchemaError(key, "unknown key")
    if "j" not in raw:
        raise SchemaError("j", "missing")
    j = _integer(raw["j"], "j")
    if j < 2:
        raise SchemaError("j", f"must be >= 2, got {j}")
    for key in ("f", "H"):
        if key not in raw:
            raise SchemaError(key, "missing section")
    f = records_to_sequence(parse_records(raw["f"], "f"))
    H = records_to_sequence(parse_records(raw["H"], "H", require_nonzero=False))
    F = records_to_sequence(parse_records(raw["F"], "F", require_nonzero=False)) if "F" in raw else None
    tol = _number(raw["tol"], "tol") if "tol" in raw else None
    return VerifyInput(j, f, H, F, tol)


# --- files ----------------------------------------------------------------------------------


def read_json(path: str | Path) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(str(path), f"cannot read file ({exc.strerror})") from None
    try:
        return loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(str(path), f"invalid JSON at line {exc.lineno} column {exc.colno}") from None


def write_text(path: str | Path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def is_report(raw: Any) -> bool:
    return isinstance(raw, dict) and raw.get("tool", {}).get("name") == TOOL_NAME and "F" in raw


def report_majorant(raw: dict) -> CoefficientSequence:
    return records_to_sequence(parse_records(raw["F"], "F"))
