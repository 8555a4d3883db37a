"""Run configuration: a small ``key = value`` grammar with per-subcommand sections.

Grammar (UTF-8)::

    # comment
    [run]
    subcommand = cusp
    tol = 1e-10
    [cusp]
    profile = exp
    n = 3

Blank lines and ``#`` comments are ignored. ``[run]`` holds the keys shared
by every subcommand; the section named after the subcommand holds its
parameters. Values are plain tokens; lists are comma separated. All
problems are collected and reported together.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Any, Callable

from .errors import CuspforgeError

TOL_RANGE = (1e-12, 1e-4)


class ParseError(CuspforgeError):
    def __init__(self, line: int, column: int, message: str):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line, self.column, self.message = line, column, message


class ValidationError(CuspforgeError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path, self.message = path, message


class ConfigErrors(CuspforgeError):
    """Every parse and validation error found in one configuration."""

    def __init__(self, errors: list[CuspforgeError]):
        super().__init__("; ".join(str(e) for e in errors))
        self.errors = errors


@dataclass(frozen=True)
class Field:
    kind: str  # "int", "float", "str", "bool", "floats"
    default: Any
    check: Callable[[Any], str | None] | None = None
    choices: tuple[str, ...] | None = None


def _positive(v):
    return None if v > 0 else "must be positive"


def _at_least(lo):
    return lambda v: None if v >= lo else f"must be at least {lo}"


def _tol(v):
    lo, hi = TOL_RANGE
    return None if lo <= v <= hi else f"tol={v!r} outside the allowed interval [{lo}, {hi}]"


def _negative(v):
    return None if v < 0 else "must be negative"


RUN_FIELDS = {
    "subcommand": Field("str", None),
    "tol": Field("float", 1e-10, _tol),
    "seed": Field("int", 0, _at_least(0)),
    "threads": Field("int", 1, _at_least(1)),
    "out": Field("str", "."),
}

PROFILE_CHOICES = ("exp", "cosh", "decay")

SCHEMAS: dict[str, dict[str, Field]] = {
    "cusp": {
        "profile": Field("str", "exp", choices=PROFILE_CHOICES),
        "mode": Field("str", "exponential", choices=("exponential", "cubic-decay")),
        "n": Field("int", 3, _at_least(2)),
        "a": Field("float", 0.0),
        "cross_section_volume": Field("float", 1.0, _positive),
        "t_max": Field("float", 40.0),
        "points": Field("int", 1001, _at_least(2)),
    },
    "curvature": {
        "metric": Field("str", "cusp", choices=("cusp", "fermi", "graph")),
        "profile": Field("str", "exp", choices=PROFILE_CHOICES),
        "mode": Field("str", "exponential", choices=("exponential", "cubic-decay")),
        "n": Field("int", 3, _at_least(2)),
        "a": Field("float", 0.0),
        "t_lo": Field("float", 0.0),
        "t_hi": Field("float", 10.0),
        "resolution": Field("int", 1001, _at_least(2)),
        "checks": Field("int", 20, _at_least(1)),
        "radii": Field("floats", (5.0, 10.0, 20.0)),
        "budget": Field("float", math.pi / 10, _positive),
    },
    "smooth": {
        "A": Field("float", 2.0, _at_least(2.0)),
        "a": Field("float", 1.0, _positive),
        "grid": Field("int", 10_000, _at_least(10)),
    },
    "assemble": {
        "graph": Field("str", "line", choices=("line", "chord", "trivalent-tree", "f2-cayley")),
        "schedule": Field("str", "power", choices=("constant", "power", "exponential", "mixed", "cyclic")),
        "C": Field("float", 1.0, _positive),
        "b": Field("float", 1.0, _positive),
        "q": Field("float", 1.0),
        "beta": Field("float", 1.0, _at_least(1.0)),
        "d": Field("int", 1, _at_least(1)),
        "m": Field("int", 2, _at_least(2)),
        "enforce_side_condition": Field("bool", True),
        "n": Field("int", 3, _at_least(2)),
        "block_volume": Field("float", 1.0, _positive),
        "depth": Field("int", 6, _at_least(1)),
    },
    "plan-growth": {
        "budget": Field("str", "exp", choices=("exp", "const", "power")),
        "coef": Field("float", 1.0, _positive),
        "rate": Field("float", 2.0),
        "n": Field("int", 3, _at_least(2)),
        "a": Field("float", -1.0, _negative),
        "horizon": Field("float", 40.0, _positive),
        "T_cap": Field("float", 8.0, _positive),
        "grid": Field("int", 2000, _at_least(10)),
    },
    "cgvd": {
        "model": Field("str", "cusp", choices=("cusp", "planner")),
        "profile": Field("str", "decay", choices=("exp", "decay")),
        "n": Field("int", 2, _at_least(2)),
        "a": Field("float", -1.0),
        "horizon": Field("float", 20.0, _positive),
        "r_min": Field("float", 2.0, _positive),
        "r_max": Field("float", 10.0, _positive),
        "points": Field("int", 81, _at_least(2)),
        "width": Field("float", 1.0, _positive),
        "threshold": Field("float", 1e-6, _positive),
    },
    "geodesic": {
        "surface": Field("str", "revolution", choices=("revolution", "cylinder", "graph")),
        "h": Field("float", 1.0, _positive),
        "u0": Field("float", 0.0),
        "v0": Field("float", 0.0),
        "alpha0": Field("float", 0.7),
        "length": Field("float", 100.0, _positive),
        "drift_limit": Field("float", 1e-8, _positive),
    },
    "visibility": {
        "h": Field("float", 1.0, _positive),
        "z0": Field("float", 0.0),
        "ratio": Field("float", 0.9, lambda v: None if 0 <= v < 1 else "must lie in [0, 1)"),
        "count": Field("int", 6, _at_least(2)),
        "step": Field("float", 10.0, _positive),
    },
    "invisibility": {
        "separation": Field("float", math.pi / 100, _positive),
        "horizons": Field("floats", (5.0, 10.0, 20.0, 40.0)),
        "direction": Field("float", math.pi / 4),
        "cells": Field("float", 2.5e5, _at_least(100.0)),
        "budget": Field("float", math.pi / 10, _positive),
    },
}

SUBCOMMANDS = tuple(SCHEMAS)


@dataclass
class RunConfig:
    subcommand: str
    params: dict[str, Any] = field(default_factory=dict)
    tol: float = 1e-10
    seed: int = 0
    threads: int = 1
    out: str = "."


_SECTION = re.compile(r"^\[\s*([A-Za-z0-9_-]+)\s*\]$")
_KEY = re.compile(r"^[A-Za-z_][A-Za-z0-9_-]*$")


def _convert(kind: str, raw: str):
    if kind == "int":
        return int(raw, 10)
    if kind == "float":
        v = float(raw)
        if not math.isfinite(v):
            raise ValueError("must be finite")
        return v
    if kind == "bool":
        low = raw.lower()
        if low in ("true", "yes", "1"):
            return True
        if low in ("false", "no", "0"):
            return False
        raise ValueError("expected true or false")
    if kind == "floats":
        vals = tuple(float(x) for x in raw.split(",") if x.strip())
        if not vals:
            raise ValueError("expected a comma-separated list of numbers")
        return vals
    return raw


def _tokenise(text: str, errors: list) -> dict[str, dict[str, tuple[str, int, int]]]:
    sections: dict[str, dict[str, tuple[str, int, int]]] = {"run": {}}
    current = "run"
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        indent = len(line) - len(line.lstrip()) + 1
        m = _SECTION.match(stripped)
        if m:
            current = m.group(1)
            sections.setdefault(current, {})
            continue
        if stripped.startswith("["):
            errors.append(ParseError(lineno, indent, "malformed section header"))
            continue
        if "=" not in stripped:
            errors.append(ParseError(lineno, indent, "expected 'key = value'"))
            continue
        key, value = (s.strip() for s in stripped.split("=", 1))
        if not _KEY.match(key):
            errors.append(ParseError(lineno, indent, f"invalid key {key!r}"))
            continue
        if not value:
            col = line.index("=") + 2
            errors.append(ParseError(lineno, col, f"missing value for {key!r}"))
            continue
        if key in sections[current]:
            errors.append(ParseError(lineno, indent, f"duplicate key {key!r} in section [{current}]"))
            continue
        sections[current][key] = (value, lineno, line.index(value) + 1)
    return sections


def _validate(path: str, fields: dict[str, Field], raw: dict, errors: list) -> dict[str, Any]:
    out = {k: f.default for k, f in fields.items()}
    for key, (value, _, _) in raw.items():
        if key not in fields:
            errors.append(ValidationError(f"{path}.{key}", f"unknown key {key!r}"))
            continue
        f = fields[key]
        try:
            v = _convert(f.kind, value)
        except ValueError as exc:
            errors.append(ValidationError(f"{path}.{key}", f"cannot read {value!r} as {f.kind}: {exc}"))
            continue
        if f.choices is not None and v not in f.choices:
            errors.append(ValidationError(f"{path}.{key}", f"{v!r} is not one of {', '.join(f.choices)}"))
            continue
        if f.check is not None:
            problem = f.check(v)
            if problem:
                errors.append(ValidationError(f"{path}.{key}", problem))
                continue
        out[key] = v
    return out


def parse_config(text: str, subcommand: str | None = None, overrides: dict[str, Any] | None = None) -> RunConfig:
    """Parse and validate a configuration.

    ``subcommand`` (from the command line) takes precedence over
    ``[run] subcommand``; ``overrides`` replaces ``[run]`` keys.

    Raises
    ------
    ConfigErrors
        Carrying every :class:`ParseError` and :class:`ValidationError` found.
    """
    errors: list[CuspforgeError] = []
    sections = _tokenise(text, errors)
    run_raw = dict(sections.get("run", {}))
    for k, v in (overrides or {}).items():
        if v is not None:
            run_raw[k] = (str(v), 0, 0)
    run = _validate("run", RUN_FIELDS, run_raw, errors)
    sub = subcommand or run["subcommand"]
    if sub is None:
        errors.append(ValidationError("run.subcommand", "no subcommand given"))
    elif sub not in SCHEMAS:
        errors.append(ValidationError("run.subcommand", f"unknown subcommand {sub!r}"))
    elif run["subcommand"] not in (None, sub):
        errors.append(ValidationError("run.subcommand", f"config is for {run['subcommand']!r}, not {sub!r}"))
    for name in sections:
        if name != "run" and name not in SCHEMAS:
            errors.append(ValidationError(name, f"unknown section [{name}]"))
        elif name not in ("run", sub) and sections[name]:
            errors.append(ValidationError(name, f"section [{name}] does not apply to subcommand {sub!r}"))
    params = {}
    if sub in SCHEMAS:
        params = _validate(sub, SCHEMAS[sub], sections.get(sub, {}), errors)
    if errors:
        raise ConfigErrors(errors)
    return RunConfig(sub, params, run["tol"], run["seed"], run["threads"], run["out"])


RESULT_RE = re.compile(r"^RESULT (\S+) (pass|fail)((?: [A-Za-z_][A-Za-z0-9_-]*=\S+)*)$")


def format_result(subcommand: str, ok: bool, metrics: dict[str, Any]) -> str:
    """``RESULT <subcommand> <pass|fail> key=value ...`` with whitespace-free values."""
    parts = [f"RESULT {subcommand} {'pass' if ok else 'fail'}"]
    for k, v in metrics.items():
        s = repr(v) if isinstance(v, float) else str(v)
        parts.append(f"{k}={s.replace(' ', '_')}")
    return " ".join(parts)


def parse_result(line: str) -> tuple[str, bool, dict[str, str]]:
    m = RESULT_RE.match(line.strip())
    if not m:
        raise ValueError(f"not a RESULT line: {line!r}")
    metrics = dict(tok.split("=", 1) for tok in m.group(3).split())
    return m.group(1), m.group(2) == "pass", metrics
