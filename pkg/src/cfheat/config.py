"""Strict TOML run configuration.

Example::

    alpha = 0.5
    k = 2
    lambdas = [0.0, 0.0, 1.0]
    q = 1.0
    forcing = "t^4*sin(pi*x)"
    initial = "zero"            # or a table: [initial] 1 = [0.0, 0.0, 0.0]
    modes = 8
    nt = 20
    nx = 20
    solver = "auto"
    output = "out"

    [tolerances]
    mode_residual = 1e-4
    grid_residual = 1e-3
    compatibility = 1e-10
    quadrature_nodes = 4096
"""
from __future__ import annotations

import hashlib
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from cfheat.cf_operator import DEFAULT_NODES, FractionalOrder
from cfheat.forcing_expr import ExprSyntaxError
from cfheat.ode_reduction import ProblemSpec
from cfheat.spectral import ForcingField

__all__ = ["ConfigError", "Tolerances", "RunConfig", "load_config", "parse_config"]

SOLVERS = ("auto", "closed-form", "companion")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Tolerances:
    mode_residual: float = 1e-4
    grid_residual: float = 1e-3
    compatibility: float = 1e-10
    quadrature_nodes: int = DEFAULT_NODES


@dataclass(frozen=True)
class RunConfig:
    alpha: float
    k: int
    lambdas: tuple[float, ...]
    forcing: str
    q: float = 1.0
    initial: dict[int, tuple[float, ...]] = field(default_factory=dict)
    modes: int = 1
    nt: int = 20
    nx: int = 20
    tolerances: Tolerances = Tolerances()
    solver: str = "auto"
    output: str | None = None
    sha256: str = ""

    def problem(self) -> ProblemSpec:
        try:
            forcing = ForcingField(self.forcing, self.q)
        except ExprSyntaxError as exc:
            raise ConfigError(f"forcing: {exc}") from exc
        try:
            return ProblemSpec(
                order=FractionalOrder(self.alpha),
                k=self.k,
                lambdas=self.lambdas,
                q=self.q,
                forcing=forcing,
                initial=self.initial,
                modes=self.modes,
                nt=self.nt,
                nx=self.nx,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


_REQUIRED = {"alpha", "k", "lambdas", "forcing"}
_OPTIONAL = {"q", "initial", "modes", "nt", "nx", "tolerances", "solver", "output"}


def _expect(value, kind, key):
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if kind is int and isinstance(value, bool):
        raise ConfigError(f"{key}: expected integer, got boolean")
    if not isinstance(value, kind):
        raise ConfigError(f"{key}: expected {kind.__name__}, got {type(value).__name__}")
    return value


def _positive_int(raw, key, default):
    value = _expect(raw.get(key, default), int, key)
    if value < 1:
        raise ConfigError(f"{key}: must be a positive integer, got {value}")
    return value


def _initial(raw, k: int, modes: int) -> dict[int, tuple[float, ...]]:
    if raw == "zero":
        return {}
    if not isinstance(raw, dict):
        raise ConfigError('initial: expected "zero" or a table of per-mode vectors')
    out = {}
    for key, vector in raw.items():
        try:
            m = int(key)
        except ValueError:
            raise ConfigError(f"initial: mode key {key!r} is not an integer") from None
        if not 1 <= m <= modes:
            raise ConfigError(f"initial: mode {m} outside 1..{modes}")
        if not isinstance(vector, list) or len(vector) != k + 1:
            raise ConfigError(f"initial.{key}: expected a vector of length {k + 1}")
        out[m] = tuple(_expect(v, float, f"initial.{key}") for v in vector)
    return out


def _tolerances(raw) -> Tolerances:
    if not isinstance(raw, dict):
        raise ConfigError("tolerances: expected a table")
    known = set(Tolerances.__dataclass_fields__)
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"tolerances: unknown keys {sorted(unknown)}")
    values = {}
    for key, value in raw.items():
        kind = int if key == "quadrature_nodes" else float
        value = _expect(value, kind, f"tolerances.{key}")
        if value <= 0:
            raise ConfigError(f"tolerances.{key}: must be positive")
        values[key] = value
    return Tolerances(**values)


def parse_config(text: str) -> RunConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config: {exc}") from exc

    unknown = set(raw) - _REQUIRED - _OPTIONAL
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}")
    missing = _REQUIRED - set(raw)
    if missing:
        raise ConfigError(f"missing keys {sorted(missing)}")

    k = _expect(raw["k"], int, "k")
    if k < 0:
        raise ConfigError(f"k: must be non-negative, got {k}")
    lambdas = _expect(raw["lambdas"], list, "lambdas")
    modes = _positive_int(raw, "modes", 1)
    solver = _expect(raw.get("solver", "auto"), str, "solver")
    if solver not in SOLVERS:
        raise ConfigError(f"solver: expected one of {SOLVERS}, got {solver!r}")
    output = raw.get("output")
    if output is not None:
        output = _expect(output, str, "output")

    return RunConfig(
        alpha=_expect(raw["alpha"], float, "alpha"),
        k=k,
        lambdas=tuple(_expect(v, float, "lambdas") for v in lambdas),
        forcing=_expect(raw["forcing"], str, "forcing"),
        q=_expect(raw.get("q", 1.0), float, "q"),
        initial=_initial(raw.get("initial", "zero"), k, modes),
        modes=modes,
        nt=_positive_int(raw, "nt", 20),
        nx=_positive_int(raw, "nx", 20),
        tolerances=_tolerances(raw.get("tolerances", {})),
        solver=solver,
        output=output,
        sha256=hashlib.sha256(text.encode()).hexdigest(),
    )


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_config(text)
