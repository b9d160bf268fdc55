"""Line-oriented scenario configuration files.

One ``key = value`` per line, ``#`` starts a comment.  Numbers are decimal or
scientific notation; profiles are written as ``name(param=value, ...)``.
Required keys: ``scenario``, ``nx``, ``ny``, ``T``, ``M``, ``epsilon``,
``nu_T``, ``nu_d``, ``nu_f``, ``potential``, ``c0``.  Everything else has the
default listed in :data:`FIELDS`.
"""
from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .grid import SpatialGrid
from .profiles import GENERATORS, VECTOR_GENERATORS, make_profile


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


_NUMBER = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")
_INT = re.compile(r"[+-]?\d+")
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_\-]*")
_PROFILE = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\s*(?:\((.*)\))?")


@dataclass(frozen=True)
class ProfileSpec:
    name: str
    params: tuple[tuple[str, float], ...] = ()

    def build(self, grid: SpatialGrid, eps: float) -> np.ndarray:
        return make_profile(self.name, grid, eps, **dict(self.params))

    @property
    def vector(self) -> bool:
        return self.name in VECTOR_GENERATORS or (
            self.name == "constant" and any(k in ("value2", "value3") for k, _ in self.params))

    def __str__(self) -> str:
        if not self.params:
            return self.name
        return f"{self.name}({', '.join(f'{k}={v!r}' for k, v in self.params)})"


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    nx: int
    ny: int
    T: float
    M: int
    epsilon: float
    nu_T: float
    nu_d: float
    nu_f: float
    potential: str
    c0: ProfileSpec
    c_T: ProfileSpec | None = None
    c_d: ProfileSpec | None = None
    x_min: float = -1.0
    x_max: float = 1.0
    y_min: float = -1.0
    y_max: float = 1.0
    N: int = 2
    sigma: float = 0.01
    scheme: str = "implicit"
    mode: str = "optimize"
    tol: float = 1e-8
    tol_cg: float = 1e-13
    forcing: bool = False
    max_iter: int = 200
    warm_start: bool = False
    sigma_0: float = 0.1
    sigma_factor: float = 0.1
    sigma_min: float = 1e-6
    alpha_0: float = 1.0
    alpha_min: float = 1e-9
    snapshots: tuple[int, ...] = ()
    paper_nx: int | None = None
    paper_ny: int | None = None
    paper_M: int | None = None

    @property
    def target(self) -> ProfileSpec:
        return self.c0 if self.c_T is None else self.c_T

    @property
    def obstacle(self) -> bool:
        return self.potential == "obstacle"

    def grid(self) -> SpatialGrid:
        return SpatialGrid(self.x_min, self.x_max, self.y_min, self.y_max, self.nx, self.ny)

    def at_paper_scale(self) -> "ScenarioConfig":
        return dataclasses.replace(
            self, nx=self.paper_nx or self.nx, ny=self.paper_ny or self.ny,
            M=self.paper_M or self.M)

    def snapshot_steps(self) -> tuple[int, ...]:
        steps = self.snapshots or (0, self.M // 2, (3 * self.M) // 4, self.M)
        return tuple(sorted(set(s for s in steps if 0 <= s <= self.M)))


REQUIRED = ("scenario", "nx", "ny", "T", "M", "epsilon", "nu_T", "nu_d", "nu_f",
            "potential", "c0")
FIELDS = {f.name: f for f in dataclasses.fields(ScenarioConfig)}
_INT_KEYS = {"nx", "ny", "M", "N", "max_iter", "paper_nx", "paper_ny", "paper_M"}
_STR_CHOICES = {
    "potential": ("double_well", "obstacle"),
    "scheme": ("implicit", "semi-implicit"),
    "mode": ("optimize", "forward"),
}


def _number(text: str, line: int, key: str) -> float:
    if not _NUMBER.fullmatch(text):
        raise ConfigError(f"{key}: expected a number, got {text!r}", line)
    return float(text)


def _integer(text: str, line: int, key: str) -> int:
    if not _INT.fullmatch(text):
        raise ConfigError(f"{key}: expected an integer, got {text!r}", line)
    return int(text)


def parse_profile(text: str, line: int | None = None, key: str = "profile") -> ProfileSpec:
    m = _PROFILE.fullmatch(text.strip())
    if not m:
        raise ConfigError(f"{key}: malformed profile {text!r}", line)
    name, body = m.group(1), m.group(2)
    if name not in GENERATORS:
        raise ConfigError(f"{key}: unknown profile generator {name!r}", line)
    params = []
    if body and body.strip():
        for item in body.split(","):
            k, sep, v = item.partition("=")
            k, v = k.strip(), v.strip()
            if not sep or not _NAME.fullmatch(k):
                raise ConfigError(f"{key}: malformed profile parameter {item.strip()!r}", line)
            if k in dict(params):
                raise ConfigError(f"{key}: duplicate profile parameter {k!r}", line)
            params.append((k, _number(v, line, f"{key}.{k}")))
    return ProfileSpec(name, tuple(params))


def _convert(key: str, text: str, line: int):
    if key in _INT_KEYS:
        return _integer(text, line, key)
    if key in ("c0", "c_T", "c_d"):
        return parse_profile(text, line, key)
    if key in ("warm_start", "forcing"):
        if text not in ("true", "false"):
            raise ConfigError(f"{key}: expected true or false, got {text!r}", line)
        return text == "true"
    if key == "snapshots":
        return tuple(_integer(t.strip(), line, key) for t in text.split(","))
    if key == "scenario":
        if not _NAME.fullmatch(text):
            raise ConfigError(f"scenario: invalid tag {text!r}", line)
        return text
    if key in _STR_CHOICES:
        if text not in _STR_CHOICES[key]:
            raise ConfigError(f"{key}: expected one of {_STR_CHOICES[key]}, got {text!r}", line)
        return text
    return _number(text, line, key)


def parse_config(text: str) -> ScenarioConfig:
    values: dict = {}
    lines: dict[str, int] = {}
    for no, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        key, sep, value = body.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", no)
        if key not in FIELDS:
            raise ConfigError(f"unknown key {key!r}", no)
        if key in values:
            raise ConfigError(f"duplicate key {key!r} (first set on line {lines[key]})", no)
        if not value:
            raise ConfigError(f"{key}: missing value", no)
        values[key] = _convert(key, value, no)
        lines[key] = no
    missing = [k for k in REQUIRED if k not in values]
    if missing:
        raise ConfigError(f"missing required key(s): {', '.join(missing)}")
    cfg = ScenarioConfig(**values)
    validate(cfg, lines)
    return cfg


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return parse_config(text)


def validate(cfg: ScenarioConfig, lines: dict[str, int] | None = None) -> None:
    lines = lines or {}

    def fail(key, msg):
        raise ConfigError(msg, lines.get(key))

    for key in ("nu_T", "nu_d", "nu_f"):
        if getattr(cfg, key) < 0:
            fail(key, f"{key} must be non-negative")
    for key in ("epsilon", "T", "tol", "tol_cg"):
        if not getattr(cfg, key) > 0:
            fail(key, f"{key} must be positive")
    for key in ("nx", "ny"):
        if getattr(cfg, key) < 2:
            fail(key, f"{key} must be at least 2")
    if cfg.M < 1:
        fail("M", "M must be at least 1")
    if not (cfg.x_max > cfg.x_min and cfg.y_max > cfg.y_min):
        fail("x_max", "empty domain")
    if cfg.nu_d > 0 and cfg.c_d is None:
        fail("nu_d", "nu_d > 0 needs a desired state c_d")
    profiles = [("c0", cfg.c0), ("c_T", cfg.c_T), ("c_d", cfg.c_d)]
    if cfg.obstacle:
        if cfg.N < 2:
            fail("N", "obstacle scenarios need N >= 2")
        if not 0 < cfg.sigma < 0.25:
            fail("sigma", "sigma must lie in (0, 1/4)")
        grid = cfg.grid()
        for key, spec in profiles:
            if spec is None:
                continue
            try:
                c = spec.build(grid, cfg.epsilon)
            except (TypeError, ValueError) as exc:
                fail(key, f"{key}: {exc}")
            if c.shape != (cfg.N, *grid.shape):
                fail(key, f"{key}: profile has shape {c.shape}, expected {(cfg.N, *grid.shape)}")
            if key == "c0":
                drift = max(float(np.max(np.abs(c.sum(axis=0) - 1.0))), float(-c.min()))
                if drift > 1e-12:
                    fail(key, f"c0 leaves the Gibbs simplex by {drift:.2e}")
    else:
        if cfg.N != 2:
            fail("N", "the double-well model is the scalar reduction of N = 2")
        grid = cfg.grid()
        for key, spec in profiles:
            if spec is None:
                continue
            if spec.vector:
                fail(key, f"{key}: vector profile {spec.name!r} in a scalar scenario")
            try:
                spec.build(grid, cfg.epsilon)
            except (TypeError, ValueError) as exc:
                fail(key, f"{key}: {exc}")
    if not (0 < cfg.sigma_min <= cfg.sigma_0 < 0.25 and 0 < cfg.sigma_factor < 1):
        fail("sigma_0", "invalid sigma schedule")
    if not 0 < cfg.alpha_min <= cfg.alpha_0:
        fail("alpha_min", "need 0 < alpha_min <= alpha_0")


def format_config(cfg: ScenarioConfig) -> str:
    """Text that :func:`parse_config` maps back to ``cfg``; defaults are omitted."""
    lines = []
    for name, f in FIELDS.items():
        value = getattr(cfg, name)
        if name not in REQUIRED and value == f.default:
            continue
        if value is None:
            continue
        if isinstance(value, bool):
            text = "true" if value else "false"
        elif isinstance(value, tuple):
            text = ", ".join(str(v) for v in value)
        elif isinstance(value, float):
            text = repr(value)
        else:
            text = str(value)
        lines.append(f"{name} = {text}")
    return "\n".join(lines) + "\n"
