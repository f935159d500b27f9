"""Run configuration: strict ``key=value`` parsing and validation."""

from __future__ import annotations

import math
import re
import shlex
from dataclasses import dataclass, fields, replace
from fractions import Fraction

COMMANDS = ("coeffs", "sum", "oracle", "compare", "regions")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class BetaPoint:
    """Coupling given as magnitude and argument (radians)."""

    abs: float
    arg: float = 0.0
    text: str = ""

    @property
    def value(self) -> complex:
        if self.arg == 0:
            return complex(self.abs)
        if self.arg == math.pi:
            return complex(-self.abs)
        return self.abs * complex(math.cos(self.arg), math.sin(self.arg))


@dataclass(frozen=True)
class RunConfig:
    command: str
    k: int = 1
    j: int = 0
    S: int = 40
    M: int = 15
    precision: int = 256
    beta: tuple = ()
    nodes: int = 64
    N: tuple = (100, 200, 400)
    steps: int = 16
    tol: float = 1e-8
    quad_tol: float = 1e-12
    f_tol: float = 1e-4
    g_tol: float = 1e-3
    delta: float = 0.1
    R: float = 1.0
    B_delta: float = 1.0
    radius: float = 0.05
    args: tuple = (0.0, math.pi, 13)
    thetas: tuple = (-0.6, 0.6, 13)
    cache: str | None = None
    output: str | None = None
    jobs: int = 1
    dump_hex: bool = False

    def echo(self) -> str:
        """Settings that determine the results (output path and worker count excluded)."""
        parts = []
        for f in fields(self):
            if f.name in ("output", "jobs"):
                continue
            v = getattr(self, f.name)
            if f.name == "beta":
                v = ",".join(b.text for b in v)
            elif isinstance(v, tuple):
                v = ",".join(str(x) for x in v) if f.name == "N" else ":".join(str(x) for x in v)
            parts.append(f"{f.name}={v}")
        return " ".join(parts)


# ---------------------------------------------------------------------------
# literals

_PI = re.compile(r"^([+-]?)(\d+(?:\.\d*)?(?:/\d+)?)?\*?pi(?:/(\d+))?$")


def parse_rational(text: str) -> Fraction:
    """``3``, ``-1/3``, ``0.25`` or ``1e-8``; rejects anything else."""
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"malformed rational literal {text!r}") from None


def parse_real(text: str) -> float:
    """Real literal; also accepts multiples of pi such as ``pi/3`` or ``-2pi/3``."""
    t = text.strip().replace(" ", "")
    m = _PI.match(t)
    if m:
        sign, coef, den = m.groups()
        val = math.pi * float(parse_rational(coef)) if coef else math.pi
        if den:
            val /= int(den)
        return -val if sign == "-" else val
    try:
        return float(parse_rational(t))
    except ConfigError:
        raise ConfigError(f"malformed real literal {text!r}") from None


def parse_beta_grid(text: str) -> tuple:
    """Comma separated ``|beta|@arg`` items; ``@arg`` defaults to 0."""
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            raise ConfigError(f"empty entry in beta grid {text!r}")
        mag, _, arg = item.partition("@")
        r = parse_real(mag)
        s = parse_real(arg) if arg else 0.0
        if r < 0:
            raise ConfigError(f"beta magnitude must be >= 0, got {mag!r}")
        out.append(BetaPoint(r, s, item))
    return tuple(out)


def _int(text):
    v = parse_rational(text)
    if v.denominator != 1:
        raise ConfigError(f"expected an integer, got {text!r}")
    return int(v)


def _range(text):
    lo, hi, n = text.split(":")
    return (parse_real(lo), parse_real(hi), _int(n))


def _bool(text):
    if text.lower() in ("1", "true", "yes", "on"):
        return True
    if text.lower() in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


_PARSERS = {
    "command": str, "k": _int, "j": _int, "S": _int, "M": _int, "precision": _int,
    "beta": parse_beta_grid, "nodes": _int,
    "N": lambda t: tuple(_int(x) for x in t.split(",")),
    "steps": _int, "tol": parse_real, "quad_tol": parse_real, "f_tol": parse_real,
    "g_tol": parse_real, "delta": parse_real, "R": parse_real, "B_delta": parse_real,
    "radius": parse_real, "args": _range, "thetas": _range, "cache": str, "output": str,
    "jobs": _int, "dump_hex": _bool,
}


def tokenize(text: str) -> list[str]:
    tokens = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            tokens.extend(shlex.split(line))
    return tokens


def _assign(values: dict, token: str):
    key, eq, val = token.partition("=")
    key = key.strip()
    if not eq:
        raise ConfigError(f"expected key=value, got {token!r}")
    if key not in _PARSERS:
        raise ConfigError(f"unknown key {key!r}")
    try:
        values[key] = _PARSERS[key](val.strip())
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {val!r} ({exc})") from None


def parse_config(text: str = "", overrides=()) -> RunConfig:
    """Build a validated :class:`RunConfig`.

    ``text`` holds whitespace or newline separated ``key=value`` pairs
    (``#`` starts a comment); ``overrides`` are applied afterwards.
    """
    values: dict = {}
    for token in tokenize(text):
        _assign(values, token)
    for token in overrides:
        _assign(values, token)
    if "command" not in values:
        raise ConfigError("missing required key 'command'")
    cfg = RunConfig(**values)
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> RunConfig:
    if cfg.command not in COMMANDS:
        raise ConfigError(f"unknown command {cfg.command!r}; expected one of {', '.join(COMMANDS)}")
    if cfg.k < 1:
        raise ConfigError("k must be >= 1")
    if cfg.j < 0:
        raise ConfigError("j must be >= 0")
    for name in ("S", "precision", "nodes", "steps", "jobs"):
        if getattr(cfg, name) < 1 and not (name == "S" and cfg.S == 0):
            raise ConfigError(f"{name} must be positive")
    if cfg.M < 0:
        raise ConfigError("M must be >= 0")
    for name in ("tol", "quad_tol", "f_tol", "g_tol", "R", "B_delta", "radius"):
        if not getattr(cfg, name) > 0:
            raise ConfigError(f"{name} must be positive")
    if not 0 < cfg.delta < math.pi / 4:
        raise ConfigError("delta must lie in (0, pi/4)")
    if any(n < 2 * cfg.k + 2 for n in cfg.N) or list(cfg.N) != sorted(cfg.N):
        raise ConfigError(f"N schedule must be increasing with every N >= 2k+2 = {2 * cfg.k + 2}")
    if cfg.command in ("sum", "compare") and cfg.S < 2 * cfg.M:
        raise ConfigError(f"S >= 2M is required for a [M/M] Pade approximant (S={cfg.S}, M={cfg.M})")
    if cfg.command in ("sum", "oracle", "compare") and not cfg.beta:
        raise ConfigError(f"command {cfg.command!r} needs a non-empty beta grid")
    for name in ("args", "thetas"):
        if getattr(cfg, name)[2] < 1:
            raise ConfigError(f"{name} needs at least one point")
    return cfg


def with_overrides(cfg: RunConfig, **kw) -> RunConfig:
    return validate(replace(cfg, **kw))
