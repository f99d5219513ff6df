"""Flat ``key = value`` run configuration."""

import hashlib
import math
from dataclasses import asdict, dataclass, fields
from fractions import Fraction

from .exceptions import ConfigError
from .nlops import Material

__all__ = ["RunConfig", "parse_config", "COMMANDS"]

COMMANDS = ("converge", "solve", "weights", "symbols", "truncation")
_COUPLINGS = ("fixed", "h", "h2", "sqrt", "quasi")


def _number(text):
    # fractions such as 1/8 are accepted wherever a float is
    return float(Fraction(text.strip())) if "/" in text else float(text)


def _floats(text):
    return tuple(_number(t) for t in text.replace(";", ",").split(",") if t.strip())


def _boolean(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _optional_float(text):
    return None if text.strip().lower() in ("", "none") else _number(text)


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration of one CLI run.

    Defaults: ``E = 1``, ``nu = 0.4``, ``m0 = 2``, ``epsilon1 = 0.25``,
    ``h_hat = (1, 0.5)``, fixed horizon ``delta = 0.25``.
    """

    command: str = "converge"
    kernel: str = "inverse_distance"
    E: float = 1.0
    nu: float = 0.4
    lam: float = None
    mu: float = None
    allow_lambda_lt_mu: bool = False
    h_max: float = 1 / 16
    h_hat: tuple = (1.0, 0.5)
    lower: tuple = (0.0, 0.0)
    upper: tuple = (1.0, 1.0)
    delta: float = 0.25
    coupling: str = "h"
    ladder: tuple = (1 / 8, 1 / 16, 1 / 32, 1 / 64)
    m0: float = 2.0
    epsilon1: float = 0.25
    mode: str = "continuous"
    reference_factor: int = 4
    scan_deltas: tuple = (0.25, 0.125, 0.0625)
    scan_ratio: float = 2.0
    resolution: int = 33
    out: str = "."
    seed: int = 0
    timing: bool = False

    def material(self):
        if self.lam is not None or self.mu is not None:
            if self.lam is None or self.mu is None:
                raise ConfigError("lam and mu must be given together", "lam" if self.lam is None else "mu")
            return Material(self.lam, self.mu, 2, self.allow_lambda_lt_mu)
        return Material.from_engineering(self.E, self.nu, 2, self.allow_lambda_lt_mu)

    def digest(self):
        """Short hash of every setting except the output directory."""
        items = [(k, v) for k, v in sorted(asdict(self).items()) if k != "out"]
        text = ";".join(f"{k}={v!r}" for k, v in items)
        return hashlib.sha256(text.encode()).hexdigest()[:16]


_PARSERS = {
    "command": str,
    "kernel": str,
    "E": _number,
    "nu": _number,
    "lam": _optional_float,
    "mu": _optional_float,
    "allow_lambda_lt_mu": _boolean,
    "h_max": _number,
    "h_hat": _floats,
    "lower": _floats,
    "upper": _floats,
    "delta": _number,
    "coupling": str,
    "ladder": _floats,
    "m0": _number,
    "epsilon1": _number,
    "mode": str,
    "reference_factor": int,
    "scan_deltas": _floats,
    "scan_ratio": _number,
    "resolution": int,
    "out": str,
    "seed": int,
    "timing": _boolean,
}
assert set(_PARSERS) == {f.name for f in fields(RunConfig)}


def _read_lines(text):
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key] = value
    return values


def parse_config(text="", overrides=None):
    """Parse a configuration document and apply overrides.

    Parameters
    ----------
    text : str
        ``key = value`` lines; ``#`` starts a comment.
    overrides : dict, optional
        Raw string values (for example from command-line flags) that take
        precedence over ``text``.

    Returns
    -------
    RunConfig

    Raises
    ------
    ConfigError
        Unknown key, value of the wrong type, or violated precondition;
        the offending key is available as ``error.key``.
    """
    raw = _read_lines(text)
    for key, value in (overrides or {}).items():
        raw[key.replace("-", "_")] = value if isinstance(value, str) else str(value)
    parsed = {}
    for key, value in raw.items():
        if key not in _PARSERS:
            raise ConfigError(f"unknown key {key!r}", key)
        try:
            parsed[key] = _PARSERS[key](value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"invalid value for {key!r}: {value!r} ({exc})", key) from exc
    config = RunConfig(**parsed)
    _validate(config)
    return config


def _validate(cfg):
    def fail(key, message):
        raise ConfigError(f"{key}: {message}", key)

    if cfg.command not in COMMANDS:
        fail("command", f"must be one of {COMMANDS}, got {cfg.command!r}")
    if cfg.kernel != "inverse_distance":
        fail("kernel", "only the inverse_distance kernel is available from the command line")
    if cfg.coupling not in _COUPLINGS:
        fail("coupling", f"must be one of {_COUPLINGS}, got {cfg.coupling!r}")
    if cfg.mode not in ("continuous", "quasi"):
        fail("mode", f"must be 'continuous' or 'quasi', got {cfg.mode!r}")
    for key in ("E", "h_max", "delta", "m0", "epsilon1", "scan_ratio"):
        value = getattr(cfg, key)
        if not (math.isfinite(value) and value > 0):
            fail(key, f"must be positive, got {value}")
    if not -1.0 < cfg.nu < 0.5:
        fail("nu", f"must lie in (-1, 0.5), got {cfg.nu}")
    if not 0 < cfg.epsilon1 < 1:
        fail("epsilon1", f"must lie in (0, 1), got {cfg.epsilon1}")
    if len(cfg.h_hat) != 2 or min(cfg.h_hat) <= 0 or abs(max(cfg.h_hat) - 1.0) > 1e-14:
        fail("h_hat", f"needs two positive entries with maximum 1, got {cfg.h_hat}")
    if len(cfg.lower) != 2 or len(cfg.upper) != 2 or any(u <= l for l, u in zip(cfg.lower, cfg.upper)):
        fail("upper", f"domain corners must satisfy lower < upper, got {cfg.lower}, {cfg.upper}")
    if cfg.command == "converge":
        if len(cfg.ladder) < 3:
            fail("ladder", f"needs at least 3 spacings, got {len(cfg.ladder)}")
        if any(abs(a / b - 2.0) > 1e-9 for a, b in zip(cfg.ladder, cfg.ladder[1:])):
            fail("ladder", "entries must halve from one to the next")
    if cfg.reference_factor < 2:
        fail("reference_factor", "must be at least 2")
    if cfg.resolution < 3 or cfg.resolution % 2 == 0:
        fail("resolution", "must be an odd integer of at least 3")
    if cfg.command == "solve" and cfg.delta < cfg.h_max / 2:
        fail("delta", f"horizon {cfg.delta} is below h_max/2 = {cfg.h_max / 2}")
    try:
        mat = cfg.material()
    except ConfigError:
        raise
    except ValueError as exc:
        key = "nu" if cfg.lam is None else "lam"
        raise ConfigError(f"{key}: {exc}", key) from exc
    if mat.lam < mat.mu and not cfg.allow_lambda_lt_mu:
        fail("nu", "lambda < mu violates the stability hypothesis; pass --allow-lambda-lt-mu to continue")
