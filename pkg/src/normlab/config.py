"""INI-style experiment configuration."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from . import dsl

EXAMPLES = ("lattice", "mean-field", "gaussian", "file")
CONSTANT_SOURCES = ("auto", "paper", "fitted")


class ConfigError(ValueError):
    pass


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.replace(";", ",").split(",") if t.strip())
    except ValueError as err:
        raise ConfigError(f"expected a comma-separated list of numbers, got {text!r}") from err


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.replace(";", ",").split(",") if t.strip())
    except ValueError as err:
        raise ConfigError(f"expected a comma-separated list of integers, got {text!r}") from err


def _pair(text: str) -> tuple[float, float]:
    v = _floats(text)
    if len(v) != 2 or not v[0] < v[1]:
        raise ConfigError(f"expected 'lo, hi' with lo < hi, got {text!r}")
    return v


@dataclass
class ExperimentConfig:
    example: str = "lattice"
    potential: str = "lorentz"
    couplings: str = "ones"  # ones | geometric:<ratio> | explicit list
    C0: float | None = None
    symbol_file: str | None = None
    n_values: tuple[int, ...] = (1,)
    h_values: tuple[float, ...] = (0.1,)
    constants: str = "auto"
    grid_half_width: float | None = None
    grid_count: int | None = None
    window_x: tuple[float, float] = (-6.0, 6.0)
    window_p: tuple[float, float] = (-4.0, 4.0)
    out: str | None = None
    format: str = "csv"
    timing: bool = False
    operator: bool = True
    extra: dict = field(default_factory=dict)

    def validate(self) -> "ExperimentConfig":
        if self.example not in EXAMPLES:
            raise ConfigError(f"example must be one of {EXAMPLES}, got {self.example!r}")
        if self.example == "file" and not self.symbol_file:
            raise ConfigError("example = file needs a symbol file")
        if self.example in ("lattice", "mean-field") and self.potential not in dsl.BUILTIN_POTENTIALS:
            raise ConfigError(f"unknown potential {self.potential!r}")
        if not self.n_values or min(self.n_values) < 1:
            raise ConfigError("n values must be positive integers")
        if self.operator and max(self.n_values) > 3:
            raise ConfigError("operator-level checks need n <= 3")
        if not self.h_values or min(self.h_values) <= 0:
            raise ConfigError("h values must be positive")
        if self.constants not in CONSTANT_SOURCES:
            raise ConfigError(f"constants must be one of {CONSTANT_SOURCES}")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if self.grid_count is not None and (self.grid_count < 2 or self.grid_count & (self.grid_count - 1)):
            raise ConfigError("grid count must be a power of two")
        if self.couplings != "ones" and not self.couplings.startswith("geometric:"):
            _floats(self.couplings)
        return self

    def couplings_for(self, n: int) -> tuple[float, ...]:
        c = self.couplings.strip()
        if c == "ones":
            return (1.0,) * n
        if c.startswith("geometric:"):
            r = float(c.split(":", 1)[1])
            return tuple(r**j for j in range(1, n + 1))
        vals = _floats(c)
        if len(vals) < n:
            raise ConfigError(f"need {n} couplings, config lists {len(vals)}")
        return vals[:n]


def load_config(path: str | Path) -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    except configparser.Error as err:
        raise ConfigError(f"malformed config {path}: {err}") from err
    return config_from_parser(parser, base=Path(path).parent)


def config_from_parser(parser: configparser.ConfigParser, base: Path = Path(".")) -> ExperimentConfig:
    known = {
        "symbol": {"example", "potential", "couplings", "c0", "file"},
        "sweep": {"n", "h", "constants", "operator"},
        "grid": {"half_width", "count"},
        "window": {"x", "p"},
        "output": {"path", "format", "timing"},
    }
    for sec in parser.sections():
        if sec not in known:
            raise ConfigError(f"unknown section [{sec}]")
        unknown = set(parser[sec]) - known[sec]
        if unknown:
            raise ConfigError(f"unknown keys in [{sec}]: {sorted(unknown)}")
    cfg = ExperimentConfig()
    g = parser.get
    try:
        cfg.example = g("symbol", "example", fallback=cfg.example).strip()
        cfg.potential = g("symbol", "potential", fallback=cfg.potential).strip()
        cfg.couplings = g("symbol", "couplings", fallback=cfg.couplings).strip()
        if parser.has_option("symbol", "c0"):
            cfg.C0 = parser.getfloat("symbol", "c0")
        if parser.has_option("symbol", "file"):
            p = Path(g("symbol", "file").strip())
            cfg.symbol_file = str(p if p.is_absolute() else base / p)
        if parser.has_option("sweep", "n"):
            cfg.n_values = _ints(g("sweep", "n"))
        if parser.has_option("sweep", "h"):
            cfg.h_values = _floats(g("sweep", "h"))
        cfg.constants = g("sweep", "constants", fallback=cfg.constants).strip()
        cfg.operator = parser.getboolean("sweep", "operator", fallback=True)
        if parser.has_option("grid", "half_width"):
            cfg.grid_half_width = parser.getfloat("grid", "half_width")
        if parser.has_option("grid", "count"):
            cfg.grid_count = parser.getint("grid", "count")
        if parser.has_option("window", "x"):
            cfg.window_x = _pair(g("window", "x"))
        if parser.has_option("window", "p"):
            cfg.window_p = _pair(g("window", "p"))
        cfg.out = g("output", "path", fallback=None)
        cfg.format = g("output", "format", fallback=cfg.format).strip()
        cfg.timing = parser.getboolean("output", "timing", fallback=False)
    except ValueError as err:
        if isinstance(err, ConfigError):
            raise
        raise ConfigError(str(err)) from err
    return cfg.validate()
