"""Experiment specifications and the flat key=value sweep format.

A sweep file holds one ``key = value`` pair per line.  Plain keys fix a
setting for every cell (``mode``, ``trials``, ``seed``, ``eta``,
``radius``, ``delta``); ``grid.<field>`` keys may repeat and list the
values to sweep, comma-separated or one per line.  Grid fields are
``protocol``, ``n``, ``m``, ``ell`` and ``f``.  ``m`` and ``ell`` accept
expressions in n (``n/4``, ``2*n``, ``n-1``) and inclusive ranges
(``1..n/2``).  Lines starting with ``#`` are comments.

    mode = mc
    trials = 20000
    seed = 7
    grid.protocol = rac-sr, qrac-sr
    grid.n = 8
    grid.n = 16
    grid.m = n/4
    grid.f = xor2
"""
from __future__ import annotations

import itertools
import re
import zlib
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..frac.protocols import normalize_resource

MODES = ("exact", "mc", "auto")
FORMATS = ("json", "csv")
GRID_FIELDS = ("protocol", "n", "m", "ell", "f")
SCALAR_FIELDS = {"mode": str, "trials": int, "seed": int, "eta": float, "radius": int, "delta": float,
                 "k": int}

_TERM = re.compile(r"^\s*(?:(\d+)\s*\*\s*)?n\s*(?:([/*+-])\s*(\d+))?\s*$")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentSpec:
    """Everything one simulate/bounds run needs, validated before dispatch."""

    subcommand: str = "simulate"
    protocol: str = "rac_sr"
    n: int = 8
    m: int | None = None
    k: int | None = None
    ell: int | None = None
    radius: int | None = None
    delta: float | None = None
    f: str = "xor"
    trials: int = 100_000
    seed: int = 0
    mode: str = "auto"
    eta: float = 1.40
    output: str | None = None
    format: str = "json"
    jobs: int | None = None

    def __post_init__(self):
        self.protocol = normalize_resource(self.protocol)
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}, got {self.format!r}")
        if self.n < 1:
            raise ConfigError("n must be positive")
        if self.seed < 0 or self.seed >= 1 << 64:
            raise ConfigError("seed must be a 64-bit non-negative integer")
        if self.trials < 1:
            raise ConfigError("trials must be positive")


def eval_size(expr: str, n: int) -> int:
    """Integer value of ``expr`` (a literal or a simple expression in n)."""
    text = str(expr).strip()
    if re.fullmatch(r"\d+", text):
        return int(text)
    match = _TERM.match(text)
    if not match:
        raise ConfigError(f"cannot parse size expression {expr!r}")
    coef, op, operand = match.groups()
    value = n * (int(coef) if coef else 1)
    if op:
        rhs = int(operand)
        if op == "/":
            if rhs == 0 or value % rhs:
                raise ConfigError(f"{expr!r} is not an integer at n={n}")
            value //= rhs
        elif op == "*":
            value *= rhs
        elif op == "+":
            value += rhs
        else:
            value -= rhs
    return value


def expand_sizes(expr: str, n: int) -> list[int]:
    if ".." in str(expr):
        lo, hi = str(expr).split("..", 1)
        return list(range(eval_size(lo, n), eval_size(hi, n) + 1))
    return [eval_size(expr, n)]


@dataclass
class SweepConfig:
    settings: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)


def parse_sweep(text: str) -> SweepConfig:
    cfg = SweepConfig()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        if key.startswith("grid."):
            name = key[5:]
            if name not in GRID_FIELDS:
                raise ConfigError(f"line {lineno}: unknown grid field {name!r}")
            cfg.grid.setdefault(name, []).extend(v.strip() for v in value.split(",") if v.strip())
        elif key in SCALAR_FIELDS:
            try:
                cfg.settings[key] = SCALAR_FIELDS[key](value)
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from exc
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    for needed in ("protocol", "n", "f"):
        if needed not in cfg.grid:
            raise ConfigError(f"sweep needs at least one grid.{needed}")
    return cfg


def load_sweep(path) -> SweepConfig:
    return parse_sweep(Path(path).read_text(encoding="utf-8"))


def cell_key(spec: ExperimentSpec) -> str:
    return f"protocol={spec.protocol};n={spec.n};m={spec.m};ell={spec.ell};f={spec.f}"


def cell_seed(master: int, key: str) -> int:
    """Per-cell seed: the master seed's stream spawned at crc32(cell key).

    Cells depend only on their own key, so adding cells leaves the others
    unchanged.
    """
    seq = np.random.SeedSequence(master, spawn_key=(zlib.crc32(key.encode("utf-8")),))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def expand_cells(cfg: SweepConfig) -> list[ExperimentSpec]:
    """One spec per grid cell, sorted by cell key, duplicates removed."""
    base = ExperimentSpec(
        subcommand="sweep",
        mode=cfg.settings.get("mode", "auto"),
        trials=cfg.settings.get("trials", 20_000),
        seed=cfg.settings.get("seed", 0),
        eta=cfg.settings.get("eta", 1.40),
        radius=cfg.settings.get("radius"),
        delta=cfg.settings.get("delta"),
        k=cfg.settings.get("k"),
    )
    cells = {}
    for protocol, n_text, f in itertools.product(cfg.grid["protocol"], cfg.grid["n"], cfg.grid["f"]):
        n = eval_size(n_text, 0) if "n" not in n_text else None
        if n is None:
            raise ConfigError("grid.n values must be literals")
        ms = sorted({v for e in cfg.grid.get("m", []) for v in expand_sizes(e, n)}) or [None]
        ells = sorted({v for e in cfg.grid.get("ell", []) for v in expand_sizes(e, n)}) or [None]
        for m, ell in itertools.product(ms, ells):
            spec = replace(base, protocol=protocol, n=n, m=m, ell=ell, f=f)
            spec.protocol = normalize_resource(spec.protocol)
            spec.seed = cell_seed(base.seed, cell_key(spec))
            cells[cell_key(spec)] = spec
    return [cells[key] for key in sorted(cells)]
