"""f-random access code protocols and their bias estimators."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..boolfn import BooleanFunction
from .estimate import CSV_COLUMNS, BiasReport, exact_bias, mc_bias
from .protocols import (
    BaseCodeProtocol,
    BlockProtocol,
    CoveringProtocol,
    Protocol,
    RandomizationTable,
    frac_pr,
    newman_derandomize,
    normalize_resource,
    xor_agreement_formula,
    xor_distance_agreement,
    xor_rac_pr,
)
from .sequences import collision_probability, count_sequences, sequence_rank, sequences

DEFAULT_RADIUS = 1


@dataclass(frozen=True)
class ProtocolConfig:
    """One experiment: resource, sizes, function and seed.

    ``m`` is the number of blocks for the shared-randomness resources; the
    private-randomness codes take ``ell`` blocks and a covering ``radius``
    and report their own message length.
    """

    resource: str
    n: int
    f: BooleanFunction
    m: int | None = None
    ell: int | None = None
    radius: int | None = None
    delta: float | None = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "resource", normalize_resource(self.resource))
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.f.k > self.n:
            raise ValueError(f"k={self.f.k} exceeds n={self.n}")
        if self.resource in ("rac_sr", "qrac_sr", "earac") and self.m is None:
            raise ValueError(f"{self.resource} needs m")
        if self.resource == "rac_pr" and self.ell is None:
            raise ValueError("rac_pr needs the block count ell")

    @property
    def k(self) -> int:
        return self.f.k


def build_protocol(cfg: ProtocolConfig) -> Protocol:
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(0xC0DE,)))
    radius = DEFAULT_RADIUS if cfg.radius is None else cfg.radius
    if cfg.resource in ("rac_sr", "qrac_sr", "earac"):
        return BlockProtocol(cfg.resource, cfg.n, cfg.m, cfg.f)
    if cfg.resource == "rac_pr":
        return frac_pr(cfg.n, cfg.ell, cfg.f, radius, rng, delta=cfg.delta)
    if cfg.resource == "xor_pr":
        if not cfg.f.name.startswith("xor"):
            raise ValueError("xor_pr decodes parities only; use f=xorK")
        return xor_rac_pr(cfg.n, cfg.k, radius, rng, delta=cfg.delta)
    from ..prbox import PRRACProtocol

    return PRRACProtocol(cfg.n, cfg.f)


__all__ = [
    "CSV_COLUMNS", "BaseCodeProtocol", "BiasReport", "BlockProtocol", "CoveringProtocol", "Protocol",
    "ProtocolConfig", "RandomizationTable", "build_protocol", "collision_probability",
    "count_sequences", "exact_bias", "frac_pr", "mc_bias", "newman_derandomize", "sequence_rank",
    "sequences", "xor_agreement_formula", "xor_distance_agreement", "xor_rac_pr",
]
