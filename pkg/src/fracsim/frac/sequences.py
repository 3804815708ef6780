"""Ordered index sequences S in S_n^k and block-collision probabilities.

Indices are 0-based throughout the package.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

ENUMERATION_BUDGET = 10 ** 7


def count_sequences(n: int, k: int) -> int:
    """|S_n^k| = k! C(n, k)."""
    _check_nk(n, k)
    return math.perm(n, k)


def _check_nk(n: int, k: int):
    if n < 1 or k < 1 or k > n:
        raise ValueError(f"need 1 <= k <= n, got n={n}, k={k}")


def sequences(n: int, k: int, mode: str = "enumerate", rng: np.random.Generator | None = None,
              size: int | None = None):
    """Enumerate S_n^k lexicographically, or draw ``size`` uniform sequences.

    ``enumerate`` yields tuples; ``sample`` returns an int array (size, k).
    """
    _check_nk(n, k)
    if mode == "enumerate":
        total = count_sequences(n, k)
        if total > ENUMERATION_BUDGET:
            raise ValueError(f"|S_{n}^{k}| = {total} exceeds the enumeration budget {ENUMERATION_BUDGET}")
        return itertools.permutations(range(n), k)
    if mode == "sample":
        if rng is None or size is None:
            raise ValueError("sampling needs an rng and a size")
        return sample_sequences(n, k, size, rng)
    raise ValueError(f"unknown mode {mode!r}")


def sample_sequences(n: int, k: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform draws from S_n^k: the first k entries of random permutations."""
    _check_nk(n, k)
    return np.argsort(rng.random((size, n)), axis=1)[:, :k]


@lru_cache(maxsize=64)
def sequence_array(n: int, k: int) -> np.ndarray:
    """All of S_n^k as a read-only (|S|, k) array in lexicographic order."""
    arr = np.array(list(sequences(n, k)), dtype=np.int64).reshape(-1, k)
    arr.setflags(write=False)
    return arr


def sequence_rank(S, n: int) -> int:
    """Position of S in the lexicographic order of S_n^k."""
    S = [int(i) for i in S]
    k = len(S)
    _check_nk(n, k)
    if len(set(S)) != k or not all(0 <= i < n for i in S):
        raise ValueError(f"{tuple(S)} is not a sequence of {k} distinct indices in [0, {n})")
    rank = 0
    used: set[int] = set()
    for pos, s in enumerate(S):
        smaller = sum(1 for v in range(s) if v not in used)
        rank += smaller * math.perm(n - pos - 1, k - pos - 1)
        used.add(s)
    return rank


def collision_probability(blocks: int, n: int, k: int, mode: str = "exact") -> Fraction:
    """Chance that k distinct indices land in k different blocks.

    ``exact`` gives (n/l)^k C(l, k) / C(n, k) for l equal blocks;
    ``bound`` gives the union bound 1 - k(k-1)/(2l).
    """
    _check_nk(n, k)
    if blocks < 1 or n % blocks:
        raise ValueError(f"{blocks} blocks do not divide n={n}")
    if mode == "exact":
        size = n // blocks
        return Fraction(size ** k * math.comb(blocks, k), math.comb(n, k))
    if mode == "bound":
        return 1 - Fraction(k * (k - 1), 2 * blocks)
    raise ValueError(f"unknown mode {mode!r}")
