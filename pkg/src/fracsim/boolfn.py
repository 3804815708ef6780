"""Boolean functions on the hypercube and their Fourier analysis.

Inputs live in {-1, +1}^k.  A truth table is indexed by the integer whose
bit ``i`` is set exactly when coordinate ``i`` equals -1 (so +1 maps to bit
0 and -1 maps to bit 1).  Coordinates are 0-based everywhere in this
package.  The same integer, read as a subset mask, labels Fourier
coefficients: bit ``i`` of a mask means ``i`` belongs to the subset.

With that convention the character chi_S evaluated at input index ``idx`` is
``(-1) ** popcount(idx & S)``, so the Fourier transform is a plain
Walsh-Hadamard transform of the truth table.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

MAX_ARITY = 20
MAX_EXHAUSTIVE_ARITY = 12
EXACT_TOL = 1e-10
GRANULARITY_TOL = 1e-9


def popcount(values) -> np.ndarray:
    """Vectorised population count for non-negative integers below 2**32."""
    v = np.asarray(values, dtype=np.int64)
    count = np.zeros(v.shape, dtype=np.int64)
    while np.any(v):
        count += v & 1
        v = v >> 1
    return count


def as_bitstring(x, length: int | None = None) -> np.ndarray:
    """Validate ``x`` as a +-1 vector and return it as an int8 array."""
    arr = np.asarray(x)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("a bit string must be a non-empty 1-d sequence")
    if not np.all((arr == 1) | (arr == -1)):
        raise ValueError(f"bit string entries must be -1 or +1, got {arr.tolist()}")
    if length is not None and arr.size != length:
        raise ValueError(f"expected a bit string of length {length}, got {arr.size}")
    return arr.astype(np.int8)


def bits_to_index(x) -> np.ndarray:
    """Map +-1 strings (last axis) to truth-table indices."""
    arr = np.asarray(x)
    weights = 1 << np.arange(arr.shape[-1], dtype=np.int64)
    return ((arr == -1).astype(np.int64) * weights).sum(axis=-1)


def index_to_bits(index, k: int) -> np.ndarray:
    """Inverse of :func:`bits_to_index`; returns int8 arrays of shape (..., k)."""
    idx = np.asarray(index, dtype=np.int64)[..., None]
    bits = (idx >> np.arange(k, dtype=np.int64)) & 1
    return (1 - 2 * bits).astype(np.int8)


def all_inputs(k: int) -> np.ndarray:
    """Every point of {-1,1}^k as rows, in truth-table order."""
    return index_to_bits(np.arange(1 << k), k)


def walsh_hadamard(values, axis: int = 0) -> np.ndarray:
    """Unnormalised fast Walsh-Hadamard transform along ``axis``.

    ``out[S] = sum_idx (-1)**popcount(idx & S) * values[idx]``.  Trailing
    dimensions are carried along, which is what the matrix-valued transform
    needs.  Integer input stays integer so small tables transform exactly.
    """
    a = np.moveaxis(np.asarray(values), axis, 0)
    size = a.shape[0]
    if size == 0 or size & (size - 1):
        raise ValueError(f"transform length must be a power of two, got {size}")
    rest = a.shape[1:]
    a = np.array(a, copy=True)
    h = 1
    while h < size:
        a = a.reshape((size // (2 * h), 2, h) + rest)
        lo, hi = a[:, 0], a[:, 1]
        a = np.stack((lo + hi, lo - hi), axis=1).reshape((size,) + rest)
        h *= 2
    return np.moveaxis(a, 0, axis)


@dataclass(frozen=True, eq=False)
class FourierSpectrum:
    """Fourier coefficients of a function on {-1,1}^k, indexed by subset mask."""

    k: int
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.coeffs.shape != (1 << self.k,):
            raise ValueError("coefficient array must have length 2**k")

    def __getitem__(self, subset) -> float:
        if isinstance(subset, (int, np.integer)):
            return float(self.coeffs[int(subset)])
        return float(self.coeffs[subset_mask(subset)])

    @cached_property
    def levels(self) -> np.ndarray:
        """Subset size of each mask."""
        return popcount(np.arange(1 << self.k))

    def items(self, tol: float = 0.0):
        """Yield ``(mask, coefficient)`` for coefficients with magnitude above ``tol``."""
        for mask in np.flatnonzero(np.abs(self.coeffs) > tol):
            yield int(mask), float(self.coeffs[mask])

    def level_sums(self, values) -> np.ndarray:
        """Sum per-mask ``values`` by level: result[l] covers all |S| = l."""
        return np.bincount(self.levels, weights=values, minlength=self.k + 1)


def subset_mask(indices: Iterable[int]) -> int:
    mask = 0
    for i in indices:
        mask |= 1 << int(i)
    return mask


@dataclass(frozen=True, eq=False)
class BooleanFunction:
    """A function {-1,1}^k -> {-1,1} stored as its truth table."""

    k: int
    table: np.ndarray = field(repr=False)
    name: str = ""

    def __post_init__(self):
        if not 1 <= self.k <= MAX_ARITY:
            raise ValueError(f"arity must be between 1 and {MAX_ARITY}, got {self.k}")
        table = np.asarray(self.table)
        if table.shape != (1 << self.k,):
            raise ValueError(
                f"arity mismatch: a table for k={self.k} needs {1 << self.k} entries, got {table.size}"
            )
        if not np.all((table == 1) | (table == -1)):
            raise ValueError("truth table entries must be -1 or +1")
        table = table.astype(np.int8)
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    def __call__(self, x) -> int:
        return int(self.table[bits_to_index(as_bitstring(x, self.k))])

    def at_index(self, index) -> np.ndarray:
        return self.table[np.asarray(index)]

    def evaluate(self, x) -> np.ndarray:
        """Evaluate on a batch of +-1 rows (shape (..., k))."""
        return self.table[bits_to_index(x)]

    @cached_property
    def spectrum(self) -> FourierSpectrum:
        return fourier_transform(self)

    @property
    def is_constant(self) -> bool:
        return bool(np.all(self.table == self.table[0]))

    def __str__(self) -> str:
        return self.name or f"table{self.k}"


def construct(kind: str, k: int, table: Sequence[int] | None = None, index: int | None = None,
              value: int = 1) -> BooleanFunction:
    """Build a named Boolean function.

    ``kind`` is one of ``xor``, ``maj``, ``and``, ``or``, ``dictator``,
    ``const`` or ``from_table``.  -1 encodes True, so ``and`` is -1 only on
    the all -1 input and ``or`` is -1 unless every input is +1.
    """
    if k < 1:
        raise ValueError("arity must be at least 1")
    if kind == "from_table":
        if table is None:
            raise ValueError("from_table needs a table")
        return BooleanFunction(k, np.asarray(table), name=f"table{k}")
    if k > MAX_ARITY:
        raise ValueError(f"arity must be at most {MAX_ARITY}")
    x = all_inputs(k).astype(np.int64)
    if kind == "xor":
        values, name = np.prod(x, axis=1), f"xor{k}"
    elif kind == "maj":
        if k % 2 == 0:
            raise ValueError("majority needs an odd arity")
        values, name = np.sign(x.sum(axis=1)), f"maj{k}"
    elif kind == "and":
        values, name = np.where(np.all(x == -1, axis=1), -1, 1), f"and{k}"
    elif kind == "or":
        values, name = np.where(np.any(x == -1, axis=1), -1, 1), f"or{k}"
    elif kind == "dictator":
        if index is None or not 0 <= index < k:
            raise ValueError(f"dictator index must lie in [0, {k})")
        values, name = x[:, index], f"dict{index}_{k}"
    elif kind == "const":
        if value not in (-1, 1):
            raise ValueError("constant value must be -1 or +1")
        values, name = np.full(1 << k, value), f"const{k}"
    else:
        raise ValueError(f"unknown function kind {kind!r}")
    return BooleanFunction(k, values, name=name)


def load_table(path: str | Path, zero_one: bool = False) -> BooleanFunction:
    """Read a truth table file: arity on line one, 2**k entries on line two.

    With ``zero_one`` the entries are 0/1 and map as 0 -> +1, 1 -> -1.
    """
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if len(lines) < 2:
        raise ValueError("table file needs an arity line and an entries line")
    k = int(lines[0].strip())
    entries = np.array([int(tok) for tok in lines[1].split()])
    if zero_one:
        if not np.all((entries == 0) | (entries == 1)):
            raise ValueError("0/1 table entries must be 0 or 1")
        entries = 1 - 2 * entries
    return construct("from_table", k, table=entries)


def fourier_transform(f: BooleanFunction) -> FourierSpectrum:
    """Exact Fourier coefficients via the fast Walsh-Hadamard transform."""
    raw = walsh_hadamard(f.table.astype(np.int64))
    return FourierSpectrum(f.k, raw / float(1 << f.k))


def evaluate_expansion(spectrum: FourierSpectrum, x) -> float:
    """Evaluate the multilinear polynomial sum_S f^(S) chi_S(x)."""
    bits = as_bitstring(x, spectrum.k)
    idx = int(bits_to_index(bits))
    masks = np.arange(1 << spectrum.k)
    chars = 1 - 2 * (popcount(masks & idx) & 1)
    return float(np.dot(spectrum.coeffs, chars))


def sample_correlated_pair(x, q: float, rng: np.random.Generator) -> np.ndarray:
    """Draw y ~ N_q(x): each coordinate kept with probability (1+q)/2."""
    if not -1.0 <= q <= 1.0:
        raise ValueError(f"correlation q must lie in [-1, 1], got {q}")
    x = np.asarray(x, dtype=np.int8)
    flip = rng.random(x.shape) < (1.0 - q) / 2.0
    return np.where(flip, -x, x).astype(np.int8)


def _check_q(q: float):
    if not -1.0 <= q <= 1.0:
        raise ValueError(f"noise parameter q must lie in [-1, 1], got {q}")


def noise_stability(f: BooleanFunction, q: float, method: str = "fourier") -> float:
    """Stab_q[f] = E[f(x) f(y)] over q-correlated pairs.

    ``fourier`` sums q**l * W^l[f]; ``exhaustive`` sums over every input and
    every flip pattern with its exact probability and never touches the
    spectrum.
    """
    _check_q(q)
    if method == "fourier":
        weights = f.spectrum.level_sums(f.spectrum.coeffs ** 2)
        return float(sum(q ** level * w for level, w in enumerate(weights)))
    if method == "exhaustive":
        if f.k > MAX_EXHAUSTIVE_ARITY:
            raise ValueError(f"exhaustive stability is limited to k <= {MAX_EXHAUSTIVE_ARITY}")
        size = 1 << f.k
        idx = np.arange(size)
        table = f.table.astype(np.float64)
        keep, flip = (1.0 + q) / 2.0, (1.0 - q) / 2.0
        total = 0.0
        for pattern in range(size):
            flips = bin(pattern).count("1")
            prob = flip ** flips * keep ** (f.k - flips)
            if prob == 0.0:
                continue
            total += prob * float(np.mean(table * table[idx ^ pattern]))
        return total
    raise ValueError(f"unknown stability method {method!r}")


def noise_operator_table(f: BooleanFunction, q: float) -> np.ndarray:
    """T_q f evaluated on every input, in truth-table order."""
    _check_q(q)
    spec = f.spectrum
    damped = spec.coeffs * q ** spec.levels.astype(np.float64)
    return walsh_hadamard(damped)


def noise_operator(f: BooleanFunction, q: float, x) -> float:
    """T_q f(x) = sum_S q**|S| f^(S) chi_S(x)."""
    _check_q(q)
    bits = as_bitstring(x, f.k)
    return float(noise_operator_table(f, q)[int(bits_to_index(bits))])


def inner_product(f_values, g_values) -> float:
    """<f, g> = 2**-k sum_x f(x) g(x) over truth-table vectors."""
    return float(np.mean(np.asarray(f_values, dtype=float) * np.asarray(g_values, dtype=float)))


@dataclass(frozen=True, eq=False)
class SpectrumProfile:
    weights: np.ndarray
    level_l1: np.ndarray
    degree: int
    pure_high_degree: int
    one_norm: float
    granular: bool

    def as_dict(self) -> dict:
        return {
            "W": self.weights.tolist(),
            "L1": self.level_l1.tolist(),
            "deg": self.degree,
            "phd": self.pure_high_degree,
            "one_norm": self.one_norm,
            "granular": self.granular,
        }


def spectrum_profile(f: BooleanFunction, tol: float = 1e-12) -> SpectrumProfile:
    spec = f.spectrum
    c = spec.coeffs
    support = np.abs(c) > tol
    levels = spec.levels[support]
    degree = int(levels.max())
    # A constant function has degree 0, where 2**(1-deg) = 2 does not divide
    # f^(empty) = +-1; use unit granularity there.
    unit = 2.0 ** (1 - max(degree, 1))
    ratio = c / unit
    granular = bool(np.all(np.abs(ratio - np.round(ratio)) * unit <= GRANULARITY_TOL))
    return SpectrumProfile(
        weights=spec.level_sums(c ** 2),
        level_l1=spec.level_sums(np.abs(c)),
        degree=degree,
        pure_high_degree=int(levels.min()),
        one_norm=float(np.abs(c).sum()),
        granular=granular,
    )


def parse_function(descriptor: str, k: int | None = None) -> BooleanFunction:
    """Parse short names such as ``xor2``, ``maj3``, ``and2``, ``dict0_3``, ``id``.

    A bare family name (``xor``) takes its arity from ``k``.
    """
    d = descriptor.strip().lower()
    if d in ("id", "identity"):
        return construct("dictator", 1, index=0)
    if d.startswith("dict"):
        body = d[4:]
        index, _, arity = body.partition("_")
        return construct("dictator", int(arity or (k or 1)), index=int(index or 0))
    if d.startswith("const"):
        return construct("const", int(d[5:] or (k or 1)))
    for family in ("xor", "maj", "and", "or"):
        if d.startswith(family):
            rest = d[len(family):]
            arity = int(rest) if rest else k
            if arity is None:
                raise ValueError(f"function {descriptor!r} needs an arity")
            return construct(family, arity)
    raise ValueError(f"unknown function descriptor {descriptor!r}")
