"""f-random access code protocols over the base codes.

Every protocol object exposes the same surface so the estimators in
:mod:`fracsim.frac.estimate` can drive any of them:

``simulate(x, S, rng)``
    batched runs: inputs of shape (T, n), query sequences of shape (T, k),
    returns Bob's guess for f(x_S) in {-1,+1}.
``exact_success()``
    success probability for every input (truth-table order) and every
    S in S_n^k (lexicographic order), enumerating all discrete randomness.
``exact_terms()``
    size of that enumeration, checked against the exact-mode budget.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..boolfn import BooleanFunction, construct, index_to_bits, noise_operator_table, popcount
from ..codes import BASE_CODES, BaseCode, CoveringCode, greedy_covering_code, krawtchouk, take_rows
from .sequences import collision_probability, count_sequences, sequence_array

EXACT_BUDGET = 10 ** 8
NEWMAN_BUDGET = 10 ** 9
NEWMAN_RETRIES = 20

RESOURCES = ("rac_pr", "rac_sr", "qrac_sr", "earac", "xor_pr", "prrac")


def normalize_resource(name: str) -> str:
    key = name.strip().lower().replace("-", "_")
    if key not in RESOURCES:
        raise ValueError(f"unknown resource {name!r}; choose from {', '.join(RESOURCES)}")
    return key


def input_bits(n: int, width: int | None = None) -> np.ndarray:
    """0/1 matrix of all 2**n inputs, zero-extended to ``width`` columns."""
    idx = np.arange(1 << n, dtype=np.int64)
    width = n if width is None else width
    out = np.zeros((1 << n, width), dtype=np.int64)
    out[:, :n] = (idx[:, None] >> np.arange(n)) & 1
    return out


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Inverse of :func:`input_bits` along the last axis."""
    return (bits.astype(np.int64) << np.arange(bits.shape[-1])).sum(axis=-1)


def _has_collision(groups: np.ndarray) -> np.ndarray:
    k = groups.shape[-1]
    hit = np.zeros(groups.shape[:-1], dtype=bool)
    for i, j in itertools.combinations(range(k), 2):
        hit |= groups[..., i] == groups[..., j]
    return hit


def _flip_success(f: BooleanFunction, xs_idx: np.ndarray, agree: np.ndarray) -> np.ndarray:
    """P(f(decoded) = f(x_S)) when bit j is read correctly with probability agree[..., j].

    Errors on different bits are independent; the sum runs over all 2**k
    error patterns.
    """
    k = agree.shape[-1]
    truth = f.table[xs_idx]
    total = np.zeros(xs_idx.shape)
    for e in range(1 << k):
        same = f.table[xs_idx ^ e] == truth
        if not same.any():
            continue
        prob = np.ones(xs_idx.shape)
        for j in range(k):
            prob = prob * (1.0 - agree[..., j] if (e >> j) & 1 else agree[..., j])
        total += np.where(same, prob, 0.0)
    return total


class Protocol:
    """Shared plumbing; subclasses fill in the protocol itself."""

    resource: str
    n: int
    k: int
    f: BooleanFunction
    m: float
    ell: int | None = None
    discrete: bool = True

    def simulate(self, x, S, rng) -> np.ndarray:
        raise NotImplementedError

    def exact_terms(self) -> int:
        raise NotImplementedError

    def _exact_success(self) -> np.ndarray:
        raise NotImplementedError

    def exact_success(self) -> np.ndarray:
        if not self.discrete:
            raise ValueError(f"{self.resource} uses continuous randomness; use Monte Carlo")
        terms = self.exact_terms()
        if terms > EXACT_BUDGET:
            raise ValueError(f"exact enumeration needs {terms} terms, budget is {EXACT_BUDGET}")
        return self._exact_success()

    def truth(self, x, S) -> np.ndarray:
        x = np.asarray(x)
        rows = np.arange(len(x))[:, None]
        return self.f.evaluate(x[rows, np.asarray(S)])

    def coin(self, size: int, rng) -> np.ndarray:
        """Bob's answer when a query cannot be decoded: a fair coin, or f itself if constant."""
        if self.f.is_constant:
            return np.full(size, self.f.table[0], dtype=np.int8)
        return np.where(rng.random(size) < 0.5, 1, -1).astype(np.int8)

    @property
    def coin_success(self) -> float:
        return 1.0 if self.f.is_constant else 0.5

    def describe(self) -> dict:
        return {"resource": self.resource, "n": self.n, "m": self.m, "k": self.k,
                "f": self.f.name, "ell": self.ell}


# --------------------------------------------------------------------------
# block protocol over single-symbol codes


def block_arrangements(size: int, block: int):
    """Every split of range(size) into unlabeled blocks with ordered contents.

    Blocks are listed by their smallest element, so each of the
    size! / (size/block)! arrangements appears once.
    """

    def rec(remaining):
        if not remaining:
            yield ()
            return
        first, rest = remaining[0], remaining[1:]
        for others in itertools.combinations(rest, block - 1):
            left = tuple(v for v in rest if v not in others)
            for order in itertools.permutations((first,) + others):
                for tail in rec(left):
                    yield (order,) + tail

    yield from rec(tuple(range(size)))


class BlockProtocol(Protocol):
    """m blocks, each compressed to one symbol by a b -> 1 base code.

    Shared randomness assigns the (padded) positions to blocks by a
    uniform permutation.  A query whose indices share a block is answered
    with a coin; otherwise each bit is read from its block's symbol and f
    is applied to the reads.
    """

    def __init__(self, resource: str, n: int, m: int, f: BooleanFunction):
        self.resource = normalize_resource(resource)
        if self.resource not in BASE_CODES:
            raise ValueError(f"{resource} is not a block resource")
        if m < 1:
            raise ValueError("need at least one block")
        if not 1 <= f.k <= n:
            raise ValueError(f"need 1 <= k <= n, got k={f.k}, n={n}")
        if m > n:
            raise ValueError(f"m={m} exceeds n={n}")
        self.n, self.m, self.f, self.k = n, m, f, f.k
        b = -(-n // m)
        if self.resource == "earac":
            b = 1 << (b - 1).bit_length()
        self.block = b
        self.padded = b * m
        self.base: BaseCode = BASE_CODES[self.resource](b)
        self.discrete = self.base.discrete

    @property
    def q(self) -> float:
        return self.base.bias

    def simulate(self, x, S, rng):
        x = np.asarray(x)
        S = np.asarray(S)
        T = len(x)
        b, m = self.block, self.m
        xp = np.ones((T, self.padded), dtype=np.int8)
        xp[:, : self.n] = x
        slot = np.argsort(rng.random((T, self.padded)), axis=1)
        arranged = np.empty_like(xp)
        np.put_along_axis(arranged, slot, xp, axis=1)
        shared = self.base.draw(T * m, rng)
        message = self.base.encode(arranged.reshape(T * m, b), shared, rng)
        rows = np.arange(T)
        qslot = slot[rows[:, None], S]
        blk, pos = qslot // b, qslot % b
        reads = np.empty(S.shape, dtype=np.int8)
        for j in range(self.k):
            sel = rows * m + blk[:, j]
            reads[:, j] = self.base.decode(message[sel], pos[:, j], take_rows(shared, sel), rng)
        guess = self.f.evaluate(reads)
        return np.where(_has_collision(blk), self.coin(T, rng), guess).astype(np.int8)

    def arrangement_count(self) -> int:
        return math.factorial(self.padded) // math.factorial(self.m)

    def exact_terms(self) -> int:
        return self.arrangement_count() * (1 << self.n) * count_sequences(self.n, self.k)

    def _exact_success(self):
        agree_table = self.base.exact_agreement()
        S = sequence_array(self.n, self.k)
        xbits = input_bits(self.n, self.padded)
        xs_idx = pack_bits(xbits[:, S])
        weights = 1 << np.arange(self.block)
        total = np.zeros(xs_idx.shape)
        count = 0
        block_of = np.empty(self.padded, dtype=np.int64)
        pos_of = np.empty(self.padded, dtype=np.int64)
        for arrangement in block_arrangements(self.padded, self.block):
            blocks = np.array(arrangement)
            block_of[blocks] = np.arange(self.m)[:, None]
            pos_of[blocks] = np.arange(self.block)[None, :]
            content = (xbits[:, blocks] * weights).sum(axis=-1)
            bS, pS = block_of[S], pos_of[S]
            agree = agree_table[content[:, bS], pS]
            success = _flip_success(self.f, xs_idx, agree)
            success[:, _has_collision(bS)] = self.coin_success
            total += success
            count += 1
        return total / count


# --------------------------------------------------------------------------
# covering-code protocols with a derandomized (permutation, mask) table


@dataclass(frozen=True, eq=False)
class RandomizationTable:
    """Rows of (permutation, mask) pairs; row j encodes y_i = x_{perm[j,i]} * mask[j, perm[j,i]]."""

    perms: np.ndarray
    masks: np.ndarray

    def __post_init__(self):
        perms = np.asarray(self.perms, dtype=np.int64)
        masks = np.asarray(self.masks, dtype=np.int8)
        if perms.ndim != 2 or perms.shape != masks.shape:
            raise ValueError("permutations and masks must be equal-shaped 2-d arrays")
        n = perms.shape[1]
        if not np.array_equal(np.sort(perms, axis=1), np.broadcast_to(np.arange(n), perms.shape)):
            raise ValueError("table rows must be permutations")
        if not np.all(np.abs(masks) == 1):
            raise ValueError("masks must be +-1")
        object.__setattr__(self, "perms", perms)
        object.__setattr__(self, "masks", masks)

    def __len__(self) -> int:
        return self.perms.shape[0]

    @classmethod
    def sample(cls, n: int, rows: int, rng: np.random.Generator) -> "RandomizationTable":
        perms = np.argsort(rng.random((rows, n)), axis=1)
        masks = np.where(rng.random((rows, n)) < 0.5, 1, -1).astype(np.int8)
        return cls(perms, masks)

    @classmethod
    def identity(cls, n: int) -> "RandomizationTable":
        return cls(np.arange(n)[None, :], np.ones((1, n), dtype=np.int8))


class CoveringProtocol(Protocol):
    """x is masked, permuted, split into l blocks, and each block is snapped to
    its nearest codeword; the message is the codeword indices plus the table
    row.  Bob undoes the permutation and mask and reads x_S off the result.

    With ``check_collisions`` queries touching one block twice get a coin,
    which keeps the per-bit errors independent.  An exact code (radius 0)
    makes no errors, so the check is dropped there.
    """

    def __init__(self, resource: str, n: int, ell: int, code: CoveringCode, f: BooleanFunction,
                 table: RandomizationTable | None = None, check_collisions: bool = True):
        self.resource = resource
        if not 1 <= f.k <= n:
            raise ValueError(f"need 1 <= k <= n, got k={f.k}, n={n}")
        if ell < 1 or n % ell:
            raise ValueError(f"l={ell} must divide n={n}")
        if code.b != n // ell:
            raise ValueError(f"code length {code.b} does not match block length {n // ell}")
        self.n, self.ell, self.code, self.f, self.k = n, ell, code, f, f.k
        self.block = n // ell
        self.check_collisions = check_collisions and code.radius > 0
        self.table = table

    @property
    def m(self) -> float:
        rows = len(self.table) if self.table is not None else 1
        return self.ell * math.log2(self.code.size) + math.log2(rows)

    def with_table(self, table: RandomizationTable) -> "CoveringProtocol":
        if table.perms.shape[1] != self.n:
            raise ValueError("table width does not match n")
        return CoveringProtocol(self.resource, self.n, self.ell, self.code, self.f, table,
                                self.check_collisions)

    def _require_table(self) -> RandomizationTable:
        if self.table is None:
            raise ValueError("protocol has no randomization table yet")
        return self.table

    def encode_rows(self, x: np.ndarray, rows: np.ndarray) -> np.ndarray:
        """Bob's reconstruction z of each input under the given table rows."""
        table = self._require_table()
        perms = table.perms[rows]
        masked = x * table.masks[rows]
        y = np.take_along_axis(masked, perms, axis=1)
        idx = pack_bits((y.reshape(-1, self.block) == -1).astype(np.int64))
        snapped = index_to_bits(self.code.decode_table[idx], self.block).reshape(y.shape)
        z = np.empty_like(snapped)
        np.put_along_axis(z, perms, snapped, axis=1)
        return (z * table.masks[rows]).astype(np.int8)

    def _collides(self, rows: np.ndarray, S: np.ndarray) -> np.ndarray:
        if not self.check_collisions:
            return np.zeros(len(S), dtype=bool)
        inverse = np.argsort(self._require_table().perms[rows], axis=1)
        where = np.take_along_axis(inverse, S, axis=1)
        return _has_collision(where // self.block)

    def simulate(self, x, S, rng):
        table = self._require_table()
        x = np.asarray(x)
        S = np.asarray(S)
        T = len(x)
        rows = rng.integers(len(table), size=T)
        z = self.encode_rows(x, rows)
        guess = self.f.evaluate(z[np.arange(T)[:, None], S])
        return np.where(self._collides(rows, S), self.coin(T, rng), guess).astype(np.int8)

    def exact_terms(self) -> int:
        return len(self._require_table()) * (1 << self.n) * count_sequences(self.n, self.k)

    def row_success(self, row: int) -> np.ndarray:
        """Success for every (x, S) when the table row is fixed."""
        S = sequence_array(self.n, self.k)
        size = 1 << self.n
        x = index_to_bits(np.arange(size), self.n)
        z = self.encode_rows(x, np.full(size, row))
        xs_idx = pack_bits(input_bits(self.n)[:, S])
        zs_idx = pack_bits((z == -1).astype(np.int64)[:, S])
        success = (self.f.table[xs_idx] == self.f.table[zs_idx]).astype(float)
        collide = self._collides(np.full(len(S), row), S)
        success[:, collide] = self.coin_success
        return success

    def _exact_success(self):
        table = self._require_table()
        total = sum(self.row_success(j) for j in range(len(table)))
        return total / len(table)

    def shared_randomness_bias(self) -> float:
        """Worst-case bias when (permutation, mask) are uniform over all pairs.

        The error pattern is then independent of x.  Across blocks the bit
        errors are independent with bias q = 1 - 2 E[d]/b, giving
        P(no collision) * min_y f(y) T_q f(y).  Without collision checks
        and with f = XOR_k over a single block the bias is
        E_y[K_{k,n}(d(y))] / C(n, k) for every (x, S).
        """
        if not self.check_collisions and self.ell == 1:
            parity = abs(abs(self.f.spectrum.coeffs[-1]) - 1.0) < 1e-12
            if not parity and self.code.radius > 0:
                raise ValueError("closed form without collision checks is only known for parity")
            if self.code.radius == 0:
                return 1.0
            d = self.code.distances
            krav = np.array([krawtchouk(self.k, self.n, int(v)) for v in range(self.n + 1)])
            return float(krav[d].mean() / math.comb(self.n, self.k))
        q = 1.0 - 2.0 * float(self.code.distances.mean()) / self.block
        stability = self.f.table * noise_operator_table(self.f, q)
        factor = float(collision_probability(self.ell, self.n, self.k)) if self.check_collisions else 1.0
        return factor * float(stability.min())


@dataclass(frozen=True)
class NewmanResult:
    table: RandomizationTable
    worst_bias: float
    target: float
    attempts: int


def newman_derandomize(protocol: CoveringProtocol, p: float, delta: float, rng: np.random.Generator,
                       retries: int = NEWMAN_RETRIES) -> NewmanResult:
    """Find a table of ceil(n / delta**2) pairs whose worst-case bias is >= p - delta.

    Every candidate table is verified exhaustively over all (x, S).
    """
    if delta <= 0:
        raise ValueError("slack delta must be positive")
    if delta > p:
        raise ValueError(f"slack delta={delta} exceeds the target bias p={p}")
    rows = math.ceil(protocol.n / delta ** 2)
    cost = rows * (1 << protocol.n) * count_sequences(protocol.n, protocol.k)
    if cost > NEWMAN_BUDGET:
        raise ValueError(f"verification needs {cost} evaluations, budget is {NEWMAN_BUDGET}")
    target = p - delta
    worst = -math.inf
    for attempt in range(1, retries + 2):
        table = RandomizationTable.sample(protocol.n, rows, rng)
        success = protocol.with_table(table)._exact_success()
        worst = 2.0 * float(success.min()) - 1.0
        if worst >= target - 1e-12:
            return NewmanResult(table, worst, target, attempt)
    raise RuntimeError(f"no table of {rows} rows reached bias {target:.6g} after {retries} resamples "
                       f"(last worst case {worst:.6g}); delta is too aggressive for n={protocol.n}")


def frac_pr(n: int, ell: int, f: BooleanFunction, radius: int, rng: np.random.Generator,
            table: RandomizationTable | None = None, delta: float | None = None) -> CoveringProtocol:
    """f-RAC with private randomness: greedy covering code on each of l blocks.

    Without an explicit table, one is derandomized against the exact
    shared-randomness bias with slack ``delta`` (default: half of it).
    """
    if ell < 1 or n % ell:
        raise ValueError(f"l={ell} must divide n={n}")
    code = greedy_covering_code(n // ell, radius)
    protocol = CoveringProtocol("rac_pr", n, ell, code, f)
    if table is not None:
        return protocol.with_table(table)
    return _derandomized(protocol, rng, delta)


def xor_rac_pr(n: int, k: int, radius: int, rng: np.random.Generator,
               table: RandomizationTable | None = None, delta: float | None = None) -> CoveringProtocol:
    """Parity code: one covering code over all n bits, no block structure."""
    if n > 16:
        raise ValueError("single-block parity code needs n <= 16")
    code = greedy_covering_code(n, radius)
    protocol = CoveringProtocol("xor_pr", n, 1, code, construct("xor", k), check_collisions=False)
    if table is not None:
        return protocol.with_table(table)
    return _derandomized(protocol, rng, delta)


def _derandomized(protocol: CoveringProtocol, rng, delta):
    if protocol.code.radius == 0:
        return protocol.with_table(RandomizationTable.identity(protocol.n))
    p = protocol.shared_randomness_bias()
    if p <= 0:
        raise ValueError(f"shared-randomness bias {p:.6g} is not positive; lower the covering radius")
    result = newman_derandomize(protocol, p, p / 2 if delta is None else delta, rng)
    return protocol.with_table(result.table)


def xor_distance_agreement(protocol: CoveringProtocol, row: int = 0):
    """Per input: distance to Bob's reconstruction and the number of S whose parity survives.

    Returns (distance, agreeing, total) with one entry per input in
    truth-table order; all counts are exact integers.
    """
    n = protocol.n
    size = 1 << n
    x = index_to_bits(np.arange(size), n)
    z = protocol.encode_rows(x, np.full(size, row))
    diff = pack_bits((x != z).astype(np.int64))
    S = sequence_array(n, protocol.k)
    smask = (1 << S).sum(axis=1)
    flips = popcount(diff[:, None] & smask[None, :])
    agreeing = (flips % 2 == 0).sum(axis=1)
    return popcount(diff), agreeing, len(S)


def xor_agreement_formula(n: int, k: int, d: int) -> Fraction:
    """1/2 + K_{k,n}(d) / (2 C(n, k))."""
    return Fraction(1, 2) + Fraction(krawtchouk(k, n, d), 2 * math.comb(n, k))


# --------------------------------------------------------------------------
# single base code viewed as a protocol (k = 1, f = identity)


class BaseCodeProtocol(Protocol):
    """A b -> 1 code queried on one bit; convenient for estimating base biases."""

    def __init__(self, code: BaseCode):
        self.code = code
        self.resource = code.resource
        self.n = code.block_length
        self.k = 1
        self.m = 1
        self.f = construct("dictator", 1, index=0)
        self.discrete = code.discrete

    def simulate(self, x, S, rng):
        return self.code.simulate(np.asarray(x), np.asarray(S)[:, 0], rng)

    def exact_terms(self) -> int:
        return (1 << self.n) * self.n

    def _exact_success(self):
        return self.code.exact_agreement()
