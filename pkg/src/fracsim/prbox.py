"""Popescu-Rohrlich boxes and the nested van Dam retrieval protocol.

Bits here are 0/1 (box inputs and outputs, database entries); the
f-PRRAC wrapper converts to the +-1 convention of the rest of the package.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from itertools import combinations

import numpy as np

from .boolfn import BooleanFunction, all_inputs, bits_to_index
from .frac.protocols import Protocol
from .frac.sequences import count_sequences, sequence_array, sequence_rank

MAX_ADDRESS_BITS = 22
PARTIES = ("alice", "bob")


class BoxUseError(RuntimeError):
    """A party touched a PR box (or a pyramid) it may no longer use."""


class PRBox:
    """One non-signaling box: outputs satisfy a XOR b = x AND y.

    Whoever uses the box first gets a uniform bit; the second output is
    then forced.  Each party may use the box once.
    """

    __slots__ = ("ident", "_first", "_used")

    def __init__(self, ident=0):
        self.ident = ident
        self._first = None  # (party, input, output) of the first use
        self._used = set()

    @property
    def state(self) -> str:
        if not self._used:
            return "fresh"
        if len(self._used) == 2:
            return "both_used"
        return f"{self._first[0]}_used"

    def use(self, party: str, bit: int, rng: np.random.Generator) -> int:
        if party not in PARTIES:
            raise ValueError(f"party must be one of {PARTIES}")
        if bit not in (0, 1):
            raise ValueError("box inputs are bits")
        if party in self._used:
            raise BoxUseError(f"{party} already used box {self.ident}")
        self._used.add(party)
        if self._first is None:
            out = int(rng.random() < 0.5)
            self._first = (party, bit, out)
            return out
        _, other_bit, other_out = self._first
        return other_out ^ (other_bit & bit)


def pr_box_use(box: PRBox, party: str, bit: int, rng: np.random.Generator) -> int:
    return box.use(party, bit, rng)


class BoxPyramid:
    """Complete binary tree of 2**L - 1 PR boxes, created on first touch.

    Level 0 holds the 2**(L-1) leaf boxes; level L-1 is the root.  Box
    (level, j) combines the two level-below messages j*2 and j*2 + 1.
    """

    def __init__(self, address_bits: int, rng: np.random.Generator):
        if not 0 <= address_bits <= MAX_ADDRESS_BITS:
            raise ValueError(f"address width must lie in [0, {MAX_ADDRESS_BITS}]")
        self.L = address_bits
        self.rng = rng
        self._boxes: dict[tuple[int, int], PRBox] = {}
        self.alice_uses = 0
        self.bob_uses = 0
        self.encoded = False
        self.decoded = False

    @property
    def size(self) -> int:
        return (1 << self.L) - 1

    @property
    def materialized(self) -> int:
        return len(self._boxes)

    def box(self, level: int, node: int) -> PRBox:
        if not (0 <= level < self.L and 0 <= node < 1 << (self.L - 1 - level)):
            raise IndexError(f"no box at level {level}, node {node}")
        key = (level, node)
        box = self._boxes.get(key)
        if box is None:
            box = self._boxes[key] = PRBox(key)
        return box

    def _use(self, party: str, level: int, node: int, bit: int) -> int:
        out = self.box(level, node).use(party, bit, self.rng)
        if party == "alice":
            self.alice_uses += 1
        else:
            self.bob_uses += 1
        return out


def vandam_encode(pyramid: BoxPyramid, database) -> int:
    """Alice's pass: fold the database pairwise through the boxes; return the one bit sent."""
    if pyramid.encoded:
        raise BoxUseError("pyramid already used for encoding")
    data = [int(v) for v in database]
    if len(data) != 1 << pyramid.L or any(v not in (0, 1) for v in data):
        raise ValueError(f"database must hold {1 << pyramid.L} bits")
    pyramid.encoded = True
    for level in range(pyramid.L):
        data = [
            data[2 * j] ^ pyramid._use("alice", level, j, data[2 * j] ^ data[2 * j + 1])
            for j in range(len(data) // 2)
        ]
    return data[0]


def vandam_decode(pyramid: BoxPyramid, index: int, y: int) -> int:
    """Bob's pass: one box per level along the path named by ``index``."""
    if not pyramid.encoded:
        raise BoxUseError("decode called before encode")
    if pyramid.decoded:
        raise BoxUseError("pyramid already used for decoding")
    if not 0 <= index < 1 << pyramid.L:
        raise ValueError(f"index must lie in [0, {1 << pyramid.L})")
    pyramid.decoded = True
    out = int(y)
    for level in reversed(range(pyramid.L)):
        out ^= pyramid._use("bob", level, index >> (level + 1), (index >> level) & 1)
    return out


@dataclass(frozen=True)
class PRRACAudit:
    L: int
    boxes_total: int
    boxes_bob: int
    bits_sent: int
    correct: bool

    def to_json(self) -> str:
        return json.dumps(asdict(self))


def is_symmetric(f: BooleanFunction) -> bool:
    """True when f depends only on the number of -1 inputs."""
    x = all_inputs(f.k)
    weight = (x == -1).sum(axis=1)
    return all(len(set(f.table[weight == w].tolist())) == 1 for w in range(f.k + 1))


def database_length(n: int, k: int, symmetric: bool = False) -> int:
    return math.comb(n, k) if symmetric else count_sequences(n, k)


def address_bits(t: int) -> int:
    return max(0, (t - 1).bit_length())


def prrac_database(x, f: BooleanFunction, symmetric: bool = False) -> np.ndarray:
    """Entries f(x_S) as bits (1 for -1), over S in lexicographic order."""
    x = np.asarray(x)
    n = x.size
    if symmetric:
        S = np.array(list(combinations(range(n), f.k)), dtype=np.int64)
    else:
        S = sequence_array(n, f.k)
    return (f.table[bits_to_index(x[S])] == -1).astype(np.int8)


def _query_index(S, n: int, symmetric: bool) -> int:
    if not symmetric:
        return sequence_rank(S, n)
    sub = tuple(sorted(int(i) for i in S))
    if len(set(sub)) != len(sub) or not all(0 <= i < n for i in sub):
        raise ValueError(f"{tuple(S)} is not a sequence of distinct indices in [0, {n})")
    k = len(sub)
    rank, prev = 0, -1
    for pos, s in enumerate(sub):
        for v in range(prev + 1, s):
            rank += math.comb(n - v - 1, k - pos - 1)
        prev = s
    return rank


def fprrac(x, f: BooleanFunction, S, rng: np.random.Generator, symmetric: bool = False):
    """Encode the table of all f(x_S) in a pyramid and retrieve one entry.

    Returns Bob's answer in {-1, +1} and the run's audit record.
    """
    x = np.asarray(x)
    n = x.size
    if symmetric and not is_symmetric(f):
        raise ValueError(f"{f.name} is not symmetric")
    t = database_length(n, f.k, symmetric)
    L = address_bits(t)
    if L > MAX_ADDRESS_BITS:
        raise ValueError(f"database of {t} entries needs {L} address bits, limit {MAX_ADDRESS_BITS}")
    index = _query_index(S, n, symmetric)
    database = np.zeros(1 << L, dtype=np.int8)
    database[:t] = prrac_database(x, f, symmetric)
    pyramid = BoxPyramid(L, rng)
    y = vandam_encode(pyramid, database)
    bit = vandam_decode(pyramid, index, y)
    answer = 1 - 2 * bit
    truth = int(f.table[bits_to_index(x[list(S)])])
    audit = PRRACAudit(L=L, boxes_total=pyramid.materialized, boxes_bob=pyramid.bob_uses,
                       bits_sent=1, correct=answer == truth)
    if pyramid.alice_uses != pyramid.size or pyramid.bob_uses != L:
        raise BoxUseError("box accounting violated")
    return answer, audit


class PRRACProtocol(Protocol):
    """fprrac driven through the common protocol interface."""

    resource = "prrac"

    def __init__(self, n: int, f: BooleanFunction, symmetric: bool = False):
        if not 1 <= f.k <= n:
            raise ValueError(f"need 1 <= k <= n, got k={f.k}, n={n}")
        self.n, self.f, self.k = n, f, f.k
        self.symmetric = symmetric
        self.t = database_length(n, f.k, symmetric)
        self.L = address_bits(self.t)
        if self.L > MAX_ADDRESS_BITS:
            raise ValueError(f"database of {self.t} entries exceeds the address limit")
        self.m = 1

    def simulate(self, x, S, rng):
        return np.array([fprrac(xi, self.f, Si, rng, self.symmetric)[0] for xi, Si in zip(x, S)],
                        dtype=np.int8)

    def exact_terms(self) -> int:
        return (1 << self.n) * count_sequences(self.n, self.k)

    def _exact_success(self):
        # Bob's answer equals the database entry for every realization of
        # the box outputs, so one run per (x, S) fixes its probability.
        rng = np.random.default_rng(0)
        S = sequence_array(self.n, self.k)
        out = np.empty((1 << self.n, len(S)))
        for i, x in enumerate(all_inputs(self.n)):
            for j, s in enumerate(S):
                out[i, j] = float(fprrac(x, self.f, s, rng, self.symmetric)[1].correct)
        return out

    def sweep(self, rng: np.random.Generator):
        """Every (x, S) once; returns the list of audits."""
        S = sequence_array(self.n, self.k)
        return [fprrac(x, self.f, s, rng, self.symmetric)[1] for x in all_inputs(self.n) for s in S]
