"""Base encodings: covering codes, Krawtchouk polynomials and n -> 1 codes.

The three single-symbol codes (classical with shared randomness, quantum
with shared randomness, entanglement assisted) share one batched
interface so the block constructions in :mod:`fracsim.frac` can stack them:

* ``draw(rows, rng)`` returns the shared randomness for ``rows`` runs as a
  dict of arrays whose leading axis is the run;
* ``encode(x, shared, rng)`` maps +-1 inputs of shape (rows, b) to one
  message symbol per run (a bit in {-1,+1} or a Bloch vector);
* ``decode(message, index, shared, rng)`` returns the guess for
  ``x[index]`` in each run.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .boolfn import all_inputs, bits_to_index, index_to_bits, popcount
from .quantum import (
    DensityMatrix,
    bloch_outcome_probability,
    bloch_to_state,
    measure_direction,
    random_unit_vectors,
    singlet_conditional,
)

MAX_CODE_LENGTH = 16


# --------------------------------------------------------------------------
# covering codes


def hamming_ball_offsets(b: int, radius: int) -> np.ndarray:
    """XOR masks of weight <= radius over b bits."""
    masks = np.arange(1 << b)
    return masks[popcount(masks) <= radius]


def _nearest_tables(words: np.ndarray, b: int):
    """Distance to the code and index of the nearest codeword for every point.

    Multi-source breadth-first search over the hypercube.  A point inherits
    the smallest owner among its neighbours one layer closer, which equals
    the lowest-index codeword at minimal distance.
    """
    size = 1 << b
    dist = np.full(size, -1, dtype=np.int64)
    owner = np.full(size, np.iinfo(np.int64).max, dtype=np.int64)
    np.minimum.at(owner, words, np.arange(words.size))
    dist[words] = 0
    frontier = np.unique(words)
    level = 0
    bits = (1 << np.arange(b)).astype(np.int64)
    while frontier.size:
        level += 1
        neigh = (frontier[:, None] ^ bits[None, :]).ravel()
        src = np.repeat(frontier, b)
        fresh = dist[neigh] == -1
        neigh, src = neigh[fresh], src[fresh]
        if neigh.size == 0:
            break
        np.minimum.at(owner, neigh, owner[src])
        frontier = np.unique(neigh)
        dist[frontier] = level
    return dist, owner


@dataclass(frozen=True, eq=False)
class CoveringCode:
    """Code in {-1,1}^b with an exhaustively verified covering radius.

    Codewords are stored as truth-table indices (bit i set means coordinate
    i is -1) in construction order; ``radius`` is the measured covering
    radius, never just the requested one.
    """

    b: int
    words: np.ndarray = field(repr=False)
    radius: int = -1

    def __post_init__(self):
        if not 1 <= self.b <= MAX_CODE_LENGTH:
            raise ValueError(f"block length must lie in [1, {MAX_CODE_LENGTH}]")
        words = np.asarray(self.words, dtype=np.int64)
        if words.ndim != 1 or words.size == 0:
            raise ValueError("a code needs at least one codeword")
        if words.min() < 0 or words.max() >= 1 << self.b:
            raise ValueError("codeword out of range")
        words.setflags(write=False)
        object.__setattr__(self, "words", words)
        measured = int(self.distances.max())
        if self.radius >= 0 and measured > self.radius:
            raise ValueError(f"code has covering radius {measured}, not {self.radius}")
        object.__setattr__(self, "radius", measured)

    @cached_property
    def _tables(self):
        return _nearest_tables(self.words, self.b)

    @property
    def distances(self) -> np.ndarray:
        """Hamming distance from every point (truth-table order) to the code."""
        return self._tables[0]

    @property
    def nearest_index(self) -> np.ndarray:
        """Index into ``words`` of the nearest codeword for every point."""
        return self._tables[1]

    @property
    def size(self) -> int:
        return int(self.words.size)

    @property
    def codewords(self) -> np.ndarray:
        return index_to_bits(self.words, self.b)

    @cached_property
    def decode_table(self) -> np.ndarray:
        """Point index -> index of its nearest codeword (as a point index)."""
        return self.words[self.nearest_index]

    def to_text(self) -> str:
        width = max(1, (self.b + 3) // 4)
        lines = [f"covering-code b={self.b} radius={self.radius} count={self.size}"]
        lines += [format(int(w), f"0{width}x") for w in self.words]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "CoveringCode":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        fields = dict(tok.split("=") for tok in lines[0].split()[1:])
        b, radius, count = int(fields["b"]), int(fields["radius"]), int(fields["count"])
        words = [int(w, 16) for w in lines[1:]]
        if len(words) != count:
            raise ValueError(f"header announces {count} codewords, found {len(words)}")
        code = cls(b, np.array(words), radius)
        if code.radius != radius:
            raise ValueError(f"stored radius {radius} does not match measured {code.radius}")
        return code


def greedy_covering_code(b: int, radius: int) -> CoveringCode:
    """Greedy set cover: repeatedly take the point whose ball covers most new points."""
    if radius < 0:
        raise ValueError("covering radius must be non-negative")
    if not 1 <= b <= MAX_CODE_LENGTH:
        raise ValueError(f"block length must lie in [1, {MAX_CODE_LENGTH}]")
    radius = min(radius, b)
    offsets = hamming_ball_offsets(b, radius)
    size = 1 << b
    gain = np.full(size, offsets.size, dtype=np.int64)
    covered = np.zeros(size, dtype=bool)
    words = []
    remaining = size
    while remaining:
        c = int(np.argmax(gain))
        ball = c ^ offsets
        fresh = ball[~covered[ball]]
        covered[fresh] = True
        remaining -= fresh.size
        words.append(c)
        np.subtract.at(gain, (fresh[:, None] ^ offsets[None, :]).ravel(), 1)
    return CoveringCode(b, np.array(words), radius)


def nearest_codeword(code: CoveringCode, x) -> np.ndarray:
    """Closest codeword to ``x`` (ties go to the lowest codeword index)."""
    x = np.asarray(x)
    if x.shape[-1] != code.b:
        raise ValueError(f"expected strings of length {code.b}")
    return index_to_bits(code.decode_table[bits_to_index(x)], code.b)


# --------------------------------------------------------------------------
# Krawtchouk polynomials


def krawtchouk(k: int, n: int, x: int) -> int:
    """K_{k,n}(x) = sum_j (-1)^j C(x, j) C(n - x, k - j), exactly."""
    if not (0 <= k <= n and 0 <= x <= n):
        raise ValueError(f"need 0 <= k <= n and 0 <= x <= n, got k={k}, n={n}, x={x}")
    return sum((-1) ** j * math.comb(x, j) * math.comb(n - x, k - j) for j in range(k + 1))


# --------------------------------------------------------------------------
# single-symbol random access codes


def rac_sr_bias(b: int) -> Fraction:
    """2**(1-b) C(b-1, floor((b-1)/2)), the majority code's per-bit bias."""
    if b < 1:
        raise ValueError("block length must be positive")
    return Fraction(2 * math.comb(b - 1, (b - 1) // 2), 2 ** b)


def take_rows(shared: dict, rows) -> dict:
    return {key: value[rows] for key, value in shared.items()}


class BaseCode:
    """Common surface of the b -> 1 codes."""

    block_length: int
    alphabet: str
    resource: str
    discrete: bool = True

    def draw(self, rows: int, rng: np.random.Generator) -> dict:
        raise NotImplementedError

    def encode(self, x: np.ndarray, shared: dict, rng: np.random.Generator):
        raise NotImplementedError

    def decode(self, message, index: np.ndarray, shared: dict, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    @property
    def bias(self) -> float:
        raise NotImplementedError

    def exact_agreement(self) -> np.ndarray:
        """P(decoded bit i equals x_i) for every input and position, shape (2**b, b)."""
        raise ValueError(f"{type(self).__name__}({self.block_length}) has continuous randomness")

    def simulate(self, x: np.ndarray, index: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        shared = self.draw(len(x), rng)
        message = self.encode(x, shared, rng)
        return self.decode(message, index, shared, rng)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.block_length})"


class MajorityRAC(BaseCode):
    """b -> 1 classical code with shared randomness.

    A shared uniform mask r hides the input; the single bit sent is the
    majority of x*r (an extra shared fair bit settles ties), and bit i is
    read back as message * r_i.
    """

    alphabet = "bit"
    resource = "rac_sr"
    discrete = True

    def __init__(self, b: int):
        if b < 1:
            raise ValueError("block length must be positive")
        self.block_length = b

    @property
    def bias(self) -> float:
        return float(rac_sr_bias(self.block_length))

    def draw(self, rows, rng):
        b = self.block_length
        return {
            "mask": np.where(rng.random((rows, b)) < 0.5, 1, -1).astype(np.int8),
            "tie": np.where(rng.random(rows) < 0.5, 1, -1).astype(np.int8),
        }

    def encode(self, x, shared, rng):
        total = (np.asarray(x, dtype=np.int64) * shared["mask"]).sum(axis=1)
        return np.where(total == 0, shared["tie"], np.sign(total)).astype(np.int8)

    def decode(self, message, index, shared, rng):
        rows = np.arange(len(index))
        return (message * shared["mask"][rows, index]).astype(np.int8)

    def exact_counts(self) -> tuple[np.ndarray, int]:
        """Success counts over all masks and tie bits, and their common denominator.

        Entry (x, i) counts the (mask, tie) pairs for which bit i of input x
        decodes correctly; the denominator is 2**(b+1).
        """
        b = self.block_length
        size = 1 << b
        masks = np.arange(size, dtype=np.int32)
        minus = popcount(masks)
        # message in bit form per z: 1 (i.e. -1) when more than b/2 minus signs
        msg_of = (2 * minus > b).astype(np.uint8)
        tie_of = 2 * minus == b
        counts = np.zeros((size, b), dtype=np.int64)
        chunk = max(1, (1 << 20) // size)
        for start in range(0, size, chunk):
            xs = np.arange(start, min(size, start + chunk), dtype=np.int32)
            # +-1 products become XOR on the bit encoding.
            z = xs[:, None] ^ masks[None, :]
            msg = msg_of[z]
            tie = tie_of[z]
            ties = tie.sum(axis=1)
            decided = ~tie
            for i in range(b):
                z_i = ((z >> i) & 1).astype(np.uint8)
                counts[start:start + xs.size, i] = ties + 2 * ((msg == z_i) & decided).sum(axis=1)
        return counts, 2 * size

    def exact_agreement(self):
        counts, denom = self.exact_counts()
        return counts / denom


class BlochQRAC(BaseCode):
    """b -> 1 quantum code with shared randomness, one qubit per message.

    For b <= 3 the fixed constructions are used: Bloch vector
    (x_1, ..., x_b, 0...) / sqrt(b) with measurements along the coordinate
    axes.  Otherwise shared randomness supplies b uniform directions v_i;
    the state points along sum_i x_i v_i and bit i is read by measuring
    along v_i.
    """

    alphabet = "qubit"
    resource = "qrac_sr"

    def __init__(self, b: int):
        if b < 1:
            raise ValueError("block length must be positive")
        self.block_length = b
        self.discrete = b <= 3

    @property
    def bias(self) -> float:
        b = self.block_length
        if b <= 3:
            return 1.0 / math.sqrt(b)
        return math.sqrt(8.0 / (3.0 * math.pi * b))

    def _fixed_directions(self) -> np.ndarray:
        return np.eye(3)[: self.block_length]

    def draw(self, rows, rng):
        if self.discrete:
            return {"dirs": np.broadcast_to(self._fixed_directions(), (rows, self.block_length, 3))}
        return {"dirs": random_unit_vectors((rows, self.block_length), rng)}

    def encode(self, x, shared, rng):
        dirs = shared["dirs"]
        total = np.einsum("tb,tbc->tc", np.asarray(x, dtype=float), dirs)
        norm = np.linalg.norm(total, axis=1)
        if self.discrete:
            return total / math.sqrt(self.block_length)
        bad = norm < 1e-12
        while np.any(bad):
            # measure-zero event: redraw those directions
            dirs = np.array(dirs)
            dirs[bad] = random_unit_vectors((int(bad.sum()), self.block_length), rng)
            shared["dirs"] = dirs
            total = np.einsum("tb,tbc->tc", np.asarray(x, dtype=float), dirs)
            norm = np.linalg.norm(total, axis=1)
            bad = norm < 1e-12
        return total / norm[:, None]

    def decode(self, message, index, shared, rng):
        rows = np.arange(len(index))
        p_plus = bloch_outcome_probability(message, shared["dirs"][rows, index])
        return np.where(rng.random(len(index)) < p_plus, 1, -1).astype(np.int8)

    def state(self, x, directions=None) -> DensityMatrix:
        """Encoded density matrix of a single input under given directions."""
        dirs = self._fixed_directions() if directions is None else np.asarray(directions, float)
        u = self.encode(np.asarray(x)[None, :], {"dirs": dirs[None]}, np.random.default_rng(0))[0]
        return bloch_to_state(u)

    def encoding_states(self, directions=None) -> np.ndarray:
        """All 2**b encoded states in truth-table order."""
        return np.array([self.state(x, directions).data for x in all_inputs(self.block_length)])

    def exact_agreement(self):
        if not self.discrete:
            return super().exact_agreement()
        b = self.block_length
        axes = self._fixed_directions()
        out = np.empty((1 << b, b))
        for idx, x in enumerate(all_inputs(b)):
            rho = self.state(x)
            for i in range(b):
                p_plus = measure_direction(rho, axes[i])
                out[idx, i] = p_plus if x[i] == 1 else 1.0 - p_plus
        return out


# Measurement angles on the equator that realise the optimal CHSH
# correlation: a XOR b = s AND t with probability cos^2(pi/8).
ALICE_ANGLES = np.array([0.0, math.pi / 2])
BOB_ANGLES = np.array([-3 * math.pi / 4, 3 * math.pi / 4])


class NestedEARAC(BaseCode):
    """2**L -> 1 entanglement-assisted code built by nesting the 2 -> 1 code.

    The 2 -> 1 step: Alice measures her half of a singlet at an angle chosen
    by s = d0 xor d1 and sends d0 xor a; Bob measures at an angle chosen by
    his query bit t and outputs message xor b.  Since a xor b = s t with
    probability cos^2(pi/8), each query is answered with bias 1/sqrt(2).
    Levels stack like a binary tree: the two child messages of a node are
    the data bits of its parent.  Bob walks the path named by the index
    bits (most significant at the root), so L independent errors compose to
    bias 2**(-L/2).

    Alice's settings and outcomes are kept in the shared dict so Bob's
    outcomes can be drawn from the post-measurement singlet state.
    """

    alphabet = "bit"
    resource = "earac"
    discrete = False

    def __init__(self, b: int):
        if b < 1 or b & (b - 1):
            raise ValueError(f"entanglement-assisted code needs a power-of-two length, got {b}")
        self.block_length = b
        self.levels = b.bit_length() - 1

    @property
    def bias(self) -> float:
        return 2.0 ** (-self.levels / 2)

    def draw(self, rows, rng):
        return {}

    def encode(self, x, shared, rng):
        data = (np.asarray(x) == -1).astype(np.int8)
        for level in range(self.levels):
            s = data[:, 0::2] ^ data[:, 1::2]
            alpha = ALICE_ANGLES[s]
            a = (rng.random(s.shape) < 0.5).astype(np.int8)
            shared[f"alpha{level}"] = alpha
            shared[f"a{level}"] = a
            data = data[:, 0::2] ^ a
        return (1 - 2 * data[:, 0]).astype(np.int8)

    def decode(self, message, index, shared, rng):
        rows = np.arange(len(index))
        out = (np.asarray(message) == -1).astype(np.int8)
        index = np.asarray(index, dtype=np.int64)
        for level in reversed(range(self.levels)):
            node = index >> (level + 1)
            t = (index >> level) & 1
            a = shared[f"a{level}"][rows, node]
            alpha = shared[f"alpha{level}"][rows, node]
            a_pm = 1 - 2 * a.astype(np.int64)
            b_pm = singlet_conditional(a_pm, alpha, BOB_ANGLES[t], rng)
            out ^= (b_pm == -1).astype(np.int8)
        return (1 - 2 * out).astype(np.int8)


def rac1_sr(b: int) -> MajorityRAC:
    return MajorityRAC(b)


def qrac1_sr(b: int) -> BlochQRAC:
    return BlochQRAC(b)


def earac1(b: int) -> NestedEARAC:
    return NestedEARAC(b)


BASE_CODES = {"rac_sr": rac1_sr, "qrac_sr": qrac1_sr, "earac": earac1}


def exact_base_bias(code: BaseCode) -> tuple[float, float]:
    """(worst-case, average) per-bit bias of a code with discrete randomness."""
    agree = code.exact_agreement()
    return float(2 * agree.min() - 1), float(2 * agree.mean() - 1)
