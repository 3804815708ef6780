"""Closed-form lower and upper bounds on f-random access code biases, and
numerical checks of the inequalities behind them.

Unspecified multiplicative constants are normalized to 1 and reported
in a caveat field; vacuous bounds are flagged, never silently clamped.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .boolfn import BooleanFunction, noise_stability, popcount, spectrum_profile
from .frac.sequences import collision_probability
from .quantum import matrix_fourier_transform, trace_norm

ETA_DEFAULT = 1.40
ETA_MIN = 2.0 * math.log(2.0)
C_ETA_CAVEAT = "C_eta normalized to 1; the true constant is unspecified"


# --------------------------------------------------------------------------
# entropy


def binary_entropy(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def entropy_sandwich(p: float) -> tuple[float, float, float]:
    """(1 - 4(p-1/2)^2, H(p), 1 - (2/ln 2)(p-1/2)^2)."""
    h = binary_entropy(p)
    d2 = (p - 0.5) ** 2
    return 1.0 - 4.0 * d2, h, 1.0 - (2.0 / math.log(2.0)) * d2


def check_entropy_sandwich(points: int = 1001, tol: float = 1e-12) -> bool:
    for p in np.linspace(0.0, 1.0, points):
        lo, h, hi = entropy_sandwich(float(p))
        if not lo - tol <= h <= hi + tol:
            return False
    return True


def nayak_bound(n: int, p: float) -> float:
    """Minimal message length (1 - H(p)) n of any n -> m RAC with success p."""
    if not 0.5 <= p <= 1.0:
        raise ValueError(f"success probability must lie in [1/2, 1], got {p}")
    return (1.0 - binary_entropy(p)) * n


# --------------------------------------------------------------------------
# Fourier upper bounds


def _check_eta(eta: float):
    if eta <= ETA_MIN:
        raise ValueError(f"eta must exceed 2 ln 2 = {ETA_MIN:.6f}, got {eta}")


def _check_upper_domain(f: BooleanFunction, n: int, m: int):
    if 4 * f.k > n:
        raise ValueError(f"upper bound needs k <= n/4, got k={f.k}, n={n}")
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got m={m}")


def thm44_upper(f: BooleanFunction, n: int, m: int, eta: float = ETA_DEFAULT) -> float:
    """sum_l L_{1,l}(f) (eta m / n)^(l/2) with the leading constant set to 1."""
    _check_eta(eta)
    _check_upper_domain(f, n, m)
    l1 = spectrum_profile(f).level_l1
    ratio = eta * m / n
    return float(sum(l1[ell] * ratio ** (ell / 2) for ell in range(f.k + 1)))


def finite_upper(f: BooleanFunction, n: int, m: int) -> float:
    """Non-asymptotic form: sum_l C(n,l)^(-1/2) L_{1,l}(f) (2e ln2 m / l)^(l/2).

    This is what the hypercontractive inequality gives before Stirling's
    approximation; it bounds the average bias of every f-QRAC with SR.
    """
    if not 1 <= m or f.k > n:
        raise ValueError("need m >= 1 and k <= n")
    l1 = spectrum_profile(f).level_l1
    total = l1[0]
    for ell in range(1, f.k + 1):
        total += l1[ell] * math.comb(n, ell) ** -0.5 * (2 * math.e * math.log(2) * m / ell) ** (ell / 2)
    return float(total)


def level_constant(n: int, ell: int, eta: float = ETA_DEFAULT) -> float:
    """Ratio of the level-l term of :func:`finite_upper` to that of :func:`thm44_upper`."""
    if ell == 0:
        return 1.0
    return math.comb(n, ell) ** -0.5 * (2 * math.e * math.log(2) * n / (eta * ell)) ** (ell / 2)


def ratio_constant(n_values, k_max: int, eta: float = ETA_DEFAULT) -> float:
    """max over n and l <= k_max of :func:`level_constant`.

    finite_upper <= ratio_constant * thm44_upper term by term, so any
    measured bias over thm44_upper stays below this number.
    """
    _check_eta(eta)
    return max(level_constant(n, ell, eta) for n in n_values for ell in range(k_max + 1) if ell <= n)


def _granular_factor(profile) -> float:
    # constants have degree 0 but coefficient 1, so granularity unit is 1
    return 2.0 ** (max(profile.degree, 1) - 1)


@dataclass(frozen=True)
class CorollaryBounds:
    q: float
    vacuous: bool
    thm44: float
    eq_a: float
    eq_b: float
    eq_c: float
    chain: float
    chain_ok: bool
    cor2: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return asdict(self)


def corollary_bounds(f: BooleanFunction, n: int, m: int, eta: float = ETA_DEFAULT,
                     r: float = 0.5, tol: float = 1e-12) -> CorollaryBounds:
    """Evaluate the corollary forms and the inequality chain between them.

    ``chain`` is sum_l 2^(deg-1) W^l q^l, which must dominate thm44 level by
    level and equal eq_c.  ``vacuous`` is set when q = sqrt(eta m / n) > 1.
    """
    if not 0.0 <= r <= 1.0:
        raise ValueError("r must lie in [0, 1]")
    thm = thm44_upper(f, n, m, eta)
    q = math.sqrt(eta * m / n)
    profile = spectrum_profile(f)
    spec = f.spectrum
    support = np.abs(spec.coeffs) > 1e-12
    # Stab_t as the polynomial sum_l W^l t^l, which stays meaningful for t > 1
    def stab(t):
        return float(sum(profile.weights[ell] * t ** ell for ell in range(f.k + 1)))

    eq_a = math.sqrt(stab(q ** (2 * r)) * float(np.sum(q ** (2 * (1 - r) * spec.levels[support]))))
    h = profile.pure_high_degree
    eq_b = profile.one_norm * (eta * m / n) ** (h / 2)
    factor = _granular_factor(profile)
    eq_c = factor * (noise_stability(f, q) if q <= 1 else stab(q))
    chain = factor * stab(q)
    level_ok = all(
        profile.level_l1[ell] * q ** ell <= factor * profile.weights[ell] * q ** ell + tol
        for ell in range(f.k + 1)
    )
    # eq_b uses q^l <= q^h, true only for q <= 1
    chain_ok = level_ok and thm <= chain + tol and abs(chain - eq_c) <= tol and thm <= eq_a + tol \
        and (q > 1 or thm <= eq_b + tol)
    w_h = float(profile.weights[h])
    cor2 = {
        "sr": w_h * (m / (2 * n)) ** (h / 2),
        "qsr": w_h * (8 * m / (3 * math.pi * n)) ** (h / 2),
        "ea": w_h * (m / n) ** (h / 2),
    }
    return CorollaryBounds(q=q, vacuous=q > 1, thm44=thm, eq_a=eq_a, eq_b=eq_b, eq_c=eq_c,
                           chain=chain, chain_ok=bool(chain_ok), cor2=cor2)


# --------------------------------------------------------------------------
# lower bounds


@dataclass(frozen=True)
class LowerBound:
    q: float
    stab: float
    vacuous: bool
    factor_exact: float | None
    factor_bound: float | None
    value: float

    def as_dict(self) -> dict:
        return asdict(self)


def _clamped_sqrt(radicand: float) -> tuple[float, bool]:
    if radicand < 0:
        return 0.0, True
    if radicand > 1:
        return 1.0, True
    return math.sqrt(radicand), False


def _factors(blocks: int, n: int, k: int) -> tuple[float, float]:
    padded = -(-n // blocks) * blocks
    exact = float(collision_probability(blocks, padded, k)) if k <= blocks else 0.0
    return exact, 1.0 - k * (k - 1) / (2 * blocks)


def lower_bound_sheet(f: BooleanFunction, n: int, m: int, ell: int | None = None) -> dict:
    """q values of the four block constructions and their Stab_q[f].

    ``value`` multiplies Stab_q[f] by the exact collision factor of the
    block split (with padding when the block count does not divide n).
    """
    k = f.k
    formulas = {
        "rac_sr": m / (2 * n),
        "qrac_sr": 8 * m / (3 * math.pi * n),
        "earac": m / n,
    }
    blocks = {"rac_sr": m, "qrac_sr": m, "earac": m}
    if ell is not None:
        if ell < 1:
            raise ValueError("ell must be positive")
        size = n / ell
        formulas = {"rac_pr": m / n - 5 * math.log2(size) / size, **formulas}
        blocks["rac_pr"] = ell
    sheet = {}
    for resource, radicand in formulas.items():
        q, vacuous = _clamped_sqrt(radicand)
        stab = noise_stability(f, q)
        exact, bound = _factors(blocks[resource], n, k) if blocks[resource] <= n else (None, None)
        value = stab * exact if exact is not None else 0.0
        sheet[resource] = LowerBound(q=q, stab=stab, vacuous=vacuous, factor_exact=exact,
                                     factor_bound=bound, value=value)
    return sheet


@dataclass
class BoundSheet:
    n: int
    m: int
    k: int
    f: str
    ell: int | None
    eta: float
    lower: dict
    upper: dict
    C_eta: float = 1.0
    caveat: str = C_ETA_CAVEAT

    def as_dict(self) -> dict:
        return {
            "n": self.n, "m": self.m, "k": self.k, "f": self.f, "ell": self.ell, "eta": self.eta,
            "C_eta": self.C_eta, "caveat": self.caveat,
            "lower": {key: val.as_dict() for key, val in self.lower.items()},
            "upper": self.upper,
        }


def bound_sheet(f: BooleanFunction, n: int, m: int, ell: int | None = None, eta: float = ETA_DEFAULT,
                r: float = 0.5) -> BoundSheet:
    lower = lower_bound_sheet(f, n, m, ell)
    try:
        cor = corollary_bounds(f, n, m, eta, r)
        upper = {"thm44": cor.thm44, "eq_a": cor.eq_a, "eq_b": cor.eq_b, "eq_c": cor.eq_c,
                 "q": cor.q, "vacuous": cor.vacuous or cor.thm44 >= 1.0, "chain_ok": cor.chain_ok,
                 "cor2": cor.cor2}
    except ValueError as exc:
        upper = {"error": str(exc), "vacuous": True}
    return BoundSheet(n=n, m=m, k=f.k, f=f.name, ell=ell, eta=eta, lower=lower, upper=upper)


# --------------------------------------------------------------------------
# inequality checks


@dataclass(frozen=True)
class HypercontractivityResult:
    delta: float
    lhs: float
    rhs: float
    passed: bool


def fourier_trace_norms(F) -> tuple[np.ndarray, np.ndarray]:
    """||F^(S)||_tr for every subset mask, and |S| for each mask."""
    coeffs = matrix_fourier_transform(F)
    norms = np.array([trace_norm(c) for c in coeffs])
    return norms, popcount(np.arange(len(coeffs)))


def hypercontractivity_check(F, delta, m: int, tol: float = 1e-9):
    """sum_S delta^|S| ||F^(S)||_tr^2 <= 2^(2 delta m) for F into 2^m-dimensional states.

    ``delta`` may be a single value or a sequence; norms are computed once.
    """
    F = np.asarray(F, dtype=complex)
    size = F.shape[0]
    n = size.bit_length() - 1
    if n > 8 or m > 3:
        raise ValueError("hypercontractivity check supports n <= 8 and m <= 3")
    if F.shape[1:] != (1 << m, 1 << m):
        raise ValueError(f"values must be {1 << m}x{1 << m} matrices")
    deltas = [delta] if np.isscalar(delta) else list(delta)
    for d in deltas:
        if not 0.0 <= d <= 1.0:
            raise ValueError(f"delta must lie in [0, 1], got {d}")
    norms, sizes = fourier_trace_norms(F)
    results = []
    for d in deltas:
        lhs = float(np.sum(d ** sizes.astype(float) * norms ** 2))
        rhs = 2.0 ** (2 * d * m)
        results.append(HypercontractivityResult(float(d), lhs, rhs, lhs <= rhs + tol))
    return results[0] if np.isscalar(delta) else results


@dataclass(frozen=True)
class SandwichPoint:
    q: float
    stab: float
    lower: float
    upper: float
    lower_ok: bool
    upper_ok: bool


def maj_stability_sandwich(k: int, q_grid) -> list[SandwichPoint]:
    """(2/pi) arcsin q <= Stab_q[MAJ_k] <= that plus 1/(sqrt(1-q^2) sqrt(k)).

    The additive term's constant is not known; upper failures are reported
    for the caller to treat as soft.
    """
    from .boolfn import construct

    if k % 2 == 0 or not 1 <= k <= 11:
        raise ValueError("majority sandwich needs odd k <= 11")
    f = construct("maj", k)
    points = []
    for q in q_grid:
        q = float(q)
        if not 0.0 <= q <= 0.95:
            raise ValueError("q grid must lie in [0, 0.95]")
        stab = noise_stability(f, q)
        lower = 2.0 / math.pi * math.asin(q)
        upper = lower + 1.0 / (math.sqrt(1.0 - q * q) * math.sqrt(k))
        points.append(SandwichPoint(q, stab, lower, upper, stab >= lower - 1e-12, stab <= upper + 1e-12))
    return points


def earac_block_tradeoff(n: int, m: int, sizes) -> float:
    """Success 1/2 + (1/2n) sum_i sqrt(r_i) of m independent r_i -> 1 EARACs."""
    sizes = [int(r) for r in sizes]
    if len(sizes) != m or any(r < 1 for r in sizes) or sum(sizes) != n:
        raise ValueError(f"{sizes} is not a composition of {n} into {m} positive parts")
    return 0.5 + sum(math.sqrt(r) for r in sizes) / (2 * n)


def compositions(n: int, m: int):
    """Ordered tuples of m positive integers summing to n."""
    if m == 1:
        yield (n,)
        return
    for first in range(1, n - m + 2):
        for rest in compositions(n - first, m - 1):
            yield (first,) + rest


@dataclass(frozen=True)
class TradeoffCheck:
    n: int
    m: int
    best: tuple
    best_value: float
    equal_value: float
    passed: bool


def earac_tradeoff_check(n: int, m: int, tol: float = 1e-12) -> TradeoffCheck:
    """Exhaustive check that the (most) equal split maximizes the success.

    When m divides n the maximum must equal 1/2 + sqrt(m/n)/2; otherwise
    the balanced composition must win and stay below that value.
    """
    if not 1 <= m <= n:
        raise ValueError("need 1 <= m <= n")
    best, best_value = None, -math.inf
    for comp in compositions(n, m):
        value = earac_block_tradeoff(n, m, comp)
        if value > best_value + tol:
            best, best_value = comp, value
    equal_value = 0.5 + 0.5 * math.sqrt(m / n)
    balanced = max(best) - min(best) <= 1
    if n % m == 0:
        passed = balanced and abs(best_value - equal_value) <= tol
    else:
        passed = balanced and best_value <= equal_value + tol
    return TradeoffCheck(n, m, best, best_value, equal_value, passed)


# --------------------------------------------------------------------------
# combinatorial prerequisites


def krawtchouk_recurrence_failures(n_max: int = 25, form: str = "difference") -> list[tuple[int, int, int]]:
    """Triples (k, n, x), 1 <= x <= n <= n_max, where a Krawtchouk recurrence fails.

    ``difference``: K_k(x) - K_k(x-1) = K_{k-1}(x) - K_{k-1}(x-1).
    ``signed``:     K_k(x) - K_k(x-1) = -K_{k-1}(x) - K_{k-1}(x-1).
    Only the signed form is an identity; already at k = 1 the difference
    form compares -2 with 0.
    """
    from .codes import krawtchouk

    if form not in ("difference", "signed"):
        raise ValueError(f"unknown recurrence form {form!r}")
    sign = 1 if form == "difference" else -1
    bad = []
    for n in range(1, n_max + 1):
        for k in range(1, n + 1):
            for x in range(1, n + 1):
                lhs = krawtchouk(k, n, x) - krawtchouk(k, n, x - 1)
                rhs = sign * krawtchouk(k - 1, n, x) - krawtchouk(k - 1, n, x - 1)
                if lhs != rhs:
                    bad.append((k, n, x))
    return bad


def vandermonde_holds(n_max: int = 25) -> bool:
    for n in range(1, n_max + 1):
        for part in range(n + 1):
            for k in range(n + 1):
                total = sum(math.comb(n - part, k - j) * math.comb(part, j) for j in range(k + 1))
                if total != math.comb(n, k):
                    return False
    return True


def krawtchouk_linear_holds(n_max: int = 25) -> bool:
    from .codes import krawtchouk

    return all(krawtchouk(1, n, x) == n - 2 * x for n in range(1, n_max + 1) for x in range(n + 1))


