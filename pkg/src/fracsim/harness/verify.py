"""Invariant suites behind ``fracsim verify``.

Each check yields a row (suite, name, value, status).  Hard failures make
the command exit non-zero; soft checks cover statements whose constants
are unknown and are reported only.  Output contains no timings, so two
runs with the same seed print identical bytes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .. import bounds, codes, quantum
from ..boolfn import construct, noise_stability, parse_function, spectrum_profile
from ..frac import BlockProtocol, RandomizationTable, collision_probability, exact_bias, xor_rac_pr
from ..frac.protocols import xor_agreement_formula, xor_distance_agreement
from ..frac.sequences import sequences
from ..prbox import BoxPyramid, PRRACProtocol, vandam_decode, vandam_encode

SUITES = ("boolfn", "quantum", "codes", "frac", "prbox", "bounds")


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    value: str
    ok: bool
    soft: bool = False

    @property
    def status(self) -> str:
        if self.ok:
            return "PASS"
        return "SOFT" if self.soft else "FAIL"

    def line(self) -> str:
        return f"{self.suite:<8} {self.name:<46} {self.value:<30} {self.status}"


def _random_function(k: int, rng) -> object:
    return construct("from_table", k, table=np.where(rng.random(1 << k) < 0.5, 1, -1))


def _boolfn(rng):
    worst = 0.0
    for k in range(1, 13):
        f = _random_function(k, rng)
        worst = max(worst, abs(float(np.sum(f.spectrum.coeffs ** 2)) - 1.0))
    yield "parseval k<=12", f"max err {worst:.1e}", worst <= 1e-10
    worst = 0.0
    for _ in range(50):
        f = _random_function(int(rng.integers(1, 9)), rng)
        for q in (-1.0, -0.5, 0.0, 0.3, 0.7, 1.0):
            worst = max(worst, abs(noise_stability(f, q) - noise_stability(f, q, "exhaustive")))
    yield "stability fourier == exhaustive (50 f)", f"max err {worst:.1e}", worst <= 1e-10
    grid = np.linspace(0, 1, 101)
    monotone = True
    for _ in range(10):
        f = _random_function(int(rng.integers(1, 9)), rng)
        values = [noise_stability(f, float(q)) for q in grid]
        monotone &= all(b >= a - 1e-12 for a, b in zip(values, values[1:]))
    yield "stability non-decreasing on [0,1]", "10 random f", monotone
    granular = all(spectrum_profile(_random_function(int(rng.integers(1, 11)), rng)).granular
                   for _ in range(20))
    yield "spectrum granularity", "20 random f", granular
    worst = 0.0
    for k in range(1, 7):
        f = construct("xor", k)
        for q in (0.2, 0.5, 0.9):
            worst = max(worst, abs(noise_stability(f, q) - q ** k))
    yield "Stab_q[chi_S] = q^|S|", f"max err {worst:.1e}", worst <= 1e-12


def _quantum(rng):
    worst = 0.0
    for d in (1, 2, 3, 5, 8, 16, 32):
        a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        h = a + a.conj().T
        w, v = quantum.jacobi_eigh(h)
        worst = max(worst, float(np.max(np.abs(v @ np.diag(w) @ v.conj().T - h))))
    yield "jacobi reconstruction d<=32", f"max err {worst:.1e}", worst <= 1e-9
    ok = True
    for _ in range(20):
        mats = [rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)) for _ in range(2)]
        a, b = (m + m.conj().T for m in mats)
        c = float(rng.normal())
        ok &= quantum.trace_norm(a + b) <= quantum.trace_norm(a) + quantum.trace_norm(b) + 1e-9
        ok &= abs(quantum.trace_norm(c * a) - abs(c) * quantum.trace_norm(a)) <= 1e-9
    yield "trace norm triangle + homogeneity", "20 triples", ok
    ok = True
    for _ in range(20):
        r0, r1 = quantum.random_pure_state(2, rng), quantum.random_pure_state(2, rng)
        p = float(rng.random())
        bias = quantum.helstrom_bias(r0, r1, p)
        ok &= abs(2 * p - 1) - 1e-10 <= bias <= 1 + 1e-10
        ok &= abs(quantum.helstrom_bias(r0, r0, p) - abs(2 * p - 1)) <= 1e-10
    yield "helstrom range", "20 pairs", ok
    qrac = codes.qrac1_sr(2)
    value = quantum.optimal_qrac_bias(qrac.encoding_states(), construct("dictator", 1, index=0), [0])
    yield "2->1 QRAC optimal bias", f"{value:.12f}", abs(value - 1 / math.sqrt(2)) <= 1e-10
    a, b = quantum.singlet_sample(0.0, math.pi / 4, rng, size=100_000)
    corr = float(np.mean(a.astype(float) * b))
    sigma = math.sqrt((1 - 0.5) / 100_000)
    yield "singlet E[ab] at pi/4", f"{corr:+.4f}", abs(corr + 1 / math.sqrt(2)) <= 3 * sigma


def _codes(rng):
    ok = True
    for b in range(1, 11):
        for r in range(0, b + 1):
            code = codes.greedy_covering_code(b, r)
            ok &= int(code.distances.max()) <= r
    yield "greedy covering radius b<=10", "all radii", ok
    yield "K_{1,n}(x) = n - 2x, n<=25", "exact", bounds.krawtchouk_linear_holds(25)
    bad = bounds.krawtchouk_recurrence_failures(25, "difference")
    yield "K difference recurrence (unsigned)", f"{len(bad)} counterexamples", not bad, True
    bad = bounds.krawtchouk_recurrence_failures(25, "signed")
    yield "K signed recurrence, n<=25", f"{len(bad)} counterexamples", not bad
    yield "vandermonde partition, n<=25", "exact", bounds.vandermonde_holds(25)
    ok = True
    for b in (3, 5, 7, 9, 11):
        counts, denom = codes.rac1_sr(b).exact_counts()
        ok &= Fraction(2 * int(counts.min()), denom) - 1 == codes.rac_sr_bias(b)
    yield "rac1_sr exact bias, odd b<=11", "rational", ok
    ok = True
    for b in range(2, 13, 2):
        worst, _ = codes.exact_base_bias(codes.rac1_sr(b))
        ok &= worst >= math.sqrt(1 / (2 * b)) - 1e-12
    yield "rac1_sr even b >= sqrt(1/2b)", "b=2..12", ok


def _frac(rng):
    n, ell, k = 12, 4, 3
    block = n // ell
    hits = sum(len({s // block for s in S}) == k for S in sequences(n, k))
    counted = Fraction(hits, math.perm(n, k))
    yield "collision exact == count (12,4,3)", str(counted), counted == collision_probability(ell, n, k)
    ok = True
    for resource, n, m in (("rac_sr", 6, 2), ("rac_sr", 6, 3), ("qrac_sr", 4, 2), ("qrac_sr", 6, 2)):
        proto = BlockProtocol(resource, n, m, construct("dictator", 1, index=0))
        ok &= abs(exact_bias(proto).bias_worst - proto.q) <= 1e-12
    yield "k=1 block bias == base bias", "4 configs", ok
    report = exact_bias(BlockProtocol("rac_sr", 8, 4, construct("xor", 2)))
    expected = float(collision_probability(4, 8, 2)) * 0.25
    yield "block rac xor2 n=8 m=4 exact", f"{report.bias_avg:.12f}", abs(report.bias_avg - expected) <= 1e-12
    ok = True
    for n in range(4, 9):
        for k in (2, 3):
            table = RandomizationTable.sample(n, 1, rng)
            proto = xor_rac_pr(n, k, 1, rng, table=table)
            dist, agree, total = xor_distance_agreement(proto, 0)
            ok &= all(Fraction(int(a), total) == xor_agreement_formula(n, k, int(d))
                      for d, a in zip(dist, agree))
    yield "parity agreement == krawtchouk form", "n=4..8, k=2,3", ok


def _prbox(rng):
    proto = PRRACProtocol(3, construct("xor", 2))
    audits = proto.sweep(rng)
    good = sum(a.correct and a.bits_sent == 1 and a.boxes_bob == proto.L for a in audits)
    yield "PRRAC exhaustive n=3 k=2", f"{good}/{len(audits)}", good == len(audits)
    proto = PRRACProtocol(4, construct("and", 2))
    audits = proto.sweep(rng)
    good = sum(a.correct and a.boxes_bob == proto.L for a in audits)
    yield "PRRAC exhaustive n=4 k=2", f"{good}/{len(audits)}", good == len(audits)
    trials = 20_000
    agree = 0
    for _ in range(trials):
        db = rng.integers(0, 2, size=8)
        index = int(rng.integers(0, 8))
        pyramid = BoxPyramid(3, rng)
        vandam_encode(pyramid, db)
        guess = vandam_decode(pyramid, index, 0)
        agree += int(guess == db[index])
    bias = 2 * agree / trials - 1
    yield "bob's boxes alone carry no signal", f"bias {bias:+.4f}", abs(bias) <= 4 / math.sqrt(trials)


def _bounds(rng):
    yield "entropy sandwich, 1001 points", "grid", bounds.check_entropy_sandwich()
    ok = all(bounds.earac_tradeoff_check(n, m).passed for n in range(1, 21) for m in range(1, min(4, n) + 1))
    yield "equal split maximizes earac trade-off", "n<=20, m<=4", ok
    ok, worst = True, -math.inf
    for _ in range(20):
        n, m = int(rng.integers(1, 6)), int(rng.integers(1, 3))
        F = np.array([quantum.random_pure_state(1 << m, rng) for _ in range(1 << n)])
        for res in bounds.hypercontractivity_check(F, np.linspace(0.1, 0.9, 9), m):
            ok &= res.passed
            worst = max(worst, res.lhs - res.rhs)
    yield "hypercontractive inequality (20 F)", f"max lhs-rhs {worst:+.3f}", ok
    points = bounds.maj_stability_sandwich(3, np.linspace(0, 0.95, 20))
    yield "majority lower sandwich", "k=3", all(p.lower_ok for p in points)
    upper_fail = sum(not p.upper_ok for p in points)
    yield "majority upper sandwich", f"{upper_fail} failures", upper_fail == 0, True
    ok = True
    for f in ("xor2", "xor3", "maj3", "and2"):
        fn = parse_function(f)
        for n in (12, 16, 24, 32):
            for m in range(1, n // 2 + 1):
                ok &= bounds.corollary_bounds(fn, n, m).chain_ok
    yield "corollary ordering chain", "n=12..32", ok


_SUITE_FUNCS = {"boolfn": _boolfn, "quantum": _quantum, "codes": _codes, "frac": _frac,
                "prbox": _prbox, "bounds": _bounds}


def run_suite(suite: str, seed: int = 0) -> list[Check]:
    names = SUITES if suite == "all" else (suite,)
    checks = []
    for name in names:
        if name not in _SUITE_FUNCS:
            raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES + ('all',))}")
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(SUITES.index(name),)))
        for row in _SUITE_FUNCS[name](rng):
            label, value, ok, *soft = row
            checks.append(Check(name, label, value, bool(ok), bool(soft and soft[0])))
    return checks


def render(checks: list[Check]) -> str:
    lines = [c.line() for c in checks]
    failed = sum(c.status == "FAIL" for c in checks)
    soft = sum(c.status == "SOFT" for c in checks)
    lines.append(f"{len(checks)} checks, {failed} failed, {soft} soft warnings")
    return "\n".join(lines) + "\n"
