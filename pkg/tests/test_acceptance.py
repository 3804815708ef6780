"""The twelve acceptance criteria, each at its stated tolerance.

A one-line verdict per criterion is printed in the terminal summary.
"""
import math
from fractions import Fraction

import numpy as np
import pytest

from fracsim import bounds
from fracsim.boolfn import all_inputs, construct, index_to_bits, noise_stability, parse_function
from fracsim.codes import earac1, krawtchouk, qrac1_sr, rac1_sr, rac_sr_bias
from fracsim.frac import (
    BaseCodeProtocol,
    BlockProtocol,
    RandomizationTable,
    exact_bias,
    mc_bias,
    xor_agreement_formula,
    xor_distance_agreement,
    xor_rac_pr,
)
from fracsim.prbox import PRRACProtocol, address_bits
from fracsim.quantum import optimal_qrac_bias, random_pure_state, random_unit_vectors

criterion = pytest.mark.criterion


@criterion(1, "base RAC exactness, odd b <= 13")
@pytest.mark.parametrize("b", [3, 5, 7, 9, 11, 13])
def test_c01_majority_exact(b):
    counts, denom = rac1_sr(b).exact_counts()
    worst = Fraction(2 * int(counts.min()), denom) - 1
    closed = Fraction(2 * math.comb(b - 1, (b - 1) // 2), 2 ** b)
    assert worst == closed == rac_sr_bias(b)
    assert np.all(counts == counts.min())


@criterion(2, "base QRAC rate within 5% at 1e6 trials")
@pytest.mark.parametrize("b", [9, 16, 25])
def test_c02_qrac_rate(b):
    report = mc_bias(BaseCodeProtocol(qrac1_sr(b)), 10 ** 6, seed=2024)
    expected = math.sqrt(8 / (3 * math.pi * b))
    assert abs(report.bias_avg - expected) <= 0.05 * expected


@criterion(3, "EARAC nesting within 5% at 1e6 trials")
@pytest.mark.parametrize("b", [2, 4, 8, 16])
def test_c03_earac_rate(b):
    report = mc_bias(BaseCodeProtocol(earac1(b)), 10 ** 6, seed=2024)
    expected = 1 / math.sqrt(b)
    assert abs(report.bias_avg - expected) <= 0.05 * expected
    if b == 2:
        assert abs(report.bias_avg - expected) <= 3 * report.ci


@criterion(4, "block f-RAC exact value 5/28 at n=8, m=4, XOR_2")
def test_c04_block_exact_value():
    report = exact_bias(BlockProtocol("rac-sr", 8, 4, construct("xor", 2)))
    assert abs(report.bias_avg - 5 / 28) <= 1e-12


def test_c04_companion_collision_factor_is_six_sevenths():
    # 2 indices among 8 hit different blocks of 2 with chance 24/28 = 6/7
    report = exact_bias(BlockProtocol("rac-sr", 8, 4, construct("xor", 2)))
    assert abs(report.bias_avg - 3 / 14) <= 1e-12


@criterion(5, "noise-stability Fourier formula equals exhaustive pairs")
def test_c05_stability_oracles():
    rng = np.random.default_rng(5)
    qs = (-0.9, -0.3, 0.0, 0.25, 0.6, 1.0)
    worst = 0.0
    for _ in range(50):
        k = int(rng.integers(1, 9))
        f = construct("from_table", k, table=np.where(rng.random(1 << k) < 0.5, 1, -1))
        for q in qs:
            worst = max(worst, abs(noise_stability(f, q) - noise_stability(f, q, "exhaustive")))
    assert worst <= 1e-10


@criterion(6, "Krawtchouk identities for n <= 25")
def test_c06_krawtchouk_identities():
    for n in range(1, 26):
        for x in range(n + 1):
            assert krawtchouk(1, n, x) == n - 2 * x
    assert bounds.vandermonde_holds(25)
    # unsigned recurrence: K_k(x) - K_k(x-1) = K_{k-1}(x) - K_{k-1}(x-1)
    failures = bounds.krawtchouk_recurrence_failures(25, "difference")
    assert failures == [], f"{len(failures)} counterexamples, first {failures[:3]}"


def test_c06_companion_signed_recurrence_holds():
    assert bounds.krawtchouk_recurrence_failures(25, "signed") == []


@criterion(7, "parity agreement equals 1/2 + K(d)/(2 C(n,k))")
@pytest.mark.parametrize("n", range(4, 11))
def test_c07_parity_agreement(n):
    rng = np.random.default_rng(n)
    for k in (2, 3):
        for radius in (1, 2):
            tables = (RandomizationTable.identity(n), RandomizationTable.sample(n, 1, rng))
            for table in tables:
                proto = xor_rac_pr(n, k, radius, rng, table=table)
                dist, agree, total = xor_distance_agreement(proto, 0)
                for d, a in zip(dist.tolist(), agree.tolist()):
                    assert Fraction(a, total) == xor_agreement_formula(n, k, d)
                assert set(dist.tolist()) <= set(range(radius + 1))


@criterion(8, "f-PRRAC certainty and box accounting")
@pytest.mark.parametrize("n,k", [(3, 2), (4, 2), (4, 3)])
def test_c08_prrac_sweep(n, k):
    for name in ("xor", "and", "or"):
        proto = PRRACProtocol(n, parse_function(name, k))
        L = address_bits(math.perm(n, k))
        audits = proto.sweep(np.random.default_rng(n * k))
        assert len(audits) == (1 << n) * math.perm(n, k)
        assert all(a.correct and a.bits_sent == 1 and a.boxes_bob == L for a in audits)


def _random_density(d, rng):
    weights = rng.dirichlet(np.ones(d))
    return sum(w * random_pure_state(d, rng) for w in weights)


@criterion(9, "hypercontractive inequality on 200 random instances")
def test_c09_hypercontractivity():
    rng = np.random.default_rng(9)
    grid = np.linspace(0, 1, 21)
    for i in range(200):
        n, m = int(rng.integers(1, 7)), int(rng.integers(1, 3))
        make = random_pure_state if i % 2 else _random_density
        F = np.array([make(1 << m, rng) for _ in range(1 << n)])
        for res in bounds.hypercontractivity_check(F, grid, m, tol=1e-9):
            assert res.lhs <= res.rhs + 1e-9


@criterion(10, "Helstrom consistency")
def test_c10_helstrom():
    dictator = construct("dictator", 1, index=0)
    states = qrac1_sr(2).encoding_states()
    for i in range(2):
        assert abs(optimal_qrac_bias(states, dictator, [i]) - 1 / math.sqrt(2)) <= 1e-10

    # fixed-axis quantum codes
    for b in (2, 3):
        code = qrac1_sr(b)
        decoded = 2 * code.exact_agreement().mean(axis=0) - 1
        states = code.encoding_states()
        for i in range(b):
            assert decoded[i] <= optimal_qrac_bias(states, dictator, [i]) + 1e-10

    # random-direction codes, per draw of the shared directions
    rng = np.random.default_rng(10)
    for b in (4, 5, 6):
        code = qrac1_sr(b)
        x = all_inputs(b)
        for _ in range(5):
            dirs = random_unit_vectors(b, rng)
            u = code.encode(x, {"dirs": np.broadcast_to(dirs, (len(x), b, 3))}, rng)
            states = code.encoding_states(dirs)
            for i in range(b):
                decoded = float(np.mean(x[:, i] * (u @ dirs[i])))
                assert decoded <= optimal_qrac_bias(states, dictator, [i]) + 1e-10

    # majority code, per shared mask: the one-bit message as a diagonal state
    for b in (3, 5):
        code = rac1_sr(b)
        x = all_inputs(b)
        for mask_idx in range(1 << b):
            mask = index_to_bits(mask_idx, b)
            shared = {"mask": np.broadcast_to(mask, x.shape), "tie": np.ones(len(x), dtype=np.int8)}
            msg = code.encode(x, shared, rng)
            states = np.array([np.diag([1.0, 0.0]) if s == 1 else np.diag([0.0, 1.0]) for s in msg])
            for i in range(b):
                decoded = float(np.mean(x[:, i] * msg * mask[i]))
                assert decoded <= optimal_qrac_bias(states, dictator, [i]) + 1e-10


C11_FUNCTIONS = ("xor2", "xor3", "maj3", "and2")
C11_PROTOCOLS = ("rac_sr", "qrac_sr")


@criterion(11, "bias over the Fourier upper bound stays below one constant; ordering chain holds")
def test_c11_bound_shape():
    constant = bounds.ratio_constant(range(8, 33), 3)
    ratios, cells = [], 0
    for n in range(8, 33, 4):
        for m in range(1, n // 2 + 1):
            for name in C11_FUNCTIONS:
                f = parse_function(name)
                if 4 * f.k > n:
                    continue  # outside the k <= n/4 domain of the upper bound
                cor = bounds.corollary_bounds(f, n, m)
                assert cor.chain_ok, (n, m, name)
                for resource in C11_PROTOCOLS:
                    report = mc_bias(BlockProtocol(resource, n, m, f), 20_000, seed=n * 1000 + m)
                    ratios.append(report.bias_avg / cor.thm44)
                    cells += 1
    print(f"criterion 11: {cells} cells, max ratio {max(ratios):.4f}, constant {constant:.4f}")
    assert max(ratios) <= constant


@criterion(12, "equal split maximizes the EARAC trade-off")
def test_c12_earac_tradeoff():
    for n in range(1, 21):
        for m in range(1, min(4, n) + 1):
            assert bounds.earac_tradeoff_check(n, m).passed, (n, m)
