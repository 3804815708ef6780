import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracsim import bounds
from fracsim.boolfn import construct, noise_stability, parse_function
from fracsim.codes import krawtchouk
from fracsim.quantum import random_pure_state


def test_entropy_values_and_sandwich():
    assert bounds.binary_entropy(0.5) == 1.0
    assert bounds.binary_entropy(0.0) == 0.0
    assert bounds.check_entropy_sandwich()
    lo, h, hi = bounds.entropy_sandwich(0.8)
    assert lo <= h <= hi


@settings(max_examples=100)
@given(st.floats(0, 1))
def test_entropy_sandwich_property(p):
    lo, h, hi = bounds.entropy_sandwich(p)
    assert lo - 1e-12 <= h <= hi + 1e-12


def test_nayak():
    assert bounds.nayak_bound(10, 0.5) == 0.0
    assert bounds.nayak_bound(10, 1.0) == 10.0
    with pytest.raises(ValueError):
        bounds.nayak_bound(10, 0.4)


def test_upper_bound_example_majority():
    value = bounds.thm44_upper(construct("maj", 3), 48, 3, 1.40)
    assert value == pytest.approx(1.5 * math.sqrt(1.4 * 3 / 48) + 0.5 * (1.4 * 3 / 48) ** 1.5)
    assert value == pytest.approx(0.4567, abs=1e-4)


def test_upper_bound_domain():
    with pytest.raises(ValueError, match="k <= n/4"):
        bounds.thm44_upper(construct("xor", 3), 8, 2)
    with pytest.raises(ValueError, match="eta"):
        bounds.thm44_upper(construct("xor", 2), 16, 2, eta=1.3)


def test_ratio_constant_value():
    c = bounds.ratio_constant(range(8, 33), 3)
    assert c == pytest.approx(bounds.level_constant(8, 3), rel=1e-12)
    assert c == pytest.approx(2.5698, abs=1e-4)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["xor2", "xor3", "maj3", "and2", "or3", "dict0_2"]), st.integers(12, 40),
       st.integers(1, 20))
def test_finite_upper_below_constant_times_asymptotic(name, n, m):
    f = parse_function(name)
    m = min(m, n)
    c = bounds.ratio_constant([n], f.k)
    assert bounds.finite_upper(f, n, m) <= c * bounds.thm44_upper(f, n, m) + 1e-12


def test_corollary_chain_example():
    cor = bounds.corollary_bounds(construct("xor", 2), 16, 2)
    assert cor.q == pytest.approx(math.sqrt(1.4 * 2 / 16))
    assert cor.chain_ok and not cor.vacuous
    assert cor.cor2["sr"] == pytest.approx(2 / 32)
    assert cor.thm44 <= cor.eq_b + 1e-12


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["xor2", "xor3", "maj3", "and2", "or2"]), st.integers(12, 32), st.integers(1, 16),
       st.floats(0, 1))
def test_corollary_chain_property(name, n, m, r):
    f = parse_function(name)
    assert bounds.corollary_bounds(f, n, min(m, n), r=r).chain_ok


def test_lower_sheet_example():
    sheet = bounds.lower_bound_sheet(construct("xor", 2), 8, 4)
    rac = sheet["rac_sr"]
    assert rac.q == pytest.approx(0.5)
    assert rac.factor_exact == pytest.approx(6 / 7)
    assert rac.value == pytest.approx(3 / 14)
    assert sheet["qrac_sr"].q == pytest.approx(math.sqrt(8 * 4 / (3 * math.pi * 8)))
    assert sheet["earac"].stab == pytest.approx(0.5)


def test_lower_sheet_vacuous_private_radicand():
    sheet = bounds.lower_bound_sheet(construct("xor", 2), 8, 4, ell=2)
    assert sheet["rac_pr"].vacuous and sheet["rac_pr"].q == 0.0


def test_bound_sheet_records_domain_error():
    sheet = bounds.bound_sheet(construct("xor", 3), 8, 2)
    assert sheet.upper["vacuous"] and "error" in sheet.upper
    assert sheet.as_dict()["C_eta"] == 1.0


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 5), st.integers(1, 2), st.integers(0, 2 ** 32 - 1))
def test_hypercontractivity_random(n, m, seed):
    rng = np.random.default_rng(seed)
    F = np.array([random_pure_state(1 << m, rng) for _ in range(1 << n)])
    for res in bounds.hypercontractivity_check(F, np.linspace(0, 1, 11), m):
        assert res.passed


def test_hypercontractivity_tight_at_delta_one_for_pure_states():
    # delta = 1: sum ||F^(S)||^2 is at most 2^(2m)
    F = np.array([random_pure_state(2, np.random.default_rng(i)) for i in range(4)])
    res = bounds.hypercontractivity_check(F, 1.0, 1)
    assert res.passed and res.rhs == 4.0


def test_hypercontractivity_guards():
    with pytest.raises(ValueError):
        bounds.hypercontractivity_check(np.zeros((4, 2, 2)), 1.5, 1)
    with pytest.raises(ValueError):
        bounds.hypercontractivity_check(np.zeros((4, 2, 2)), 0.5, 2)


def test_majority_sandwich():
    for k in (1, 3, 5, 7):
        points = bounds.maj_stability_sandwich(k, np.linspace(0, 0.95, 20))
        assert all(p.lower_ok for p in points)
        assert all(p.stab == pytest.approx(noise_stability(construct("maj", k), p.q)) for p in points)


@pytest.mark.parametrize("n,m", [(6, 2), (7, 3), (12, 4), (13, 4)])
def test_earac_tradeoff(n, m):
    res = bounds.earac_tradeoff_check(n, m)
    assert res.passed
    assert max(res.best) - min(res.best) <= 1


def test_compositions_count():
    assert sum(1 for _ in bounds.compositions(8, 3)) == math.comb(7, 2)


def test_krawtchouk_identities():
    assert bounds.krawtchouk_linear_holds(25)
    assert bounds.vandermonde_holds(25)
    assert bounds.krawtchouk_recurrence_failures(25, "signed") == []


def test_difference_recurrence_counterexample():
    assert (1, 1, 1) in bounds.krawtchouk_recurrence_failures(3, "difference")
    assert krawtchouk(1, 1, 1) - krawtchouk(1, 1, 0) == -2
    assert krawtchouk(0, 1, 1) - krawtchouk(0, 1, 0) == 0
