import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracsim.boolfn import (
    all_inputs,
    bits_to_index,
    construct,
    evaluate_expansion,
    index_to_bits,
    load_table,
    noise_operator,
    noise_operator_table,
    noise_stability,
    parse_function,
    sample_correlated_pair,
    spectrum_profile,
    walsh_hadamard,
)


@st.composite
def boolean_functions(draw, max_k=8):
    k = draw(st.integers(1, max_k))
    bits = draw(st.lists(st.sampled_from([-1, 1]), min_size=1 << k, max_size=1 << k))
    return construct("from_table", k, table=bits)


unit_q = st.floats(-1.0, 1.0, allow_nan=False)


def test_index_convention_bit_i_set_means_minus_one():
    x = np.array([1, -1, 1, -1])
    assert bits_to_index(x) == 0b1010
    np.testing.assert_array_equal(index_to_bits(0b1010, 4), x)
    np.testing.assert_array_equal(bits_to_index(all_inputs(5)), np.arange(32))


def test_walsh_hadamard_is_self_inverse_up_to_scale():
    v = np.arange(16)
    np.testing.assert_array_equal(walsh_hadamard(walsh_hadamard(v)), 16 * v)


def test_and2_coefficients():
    # AND with -1 as True: 1/2 + x1/2 + x2/2 - x1 x2 / 2
    c = construct("and", 2).spectrum.coeffs
    np.testing.assert_allclose(c, [0.5, 0.5, 0.5, -0.5])


def test_maj3_profile():
    prof = spectrum_profile(construct("maj", 3))
    np.testing.assert_allclose(prof.weights, [0, 0.75, 0, 0.25])
    assert (prof.degree, prof.pure_high_degree, prof.one_norm) == (3, 1, 2.0)
    assert prof.granular


def test_constant_profile_uses_unit_granularity():
    prof = spectrum_profile(construct("const", 3, value=-1))
    assert prof.degree == 0 and prof.granular


@pytest.mark.parametrize("k", range(1, 7))
def test_parity_stability_is_power(k):
    f = construct("xor", k)
    for q in (-0.6, 0.0, 0.35, 0.9):
        assert noise_stability(f, q) == pytest.approx(q ** k, abs=1e-12)


def test_dictator_and_or_names():
    assert parse_function("dict2_4").name == "dict2_4"
    assert parse_function("xor", 3).name == "xor3"
    assert parse_function("OR2")(np.array([1, -1])) == -1
    assert parse_function("id").k == 1


@pytest.mark.parametrize("bad", ["maj2", "foo3", "xor"])
def test_parse_rejects(bad):
    with pytest.raises(ValueError):
        parse_function(bad)


def test_table_arity_mismatch():
    with pytest.raises(ValueError, match="arity mismatch"):
        construct("from_table", 3, table=[1, -1, 1, 1])


def test_noise_parameter_range():
    with pytest.raises(ValueError):
        noise_stability(construct("xor", 2), 1.5)


def test_load_table_zero_one(tmp_path):
    path = tmp_path / "and2.txt"
    path.write_text("2\n0 0 0 1\n")
    f = load_table(path, zero_one=True)
    np.testing.assert_array_equal(f.table, construct("and", 2).table)


@settings(max_examples=60, deadline=None)
@given(boolean_functions(max_k=10))
def test_parseval(f):
    assert float(np.sum(f.spectrum.coeffs ** 2)) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(boolean_functions(), unit_q)
def test_stability_fourier_matches_exhaustive(f, q):
    assert noise_stability(f, q) == pytest.approx(noise_stability(f, q, "exhaustive"), abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(boolean_functions(), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_stability_monotone_on_unit_interval(f, a, b):
    lo, hi = sorted((a, b))
    assert noise_stability(f, lo) <= noise_stability(f, hi) + 1e-12


@settings(max_examples=40, deadline=None)
@given(boolean_functions(), unit_q)
def test_noise_operator_pairs_with_f(f, q):
    table = noise_operator_table(f, q)
    assert float(np.mean(f.table * table)) == pytest.approx(noise_stability(f, q), abs=1e-10)
    assert np.all(np.abs(table) <= 1 + 1e-12)
    x = index_to_bits(0, f.k)
    assert noise_operator(f, q, x) == pytest.approx(table[0])


@settings(max_examples=40, deadline=None)
@given(boolean_functions(max_k=10))
def test_spectrum_is_granular(f):
    assert spectrum_profile(f).granular


@settings(max_examples=30, deadline=None)
@given(boolean_functions(max_k=6), st.integers(0, 63))
def test_expansion_reproduces_table(f, idx):
    idx %= 1 << f.k
    assert evaluate_expansion(f.spectrum, index_to_bits(idx, f.k)) == pytest.approx(f.table[idx])


def test_correlated_pair_statistics():
    rng = np.random.default_rng(5)
    x = np.ones((200_000, 1), dtype=np.int8)
    y = sample_correlated_pair(x, 0.4, rng)
    assert float(np.mean(y)) == pytest.approx(0.4, abs=4 / math.sqrt(200_000))
