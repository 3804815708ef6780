import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracsim import quantum
from fracsim.boolfn import construct
from fracsim.quantum import (
    PAULI_X,
    PAULI_Z,
    DensityMatrix,
    bloch_outcome_probability,
    bloch_to_state,
    helstrom_bias,
    jacobi_eigh,
    matrix_fourier_inverse,
    matrix_fourier_transform,
    measure_direction,
    optimal_qrac_bias,
    random_pure_state,
    singlet_conditional,
    singlet_sample,
    trace_norm,
)

seeds = st.integers(0, 2 ** 32 - 1)


def _hermitian(d, rng):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return a + a.conj().T


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 24), seeds)
def test_jacobi_reconstructs_and_is_unitary(d, seed):
    h = _hermitian(d, np.random.default_rng(seed))
    w, v = jacobi_eigh(h)
    np.testing.assert_allclose(v @ np.diag(w) @ v.conj().T, h, atol=1e-9)
    np.testing.assert_allclose(v.conj().T @ v, np.eye(d), atol=1e-10)
    np.testing.assert_allclose(np.sort(w), np.linalg.eigvalsh(h), atol=1e-9)


def test_jacobi_degenerate_and_diagonal():
    w, _ = jacobi_eigh(np.eye(4) * 3)
    np.testing.assert_allclose(w, 3)
    w, _ = jacobi_eigh(PAULI_X)
    np.testing.assert_allclose(np.sort(w), [-1, 1])


def test_trace_norm_of_pauli_and_nonhermitian():
    assert trace_norm(PAULI_Z) == pytest.approx(2)
    m = np.array([[0, 2], [0, 0]], dtype=complex)  # singular values 2, 0
    assert trace_norm(m) == pytest.approx(2)


@settings(max_examples=30, deadline=None)
@given(seeds, st.floats(-3, 3))
def test_trace_norm_is_a_norm(seed, c):
    rng = np.random.default_rng(seed)
    a, b = _hermitian(4, rng), _hermitian(4, rng)
    assert trace_norm(a + b) <= trace_norm(a) + trace_norm(b) + 1e-9
    assert trace_norm(c * a) == pytest.approx(abs(c) * trace_norm(a), abs=1e-9)


def test_density_matrix_validation():
    with pytest.raises(ValueError):
        DensityMatrix(np.array([[1, 0], [0, 1]], dtype=complex))
    with pytest.raises(ValueError):
        DensityMatrix(np.array([[1.5, 0], [0, -0.5]], dtype=complex))
    rho = bloch_to_state([0, 0, 1])
    np.testing.assert_allclose(rho.bloch_vector(), [0, 0, 1], atol=1e-12)


def test_measurement_probability():
    rho = bloch_to_state([1, 0, 0])
    assert measure_direction(rho, [1, 0, 0]) == pytest.approx(1)
    assert measure_direction(rho, [0, 0, 1]) == pytest.approx(0.5)
    u = np.array([0.6, 0.0, 0.8])
    assert bloch_outcome_probability(u, [0, 0, 1]) == pytest.approx(0.9)


@settings(max_examples=30, deadline=None)
@given(seeds, st.floats(0, 1))
def test_helstrom_range(seed, p):
    rng = np.random.default_rng(seed)
    r0, r1 = random_pure_state(2, rng), random_pure_state(2, rng)
    bias = helstrom_bias(r0, r1, p)
    assert abs(2 * p - 1) - 1e-10 <= bias <= 1 + 1e-10


def test_helstrom_orthogonal_states():
    assert helstrom_bias(bloch_to_state([0, 0, 1]), bloch_to_state([0, 0, -1])) == pytest.approx(1)


def test_two_to_one_qrac_optimum():
    from fracsim.codes import qrac1_sr

    states = qrac1_sr(2).encoding_states()
    for i in range(2):
        value = optimal_qrac_bias(states, construct("dictator", 1, index=0), [i])
        assert value == pytest.approx(1 / math.sqrt(2), abs=1e-10)


def test_singlet_statistics():
    rng = np.random.default_rng(3)
    a, b = singlet_sample(0.3, 1.1, rng, size=200_000)
    assert float(np.mean(a * b.astype(float))) == pytest.approx(-math.cos(0.8), abs=0.01)
    assert abs(float(np.mean(a))) < 0.01 and abs(float(np.mean(b))) < 0.01
    same = singlet_conditional(np.ones(1000, dtype=np.int8), 0.0, 0.0, rng)
    assert np.all(same == -1)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 4), st.integers(1, 2), seeds)
def test_matrix_fourier_round_trip(n, m, seed):
    rng = np.random.default_rng(seed)
    F = np.array([random_pure_state(1 << m, rng) for _ in range(1 << n)])
    np.testing.assert_allclose(matrix_fourier_inverse(matrix_fourier_transform(F)), F, atol=1e-12)


def test_random_unit_vectors_are_unit():
    v = quantum.random_unit_vectors((10, 3), np.random.default_rng(0))
    np.testing.assert_allclose(np.linalg.norm(v, axis=-1), 1)
