"""Dense linear algebra for few-qubit encodings.

Density matrices, single-qubit Bloch vectors, a cyclic Jacobi eigensolver
for Hermitian matrices, trace norms, Helstrom discrimination and singlet
measurement statistics.  Pauli matrices use the standard entries::

    X = [[0, 1], [1, 0]]    Y = [[0, -i], [i, 0]]    Z = [[1, 0], [0, -1]]
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .boolfn import BooleanFunction, all_inputs, bits_to_index, walsh_hadamard

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

MAX_DIM = 64
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
JACOBI_TOL = 1e-12
JACOBI_SWEEPS = 100


class ConvergenceError(RuntimeError):
    """The Jacobi eigensolver ran out of sweeps."""


def _as_square(matrix) -> np.ndarray:
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] > 2 * MAX_DIM:
        raise ValueError(f"matrix dimension {a.shape[0]} exceeds the supported size")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def is_hermitian(matrix, tol: float = HERMITIAN_TOL) -> bool:
    a = np.asarray(matrix)
    return bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= tol)


def jacobi_eigh(matrix, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_SWEEPS):
    """Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi rotations.

    Returns ``(eigenvalues, vectors)`` with ``matrix = V diag(w) V^dagger``.
    Each rotation first removes the phase of the pivot, then applies the
    real symmetric Jacobi rotation that zeroes it.  Iteration stops when the
    off-diagonal Frobenius norm drops to ``tol`` times the matrix norm.
    """
    a = _as_square(matrix).copy()
    if not is_hermitian(a, tol=1e-9 * max(1.0, float(np.max(np.abs(a), initial=0.0)))):
        raise ValueError("jacobi_eigh needs a Hermitian matrix")
    a = (a + a.conj().T) / 2
    d = a.shape[0]
    v = np.eye(d, dtype=complex)
    scale = max(float(np.linalg.norm(a)), 1e-300)
    threshold = tol * scale
    offdiag = ~np.eye(d, dtype=bool)
    for _ in range(max_sweeps):
        off = float(np.linalg.norm(a[offdiag]))
        if off <= threshold:
            return np.real(np.diag(a)).copy(), v
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= threshold / d:
                    continue
                phase = apq / mag
                tau = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                g = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                cols = [p, q]
                a[:, cols] = a[:, cols] @ g
                a[cols, :] = g.conj().T @ a[cols, :]
                v[:, cols] = v[:, cols] @ g
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
    raise ConvergenceError(f"Jacobi eigensolver did not converge in {max_sweeps} sweeps")


def trace_norm(matrix) -> float:
    """Sum of singular values.

    Hermitian input uses its eigenvalues directly; anything else goes
    through the Hermitian dilation [[0, M], [M^dagger, 0]], whose
    eigenvalues are the singular values of M with both signs.
    """
    a = _as_square(matrix)
    if a.shape[0] > MAX_DIM:
        raise ValueError(f"trace norm supports dimension <= {MAX_DIM}")
    scale = max(1.0, float(np.max(np.abs(a), initial=0.0)))
    if is_hermitian(a, tol=HERMITIAN_TOL * scale):
        w, _ = jacobi_eigh(a)
        return float(np.sum(np.abs(w)))
    d = a.shape[0]
    dilation = np.zeros((2 * d, 2 * d), dtype=complex)
    dilation[:d, d:] = a
    dilation[d:, :d] = a.conj().T
    w, _ = jacobi_eigh(dilation)
    return float(np.sum(np.abs(w)) / 2.0)


class DensityMatrix:
    """A validated density matrix (Hermitian, unit trace, positive semidefinite)."""

    __slots__ = ("data",)

    def __init__(self, data, validate: bool = True):
        a = _as_square(data)
        if validate:
            if not is_hermitian(a):
                raise ValueError("density matrix must be Hermitian")
            if abs(np.trace(a) - 1.0) > TRACE_TOL:
                raise ValueError(f"density matrix must have unit trace, got {np.trace(a)}")
            w, _ = jacobi_eigh(a)
            if w.min() < -PSD_TOL:
                raise ValueError(f"density matrix has a negative eigenvalue {w.min()}")
        a.setflags(write=False)
        self.data = a

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def n_qubits(self) -> int:
        return int(round(math.log2(self.dim)))

    @classmethod
    def pure(cls, state) -> "DensityMatrix":
        psi = np.asarray(state, dtype=complex).ravel()
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    def bloch_vector(self) -> np.ndarray:
        if self.dim != 2:
            raise ValueError("Bloch vectors exist only for single qubits")
        return np.real([np.trace(self.data @ p) for p in (PAULI_X, PAULI_Y, PAULI_Z)])

    def to_json(self) -> list:
        return matrix_to_json(self.data)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.data, dtype=dtype)

    def __repr__(self) -> str:
        return f"DensityMatrix(dim={self.dim})"


def matrix_to_json(matrix) -> list:
    """Row-major nested list of [re, im] pairs."""
    a = np.asarray(matrix, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def matrix_from_json(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)


def _check_bloch(v, unit: bool = False) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise ValueError("a Bloch vector has three components")
    norm = float(np.linalg.norm(v))
    if unit:
        if abs(norm - 1.0) > TRACE_TOL:
            raise ValueError(f"measurement direction must be a unit vector, norm {norm}")
    elif norm > 1.0 + HERMITIAN_TOL:
        raise ValueError(f"Bloch vector norm {norm} exceeds 1")
    return v


def bloch_to_state(v) -> DensityMatrix:
    """(I + vx X + vy Y + vz Z) / 2."""
    vx, vy, vz = _check_bloch(v)
    return DensityMatrix((PAULI_I + vx * PAULI_X + vy * PAULI_Y + vz * PAULI_Z) / 2)


def measure_direction(rho: DensityMatrix, v) -> float:
    """Probability of outcome +1 when measuring spin along unit vector ``v``."""
    v = _check_bloch(v, unit=True)
    rho = rho if isinstance(rho, DensityMatrix) else DensityMatrix(rho)
    if rho.dim != 2:
        raise ValueError("measure_direction acts on a single qubit")
    projector = (PAULI_I + v[0] * PAULI_X + v[1] * PAULI_Y + v[2] * PAULI_Z) / 2
    return float(np.real(np.trace(rho.data @ projector)))


def bloch_outcome_probability(u, v) -> np.ndarray:
    """Batched form of :func:`measure_direction` on Bloch vectors: (1 + u.v) / 2."""
    return 0.5 * (1.0 + np.sum(np.asarray(u) * np.asarray(v), axis=-1))


def helstrom_bias(rho0, rho1, p: float = 0.5) -> float:
    """Optimal bias ||p rho0 - (1-p) rho1||_tr for telling rho0 from rho1."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"prior p must lie in [0, 1], got {p}")
    a, b = np.asarray(rho0, dtype=complex), np.asarray(rho1, dtype=complex)
    if a.shape != b.shape:
        raise ValueError("states must have equal dimensions")
    return trace_norm(p * a - (1.0 - p) * b)


def optimal_qrac_bias(encoding, f: BooleanFunction, S: Sequence[int]) -> float:
    """2**-n ||sum_x f(x_S) rho(x)||_tr for one query sequence S.

    ``encoding`` holds one density matrix per input, in truth-table order
    (shape (2**n, d, d) or a sequence of DensityMatrix).
    """
    rhos = np.asarray([np.asarray(r, dtype=complex) for r in encoding])
    size = rhos.shape[0]
    n = size.bit_length() - 1
    if size != 1 << n:
        raise ValueError("encoding must list 2**n states")
    if n > 14:
        raise ValueError("optimal_qrac_bias supports n <= 14")
    if rhos.ndim != 3 or rhos.shape[1] != rhos.shape[2]:
        raise ValueError("dimension mismatch in encoding")
    S = list(S)
    if len(S) != f.k or len(set(S)) != f.k or not all(0 <= i < n for i in S):
        raise ValueError(f"S must be {f.k} distinct indices in [0, {n})")
    x = all_inputs(n)
    signs = f.table[bits_to_index(x[:, S])].astype(float)
    total = np.tensordot(signs, rhos, axes=1)
    return trace_norm(total) / size


def singlet_sample(alpha, beta, rng: np.random.Generator, size=None):
    """Outcomes of measuring a singlet at equatorial angles alpha and beta.

    P(a, b) = (1 - a b cos(alpha - beta)) / 4 with a, b in {-1, +1}.
    """
    alpha, beta = np.broadcast_arrays(np.asarray(alpha, float), np.asarray(beta, float))
    shape = alpha.shape if size is None else size
    a = np.where(rng.random(shape) < 0.5, 1, -1).astype(np.int8)
    return a, singlet_conditional(a, alpha, beta, rng)


def singlet_conditional(a, alpha, beta, rng: np.random.Generator) -> np.ndarray:
    """Second party's outcome given the first party's outcome ``a``.

    The second measurement sees a collapsed state, so b agrees with a with
    probability (1 - cos(alpha - beta)) / 2.
    """
    a = np.asarray(a)
    agree = rng.random(a.shape) < (1.0 - np.cos(np.asarray(alpha) - np.asarray(beta))) / 2.0
    return np.where(agree, a, -a).astype(np.int8)


def matrix_fourier_transform(values) -> np.ndarray:
    """Fourier coefficients of a matrix-valued function on {-1,1}^n.

    ``values`` has shape (2**n, d, d) in truth-table order; the result is
    indexed by subset mask the same way.
    """
    F = np.asarray(values, dtype=complex)
    size = F.shape[0]
    n = size.bit_length() - 1
    if size != 1 << n or F.ndim != 3:
        raise ValueError("expected an array of shape (2**n, d, d)")
    if n > 12 or F.shape[1] > 16:
        raise ValueError("matrix Fourier transform supports n <= 12 and d <= 16")
    return walsh_hadamard(F, axis=0) / size


def matrix_fourier_inverse(coeffs) -> np.ndarray:
    return walsh_hadamard(np.asarray(coeffs, dtype=complex), axis=0)


def random_pure_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random pure state as a density matrix array."""
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    psi /= np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def random_unit_vectors(shape, rng: np.random.Generator) -> np.ndarray:
    """Uniform points on the 2-sphere with leading ``shape``."""
    shape = (shape,) if isinstance(shape, int) else tuple(shape)
    g = rng.normal(size=shape + (3,))
    return g / np.linalg.norm(g, axis=-1, keepdims=True)
