"""Exact dense simulation of small Pauli Hamiltonians.

Operators are plain complex numpy arrays of shape ``(2**n, 2**n)``; Pauli
spectra are length ``4**n`` complex vectors indexed by
:attr:`PauliString.index`.
"""

from __future__ import annotations

import math
import os
from functools import lru_cache

import numpy as np

from .errors import CapabilityError, DimensionError, DomainError
from .pauli import PauliHamiltonian, PauliString

__all__ = [
    "DEFAULT_DENSE_LIMIT",
    "dense_limit",
    "check_dense",
    "to_dense",
    "eigh",
    "evolve",
    "is_unitary",
    "pauli_spectrum",
    "from_pauli_spectrum",
    "identity_probability_exact",
    "commutant",
    "twirl_average_exact",
    "bell_state_norm",
    "normalized_frobenius",
]

DEFAULT_DENSE_LIMIT = 8

# Rows map a 2x2 block (m00, m01, m10, m11) to Tr[sigma M]/2 for sigma in I, Z, X, Y.
_PAULI_BASIS_CHANGE = 0.5 * np.array(
    [
        [1, 0, 0, 1],
        [1, 0, 0, -1],
        [0, 1, 1, 0],
        [0, 1j, -1j, 0],
    ],
    dtype=complex,
)
# Inverse map: Pauli coefficients (I, Z, X, Y) back to block entries.
_PAULI_BASIS_INVERSE = np.array(
    [
        [1, 1, 0, 0],
        [0, 0, 1, -1j],
        [0, 0, 1, 1j],
        [1, -1, 0, 0],
    ],
    dtype=complex,
)


def dense_limit() -> int:
    """Largest qubit count the dense routines accept (env ``HAMLEARN_DENSE_LIMIT``)."""
    raw = os.environ.get("HAMLEARN_DENSE_LIMIT")
    if raw is None:
        return DEFAULT_DENSE_LIMIT
    try:
        return int(raw)
    except ValueError:
        raise DomainError(f"HAMLEARN_DENSE_LIMIT must be an integer, got {raw!r}") from None


def check_dense(n: int) -> None:
    limit = dense_limit()
    if n > limit:
        raise CapabilityError(f"{n} qubits exceeds the dense limit of {limit}")


def to_dense(h: PauliHamiltonian) -> np.ndarray:
    check_dense(h.n)
    dim = 1 << h.n
    out = np.zeros((dim, dim), dtype=complex)
    for pauli, coeff in h.terms:
        out += coeff * pauli.to_matrix()
    return out


@lru_cache(maxsize=256)
def _eigh_cached(h: PauliHamiltonian) -> tuple[np.ndarray, np.ndarray]:
    vals, vecs = np.linalg.eigh(to_dense(h))
    vals.setflags(write=False)
    vecs.setflags(write=False)
    return vals, vecs


def eigh(h: PauliHamiltonian) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and eigenvectors of the dense Hamiltonian (cached, read-only)."""
    check_dense(h.n)
    return _eigh_cached(h)


def evolve(h: PauliHamiltonian, t: float) -> np.ndarray:
    """``exp(-i h t)`` from the spectral decomposition of ``h``."""
    vals, vecs = eigh(h)
    return (vecs * np.exp(-1j * vals * t)) @ vecs.conj().T


def is_unitary(u: np.ndarray, tol: float = 1e-10) -> bool:
    eye = np.eye(u.shape[0])
    return bool(np.max(np.abs(u.conj().T @ u - eye)) < tol)


def _num_qubits(dim: int) -> int:
    n = dim.bit_length() - 1
    if dim != 1 << n or n < 1:
        raise DomainError(f"operator dimension {dim} is not a power of two")
    return n


def pauli_spectrum(u: np.ndarray) -> np.ndarray:
    """Coefficients ``Tr[sigma_x u] / 2**n`` for every Pauli string ``x``.

    Works in ``O(n 4**n)`` by changing basis one qubit at a time on the
    operator reshaped so that each qubit's (row, column) pair is one axis.
    """
    u = np.asarray(u, dtype=complex)
    n = _num_qubits(u.shape[0])
    tensor = u.reshape([2] * (2 * n))
    order = [ax for k in range(n) for ax in (k, n + k)]
    tensor = tensor.transpose(order).reshape([4] * n)
    for axis in range(n):
        tensor = np.moveaxis(np.tensordot(_PAULI_BASIS_CHANGE, tensor, axes=([1], [axis])), 0, axis)
    return tensor.reshape(-1)


def from_pauli_spectrum(coefficients: np.ndarray) -> np.ndarray:
    """Inverse of :func:`pauli_spectrum`."""
    coefficients = np.asarray(coefficients, dtype=complex)
    n = (coefficients.size.bit_length() - 1) // 2
    if coefficients.size != 4**n:
        raise DomainError("spectrum length is not a power of four")
    tensor = coefficients.reshape([4] * n)
    for axis in range(n):
        tensor = np.moveaxis(np.tensordot(_PAULI_BASIS_INVERSE, tensor, axes=([1], [axis])), 0, axis)
    tensor = tensor.reshape([2] * (2 * n))
    inverse = [0] * (2 * n)
    for k in range(n):
        inverse[k] = 2 * k
        inverse[n + k] = 2 * k + 1
    return tensor.transpose(inverse).reshape(1 << n, 1 << n)


def identity_probability_exact(h: PauliHamiltonian, t: float) -> float:
    """Probability that Bell sampling ``exp(-i h t)`` returns the identity."""
    vals, _ = eigh(h)
    trace = np.sum(np.exp(-1j * vals * t))
    return float(min(1.0, abs(trace) ** 2 / 4**h.n))


def commutant(target: PauliString) -> list[PauliString]:
    """All Pauli strings commuting with ``target`` (identity included)."""
    n = target.n
    codes = np.arange(1 << n)
    xs, zs = np.meshgrid(codes, codes, indexing="ij")
    parity = (np.bitwise_count(xs & target.z) + np.bitwise_count(zs & target.x)) & 1
    keep = np.nonzero(parity == 0)
    return [PauliString(n, int(x), int(z)) for x, z in zip(xs[keep], zs[keep])]


def twirl_average_exact(h: PauliHamiltonian, target: PauliString) -> PauliHamiltonian:
    """Average of ``Q h Q`` over the whole commutant of ``target``.

    Each term ``mu P`` contributes ``+mu P`` for the ``Q`` commuting with
    ``P`` and ``-mu P`` otherwise; the sums are accumulated exactly.
    """
    check_dense(h.n)
    if target.is_identity:
        raise DomainError("twirl target must be a non-identity string")
    if target.n != h.n:
        raise DimensionError(f"target acts on {target.n} qubits, Hamiltonian on {h.n}")
    group = commutant(target)
    xs = np.array([q.x for q in group])
    zs = np.array([q.z for q in group])
    averaged = []
    for pauli, coeff in h.terms:
        parity = (np.bitwise_count(xs & pauli.z) + np.bitwise_count(zs & pauli.x)) & 1
        plus = int(np.count_nonzero(parity == 0))
        minus = len(group) - plus
        # (plus - minus) is an exact integer, so no cancellation error creeps in.
        averaged.append((pauli, coeff * (plus - minus) / len(group)))
    return PauliHamiltonian(h.n, averaged)


def normalized_frobenius(a: np.ndarray) -> float:
    """``sqrt(Tr[a^dagger a] / 2**n)``."""
    a = np.asarray(a)
    return float(math.sqrt(np.sum(np.abs(a) ** 2).real / a.shape[0]))


def bell_state_norm(a: np.ndarray) -> float:
    """Norm of ``(a ⊗ I)|Phi>`` for the maximally entangled state on 2n qubits.

    Equal to the normalized Frobenius norm, which is what is computed; no
    ``4**n`` state vector is built.
    """
    return normalized_frobenius(a)
