"""Pauli strings in the bit-pair encoding and sparse Pauli-sum Hamiltonians.

A Pauli string on ``n`` qubits is stored as two ``n``-bit integers ``x`` and
``z``.  Qubit ``k`` (counted from the left, starting at 0) lives in bit
``n - 1 - k``.  Per qubit the operator is ``i**(x*z) X**x Z**z``, so the
pair ``(1, 1)`` is the Hermitian ``Y`` and every string is Hermitian.

Strings are also indexed by an integer in ``range(4**n)``: each qubit
contributes the base-4 digit ``2*x + z`` (I=0, Z=1, X=2, Y=3), qubit 0 being
the most significant digit.  The dense simulator uses the same ordering for
Pauli spectra.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import DimensionError, DomainError

__all__ = [
    "PauliString",
    "PauliHamiltonian",
    "commutes",
    "multiply",
    "frobenius_norm",
    "spectral_norm",
    "residual",
    "sample_commutant",
    "random_sparse_hamiltonian",
]

_LABEL_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_BITS_LABEL = {bits: label for label, bits in _LABEL_BITS.items()}
_PHASES = (1, 1j, -1, -1j)


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True, order=True)
class PauliString:
    """Hermitian ``n``-qubit Pauli operator ``⊗_k i**(x_k z_k) X**x_k Z**z_k``."""

    n: int
    x: int = 0
    z: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"a Pauli string needs at least one qubit, got n={self.n}")
        limit = 1 << self.n
        if not (0 <= self.x < limit and 0 <= self.z < limit):
            raise DomainError(f"bit masks do not fit in {self.n} qubits")

    @classmethod
    def identity(cls, n: int) -> PauliString:
        return cls(n, 0, 0)

    @classmethod
    def from_label(cls, label: str) -> PauliString:
        """Parse a string such as ``"XIZY"`` (qubit 0 leftmost)."""
        label = label.strip().upper()
        if not label:
            raise DomainError("empty Pauli label")
        x = z = 0
        for ch in label:
            try:
                xb, zb = _LABEL_BITS[ch]
            except KeyError:
                raise DomainError(f"invalid Pauli character {ch!r} in {label!r}") from None
            x = (x << 1) | xb
            z = (z << 1) | zb
        return cls(len(label), x, z)

    @classmethod
    def from_index(cls, n: int, index: int) -> PauliString:
        if not 0 <= index < 4**n:
            raise DomainError(f"index {index} out of range for n={n}")
        x = z = 0
        for k in range(n):
            digit = (index >> (2 * (n - 1 - k))) & 3
            x = (x << 1) | (digit >> 1)
            z = (z << 1) | (digit & 1)
        return cls(n, x, z)

    @classmethod
    def single(cls, n: int, qubit: int, label: str) -> PauliString:
        """``label`` on ``qubit`` and identity elsewhere."""
        xb, zb = _LABEL_BITS[label]
        shift = n - 1 - qubit
        return cls(n, xb << shift, zb << shift)

    @property
    def index(self) -> int:
        idx = 0
        for k in range(self.n):
            shift = self.n - 1 - k
            idx = (idx << 2) | (((self.x >> shift) & 1) << 1) | ((self.z >> shift) & 1)
        return idx

    @property
    def label(self) -> str:
        chars = []
        for k in range(self.n):
            shift = self.n - 1 - k
            chars.append(_BITS_LABEL[((self.x >> shift) & 1, (self.z >> shift) & 1)])
        return "".join(chars)

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    @property
    def weight(self) -> int:
        return _popcount(self.x | self.z)

    def qubit_label(self, qubit: int) -> str:
        shift = self.n - 1 - qubit
        return _BITS_LABEL[((self.x >> shift) & 1, (self.z >> shift) & 1)]

    def support(self) -> list[int]:
        """Qubits on which the string acts non-trivially, left to right."""
        mask = self.x | self.z
        return [k for k in range(self.n) if (mask >> (self.n - 1 - k)) & 1]

    def to_matrix(self) -> np.ndarray:
        """Dense ``2**n x 2**n`` matrix."""
        dim = 1 << self.n
        cols = np.arange(dim)
        rows = cols ^ self.x
        signs = 1 - 2 * (np.bitwise_count(cols & self.z).astype(np.int64) & 1)
        phase = _PHASES[_popcount(self.x & self.z) % 4]
        mat = np.zeros((dim, dim), dtype=complex)
        mat[rows, cols] = phase * signs
        return mat

    def __str__(self) -> str:
        return self.label

    def __repr__(self) -> str:
        return f"PauliString({self.label!r})"


def _check_same_n(p: PauliString, q: PauliString) -> None:
    if p.n != q.n:
        raise DimensionError(f"qubit counts differ: {p.n} vs {q.n}")


def commutes(p: PauliString, q: PauliString) -> bool:
    """Return True iff ``pq == qp``, from the parity of the symplectic product."""
    _check_same_n(p, q)
    return (_popcount(p.x & q.z) + _popcount(p.z & q.x)) % 2 == 0


def multiply(p: PauliString, q: PauliString) -> tuple[complex, PauliString]:
    """Return ``(phase, r)`` with ``phase * r == p @ q`` exactly.

    The phase is one of ``1, 1j, -1, -1j``.
    """
    _check_same_n(p, q)
    x = p.x ^ q.x
    z = p.z ^ q.z
    # i^{x1 z1} X^{x1} Z^{z1} i^{x2 z2} X^{x2} Z^{z2}
    #   = i^{x1 z1 + x2 z2} (-1)^{z1 x2} X^{x} Z^{z}  and  X^x Z^z = i^{-xz} sigma_xz
    exponent = (
        _popcount(p.x & p.z)
        + _popcount(q.x & q.z)
        + 2 * _popcount(p.z & q.x)
        - _popcount(x & z)
    )
    return _PHASES[exponent % 4], PauliString(p.n, x, z)


class PauliHamiltonian:
    """Traceless real Pauli sum ``sum_P mu_P P`` with no identity term.

    Instances are immutable; exact zero coefficients are dropped on
    construction, anything else is kept.
    """

    __slots__ = ("_n", "_terms", "_hash")

    def __init__(self, n: int, terms: Mapping[PauliString, float] | Iterable[tuple[PauliString, float]] = ()):
        if n < 1:
            raise DomainError(f"n must be positive, got {n}")
        items = terms.items() if isinstance(terms, Mapping) else terms
        collected: dict[PauliString, float] = {}
        for pauli, coeff in items:
            if isinstance(pauli, str):
                pauli = PauliString.from_label(pauli)
            if pauli.n != n:
                raise DimensionError(f"term {pauli} acts on {pauli.n} qubits, expected {n}")
            if pauli.is_identity:
                raise DomainError("identity term not allowed; Hamiltonians are traceless")
            if pauli in collected:
                raise DomainError(f"duplicate Pauli term {pauli}")
            coeff = float(coeff)
            if not math.isfinite(coeff):
                raise DomainError(f"non-finite coefficient for {pauli}")
            if coeff != 0.0:
                collected[pauli] = coeff
        self._n = n
        self._terms = tuple(sorted(collected.items(), key=lambda kv: kv[0].index))
        self._hash = None

    @classmethod
    def zero(cls, n: int) -> PauliHamiltonian:
        return cls(n)

    @classmethod
    def from_labels(cls, terms: Mapping[str, float]) -> PauliHamiltonian:
        parsed = {PauliString.from_label(k): v for k, v in terms.items()}
        lengths = {p.n for p in parsed}
        if len(lengths) != 1:
            raise DimensionError("labels must all have the same length")
        return cls(lengths.pop(), parsed)

    @property
    def n(self) -> int:
        return self._n

    @property
    def terms(self) -> tuple[tuple[PauliString, float], ...]:
        return self._terms

    @property
    def support(self) -> list[PauliString]:
        return [p for p, _ in self._terms]

    def coefficients(self) -> dict[PauliString, float]:
        return dict(self._terms)

    def coefficient(self, pauli: PauliString) -> float:
        for p, c in self._terms:
            if p == pauli:
                return c
        return 0.0

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms)

    def __contains__(self, pauli: PauliString) -> bool:
        return any(p == pauli for p, _ in self._terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliHamiltonian):
            return NotImplemented
        return self._n == other._n and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self._n, self._terms))
        return self._hash

    def __repr__(self) -> str:
        body = " + ".join(f"{c:.6g}*{p.label}" for p, c in self._terms) or "0"
        return f"PauliHamiltonian(n={self._n}, {body})"

    def scaled(self, factor: float) -> PauliHamiltonian:
        return PauliHamiltonian(self._n, [(p, c * factor) for p, c in self._terms])

    def to_dict(self) -> dict:
        return {
            "n": self._n,
            "terms": [{"pauli": p.label, "coeff": c} for p, c in self._terms],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, doc: Mapping) -> PauliHamiltonian:
        """Build from ``{"n": int, "terms": [{"pauli": str, "coeff": float}]}``."""
        try:
            n = int(doc["n"])
            raw_terms = doc["terms"]
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"malformed Hamiltonian document: {exc}") from None
        pairs = []
        for entry in raw_terms:
            try:
                pauli = PauliString.from_label(entry["pauli"])
                coeff = float(entry["coeff"])
            except (KeyError, TypeError, ValueError) as exc:
                raise DomainError(f"malformed term {entry!r}: {exc}") from None
            if pauli.n != n:
                raise DimensionError(f"term {pauli.label} does not have length {n}")
            pairs.append((pauli, coeff))
        return cls(n, pairs)

    @classmethod
    def from_json(cls, text: str) -> PauliHamiltonian:
        return cls.from_dict(json.loads(text))


def frobenius_norm(h: PauliHamiltonian) -> float:
    """Normalized Frobenius norm, i.e. the l2 norm of the coefficient vector."""
    return math.sqrt(math.fsum(c * c for _, c in h.terms))


def spectral_norm(h: PauliHamiltonian) -> float:
    """Largest absolute eigenvalue of the dense matrix."""
    from .dense import to_dense

    if len(h) == 0:
        return 0.0
    eigvals = np.linalg.eigvalsh(to_dense(h))
    return float(np.max(np.abs(eigvals)))


def residual(h: PauliHamiltonian, h_hat: PauliHamiltonian, scale: float) -> PauliHamiltonian:
    """``(h - h_hat) / scale`` term by term; exact zeros are dropped."""
    if h.n != h_hat.n:
        raise DimensionError(f"qubit counts differ: {h.n} vs {h_hat.n}")
    if scale == 0:
        raise DomainError("scale must be nonzero")
    diff = h.coefficients()
    for p, c in h_hat.terms:
        diff[p] = diff.get(p, 0.0) - c
    return PauliHamiltonian(h.n, [(p, c / scale) for p, c in diff.items()])


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def sample_commutant(target: PauliString, rng) -> PauliString:
    """Uniform draw from the Pauli strings commuting with ``target``.

    Rejection sampling over all ``4**n`` strings; half of them are accepted.
    """
    if target.is_identity:
        raise DomainError("commutant sampling needs a non-identity target")
    rng = _as_generator(rng)
    limit = 1 << target.n
    while True:
        x = int(rng.integers(limit))
        z = int(rng.integers(limit))
        if (_popcount(x & target.z) + _popcount(z & target.x)) % 2 == 0:
            return PauliString(target.n, x, z)


def random_sparse_hamiltonian(
    n: int,
    sparsity: int,
    magnitude: tuple[float, float] = (0.1, 1.0),
    rng=None,
) -> PauliHamiltonian:
    """Random Hamiltonian with exactly ``sparsity`` distinct non-identity terms.

    Magnitudes are uniform on ``[lo, hi]`` with a uniformly random sign.
    """
    lo, hi = magnitude
    if not 0 < lo <= hi <= 1:
        raise DomainError(f"magnitude range must satisfy 0 < lo <= hi <= 1, got {magnitude}")
    if not 0 <= sparsity <= 4**n - 1:
        raise DomainError(f"cannot place {sparsity} distinct terms on {n} qubits")
    rng = _as_generator(rng)
    indices = rng.choice(np.arange(1, 4**n), size=sparsity, replace=False)
    mags = rng.uniform(lo, hi, size=sparsity)
    signs = rng.choice((-1.0, 1.0), size=sparsity)
    terms = [
        (PauliString.from_index(n, int(idx)), float(s * m))
        for idx, m, s in zip(indices, mags, signs)
    ]
    return PauliHamiltonian(n, terms)
