"""Simulated black-box access to ``exp(-iHt)`` with a total-evolution-time ledger.

Protocols hold an :class:`EvolutionOracle` and only interact with the hidden
Hamiltonian through Bell sampling and state measurements on circuits.  Every
query is charged to the oracle's :class:`TimeLedger` with the physical
evolution time of the unknown dynamics it used.
"""

from __future__ import annotations

import json
import math
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import dense
from .errors import DimensionError, DomainError
from .pauli import PauliHamiltonian, PauliString, multiply, sample_commutant

__all__ = [
    "UnknownEvolution",
    "KnownUnitary",
    "DressedCircuit",
    "ReshapedCircuit",
    "SignedPauli",
    "TimeLedger",
    "EvolutionOracle",
    "bell_sample",
    "evolve_state",
    "measure_pm_observable",
    "reshaping_probe",
]


@dataclass(frozen=True)
class UnknownEvolution:
    """A query ``exp(-iH duration)`` to the hidden dynamics."""

    duration: float


@dataclass(frozen=True)
class KnownUnitary:
    """A classically known gate.

    Exactly one of ``hamiltonian`` (applied as ``exp(-i hamiltonian duration)``),
    ``pauli`` or ``operator`` is set.  Circuits holding raw operators are not
    cached by the oracle.
    """

    hamiltonian: PauliHamiltonian | None = None
    duration: float = 0.0
    pauli: PauliString | None = None
    operator: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        given = sum(v is not None for v in (self.hamiltonian, self.pauli, self.operator))
        if given != 1:
            raise DomainError("KnownUnitary needs exactly one of hamiltonian, pauli, operator")

    @property
    def n(self) -> int:
        if self.hamiltonian is not None:
            return self.hamiltonian.n
        if self.pauli is not None:
            return self.pauli.n
        return self.operator.shape[0].bit_length() - 1

    def matrix(self) -> np.ndarray:
        if self.hamiltonian is not None:
            return dense.evolve(self.hamiltonian, self.duration)
        if self.pauli is not None:
            return self.pauli.to_matrix()
        return np.asarray(self.operator, dtype=complex)


Segment = Union[UnknownEvolution, KnownUnitary]


@dataclass(frozen=True)
class DressedCircuit:
    """``(S_k ... S_2 S_1) ** repetitions`` with segments listed in time order."""

    segments: tuple[Segment, ...]
    repetitions: int = 1

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if self.repetitions < 1:
            raise DomainError(f"repetitions must be >= 1, got {self.repetitions}")

    @classmethod
    def bare(cls, duration: float) -> DressedCircuit:
        return cls((UnknownEvolution(duration),))

    @classmethod
    def interleaved(cls, known: PauliHamiltonian, duration: float, steps: int) -> DressedCircuit:
        """``(exp(i known duration/steps) U(duration/steps)) ** steps``."""
        dt = duration / steps
        return cls((UnknownEvolution(dt), KnownUnitary(known, -dt)), steps)

    @property
    def unknown_time(self) -> float:
        """Evolution time under the hidden Hamiltonian for one run of the circuit."""
        per_block = math.fsum(abs(s.duration) for s in self.segments if isinstance(s, UnknownEvolution))
        return self.repetitions * per_block

    @property
    def cacheable(self) -> bool:
        return all(not (isinstance(s, KnownUnitary) and s.operator is not None) for s in self.segments)


@dataclass(frozen=True)
class ReshapedCircuit:
    """``prod_i Q_i U(duration/steps) Q_i`` with every ``Q_i`` drawn fresh and
    uniformly from the commutant of ``target`` (fresh for every shot too)."""

    target: PauliString
    duration: float
    steps: int

    def __post_init__(self):
        if self.steps < 1:
            raise DomainError(f"steps must be >= 1, got {self.steps}")
        if self.target.is_identity:
            raise DomainError("reshaping target must be non-identity")

    @property
    def unknown_time(self) -> float:
        return abs(self.duration)

    def sample(self, rng) -> DressedCircuit:
        """One concrete realisation of the random twirl sequence."""
        dt = self.duration / self.steps
        segments: list[Segment] = []
        for _ in range(self.steps):
            q = KnownUnitary(pauli=sample_commutant(self.target, rng))
            segments.extend((q, UnknownEvolution(dt), q))
        return DressedCircuit(tuple(segments))


@dataclass(frozen=True)
class SignedPauli:
    """Observable ``sign * pauli`` with ``sign`` in {+1, -1}."""

    sign: int
    pauli: PauliString

    def matrix(self) -> np.ndarray:
        return self.sign * self.pauli.to_matrix()


@dataclass
class PhaseTotals:
    time: float = 0.0
    queries: int = 0


class TimeLedger:
    """Running total of evolution time spent on the hidden dynamics.

    Charges are tagged with the current phase (see :meth:`phase`); only
    unknown-evolution time is ever charged.
    """

    def __init__(self):
        self._time = 0.0
        self._queries = 0
        self._phases: dict[str, PhaseTotals] = {}
        self._tags: list[str] = []

    @property
    def total_time(self) -> float:
        return self._time

    @property
    def queries(self) -> int:
        return self._queries

    @property
    def phases(self) -> dict[str, PhaseTotals]:
        return {k: PhaseTotals(v.time, v.queries) for k, v in self._phases.items()}

    @property
    def current_phase(self) -> str:
        return self._tags[-1] if self._tags else "default"

    @contextmanager
    def phase(self, tag: str):
        self._tags.append(tag)
        try:
            yield self
        finally:
            self._tags.pop()

    def charge(self, time: float, queries: int = 1, tag: str | None = None) -> None:
        if time < 0 or queries < 0:
            raise DomainError("ledger charges must be nonnegative")
        tag = tag or self.current_phase
        self._time += time
        self._queries += queries
        totals = self._phases.setdefault(tag, PhaseTotals())
        totals.time += time
        totals.queries += queries

    def merge(self, other: TimeLedger) -> None:
        for tag, totals in other._phases.items():
            self.charge(totals.time, totals.queries, tag)

    def snapshot(self) -> dict:
        return {
            "total_time": self._time,
            "queries": self._queries,
            "phases": {k: {"time": v.time, "queries": v.queries} for k, v in sorted(self._phases.items())},
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.snapshot(), **kwargs)


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


class EvolutionOracle:
    """Black-box ``U(t) = exp(-i H t)`` for a hidden :class:`PauliHamiltonian`.

    Args:
        hamiltonian: the hidden Hamiltonian.
        rng: seed or ``numpy.random.Generator`` driving all measurement noise.
        ledger: shared ledger; a fresh one is created when omitted.
        time_scale: a query of duration ``t`` runs the hidden dynamics for
            ``t * time_scale`` (and is charged that much).
    """

    def __init__(self, hamiltonian: PauliHamiltonian, rng=None, ledger: TimeLedger | None = None, time_scale: float = 1.0):
        if time_scale <= 0:
            raise DomainError("time_scale must be positive")
        dense.check_dense(hamiltonian.n)
        self._hamiltonian = hamiltonian
        self.rng = _as_generator(rng)
        self.ledger = ledger if ledger is not None else TimeLedger()
        self.time_scale = float(time_scale)
        self._distributions: dict[DressedCircuit, np.ndarray] = {}
        self._pattern_cache: dict[PauliString, tuple[np.ndarray, np.ndarray]] = {}
        self._heisenberg_cache: dict[tuple, np.ndarray] = {}

    @property
    def n(self) -> int:
        return self._hamiltonian.n

    def rescaled(self, factor: float) -> EvolutionOracle:
        """View whose queries run the dynamics ``factor`` times as long; shares rng and ledger."""
        return EvolutionOracle(self._hamiltonian, self.rng, self.ledger, self.time_scale * factor)

    def clone(self, rng=None) -> EvolutionOracle:
        """Independent oracle on the same hidden Hamiltonian with a fresh ledger."""
        return EvolutionOracle(self._hamiltonian, rng, None, self.time_scale)

    # -- circuit unitaries -------------------------------------------------

    def _check_circuit_n(self, circuit) -> None:
        if isinstance(circuit, ReshapedCircuit):
            if circuit.target.n != self.n:
                raise DimensionError(f"circuit acts on {circuit.target.n} qubits, oracle on {self.n}")
            return
        for seg in circuit.segments:
            if isinstance(seg, KnownUnitary) and seg.n != self.n:
                raise DimensionError(f"circuit acts on {seg.n} qubits, oracle on {self.n}")

    def _segment_matrix(self, seg: Segment) -> np.ndarray:
        if isinstance(seg, UnknownEvolution):
            return dense.evolve(self._hamiltonian, seg.duration * self.time_scale)
        return seg.matrix()

    def _circuit_unitary(self, circuit: DressedCircuit) -> np.ndarray:
        self._check_circuit_n(circuit)
        block = np.eye(1 << self.n, dtype=complex)
        for seg in circuit.segments:
            block = self._segment_matrix(seg) @ block
        if circuit.repetitions == 1:
            return block
        return np.linalg.matrix_power(block, circuit.repetitions)

    def pauli_distribution(self, circuit: DressedCircuit) -> np.ndarray:
        """Exact Bell-sampling distribution ``|V_x|**2`` of the circuit unitary ``V``."""
        if circuit.cacheable and circuit in self._distributions:
            return self._distributions[circuit]
        probs = np.abs(dense.pauli_spectrum(self._circuit_unitary(circuit))) ** 2
        probs = probs / probs.sum()
        probs.setflags(write=False)
        if circuit.cacheable:
            self._distributions[circuit] = probs
        return probs

    def _charge(self, circuit, shots: int) -> None:
        if shots > 0:
            self.ledger.charge(circuit.unknown_time * self.time_scale * shots, shots)

    # -- Bell sampling -----------------------------------------------------

    def sample_indices(self, circuit: DressedCircuit, shots: int) -> np.ndarray:
        """Pauli indices of ``shots`` independent Bell samples."""
        if shots < 0:
            raise DomainError("shots must be nonnegative")
        if shots == 0:
            return np.zeros(0, dtype=np.int64)
        probs = self.pauli_distribution(circuit)
        self._charge(circuit, shots)
        return self.rng.choice(probs.size, size=shots, p=probs)

    def bell_sample(self, circuit: DressedCircuit, shots: int) -> list[PauliString]:
        return [PauliString.from_index(self.n, int(i)) for i in self.sample_indices(circuit, shots)]

    def count_nonidentity(self, circuit: DressedCircuit, shots: int) -> int:
        """Number of non-identity outcomes among ``shots`` Bell samples."""
        if shots < 0:
            raise DomainError("shots must be nonnegative")
        if shots == 0:
            return 0
        p_other = float(np.clip(1.0 - self.pauli_distribution(circuit)[0], 0.0, 1.0))
        self._charge(circuit, shots)
        return int(self.rng.binomial(shots, p_other))

    def first_nonidentity(self, circuit: DressedCircuit, max_shots: int) -> int | None:
        """Shot number (1-based) of the first non-identity sample, or None.

        Sampling stops at the first non-identity outcome; only the shots
        actually taken are charged.
        """
        if max_shots <= 0:
            return None
        p_other = float(np.clip(1.0 - self.pauli_distribution(circuit)[0], 0.0, 1.0))
        if p_other == 0.0:
            self._charge(circuit, max_shots)
            return None
        k = int(self.rng.geometric(p_other))
        if k > max_shots:
            self._charge(circuit, max_shots)
            return None
        self._charge(circuit, k)
        return k

    # -- state evolution ---------------------------------------------------

    def evolve_state(self, circuit: DressedCircuit | ReshapedCircuit, state: np.ndarray) -> np.ndarray:
        """Run one shot of the circuit on ``state``; random twirls are drawn from the oracle rng."""
        state = np.asarray(state, dtype=complex)
        if state.shape != (1 << self.n,):
            raise DimensionError(f"state has shape {state.shape}, expected ({1 << self.n},)")
        if abs(np.linalg.norm(state) - 1.0) > 1e-10:
            raise DomainError("initial state must be normalized")
        self._check_circuit_n(circuit)
        concrete = circuit.sample(self.rng) if isinstance(circuit, ReshapedCircuit) else circuit
        if concrete.repetitions == 1:
            out = state
            cache: dict[float, np.ndarray] = {}
            for seg in concrete.segments:
                if isinstance(seg, UnknownEvolution):
                    mat = cache.get(seg.duration)
                    if mat is None:
                        mat = cache[seg.duration] = self._segment_matrix(seg)
                    out = mat @ out
                elif seg.pauli is not None:
                    out = seg.pauli.to_matrix() @ out
                else:
                    out = seg.matrix() @ out
        else:
            out = self._circuit_unitary(concrete) @ state
        self._charge(circuit, 1)
        return out

    # -- reshaped measurements ---------------------------------------------

    def _sign_patterns(self, target: PauliString) -> tuple[np.ndarray, np.ndarray]:
        """Distinct commute/anticommute patterns of ``Q`` against the hidden terms,
        with their frequencies over the commutant of ``target``."""
        if target in self._pattern_cache:
            return self._pattern_cache[target]
        n = self.n
        codes = np.arange(1 << n)
        xs, zs = np.meshgrid(codes, codes, indexing="ij")
        xs, zs = xs.ravel(), zs.ravel()
        inside = ((np.bitwise_count(xs & target.z) + np.bitwise_count(zs & target.x)) & 1) == 0
        xs, zs = xs[inside], zs[inside]
        keys = np.zeros(xs.size, dtype=np.int64)
        for bit, (pauli, _) in enumerate(self._hamiltonian.terms):
            anti = (np.bitwise_count(xs & pauli.z) + np.bitwise_count(zs & pauli.x)) & 1
            keys |= anti.astype(np.int64) << bit
        patterns, counts = np.unique(keys, return_counts=True)
        result = (patterns, counts / xs.size)
        self._pattern_cache[target] = result
        return result

    def _term_group(self) -> list[tuple[int, int]]:
        """Bit masks of the group generated by the hidden terms, modulo phases."""
        elements = {(0, 0)}
        for pauli, _ in self._hamiltonian.terms:
            elements |= {(x ^ pauli.x, z ^ pauli.z) for x, z in elements}
        return sorted(elements)

    def _heisenberg_step(self, circuit: ReshapedCircuit, observable: PauliString) -> tuple[list[PauliString], np.ndarray]:
        """Averaged one-step Heisenberg map restricted to ``observable * <hidden terms>``."""
        basis = [PauliString(self.n, observable.x ^ gx, observable.z ^ gz) for gx, gz in self._term_group()]
        basis.sort(key=lambda p: (p != observable, p.index))
        key = (circuit, observable)
        if key in self._heisenberg_cache:
            return basis, self._heisenberg_cache[key]
        dim = 1 << self.n
        mats = np.stack([p.to_matrix() for p in basis])
        transposed = mats.transpose(0, 2, 1).reshape(len(basis), -1)
        dt = circuit.duration / circuit.steps * self.time_scale
        patterns, weights = self._sign_patterns(circuit.target)
        step = np.zeros((len(basis), len(basis)))
        for pattern, weight in zip(patterns, weights):
            signed = PauliHamiltonian(
                self.n,
                [(p, -c if (int(pattern) >> bit) & 1 else c) for bit, (p, c) in enumerate(self._hamiltonian.terms)],
            )
            w = dense.evolve(signed, dt)
            conjugated = (w.conj().T @ mats @ w).reshape(len(basis), -1)
            step += weight * (transposed @ conjugated.T).real / dim
        self._heisenberg_cache[key] = step
        return basis, step

    def reshaped_mean(self, circuit: ReshapedCircuit, observable: SignedPauli, state: np.ndarray) -> float:
        """Exact single-shot expectation of ``observable`` after the reshaped circuit.

        Averaging over the fresh twirls of one shot turns the circuit into
        ``steps`` applications of a mixed-unitary channel; its adjoint keeps
        ``observable`` inside the span of ``observable * g`` for ``g`` in the
        group generated by the hidden terms, which is small for sparse
        Hamiltonians.  No ledger charge.
        """
        self._check_circuit_n(circuit)
        state = np.asarray(state, dtype=complex)
        basis, step = self._heisenberg_step(circuit, observable.pauli)
        start = np.zeros(len(basis))
        start[0] = 1.0
        coeffs = np.linalg.matrix_power(step, circuit.steps) @ start
        values = np.array([np.vdot(state, p.to_matrix() @ state).real for p in basis])
        return float(observable.sign * coeffs @ values)

    def measure_reshaped(
        self,
        circuit: ReshapedCircuit,
        observable: SignedPauli,
        state: np.ndarray,
        shots: int,
        exact: bool = False,
    ) -> float:
        """Mean of ``shots`` independent ±1 measurements of ``observable``.

        Every shot reruns the circuit with its own twirl sequence, so the
        outcomes are i.i.d. with mean :meth:`reshaped_mean`.  With
        ``exact=True`` that mean is returned instead of a sample estimate;
        the ledger is charged identically in both modes.
        """
        if shots <= 0:
            raise DomainError("shots must be positive")
        mean = float(np.clip(self.reshaped_mean(circuit, observable, state), -1.0, 1.0))
        self._charge(circuit, shots)
        if exact:
            return mean
        plus = self.rng.binomial(shots, (1.0 + mean) / 2.0)
        return (2.0 * plus - shots) / shots


def bell_sample(oracle: EvolutionOracle, circuit: DressedCircuit, shots: int) -> list[PauliString]:
    return oracle.bell_sample(circuit, shots)


def evolve_state(oracle: EvolutionOracle, circuit, initial: np.ndarray) -> np.ndarray:
    return oracle.evolve_state(circuit, initial)


def measure_pm_observable(state: np.ndarray, observable: SignedPauli, rng, shots: int) -> np.ndarray:
    """Projective ±1 measurements of a signed Pauli observable on ``state``."""
    if shots <= 0:
        return np.zeros(0, dtype=np.int64)
    rng = _as_generator(rng)
    state = np.asarray(state, dtype=complex)
    mean = float(np.clip(np.vdot(state, observable.matrix() @ state).real, -1.0, 1.0))
    return np.where(rng.random(shots) < (1.0 + mean) / 2.0, 1, -1)


_AXIS_EIGEN = {
    # +1 eigenvector of each single-qubit Pauli, and a Pauli that flips it to the -1 eigenvector
    "Z": (np.array([1, 0], dtype=complex), "X"),
    "X": (np.array([1, 1], dtype=complex) / math.sqrt(2), "Z"),
    "Y": (np.array([1, 1j], dtype=complex) / math.sqrt(2), "Z"),
}


def reshaping_probe(target: PauliString) -> tuple[np.ndarray, SignedPauli, SignedPauli]:
    """Initial state and the two observables used to read out the phase of ``target``.

    The designated qubit is the first one on which ``target`` acts.  With
    ``|+>`` its +1 eigenvector of ``target``'s factor and ``A`` a flipping
    Pauli, the probe state is ``(|+> + A|+>)/sqrt(2)`` there, the +1
    eigenvector of the factor on the other active qubits and ``|0>`` on idle
    ones.  The observables are ``A`` and ``i A sigma`` on the designated qubit.
    Under ``exp(-i mu target t)`` their means are ``cos 2 mu t`` and
    ``sin 2 mu t``.
    """
    if target.is_identity:
        raise DomainError("probe target must be non-identity")
    n = target.n
    designated = target.support()[0]
    state = np.ones(1, dtype=complex)
    for k in range(n):
        label = target.qubit_label(k)
        if label == "I":
            local = np.array([1, 0], dtype=complex)
        else:
            plus, flip = _AXIS_EIGEN[label]
            if k == designated:
                local = (plus + PauliString.from_label(flip).to_matrix() @ plus) / math.sqrt(2)
            else:
                local = plus
        state = np.kron(state, local)
    axis = target.qubit_label(designated)
    flip = PauliString.single(n, designated, _AXIS_EIGEN[axis][1])
    phase, product = multiply(flip, PauliString.single(n, designated, axis))
    sign = 1j * phase
    return state, SignedPauli(1, flip), SignedPauli(int(round(sign.real)), product)
