"""Heisenberg-limited sparse Hamiltonian learning.

Three layers:

* :func:`structure_learn` Bell-samples the residual dynamics
  ``(exp(i H_hat tau/r) U(tau/r))**r`` to find Pauli terms whose magnitude
  falls in the current bucket.
* :func:`coefficient_learn` isolates one term by random commutant twirling
  and pins its coefficient down with robust frequency estimation, shrinking
  an interval by a factor 2/3 per round.
* :func:`hierarchical_learn` runs both over buckets of geometrically
  decreasing magnitude.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .oracle import DressedCircuit, EvolutionOracle, ReshapedCircuit, reshaping_probe
from .pauli import PauliHamiltonian, PauliString

__all__ = [
    "LearnerConfig",
    "CoefficientInterval",
    "TermProvenance",
    "LearnedHamiltonian",
    "NonIdentityStats",
    "structure_learn",
    "count_nonidentity_rate",
    "coefficient_learn",
    "hierarchical_learn",
]


@dataclass(frozen=True)
class LearnerConfig:
    """Accuracy targets plus the constants behind every big-O in the learner.

    Attributes:
        sparsity: bound ``M`` on the number of terms.
        epsilon: target max-norm accuracy on the coefficients.
        delta: failure budget.
        c_tau: structure-learning evolution time is ``c_tau 2**j / M``.
        c_r: structure-learning Trotter steps are ``c_r 4**j M**2``.
        c_m: structure-learning shots are ``c_m M**2 ln(M/delta)``.
        c_2: reshaping steps per round are ``c_2 M**2 tau**2``.
        n_exp_factor: shots per observable per round are
            ``n_exp_factor * ln(4 rounds M buckets / delta)``.
        exact_expectation: replace shot averages in coefficient learning by
            exact expectations (the ledger is charged as if sampled).
        relearn: re-estimate terms that structure learning returns again.
    """

    sparsity: int
    epsilon: float
    delta: float
    c_tau: float = 0.25
    c_r: float = 4.0
    c_m: float = 8.0
    c_2: float = 16.0
    n_exp_factor: float = 32.0
    exact_expectation: bool = False
    relearn: bool = True

    def __post_init__(self):
        if self.sparsity < 1:
            raise DomainError(f"sparsity must be >= 1, got {self.sparsity}")
        if not 0.0 < self.epsilon < 1.0:
            raise DomainError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if not 0.0 < self.delta < 1.0:
            raise DomainError(f"delta must lie in (0, 1), got {self.delta}")
        for name in ("c_tau", "c_r", "c_m", "c_2", "n_exp_factor"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")

    @property
    def buckets(self) -> int:
        return max(1, math.ceil(math.log2(1.0 / self.epsilon)))

    @property
    def rounds(self) -> int:
        return math.ceil(math.log(2.0 * math.pi / self.epsilon) / math.log(1.5))

    @property
    def n_exp(self) -> int:
        return math.ceil(self.n_exp_factor * math.log(4 * self.rounds * self.sparsity * self.buckets / self.delta))

    @property
    def structure_shots(self) -> int:
        m = self.sparsity
        return math.ceil(self.c_m * m * m * math.log(m / self.delta))

    def structure_time(self, bucket: int) -> float:
        return self.c_tau * 2.0**bucket / self.sparsity

    def structure_steps(self, bucket: int) -> int:
        return math.ceil(self.c_r * 4.0**bucket * self.sparsity**2)

    def reshaping_steps(self, tau: float) -> int:
        return max(1, math.ceil(self.c_2 * self.sparsity**2 * tau**2))


@dataclass(frozen=True)
class CoefficientInterval:
    """Interval ``[a, b]`` maintained around the coefficient being learned."""

    a: float
    b: float

    def __post_init__(self):
        if not self.a < self.b:
            raise DomainError(f"need a < b, got [{self.a}, {self.b}]")

    @property
    def width(self) -> float:
        return self.b - self.a

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.a + self.b)

    @property
    def evolution_time(self) -> float:
        """Evolution time that maps the interval onto a phase arc of width pi."""
        return math.pi / (2.0 * self.width)

    def keep_lower(self) -> CoefficientInterval:
        return CoefficientInterval(self.a, (self.a + 2.0 * self.b) / 3.0)

    def keep_upper(self) -> CoefficientInterval:
        return CoefficientInterval((2.0 * self.a + self.b) / 3.0, self.b)

    def __contains__(self, value: float) -> bool:
        return self.a <= value <= self.b


@dataclass(frozen=True)
class TermProvenance:
    bucket: int
    rounds: int
    estimate: float


@dataclass
class LearnedHamiltonian:
    hamiltonian: PauliHamiltonian
    provenance: dict[PauliString, TermProvenance]
    ledger: dict
    candidates: int = 0
    discarded: list[PauliString] = field(default_factory=list)

    def ledger_rows(self) -> list[tuple[int, str, float, int]]:
        """``(bucket, phase, evolution_time, queries)`` per bucket and subroutine."""
        rows = []
        for tag, totals in self.ledger["phases"].items():
            phase, _, bucket = tag.partition("/")
            if phase in ("AI", "AII") and bucket.isdigit():
                rows.append((int(bucket), phase, totals["time"], totals["queries"]))
        return sorted(rows, key=lambda r: (r[0], r[1]))

    def ledger_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["bucket", "phase", "evolution_time", "queries"])
        for bucket, phase, time, queries in self.ledger_rows():
            writer.writerow([bucket, phase, repr(float(time)), queries])
        return buf.getvalue()

    def to_dict(self) -> dict:
        doc = self.hamiltonian.to_dict()
        doc["provenance"] = [
            {"pauli": p.label, "bucket": prov.bucket, "rounds": prov.rounds, "estimate": prov.estimate}
            for p, prov in sorted(self.provenance.items(), key=lambda kv: kv[0].index)
        ]
        doc["ledger"] = self.ledger
        return doc

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


@dataclass(frozen=True)
class NonIdentityStats:
    counts: np.ndarray
    shots: int
    exact_probability: float
    bound: float

    @property
    def expected_count(self) -> float:
        return self.shots * self.exact_probability

    @property
    def count_std(self) -> float:
        p = self.exact_probability
        return math.sqrt(self.shots * p * (1.0 - p))


def _check_bucket(bucket: int, config: LearnerConfig) -> None:
    if not 0 <= bucket < config.buckets:
        raise DomainError(f"bucket {bucket} outside 0..{config.buckets - 1}")


def _structure_circuit(h_hat: PauliHamiltonian, bucket: int, config: LearnerConfig) -> DressedCircuit:
    return DressedCircuit.interleaved(h_hat, config.structure_time(bucket), config.structure_steps(bucket))


def structure_learn(
    oracle: EvolutionOracle, h_hat: PauliHamiltonian, bucket: int, config: LearnerConfig
) -> set[PauliString]:
    """Non-identity Pauli strings seen while Bell-sampling the residual dynamics."""
    _check_bucket(bucket, config)
    circuit = _structure_circuit(h_hat, bucket, config)
    indices = oracle.sample_indices(circuit, config.structure_shots)
    return {PauliString.from_index(oracle.n, int(i)) for i in np.unique(indices) if i != 0}


def count_nonidentity_rate(
    oracle: EvolutionOracle, h_hat: PauliHamiltonian, bucket: int, config: LearnerConfig, trials: int
) -> NonIdentityStats:
    """Non-identity counts of ``trials`` independent structure-learning rounds.

    Also reports the exact non-identity probability of the sampled circuit
    and the ``c_tau**2 / M`` bound that holds whenever the boosted residual
    has Frobenius norm at most ``sqrt(M)``.
    """
    _check_bucket(bucket, config)
    circuit = _structure_circuit(h_hat, bucket, config)
    shots = config.structure_shots
    counts = np.array([oracle.count_nonidentity(circuit, shots) for _ in range(trials)], dtype=np.int64)
    exact = float(np.clip(1.0 - oracle.pauli_distribution(circuit)[0], 0.0, 1.0))
    return NonIdentityStats(counts, shots, exact, config.c_tau**2 / config.sparsity)


def _phase_offset(estimate: complex, interval: CoefficientInterval) -> float:
    """Coefficient offset from the interval midpoint implied by a phase estimate.

    The readout phase is ``2 mu tau = pi mu / width``, so the interval maps to
    an arc of width pi; the estimate is unwrapped around the arc's centre.
    """
    centre = math.pi * interval.midpoint / interval.width
    return interval.width / math.pi * float(np.angle(estimate * np.exp(-1j * centre)))


def coefficient_learn(
    oracle: EvolutionOracle,
    target: PauliString,
    config: LearnerConfig,
    intervals: list[CoefficientInterval] | None = None,
) -> float:
    """Estimate the coefficient of ``target`` to within ``config.epsilon``.

    Each round evolves the probe state through ``steps`` randomly twirled
    slices of total duration ``pi / (2 width)``, estimates
    ``S = <O+> + i <O->`` from ``n_exp`` shots per observable and keeps the
    two thirds of the interval on the side the phase points to.  Returns the
    final midpoint, clipped to ``[-1, 1]``.  When ``intervals`` is given
    every interval (initial one included) is appended to it.
    """
    state, obs_plus, obs_minus = reshaping_probe(target)
    interval = CoefficientInterval(-math.pi, math.pi)
    if intervals is not None:
        intervals.append(interval)
    shots = config.n_exp
    for _ in range(config.rounds):
        tau = interval.evolution_time
        circuit = ReshapedCircuit(target, tau, config.reshaping_steps(tau))
        plus = oracle.measure_reshaped(circuit, obs_plus, state, shots, exact=config.exact_expectation)
        minus = oracle.measure_reshaped(circuit, obs_minus, state, shots, exact=config.exact_expectation)
        if _phase_offset(complex(plus, minus), interval) <= 0.0:
            interval = interval.keep_lower()
        else:
            interval = interval.keep_upper()
        if intervals is not None:
            intervals.append(interval)
    return float(np.clip(interval.midpoint, -1.0, 1.0))


def hierarchical_learn(oracle: EvolutionOracle, config: LearnerConfig) -> LearnedHamiltonian:
    """Learn an ``M``-sparse approximation bucket by bucket.

    Bucket ``j`` targets terms with ``2**-(j+1) < |mu| <= 2**-j``.  After the
    last bucket, estimates within ``epsilon/2`` of zero are dropped (a zero
    coefficient is learned to that accuracy) and only the ``M`` largest
    remaining terms are kept.  Ledger phases are tagged ``AI/<j>`` and
    ``AII/<j>``.
    """
    estimates: dict[PauliString, float] = {}
    provenance: dict[PauliString, TermProvenance] = {}
    candidates = 0
    for bucket in range(config.buckets):
        # Zero charges register both phases so every bucket gets ledger rows.
        oracle.ledger.charge(0.0, 0, f"AI/{bucket}")
        oracle.ledger.charge(0.0, 0, f"AII/{bucket}")
        h_hat = PauliHamiltonian(oracle.n, estimates)
        with oracle.ledger.phase(f"AI/{bucket}"):
            found = structure_learn(oracle, h_hat, bucket, config)
        for target in sorted(found, key=lambda p: p.index):
            if not config.relearn and target in estimates:
                continue
            candidates += 1
            with oracle.ledger.phase(f"AII/{bucket}"):
                mu = coefficient_learn(oracle, target, config)
            estimates[target] = mu
            provenance[target] = TermProvenance(bucket, config.rounds, mu)

    kept = {p: mu for p, mu in estimates.items() if abs(mu) > config.epsilon / 2.0}
    if len(kept) > config.sparsity:
        ranked = sorted(kept.items(), key=lambda kv: (-abs(kv[1]), kv[0].index))
        kept = dict(ranked[: config.sparsity])
    discarded = sorted((p for p in estimates if p not in kept), key=lambda p: p.index)
    return LearnedHamiltonian(
        PauliHamiltonian(oracle.n, kept),
        {p: provenance[p] for p in kept},
        oracle.ledger.snapshot(),
        candidates,
        discarded,
    )
