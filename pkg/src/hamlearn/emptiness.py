"""Intolerant and tolerant emptiness testing by Bell sampling."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Callable

from .bounds import IntolerantPlan, TolerantPlan, intolerant_plan, tolerant_plan
from .oracle import DressedCircuit, EvolutionOracle

__all__ = ["Emptiness", "EmptinessVerdict", "test_intolerant", "test_tolerant"]


class Emptiness(str, enum.Enum):
    EMPTY = "EMPTY"
    NOT_EMPTY = "NOT_EMPTY"


@dataclass(frozen=True)
class EmptinessVerdict:
    verdict: Emptiness
    nonidentity: int
    shots: int
    plan: IntolerantPlan | TolerantPlan
    ledger: dict

    @property
    def fraction(self) -> float:
        return self.nonidentity / self.shots if self.shots else 0.0

    @property
    def empty(self) -> bool:
        return self.verdict is Emptiness.EMPTY

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "nonidentity": self.nonidentity,
            "shots": self.shots,
            "fraction": self.fraction,
            "plan": self.plan.to_dict(),
            "ledger": self.ledger,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def test_intolerant(oracle: EvolutionOracle, spectral_bound: float, epsilon: float, delta: float) -> EmptinessVerdict:
    """Decide ``H = 0`` against ``||H||_F >= epsilon``.

    Bell-samples ``exp(-iHt)`` and stops at the first non-identity outcome.
    """
    plan = intolerant_plan(spectral_bound, epsilon, delta)
    circuit = DressedCircuit.bare(plan.t)
    hit = oracle.first_nonidentity(circuit, plan.shots)
    if hit is None:
        return EmptinessVerdict(Emptiness.EMPTY, 0, plan.shots, plan, oracle.ledger.snapshot())
    return EmptinessVerdict(Emptiness.NOT_EMPTY, 1, hit, plan, oracle.ledger.snapshot())


def test_tolerant(
    oracle: EvolutionOracle,
    spectral_bound: float,
    epsilon1: float,
    epsilon2: float,
    delta: float,
    circuit_builder: Callable[[float], DressedCircuit] | None = None,
) -> EmptinessVerdict:
    """Decide ``||H_eff||_F <= epsilon1`` against ``>= epsilon2``.

    All planned shots are drawn; the verdict compares the non-identity
    fraction with the midpoint threshold ``p_half``.  ``circuit_builder``
    maps the per-shot evolution time to the circuit to sample (a bare
    evolution by default), and ``spectral_bound`` must bound the generator
    that circuit effectively implements.
    """
    plan = tolerant_plan(spectral_bound, epsilon1, epsilon2, delta)
    circuit = circuit_builder(plan.t) if circuit_builder else DressedCircuit.bare(plan.t)
    m = oracle.count_nonidentity(circuit, plan.shots)
    verdict = Emptiness.NOT_EMPTY if m / plan.shots >= plan.p_half else Emptiness.EMPTY
    return EmptinessVerdict(verdict, m, plan.shots, plan, oracle.ledger.snapshot())


# Keep pytest from collecting these as tests when imported into test modules.
test_intolerant.__test__ = False
test_tolerant.__test__ = False
