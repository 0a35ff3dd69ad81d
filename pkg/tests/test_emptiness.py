import math

import numpy as np
import pytest

from hamlearn.emptiness import Emptiness, test_intolerant, test_tolerant
from hamlearn.errors import DomainError
from hamlearn.oracle import DressedCircuit, EvolutionOracle
from hamlearn.pauli import PauliHamiltonian


def _oracle(h, seed):
    return EvolutionOracle(h, np.random.default_rng(seed))


def test_intolerant_zero_is_empty():
    v = test_intolerant(_oracle(PauliHamiltonian.zero(3), 0), 1.0, 0.1, 0.05)
    assert v.verdict is Emptiness.EMPTY
    assert v.shots == v.plan.shots and v.ledger["queries"] == v.plan.shots


def test_intolerant_far_is_not_empty():
    h = PauliHamiltonian.from_labels({"XZ": 0.2})
    hits = sum(not test_intolerant(_oracle(h, s), 1.0, 0.1, 0.05).empty for s in range(50))
    assert hits >= 48


def test_intolerant_stops_early():
    h = PauliHamiltonian.from_labels({"X": 1.0})
    v = test_intolerant(_oracle(h, 1), 1.0, 0.1, 0.05)
    assert v.verdict is Emptiness.NOT_EMPTY
    assert v.ledger["queries"] == v.shots < v.plan.shots
    assert v.ledger["total_time"] == pytest.approx(v.shots * v.plan.t)


def test_tolerant_both_sides():
    close = PauliHamiltonian.from_labels({"ZI": 0.03, "IX": -0.02})
    far = PauliHamiltonian.from_labels({"ZI": 0.08, "XY": 0.07})
    assert sum(test_tolerant(_oracle(close, s), 1.0, 0.05, 0.1, 0.05).empty for s in range(40)) >= 38
    assert sum(not test_tolerant(_oracle(far, s), 1.0, 0.05, 0.1, 0.05).empty for s in range(40)) >= 38


def test_tolerant_charges_all_shots():
    v = test_tolerant(_oracle(PauliHamiltonian.from_labels({"Y": 0.5}), 2), 1.0, 0.05, 0.1, 0.05)
    assert v.ledger["queries"] == v.plan.shots
    assert v.ledger["total_time"] == pytest.approx(v.plan.shots * v.plan.t)


def test_tolerant_custom_circuit():
    h = PauliHamiltonian.from_labels({"XX": 0.5})
    # Cancelling the known part leaves nothing to detect.
    v = test_tolerant(_oracle(h, 3), 2.0, 0.05, 0.1, 0.05, circuit_builder=lambda t: DressedCircuit.interleaved(h, t, 2))
    assert v.empty and v.nonidentity == 0


def test_verdict_json():
    v = test_tolerant(_oracle(PauliHamiltonian.zero(1), 0), 1.0, 0.05, 0.1, 0.05)
    doc = v.to_dict()
    assert doc["verdict"] == "EMPTY" and doc["plan"]["shots"] == v.shots
    assert math.isclose(doc["plan"]["t"], v.plan.t)
    assert v.to_json()


def test_bad_thresholds():
    with pytest.raises(DomainError):
        test_tolerant(_oracle(PauliHamiltonian.zero(1), 0), 1.0, 0.1, 0.1, 0.05)


def test_not_collected_as_tests():
    assert test_intolerant.__test__ is False and test_tolerant.__test__ is False
