import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hamlearn.errors import DimensionError, DomainError
from hamlearn.pauli import (
    PauliHamiltonian,
    PauliString,
    commutes,
    frobenius_norm,
    multiply,
    random_sparse_hamiltonian,
    residual,
    sample_commutant,
    spectral_norm,
)

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)


def paulis(n):
    return st.builds(lambda x, z: PauliString(n, x, z), st.integers(0, 2**n - 1), st.integers(0, 2**n - 1))


class TestPauliString:
    def test_single_qubit_matrices(self):
        assert np.array_equal(PauliString.from_label("X").to_matrix(), X)
        assert np.array_equal(PauliString.from_label("Y").to_matrix(), Y)
        assert np.array_equal(PauliString.from_label("Z").to_matrix(), Z)
        assert np.array_equal(PauliString.from_label("I").to_matrix(), np.eye(2))

    def test_leftmost_label_is_first_tensor_factor(self):
        assert np.array_equal(PauliString.from_label("XZ").to_matrix(), np.kron(X, Z))
        assert np.array_equal(PauliString.from_label("IYX").to_matrix(), np.kron(np.eye(2), np.kron(Y, X)))

    def test_index_round_trip(self):
        for k in range(4**3):
            assert PauliString.from_index(3, k).index == k
        assert PauliString.from_index(2, 0).is_identity
        assert PauliString.from_label("ZI").index == 4

    def test_weight_and_support(self):
        p = PauliString.from_label("XIYZI")
        assert p.weight == 3
        assert p.support() == [0, 2, 3]
        assert p.qubit_label(2) == "Y"

    def test_bad_label(self):
        with pytest.raises(DomainError):
            PauliString.from_label("XQ")

    def test_single(self):
        assert PauliString.single(3, 1, "Y").label == "IYI"


class TestAlgebra:
    def test_xz_product(self):
        phase, r = multiply(PauliString.from_label("X"), PauliString.from_label("Z"))
        assert (phase, r.label) == (-1j, "Y")

    def test_zx_product(self):
        phase, r = multiply(PauliString.from_label("Z"), PauliString.from_label("X"))
        assert (phase, r.label) == (1j, "Y")

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            commutes(PauliString.from_label("X"), PauliString.from_label("XX"))

    @settings(max_examples=200, deadline=None)
    @given(paulis(3), paulis(3))
    def test_multiply_matches_matrices(self, p, q):
        phase, r = multiply(p, q)
        assert np.allclose(phase * r.to_matrix(), p.to_matrix() @ q.to_matrix(), atol=1e-14)

    @settings(max_examples=200, deadline=None)
    @given(paulis(3), paulis(3))
    def test_commutes_matches_matrices(self, p, q):
        a, b = p.to_matrix(), q.to_matrix()
        assert commutes(p, q) == np.allclose(a @ b, b @ a)

    def test_commutant_sampler_commutes(self, rng):
        target = PauliString.from_label("XYZ")
        draws = [sample_commutant(target, rng) for _ in range(200)]
        assert all(commutes(q, target) for q in draws)
        assert len(set(draws)) > 20


class TestHamiltonian:
    def test_rejects_identity_and_duplicates(self):
        with pytest.raises(DomainError):
            PauliHamiltonian.from_labels({"II": 1.0})
        with pytest.raises(DomainError):
            PauliHamiltonian(1, [(PauliString.from_label("X"), 1.0), (PauliString.from_label("X"), 2.0)])

    def test_exact_zeros_dropped(self):
        h = PauliHamiltonian.from_labels({"XI": 0.0, "ZZ": 0.5})
        assert len(h) == 1

    def test_norms(self):
        h = PauliHamiltonian.from_labels({"XI": 0.3, "ZZ": -0.4})
        assert frobenius_norm(h) == pytest.approx(0.5, abs=1e-15)
        assert spectral_norm(PauliHamiltonian.from_labels({"Z": 0.7})) == pytest.approx(0.7)
        assert spectral_norm(PauliHamiltonian.zero(2)) == 0.0

    def test_json_round_trip(self):
        h = PauliHamiltonian.from_labels({"XIZ": 0.25, "YYI": -1.0 / 3.0})
        doc = json.loads(h.to_json())
        assert doc["n"] == 3
        assert {t["pauli"] for t in doc["terms"]} == {"XIZ", "YYI"}
        assert PauliHamiltonian.from_json(h.to_json()) == h

    def test_json_rejects_duplicates(self):
        text = json.dumps({"n": 1, "terms": [{"pauli": "X", "coeff": 1}, {"pauli": "X", "coeff": 2}]})
        with pytest.raises(DomainError):
            PauliHamiltonian.from_json(text)

    def test_residual(self):
        h = PauliHamiltonian.from_labels({"X": 0.5, "Z": 0.25})
        h_hat = PauliHamiltonian.from_labels({"X": 0.5, "Y": 0.1})
        r = residual(h, h_hat, 0.5)
        assert r.coefficients() == {PauliString.from_label("Z"): 0.5, PauliString.from_label("Y"): -0.2}

    def test_generator(self, rng):
        h = random_sparse_hamiltonian(4, 6, (0.1, 1.0), rng)
        assert len(h) == 6
        assert all(0.1 <= abs(c) <= 1.0 for c in h.coefficients().values())
        assert set(random_sparse_hamiltonian(1, 3, rng=rng).support) == {PauliString.from_label(c) for c in "XYZ"}
        with pytest.raises(DomainError):
            random_sparse_hamiltonian(1, 4)

    def test_generator_is_seeded(self):
        a = random_sparse_hamiltonian(3, 4, rng=np.random.default_rng(5))
        b = random_sparse_hamiltonian(3, 4, rng=np.random.default_rng(5))
        assert a == b and hash(a) == hash(b)
