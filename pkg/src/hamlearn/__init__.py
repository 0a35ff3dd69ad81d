"""Hamiltonian emptiness testing, sparse learning and sparsity testing from dynamics."""

__version__ = "0.1.0"

from .bounds import intolerant_plan, kl_divergence, kl_lower_bound, t_star, tolerant_plan
from .emptiness import Emptiness, EmptinessVerdict, test_intolerant, test_tolerant
from .errors import CapabilityError, DimensionError, DomainError
from .learner import LearnedHamiltonian, LearnerConfig, coefficient_learn, hierarchical_learn, structure_learn
from .oracle import DressedCircuit, EvolutionOracle, ReshapedCircuit, TimeLedger
from .pauli import (
    PauliHamiltonian,
    PauliString,
    commutes,
    frobenius_norm,
    multiply,
    random_sparse_hamiltonian,
    spectral_norm,
)
from .sparsity import Sparsity, SparsityVerdict, far_instance, test_sparsity

__all__ = [
    "__version__",
    "CapabilityError",
    "DimensionError",
    "DomainError",
    "DressedCircuit",
    "Emptiness",
    "EmptinessVerdict",
    "EvolutionOracle",
    "LearnedHamiltonian",
    "LearnerConfig",
    "PauliHamiltonian",
    "PauliString",
    "ReshapedCircuit",
    "Sparsity",
    "SparsityVerdict",
    "TimeLedger",
    "coefficient_learn",
    "commutes",
    "far_instance",
    "frobenius_norm",
    "hierarchical_learn",
    "intolerant_plan",
    "kl_divergence",
    "kl_lower_bound",
    "multiply",
    "random_sparse_hamiltonian",
    "spectral_norm",
    "structure_learn",
    "t_star",
    "test_intolerant",
    "test_sparsity",
    "test_tolerant",
    "tolerant_plan",
]

# Keep pytest from collecting the testers when a test module star-imports.
test_intolerant.__test__ = False
test_tolerant.__test__ = False
test_sparsity.__test__ = False
