"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Operands act on different numbers of qubits."""


class DomainError(ValueError):
    """An argument lies outside the domain an operation accepts."""


class CapabilityError(RuntimeError):
    """The request exceeds what the dense simulator is configured to handle."""
