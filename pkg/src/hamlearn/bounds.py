"""Closed-form bounds and parameter choices for Bell-sampling protocols."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import rel_entr

from .errors import DomainError

__all__ = [
    "t_star",
    "cosine_gap",
    "identity_prob_bounds",
    "TolerantPlan",
    "IntolerantPlan",
    "tolerant_plan",
    "intolerant_plan",
    "kl_divergence",
    "kl_lower_bound",
]

TWO_PI = 2.0 * math.pi


def cosine_gap(t):
    """``(1 - cos t) / t**2``, evaluated without cancellation near zero."""
    t = np.asarray(t, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = 2.0 * np.sin(t / 2.0) ** 2 / t**2
    return np.where(t == 0, 0.5, out)


def t_star(c: float) -> float:
    """Root of ``cos t = 1 - c t**2`` on ``(0, 2 pi)`` for ``0 < c < 1/2``.

    ``(1 - cos t)/t**2`` falls monotonically from 1/2 to 0 on that interval,
    so a bracketing solve converges to the unique root.
    """
    if not 0.0 < c < 0.5:
        raise DomainError(f"c must lie in (0, 1/2), got {c}")
    f = lambda t: float(cosine_gap(t)) - c  # noqa: E731
    return brentq(f, 1e-9, TWO_PI, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)


def identity_prob_bounds(frobenius: float, t: float, c: float) -> tuple[float, float]:
    """Envelope ``(1 - F**2 t**2, 1 - 2c F**2 t**2)`` on the identity probability.

    Valid only for ``t <= t_star(c) / (2L)`` with ``L`` a spectral-norm bound;
    enforcing that is the caller's job.
    """
    x = (frobenius * t) ** 2
    lower = min(1.0, max(0.0, 1.0 - x))
    upper = min(1.0, max(0.0, 1.0 - 2.0 * c * x))
    return lower, upper


@dataclass(frozen=True)
class TolerantPlan:
    """Shot count, evolution time and threshold for tolerant emptiness testing."""

    c: float
    t: float
    shots: int
    p_half: float
    epsilon1: float
    epsilon2: float
    delta: float
    spectral_bound: float

    @property
    def p_close(self) -> float:
        """Largest non-identity probability when the Frobenius norm is at most epsilon1."""
        return (self.epsilon1 * self.t) ** 2

    @property
    def p_far(self) -> float:
        """Smallest non-identity probability when the Frobenius norm is at least epsilon2."""
        return 2.0 * self.c * (self.epsilon2 * self.t) ** 2

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class IntolerantPlan:
    c: float
    t: float
    shots: int
    epsilon: float
    delta: float
    spectral_bound: float

    def to_dict(self) -> dict:
        return asdict(self)


def _check_common(spectral_bound: float, delta: float) -> None:
    if not spectral_bound > 0:
        raise DomainError(f"spectral bound must be positive, got {spectral_bound}")
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")


def tolerant_plan(spectral_bound: float, epsilon1: float, epsilon2: float, delta: float) -> TolerantPlan:
    """Parameters for distinguishing ``||H||_F <= epsilon1`` from ``>= epsilon2``.

    ``c`` is the midpoint of its feasible range, ``t`` the smaller of the
    small-angle estimate ``sqrt(3 - 6c)/L`` and the exact validity limit
    ``t_star(c)/(2L)``, and the shot count comes from the Chernoff-Hoeffding
    bound with the KL lower bound plugged in.
    """
    _check_common(spectral_bound, delta)
    if not 0.0 <= epsilon1 < epsilon2:
        raise DomainError(f"need 0 <= epsilon1 < epsilon2, got {epsilon1}, {epsilon2}")
    c = (epsilon1**2 + epsilon2**2) / (4.0 * epsilon2**2)
    t = min(math.sqrt(3.0 - 6.0 * c), t_star(c) / 2.0) / spectral_bound
    gap = 2.0 * c * epsilon2**2 - epsilon1**2
    shots = math.ceil(16.0 * c * epsilon2**2 * math.log(1.0 / delta) / (gap**2 * t**2))
    p_half = (3.0 * epsilon1**2 + epsilon2**2) * t**2 / 4.0
    return TolerantPlan(c, t, shots, p_half, epsilon1, epsilon2, delta, spectral_bound)


def intolerant_plan(spectral_bound: float, epsilon: float, delta: float) -> IntolerantPlan:
    """Parameters for deciding ``H = 0`` versus ``||H||_F >= epsilon``.

    Uses ``c = 1/4``, ``t = t_star(1/4)/(2L)`` and twice the Chernoff count
    ``ln(1/delta) / (2 c epsilon**2 t**2)``.
    """
    _check_common(spectral_bound, delta)
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    c = 0.25
    t = t_star(c) / (2.0 * spectral_bound)
    shots = 2 * math.ceil(math.log(1.0 / delta) / (2.0 * c * epsilon**2 * t**2))
    return IntolerantPlan(c, t, shots, epsilon, delta, spectral_bound)


def _check_prob(name: str, v: float) -> None:
    if not 0.0 <= v <= 1.0:
        raise DomainError(f"{name} must be a probability, got {v}")


def kl_divergence(x: float, y: float) -> float:
    """Bernoulli KL divergence ``D(x || y)`` in nats (``inf`` when undefined)."""
    _check_prob("x", x)
    _check_prob("y", y)
    return float(rel_entr(x, y) + rel_entr(1.0 - x, 1.0 - y))


def kl_lower_bound(x: float, y: float) -> float:
    """Quadratic lower bound ``(x - y)**2 / (2 max(x, y))`` on ``D(x || y)``."""
    _check_prob("x", x)
    _check_prob("y", y)
    if x == y:
        return 0.0
    return (x - y) ** 2 / (2.0 * max(x, y))
