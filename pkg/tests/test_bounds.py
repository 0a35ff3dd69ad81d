import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hamlearn.bounds import (
    cosine_gap,
    identity_prob_bounds,
    intolerant_plan,
    kl_divergence,
    kl_lower_bound,
    t_star,
    tolerant_plan,
)
from hamlearn.errors import DomainError


def test_t_star_frozen():
    assert t_star(0.25) == pytest.approx(2.7831147565030205, abs=1e-12)
    assert t_star(2 / math.pi**2) == pytest.approx(math.pi, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-6, 0.5 - 1e-6))
def test_t_star_residual(c):
    t = t_star(c)
    assert 0 < t < 2 * math.pi
    assert abs(math.cos(t) - 1 + c * t * t) < 1e-10


def test_t_star_domain():
    for bad in (0.0, 0.5, -1.0):
        with pytest.raises(DomainError):
            t_star(bad)


def test_t_star_small_c_approaches_two_pi():
    assert 2 * math.pi - t_star(1e-6) < 1e-2


def test_cosine_gap_at_zero():
    assert cosine_gap(0.0) == 0.5
    assert cosine_gap(1e-8) == pytest.approx(0.5)


def test_identity_envelope_clamped():
    assert identity_prob_bounds(10.0, 1.0, 0.25) == (0.0, 0.0)
    assert identity_prob_bounds(0.0, 1.0, 0.25) == (1.0, 1.0)


def test_intolerant_plan_frozen():
    plan = intolerant_plan(1.0, 0.1, 0.05)
    assert plan.t == pytest.approx(1.3915573782515103, abs=1e-12)
    assert plan.shots == 620


def test_tolerant_plan_frozen():
    plan = tolerant_plan(1.0, 0.05, 0.1, 0.05)
    assert plan.c == 0.3125
    assert plan.t == pytest.approx(math.sqrt(1.125), abs=1e-15)
    assert plan.shots == 9468
    assert plan.p_half == pytest.approx(0.004921875, abs=1e-15)
    assert plan.p_close < plan.p_half < plan.p_far


@settings(max_examples=100, deadline=None)
@given(st.floats(0.0, 0.95), st.floats(0.01, 1.0), st.floats(0.1, 4.0))
def test_tolerant_plan_invariants(ratio, eps2, big_l):
    plan = tolerant_plan(big_l, ratio * eps2, eps2, 0.05)
    assert 0.25 <= plan.c < 0.5
    assert plan.t <= t_star(plan.c) / (2 * big_l) + 1e-15
    assert plan.p_close < plan.p_half < plan.p_far


def test_plan_domain_errors():
    with pytest.raises(DomainError):
        tolerant_plan(1.0, 0.2, 0.1, 0.05)
    with pytest.raises(DomainError):
        intolerant_plan(0.0, 0.1, 0.05)
    with pytest.raises(DomainError):
        intolerant_plan(1.0, 0.1, 1.0)


def test_kl_frozen():
    assert kl_divergence(0.3, 0.5) == pytest.approx(0.08228287850505175, abs=1e-15)
    assert kl_lower_bound(0.3, 0.5) == pytest.approx(0.04, abs=1e-15)
    assert kl_divergence(0.4, 0.4) == 0.0


def test_kl_edges():
    assert kl_divergence(0.0, 0.0) == 0.0
    assert kl_divergence(0.5, 0.0) == math.inf
    assert kl_divergence(0.0, 0.5) == pytest.approx(math.log(2))


@settings(max_examples=300, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_kl_lower_bound_holds(x, y):
    assert kl_lower_bound(x, y) <= kl_divergence(x, y) + 1e-12
