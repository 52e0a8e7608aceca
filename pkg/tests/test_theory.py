import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dfds.domain import BoxDomain
from dfds.errors import DomainViolationError, InvalidDimensionError
from dfds.geometry import alpha_for, angle_between
from dfds.theory import (
    BoundInputs,
    asymptotic_direction_constant,
    cap_hit_guarantee_check,
    descent_violations,
    evals_per_direction,
    expected_directions_upper_bound,
    expected_evals_upper_bound,
    k_max_bound,
    normalized_direction_bound,
    r_epsilon_lipschitz,
    success_probability_lower_bound,
    worst_case_alpha,
)

mpmath.mp.dps = 40


def log_cap_oracle(dim, alpha):
    """``ln p`` from the regularized incomplete beta function, for alpha <= pi/2."""
    s2 = mpmath.sin(mpmath.mpf(alpha)) ** 2
    return mpmath.log(mpmath.betainc((dim - 1) / mpmath.mpf(2), mpmath.mpf(1) / 2, 0, s2, regularized=True) / 2)


def in_cap_direction(axis, alpha, rng):
    """Direction at angle at most ``alpha`` from ``axis`` (uniform angle, random azimuth)."""
    u = axis / np.linalg.norm(axis)
    if u.size == 1:
        return u.copy()
    v = rng.standard_normal(u.size)
    v -= (v @ u) * u
    v /= np.linalg.norm(v)
    theta = rng.uniform(0, alpha)
    return math.cos(theta) * u + math.sin(theta) * v


# --- k_max --------------------------------------------------------------------


def test_k_max_examples():
    assert k_max_bound(1.0, 1e-4) == 30000
    assert k_max_bound(0.0, 0.3) == 0
    eps = 1e-4
    assert k_max_bound(eps / 3, eps) == 1
    with pytest.raises(ValueError):
        k_max_bound(-1.0, 1e-4)
    with pytest.raises(ValueError):
        k_max_bound(1.0, 0.0)


# --- success probability ------------------------------------------------------


def test_success_probability_examples():
    assert success_probability_lower_bound(0.5, 1) == 0.5
    assert success_probability_lower_bound(0.25, 2) == pytest.approx(0.4375, abs=1e-15)
    ref = float(1 - (1 - mpmath.mpf("1e-9")) ** (10**9))
    got = success_probability_lower_bound(1e-9, 10**9)
    assert abs(got - ref) <= 1e-6
    assert abs(got - (1 - math.exp(-1))) <= 1e-6
    assert success_probability_lower_bound(1.0, 3) == 1.0
    with pytest.raises(ValueError):
        success_probability_lower_bound(1.2, 1)
    with pytest.raises(ValueError):
        success_probability_lower_bound(0.3, 0)


@given(st.floats(0, 1), st.floats(0, 1), st.integers(1, 10**6), st.integers(1, 10**6))
def test_success_probability_monotone(p1, p2, m1, m2):
    (p1, p2), (m1, m2) = sorted((p1, p2)), sorted((m1, m2))
    lo = success_probability_lower_bound(p1, m1)
    assert 0.0 <= lo <= 1.0
    assert lo <= success_probability_lower_bound(p2, m1)
    assert lo <= success_probability_lower_bound(p1, m2)


# --- worst-case angle ---------------------------------------------------------


def test_worst_case_alpha_examples():
    assert worst_case_alpha(1.0, 1.0) == pytest.approx(math.asin(math.sqrt(3) / 4), abs=1e-15)
    vals = [worst_case_alpha(d, 0.1) for d in np.geomspace(0.1, 1e6, 50)]
    assert all(b < a for a, b in zip(vals, vals[1:])) and vals[-1] < 1e-6
    theta, r = 0.2, 0.37
    d0 = math.sqrt(3) / (2 * math.sin(theta)) * r - r
    assert worst_case_alpha(d0, r) == pytest.approx(theta, abs=1e-12)


# --- expected directions / evaluations ----------------------------------------


def test_expected_directions_examples():
    eps = 3e-2
    inp = BoundInputs(eps / 3, eps, 3, 1.0, 1.0)
    a = math.asin(math.sqrt(3) / 4)
    ref = 1.0 / ((1 - math.cos(a)) / 2)
    assert k_max_bound(inp.f0_gap, eps) == 1
    d = expected_directions_upper_bound(inp)
    assert d.value == pytest.approx(ref, rel=1e-13) and not d.overflow
    assert expected_evals_upper_bound(inp).value == pytest.approx(3 * ref, rel=1e-13)
    assert inp.step_spans_domain

    zero = BoundInputs(0.0, 1e-4, 5, 2.0, 0.1)
    assert expected_directions_upper_bound(zero).value == 0.0
    assert expected_evals_upper_bound(zero).value == 0.0


def test_expected_directions_log_space_oracle():
    inp = BoundInputs(1.0, 1e-4, 12, 10.0, 1.0)
    got = expected_directions_upper_bound(inp).value
    alpha = worst_case_alpha(10.0, 1.0)
    ref = mpmath.exp(mpmath.log(30000) - log_cap_oracle(12, alpha))
    assert got == pytest.approx(float(ref), rel=1e-9)
    assert evals_per_direction(10.0, 1.0) == 12


def test_expected_evals_monotone_in_dimension():
    vals = [expected_evals_upper_bound(BoundInputs(2.0, 1e-3, n, 5.0, 0.5)).value for n in range(2, 80)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_bound_overflow_is_flagged():
    inp = BoundInputs(1.0, 1e-4, 5000, 1000.0, 1e-3)
    d = expected_directions_upper_bound(inp)
    assert d.overflow and math.isinf(d.value)
    e = expected_evals_upper_bound(inp)
    assert e.overflow and math.isinf(e.value)


def test_bound_inputs_validation():
    with pytest.raises(ValueError):
        BoundInputs(-1.0, 1e-4, 3, 1.0, 0.1)
    with pytest.raises(ValueError):
        BoundInputs(1.0, 0.0, 3, 1.0, 0.1)
    with pytest.raises(InvalidDimensionError):
        BoundInputs(1.0, 1e-4, 1, 1.0, 0.1)
    assert not BoundInputs(1.0, 1e-4, 3, 1.0, 0.1).step_spans_domain


def test_normalized_bound_below_asymptotic_constant():
    alpha = math.pi / 4
    vals = [normalized_direction_bound(n, alpha) for n in range(5, 42, 2)]
    assert vals[-1] <= 1.05 * asymptotic_direction_constant(alpha)
    # pre-limit ratio settles: the last few odd N change by under 1%
    assert abs(vals[-1] / vals[-2] - 1) < 1e-2


# --- Lipschitz radius ---------------------------------------------------------


def test_r_epsilon_examples():
    assert r_epsilon_lipschitz(3e-4, 1.0, 1.0) == pytest.approx(1e-4, rel=1e-15)
    assert r_epsilon_lipschitz(3.0, 1.0, 0.5) == 0.5
    c = np.array([2.0, 0.0])
    assert r_epsilon_lipschitz(6e-4, float(np.linalg.norm(c)), 1e9) == pytest.approx(1e-4, rel=1e-15)
    with pytest.raises(ValueError):
        r_epsilon_lipschitz(1.0, 0.0, 1.0)


def test_r_epsilon_gives_epsilon_third_variation():
    # f = c.x + sin(x1) is Lipschitz with L = |c| + 1
    c = np.array([1.5, -2.0, 0.5])
    L = float(np.linalg.norm(c)) + 1.0
    f = lambda x: float(c @ x + math.sin(x[0]))  # noqa: E731
    eps = 0.02
    r = r_epsilon_lipschitz(eps, L, 1.0)
    box = BoxDomain.cube(-1, 1, 3)
    rng = np.random.default_rng(0)
    for _ in range(1000):
        x = rng.uniform(-1 - r, 1 + r, 3)
        step = rng.standard_normal(3)
        y = x + rng.uniform(0, r) * step / np.linalg.norm(step)
        assert np.linalg.norm(x - y) <= r
        assert abs(f(x) - f(y)) <= eps / 3
    assert box.dim == 3


# --- cap hit ------------------------------------------------------------------


def test_cap_hit_examples():
    box = BoxDomain.cube(-10, 10, 2)
    r = 0.4
    x_k = np.array([0.0, 0.0])
    x_star = np.array([2.5 * r, 0.0])
    assert cap_hit_guarantee_check(x_k, x_star, r, np.array([1.0, 0.0]), box)
    far = np.array([10 * r, 0.0])
    assert not cap_hit_guarantee_check(x_k, far, r, np.array([0.0, 1.0]), box)


def test_cap_hit_preconditions():
    box = BoxDomain.cube(-1, 1, 2)
    with pytest.raises(DomainViolationError):
        cap_hit_guarantee_check([0, 0], [0.05, 0], 0.1, [1.0, 0.0], box)
    with pytest.raises(DomainViolationError):
        cap_hit_guarantee_check([0, 0], [5.0, 0], 0.1, [1.0, 0.0], box)
    with pytest.raises(DomainViolationError):
        cap_hit_guarantee_check([0, 0], [0.5, 0], 0.1, [2.0, 0.0], box)


@pytest.mark.parametrize("n", [2, 3, 5, 8])
def test_cap_hit_sweep(n):
    rng = np.random.default_rng(n)
    box = BoxDomain.cube(-5, 5, n)
    for _ in range(5):
        x_k = rng.uniform(-2, 2, n)
        x_star = rng.uniform(-2, 2, n)
        r = rng.uniform(0.05, 0.2) * np.linalg.norm(x_star - x_k)
        alpha = alpha_for(x_k, x_star, r)
        for _ in range(200):
            d = in_cap_direction(x_star - x_k, alpha, rng)
            assert angle_between(x_star - x_k, d) <= alpha + 1e-12
            assert cap_hit_guarantee_check(x_k, x_star, r, d, box)


# --- descent audit ------------------------------------------------------------


def test_descent_violations():
    eps = 3e-3
    assert descent_violations([1.0, 0.998, 0.996], 0.99, eps) == []
    bad = descent_violations([1.0, 0.9995], 0.0, eps)
    assert len(bad) == 1 and "step 1" in bad[0]
    assert descent_violations([1.0, 0.5, 0.0], 0.999, 1.0)  # more steps than k_max allows
    assert descent_violations([0.5], 1.0, eps)  # start below f*
