"""Executable forms of the DFDS iteration, success and complexity bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domain import ConvexDomain
from .errors import DomainViolationError, InvalidDimensionError
from .geometry import cap_probability_closed_form


@dataclass(frozen=True)
class BoundInputs:
    """Problem constants entering the complexity bounds.

    ``f0_gap`` is ``f(x0) - f*``, ``diameter`` the diameter of the feasible set.
    """

    f0_gap: float
    epsilon: float
    dim: int
    diameter: float
    r_eps: float

    def __post_init__(self):
        if self.f0_gap < 0:
            raise ValueError(f"f0_gap must be nonnegative, got {self.f0_gap}")
        if self.epsilon <= 0 or self.diameter <= 0 or self.r_eps <= 0:
            raise ValueError("epsilon, diameter and r_eps must be positive")
        if self.dim < 2:
            raise InvalidDimensionError(f"dim must be >= 2, got {self.dim}")

    @property
    def step_spans_domain(self) -> bool:
        return self.r_eps >= self.diameter


@dataclass(frozen=True)
class BoundValue:
    value: float
    overflow: bool = False

    def __float__(self) -> float:
        return self.value


def k_max_bound(f0_gap: float, epsilon: float) -> int:
    """Largest possible number of accepted iterates, ``floor(gap / (epsilon/3))``."""
    if f0_gap < 0:
        raise ValueError(f"f0_gap must be nonnegative, got {f0_gap}")
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    return math.floor(3.0 * f0_gap / epsilon)


def success_probability_lower_bound(p: float, M: int) -> float:
    """``1 - (1 - p)^M``, stable for small ``p``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if M < 1:
        raise ValueError(f"M must be >= 1, got {M}")
    if p == 1.0:
        return 1.0
    return -math.expm1(M * math.log1p(-p))


def worst_case_alpha(diameter: float, r_eps: float) -> float:
    """Smallest cap angle reachable from any iterate: ``arcsin(sqrt3 r / (2 (D0 + r)))``."""
    if diameter <= 0 or r_eps <= 0:
        raise ValueError("diameter and r_eps must be positive")
    return math.asin(math.sqrt(3.0) * r_eps / (2.0 * (diameter + r_eps)))


def expected_directions_upper_bound(inp: BoundInputs) -> BoundValue:
    """``k_max / p(N, alpha_min)``: expected directions until a near-optimal iterate."""
    k = k_max_bound(inp.f0_gap, inp.epsilon)
    if k == 0:
        return BoundValue(0.0)
    p = cap_probability_closed_form(inp.dim, worst_case_alpha(inp.diameter, inp.r_eps)).value
    if p == 0.0:
        return BoundValue(math.inf, overflow=True)
    value = k / p
    return BoundValue(value, overflow=math.isinf(value))


def evals_per_direction(diameter: float, r_eps: float) -> int:
    """Most evaluations one line search can spend, ``floor(D0 / r) + 2``."""
    return math.floor(diameter / r_eps) + 2


def expected_evals_upper_bound(inp: BoundInputs) -> BoundValue:
    dirs = expected_directions_upper_bound(inp)
    if dirs.value == 0.0:
        return dirs
    value = dirs.value * evals_per_direction(inp.diameter, inp.r_eps)
    return BoundValue(value, overflow=dirs.overflow or math.isinf(value))


def normalized_direction_bound(dim: int, alpha: float) -> float:
    """``(1/p) * sin^e(alpha) / sqrt(N)`` with ``e = N`` (even) or ``N - 1`` (odd).

    For large ``N`` this approaches at most ``sqrt(2 pi) / cos(alpha)``
    (:func:`asymptotic_direction_constant`).
    """
    p = cap_probability_closed_form(dim, alpha).value
    e = dim if dim % 2 == 0 else dim - 1
    return math.exp(e * math.log(math.sin(alpha)) - 0.5 * math.log(dim) - math.log(p))


def asymptotic_direction_constant(alpha: float) -> float:
    return math.sqrt(2.0 * math.pi) / math.cos(alpha)


def r_epsilon_lipschitz(epsilon: float, L: float, R: float) -> float:
    """Step length satisfying the ``epsilon/3`` ball condition for an ``L``-Lipschitz f."""
    if epsilon <= 0 or L <= 0 or R <= 0:
        raise ValueError("epsilon, L and R must be positive")
    return min(R, epsilon / (3.0 * L))


def cap_hit_guarantee_check(x_k, x_star, r_eps: float, d, box: ConvexDomain) -> bool:
    """Does the walk ``x_k + j r_eps d`` land in the closed ball around ``x_star``?

    Steps ``j = 1, 2, ...`` are taken while inside the ``r_eps``-extended set.
    """
    x_k = np.asarray(x_k, dtype=float)
    x_star = np.asarray(x_star, dtype=float)
    d = np.asarray(d, dtype=float)
    if r_eps <= 0:
        raise DomainViolationError("r_eps must be positive")
    if np.linalg.norm(x_star - x_k) <= r_eps:
        raise DomainViolationError("x_k already lies in the ball around x_star")
    if not box.contains_extended(x_star, r_eps):
        raise DomainViolationError("x_star must lie in the extended set")
    if abs(np.linalg.norm(d) - 1.0) > 1e-9:
        raise DomainViolationError("d must be a unit vector")
    j = 1
    while True:
        p = x_k + (j * r_eps) * d
        if not box.contains_extended(p, r_eps):
            return False
        if np.linalg.norm(p - x_star) <= r_eps:
            return True
        j += 1


def descent_violations(f_history, f_star: float, epsilon: float) -> list[str]:
    """Check an accepted-iterate value sequence against the DFDS descent guarantees.

    Every step must drop by at least ``epsilon/3`` and the number of steps
    may not exceed :func:`k_max_bound` of the starting gap.
    """
    problems = []
    f_history = list(f_history)
    k = len(f_history) - 1
    gap = f_history[0] - f_star
    if gap < 0:
        problems.append(f"start value {f_history[0]} lies below f* = {f_star}")
    elif k > k_max_bound(gap, epsilon):
        problems.append(f"{k} iterations exceed k_max = {k_max_bound(gap, epsilon)}")
    for i, (a, b) in enumerate(zip(f_history, f_history[1:]), start=1):
        if not b <= a - epsilon / 3.0:
            problems.append(f"step {i} decreased f by {a - b}, less than epsilon/3")
    return problems
