"""Counted black-box objectives and the benchmark suite."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .domain import BoxDomain
from .errors import DomainViolationError, InvalidDimensionError, NonFiniteObjectiveError

BENCHMARKS = ("six_hump_camel", "goldstein_price", "ackley", "levy", "alpine")
FIXED_DIM = {"six_hump_camel": 2, "goldstein_price": 2}


@dataclass(frozen=True)
class KnownOptimum:
    f_star: float
    minimizers: tuple[tuple[float, ...], ...] = ()


@dataclass
class Objective:
    """A deterministic evaluator that counts every call.

    Not safe for concurrent use; give each run its own instance.
    """

    dim: int
    evaluator: Callable[[np.ndarray], float]
    known_optimum: KnownOptimum | None = None
    name: str = "objective"
    eval_count: int = field(default=0, init=False)

    def evaluate(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise DomainViolationError(f"{self.name} expects shape ({self.dim},), got {x.shape}")
        self.eval_count += 1
        value = float(self.evaluator(x))
        if not math.isfinite(value):
            raise NonFiniteObjectiveError(f"{self.name} returned {value} at {x.tolist()}")
        return value

    __call__ = evaluate

    @property
    def f_star(self) -> float:
        if self.known_optimum is None:
            raise ValueError(f"{self.name} has no known optimum")
        return self.known_optimum.f_star


def is_epsilon_optimal(obj: Objective, f_found: float, epsilon: float) -> bool:
    """``f_found <= f* + epsilon``."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    return f_found <= obj.f_star + epsilon


# ---------------------------------------------------------------------------
# Benchmark functions
# ---------------------------------------------------------------------------


def six_hump_camel(x):
    x1, x2 = x
    return (4.0 - 2.1 * x1**2 + x1**4 / 3.0) * x1**2 + x1 * x2 + (-4.0 + 4.0 * x2**2) * x2**2


def goldstein_price(x):
    x1, x2 = x
    a = 1.0 + (x1 + x2 + 1.0) ** 2 * (
        19.0 - 14.0 * x1 + 3.0 * x1**2 - 14.0 * x2 + 6.0 * x1 * x2 + 3.0 * x2**2
    )
    b = 30.0 + (2.0 * x1 - 3.0 * x2) ** 2 * (
        18.0 - 32.0 * x1 + 12.0 * x1**2 + 48.0 * x2 - 36.0 * x1 * x2 + 27.0 * x2**2
    )
    return a * b


def ackley(x):
    x = np.asarray(x, dtype=float)
    return (
        -20.0 * math.exp(-0.2 * math.sqrt(float(np.mean(x * x))))
        - math.exp(float(np.mean(np.cos(2.0 * math.pi * x))))
        + 20.0
        + math.exp(1.0)
    )


def levy(x):
    y = 1.0 + (np.asarray(x, dtype=float) - 1.0) / 4.0
    head = math.sin(math.pi * y[0]) ** 2
    body = float(np.sum((y[:-1] - 1.0) ** 2 * (1.0 + 10.0 * np.sin(math.pi * y[:-1] + 1.0) ** 2)))
    tail = (y[-1] - 1.0) ** 2 * (1.0 + math.sin(2.0 * math.pi * y[-1]) ** 2)
    return head + body + tail


def alpine(x):
    """Alpine on ``[0, 10]^N``, extended outside the box by clamping into it.

    Beyond 10 the raw formula keeps oscillating with growing amplitude and
    dips below the in-box minimum within one step of the boundary (already
    for N = 4 at the standard step length), which would let a search that
    probes the extended box settle outside the box.
    """
    return alpine_unclamped(np.clip(np.asarray(x, dtype=float), 0.0, 10.0))


def alpine_unclamped(x):
    # |x| keeps the formula defined a little below 0
    x = np.asarray(x, dtype=float)
    return -float(np.prod(np.sqrt(np.abs(x)) * np.sin(x)))


def _alpine_peak() -> float:
    # argmax of sqrt(t) sin t near 7.9: root of its derivative, sin t + 2 t cos t
    return float(brentq(lambda t: math.sin(t) + 2.0 * t * math.cos(t), 7.5, 8.5, xtol=1e-15))


# Exact minimizer of the six-hump camel.
_CAMEL_MIN = (0.08984201368301331, -0.7126564032704135)
_ALPINE_PEAK = _alpine_peak()


def make_benchmark(name: str, dim: int = 2, clamp_alpine: bool = True) -> tuple[Objective, BoxDomain]:
    """Fresh counted objective and feasible box for a named benchmark.

    ``clamp_alpine=False`` evaluates the raw Alpine formula outside its box.
    """
    if name not in BENCHMARKS:
        raise ValueError(f"unknown benchmark {name!r}; choose from {', '.join(BENCHMARKS)}")
    if name in FIXED_DIM and dim != FIXED_DIM[name]:
        raise InvalidDimensionError(f"{name} is defined only for dim={FIXED_DIM[name]}, got {dim}")
    if dim < 1:
        raise InvalidDimensionError(f"dim must be >= 1, got {dim}")

    if name == "six_hump_camel":
        opt = KnownOptimum(
            float(six_hump_camel(_CAMEL_MIN)),
            (_CAMEL_MIN, (-_CAMEL_MIN[0], -_CAMEL_MIN[1])),
        )
        return Objective(2, six_hump_camel, opt, name), BoxDomain.cube(-5.0, 5.0, 2)
    if name == "goldstein_price":
        return Objective(2, goldstein_price, KnownOptimum(3.0, ((0.0, -1.0),)), name), BoxDomain.cube(-2.0, 2.0, 2)
    if name == "ackley":
        opt = KnownOptimum(0.0, ((0.0,) * dim,))
        return Objective(dim, ackley, opt, name), BoxDomain.cube(-10.0, 10.0, dim)
    if name == "levy":
        opt = KnownOptimum(0.0, ((1.0,) * dim,))
        return Objective(dim, levy, opt, name), BoxDomain.cube(-10.0, 10.0, dim)
    x_star = (_ALPINE_PEAK,) * dim
    opt = KnownOptimum(alpine(np.array(x_star)), (x_star,))
    return Objective(dim, alpine if clamp_alpine else alpine_unclamped, opt, name), BoxDomain.cube(0.0, 10.0, dim)
