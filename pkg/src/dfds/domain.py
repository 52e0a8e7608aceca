"""Feasible sets: compact boxes and their R-extended neighbourhoods."""

from __future__ import annotations

import abc
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainViolationError, InvalidDimensionError


@dataclass(frozen=True)
class Chord:
    """Step parameters ``t`` with ``x + t d`` inside the set; ``t_lo <= 0 <= t_hi``."""

    t_lo: float
    t_hi: float
    empty: bool = False

    @property
    def length(self) -> float:
        return 0.0 if self.empty else self.t_hi - self.t_lo

    @classmethod
    def empty_chord(cls) -> "Chord":
        return cls(math.nan, math.nan, empty=True)


class ConvexDomain(abc.ABC):
    """Operations a compact convex feasible set must support.

    Only :class:`BoxDomain` is implemented; the solvers use nothing beyond
    these methods, so other convex bodies can be slotted in.
    """

    dim: int

    @abc.abstractmethod
    def contains(self, x) -> bool: ...

    @abc.abstractmethod
    def distance_to(self, x) -> float: ...

    @abc.abstractmethod
    def project(self, x) -> np.ndarray: ...

    @abc.abstractmethod
    def chord_interval(self, x, d) -> Chord: ...

    @abc.abstractmethod
    def sample_uniform(self, rng: np.random.Generator) -> np.ndarray: ...

    @abc.abstractmethod
    def diameter(self) -> float: ...

    def contains_extended(self, x, r: float) -> bool:
        """Membership in ``{x : distance_to(x) <= r}``."""
        if r < 0:
            raise DomainViolationError(f"extension radius must be nonnegative, got {r}")
        return self.distance_to(x) <= r


class BoxDomain(ConvexDomain):
    """Axis-aligned box ``lower <= x <= upper`` with nonempty interior."""

    def __init__(self, lower, upper):
        lower = np.array(lower, dtype=float).reshape(-1)
        upper = np.array(upper, dtype=float).reshape(-1)
        if lower.shape != upper.shape:
            raise InvalidDimensionError(f"bound shapes differ: {lower.shape} vs {upper.shape}")
        if lower.size == 0:
            raise InvalidDimensionError("box must have at least one coordinate")
        if not np.all(np.isfinite(lower)) or not np.all(np.isfinite(upper)):
            raise DomainViolationError("box bounds must be finite")
        if not np.all(lower < upper):
            raise DomainViolationError("box needs lower[i] < upper[i] for every coordinate")
        lower.setflags(write=False)
        upper.setflags(write=False)
        self.lower = lower
        self.upper = upper
        self.dim = lower.size

    @classmethod
    def cube(cls, lo: float, hi: float, dim: int) -> "BoxDomain":
        return cls(np.full(dim, lo), np.full(dim, hi))

    def __repr__(self) -> str:
        return f"BoxDomain(lower={self.lower.tolist()}, upper={self.upper.tolist()})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BoxDomain)
            and np.array_equal(self.lower, other.lower)
            and np.array_equal(self.upper, other.upper)
        )

    def __hash__(self) -> int:
        return hash((self.lower.tobytes(), self.upper.tobytes()))

    def _point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise DomainViolationError(f"expected a point of shape ({self.dim},), got {x.shape}")
        return x

    def contains(self, x) -> bool:
        x = self._point(x)
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))

    def project(self, x) -> np.ndarray:
        return np.clip(self._point(x), self.lower, self.upper)

    def distance_to(self, x) -> float:
        x = self._point(x)
        gap = np.maximum(self.lower - x, 0.0) + np.maximum(x - self.upper, 0.0)
        # hypot scales internally, so subnormal gaps do not square to zero
        return math.hypot(*gap)

    def distances_to(self, points: np.ndarray) -> np.ndarray:
        """Row-wise :meth:`distance_to` for an ``(n, dim)`` array."""
        gap = np.maximum(self.lower - points, 0.0) + np.maximum(points - self.upper, 0.0)
        return np.sqrt(np.einsum("ij,ij->i", gap, gap))

    def diameter(self) -> float:
        return float(np.linalg.norm(self.upper - self.lower))

    def chord_interval(self, x, d) -> Chord:
        """Slab-method chord ``{t : x + t d in box}`` through a point of the box."""
        x = self._point(x)
        d = np.asarray(d, dtype=float)
        if d.shape != x.shape:
            raise DomainViolationError(f"direction shape {d.shape} does not match {x.shape}")
        if not self.contains(x):
            raise DomainViolationError("chord_interval needs a base point inside the box")
        return self._chord(x, d)

    def _chord(self, x: np.ndarray, d: np.ndarray) -> Chord:
        # zero components impose no constraint because x is inside
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            a = (self.lower - x) / d
            b = (self.upper - x) / d
        zero = d == 0.0
        t_lo = float(np.where(zero, -np.inf, np.minimum(a, b)).max())
        t_hi = float(np.where(zero, np.inf, np.maximum(a, b)).min())
        if not (math.isfinite(t_lo) and math.isfinite(t_hi)):
            raise DomainViolationError("direction must be nonzero")
        if t_lo > t_hi:
            return Chord.empty_chord()
        return Chord(min(t_lo, 0.0), max(t_hi, 0.0))

    def sample_uniform(self, rng: np.random.Generator) -> np.ndarray:
        return self.lower + (self.upper - self.lower) * rng.random(self.dim)
