"""Unit-sphere sampling and spherical-cap probabilities.

The cap of colatitude ``alpha`` around a fixed axis on the sphere
``S^{N-1}`` holds a fraction ``p(N, alpha)`` of the sphere's surface area.
It is available in three independent ways: parity-cased closed forms,
adaptive quadrature of the defining integral, and Monte Carlo counting.
A cheaper lower bound valid on ``(0, pi/2)`` is provided as well.
"""

from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateVectorError,
    DomainViolationError,
    InvalidDimensionError,
    QuadratureError,
)

# Redraw threshold for the Gaussian norm; a draw below it is measure-zero underflow.
_MIN_NORM = 1e-300
_MC_BATCH = 1 << 16
# Below this cap angle the closed forms are summed as series tails.
_TAIL_ALPHA = 1.35


class CapMethod(str, enum.Enum):
    CLOSED_FORM = "closed_form"
    LOWER_BOUND = "lower_bound"
    QUADRATURE = "quadrature"
    MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class CapSpec:
    """A spherical cap on ``S^{dim-1}`` with half-opening ``alpha``."""

    dim: int
    alpha: float

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise InvalidDimensionError(f"cap dimension must be an integer >= 2, got {self.dim}")
        if not (0.0 <= self.alpha <= math.pi):
            raise DomainViolationError(f"alpha must lie in [0, pi], got {self.alpha}")


@dataclass(frozen=True)
class CapProbability:
    value: float
    method: CapMethod
    std_error: float = 0.0

    def __float__(self) -> float:
        return self.value


# ---------------------------------------------------------------------------
# Sampling and angles
# ---------------------------------------------------------------------------


def sample_unit_direction(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Draw a direction uniformly distributed on ``S^{dim-1}``.

    Uses ``dim`` standard normal draws per call, normalized to unit length.
    """
    if dim < 1:
        raise InvalidDimensionError(f"dim must be >= 1, got {dim}")
    while True:
        z = rng.standard_normal(dim)
        norm = math.sqrt(float(z @ z))
        if norm >= _MIN_NORM:
            return z / norm


def sample_unit_directions(dim: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` uniform directions as the rows of an ``(n, dim)`` array.

    Consumes the stream exactly as ``n`` successive calls to
    :func:`sample_unit_direction` would (barring redraws).
    """
    if dim < 1:
        raise InvalidDimensionError(f"dim must be >= 1, got {dim}")
    z = rng.standard_normal((n, dim))
    norms = np.sqrt(np.einsum("ij,ij->i", z, z))
    for i in np.flatnonzero(norms < _MIN_NORM):
        z[i] = sample_unit_direction(dim, rng)
        norms[i] = 1.0
    return z / norms[:, None]


def angle_between(u, v) -> float:
    """Included angle between two nonzero vectors, in ``[0, pi]``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise DomainViolationError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise DegenerateVectorError("angle is undefined for a zero vector")
    uh = u / nu
    vh = v / nv
    # Half-angle form; equals arccos(clip(<uh, vh>)) but stays accurate near 0 and pi.
    return float(2.0 * math.atan2(np.linalg.norm(uh - vh), np.linalg.norm(uh + vh)))


def alpha_for(x_k, x_star, r_eps: float) -> float:
    """Cap angle ``arcsin(sqrt(3) r_eps / (2 |x_star - x_k|))`` seen from ``x_k``."""
    if r_eps <= 0:
        raise DomainViolationError(f"r_eps must be positive, got {r_eps}")
    dist = float(np.linalg.norm(np.asarray(x_star, dtype=float) - np.asarray(x_k, dtype=float)))
    if dist <= r_eps:
        raise DomainViolationError(
            f"|x_star - x_k| = {dist} does not exceed r_eps = {r_eps}; x_k is inside the ball"
        )
    return math.asin(math.sqrt(3.0) * r_eps / (2.0 * dist))


def sphere_surface_area(dim_minus_1: int) -> float:
    """Surface area of the unit sphere ``S^{dim_minus_1}`` in ``R^{dim_minus_1 + 1}``.

    ``S^0`` is the two-point set and gets counting measure 2, which is also
    what the Gamma formula gives there.
    """
    if dim_minus_1 < 0:
        raise InvalidDimensionError(f"sphere dimension must be >= 0, got {dim_minus_1}")
    if dim_minus_1 == 0:
        return 2.0
    n = dim_minus_1 + 1
    return math.exp(math.log(2.0) + 0.5 * n * math.log(math.pi) - math.lgamma(0.5 * n))


def _area_ratio(dim: int) -> float:
    # w_{N-2} / w_{N-1} = Gamma(N/2) / (sqrt(pi) Gamma((N-1)/2))
    return math.exp(math.lgamma(0.5 * dim) - math.lgamma(0.5 * (dim - 1)) - 0.5 * math.log(math.pi))


# ---------------------------------------------------------------------------
# Closed forms and bounds
# ---------------------------------------------------------------------------


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


def _series_tail(first: float, ratio, start: int, skip: int) -> float:
    """Sum terms ``t > skip`` of the series ``term_t = term_{t-1} * ratio(t)``."""
    term = first
    acc = 0.0
    t = start
    while True:
        if t > skip:
            acc += term
            # ratio(t) <= sin^2 alpha < 1, so the remainder is bounded geometrically
            q = ratio(t + 1)
            if term * q / (1.0 - q) <= 1e-17 * acc or term == 0.0:
                return acc
        t += 1
        term *= ratio(t)


def cap_probability_closed_form(dim: int, alpha: float) -> CapProbability:
    """Exact fraction of ``S^{dim-1}`` within angle ``alpha`` of an axis.

    Even dimensions use ``(alpha - sum_t (2t)!!/(2t+1)!! cos a sin^{2t+1} a) / pi``,
    odd dimensions ``(1 - cos a (1 + sum_t (2t-1)!!/(2t)!! sin^{2t} a)) / 2``.
    Terms come from their ratio recurrence; no double factorial is formed.

    Caps wider than a hemisphere are taken as ``1 - p(N, pi - alpha)``.
    For ``alpha < 1.35`` the finite sums nearly cancel the leading term, so the
    same quantity is summed as the tail of the power series of
    ``arcsin(s)/sqrt(1-s^2)`` (even) or ``1/sqrt(1-s^2)`` (odd) instead, which
    keeps full relative precision for tiny caps.
    """
    cap = CapSpec(dim, alpha)
    n, a = cap.dim, cap.alpha
    if a == 0.0:
        return CapProbability(0.0, CapMethod.CLOSED_FORM)
    if a == math.pi:
        return CapProbability(1.0, CapMethod.CLOSED_FORM)
    if a > 0.5 * math.pi:
        # complement of the opposite cap; keeps p monotone up to 1
        return CapProbability(_clamp01(1.0 - cap_probability_closed_form(n, math.pi - a).value), CapMethod.CLOSED_FORM)
    if n == 2:
        return CapProbability(_clamp01(a / math.pi), CapMethod.CLOSED_FORM)
    if n == 3:
        return CapProbability(_clamp01(math.sin(0.5 * a) ** 2), CapMethod.CLOSED_FORM)

    s = math.sin(a)
    c = math.cos(a)
    s2 = s * s
    small = a < _TAIL_ALPHA
    if n % 2 == 0:
        last = n // 2 - 2
        ratio = lambda t: (2.0 * t) / (2.0 * t + 1.0) * s2  # noqa: E731
        if small:
            value = c * _series_tail(s, ratio, 0, last) / math.pi
        else:
            term = c * s
            acc = term
            for t in range(1, last + 1):
                term *= ratio(t)
                acc += term
            value = (a - acc) / math.pi
    else:
        last = (n - 3) // 2
        ratio = lambda t: (2.0 * t - 1.0) / (2.0 * t) * s2  # noqa: E731
        if small:
            value = 0.5 * c * _series_tail(1.0, ratio, 0, last)
        else:
            term = 1.0
            acc = 1.0
            for t in range(1, last + 1):
                term *= ratio(t)
                acc += term
            value = 0.5 * (1.0 - c * acc)
    return CapProbability(_clamp01(value), CapMethod.CLOSED_FORM)


def log_double_factorial(n: int) -> float:
    """``log(n!!)`` for integer ``n >= -1`` (with ``(-1)!! = 0!! = 1``)."""
    if n < -1:
        raise ValueError(f"double factorial undefined for n={n}")
    if n <= 0:
        return 0.0
    if n % 2 == 0:
        k = n // 2
        return k * math.log(2.0) + math.lgamma(k + 1)
    k = (n + 1) // 2
    return math.lgamma(2 * k + 1) - k * math.log(2.0) - math.lgamma(k + 1)


def cap_probability_lower_bound(dim: int, alpha: float) -> CapProbability:
    """Parity-specific lower bound on the cap probability, for ``dim >= 4``.

    even: (N-2)!! / (pi N (N-3)!!) cos a sin^N a
    odd:  (N-2)!! / (2 (N-1)!!)    cos a sin^{N-1} a
    """
    if int(dim) != dim or dim < 4:
        raise InvalidDimensionError(f"lower bound requires dim >= 4, got {dim}")
    if not (0.0 < alpha < 0.5 * math.pi):
        raise DomainViolationError(f"lower bound requires alpha in (0, pi/2), got {alpha}")
    log_s = math.log(math.sin(alpha))
    log_c = math.log(math.cos(alpha))
    if dim % 2 == 0:
        log_pref = log_double_factorial(dim - 2) - math.log(math.pi * dim) - log_double_factorial(dim - 3)
        log_val = log_pref + log_c + dim * log_s
    else:
        log_pref = log_double_factorial(dim - 2) - math.log(2.0) - log_double_factorial(dim - 1)
        log_val = log_pref + log_c + (dim - 1) * log_s
    return CapProbability(math.exp(log_val), CapMethod.LOWER_BOUND)


# ---------------------------------------------------------------------------
# Quadrature oracle
# ---------------------------------------------------------------------------

# 15-point Kronrod rule with its embedded 7-point Gauss rule on [-1, 1].
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
_WEIGHTS_K = np.concatenate([_WK[:-1], _WK[::-1]])
_WEIGHTS_G = np.zeros(15)
_WEIGHTS_G[[1, 3, 5]] = _WG[:3]
_WEIGHTS_G[[13, 11, 9]] = _WG[:3]
_WEIGHTS_G[7] = _WG[3]


def _gk15(f, a: float, b: float) -> tuple[float, float]:
    half = 0.5 * (b - a)
    fx = f(0.5 * (a + b) + half * _NODES)
    k = half * float(fx @ _WEIGHTS_K)
    g = half * float(fx @ _WEIGHTS_G)
    return k, abs(k - g)


def adaptive_quad(f, a: float, b: float, tol: float = 1e-12, max_panels: int = 10_000) -> tuple[float, float]:
    """Globally adaptive Gauss-Kronrod integration of a vectorized ``f``.

    Bisects the panel with the largest error estimate until the summed
    estimate is at most ``tol``. Returns ``(integral, error_estimate)``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if a == b:
        return 0.0, 0.0
    val, err = _gk15(f, a, b)
    heap = [(-err, a, b, val)]
    total_val, total_err = val, err
    while total_err > tol:
        if len(heap) >= max_panels:
            raise QuadratureError(
                f"no convergence within {max_panels} panels (error estimate {total_err:.3g} > {tol:.3g})"
            )
        neg_err, lo, hi, v = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        v1, e1 = _gk15(f, lo, mid)
        v2, e2 = _gk15(f, mid, hi)
        heapq.heappush(heap, (-e1, lo, mid, v1))
        heapq.heappush(heap, (-e2, mid, hi, v2))
        total_val += v1 + v2 - v
        total_err += e1 + e2 + neg_err
    # re-sum to shed drift from the running updates
    return math.fsum(item[3] for item in heap), math.fsum(-item[0] for item in heap)


def cap_probability_quadrature(dim: int, alpha: float, tol: float = 1e-12) -> CapProbability:
    """Cap probability from ``(w_{N-2}/w_{N-1}) * integral_0^alpha sin^{N-2}``.

    The absolute error of the returned probability is at most ``tol``.
    """
    cap = CapSpec(dim, alpha)
    ratio = _area_ratio(cap.dim)
    power = cap.dim - 2
    integral, _ = adaptive_quad(lambda th: np.sin(th) ** power, 0.0, cap.alpha, tol=tol / ratio)
    return CapProbability(_clamp01(ratio * integral), CapMethod.QUADRATURE)


def integral_recurrence(n: int, alpha: float) -> float:
    """``integral_0^alpha sin^n(theta) d theta`` by the two-term reduction formula.

    ``I_n = (n-1)/n I_{n-2} - cos(a) sin^{n-1}(a) / n`` from ``I_0 = a`` or
    ``I_1 = 1 - cos a``.
    """
    if n < 0:
        raise InvalidDimensionError(f"n must be >= 0, got {n}")
    if not (0.0 <= alpha <= math.pi):
        raise DomainViolationError(f"alpha must lie in [0, pi], got {alpha}")
    s, c = math.sin(alpha), math.cos(alpha)
    if n % 2 == 0:
        val, k = alpha, 0
    else:
        val, k = 2.0 * math.sin(0.5 * alpha) ** 2, 1
    while k < n:
        k += 2
        val = (k - 1) / k * val - c * s ** (k - 1) / k
    return val


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------


def cap_probability_monte_carlo(dim: int, alpha: float, samples: int, rng: np.random.Generator) -> CapProbability:
    """Fraction of uniform directions within ``alpha`` of the first axis."""
    cap = CapSpec(dim, alpha)
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    hits = 0
    remaining = samples
    while remaining:
        batch = min(remaining, _MC_BATCH)
        d = sample_unit_directions(cap.dim, batch, rng)
        rest = np.sqrt(np.einsum("ij,ij->i", d[:, 1:], d[:, 1:]))
        hits += int(np.count_nonzero(np.arctan2(rest, d[:, 0]) <= cap.alpha))
        remaining -= batch
    p_hat = hits / samples
    return CapProbability(p_hat, CapMethod.MONTE_CARLO, math.sqrt(p_hat * (1.0 - p_hat) / samples))
