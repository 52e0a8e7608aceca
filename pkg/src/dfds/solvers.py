"""Random search solvers sharing one evaluation-budget contract.

* :func:`dfds_run` - depth-first directional search: walk each random
  direction in uniform steps of ``r0`` until an ``epsilon/3``-better point
  turns up or the walk leaves the ``r0``-extended box.
* :func:`prs_run` - pure random search over the box.
* :func:`ihr_run` - improving hit-and-run.

Every solver charges its search evaluations against ``cfg.budget``. The
optional local refinement of the final point (:func:`refine_local`) is
counted separately in ``RunRecord.refine_evals_used``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .domain import BoxDomain
from .errors import DomainViolationError
from .geometry import sample_unit_direction
from .objectives import Objective

_STEP_CHUNK = 64
_PRS_CHUNK = 1 << 14


class Termination(str, enum.Enum):
    BUDGET = "budget"
    DIRECTION_CAP = "direction_cap"
    REFINED = "refined"


@dataclass(frozen=True)
class SolverConfig:
    """Run parameters.

    ``r0`` is the DFDS step length; ``max_directions`` (M) is the number of
    consecutive failed directions (DFDS) or rejected candidates (IHR)
    tolerated before stopping, ``None`` meaning unbounded. ``refine_budget``
    of ``None`` means ``200 * dim``; 0 disables refinement.
    """

    budget: int
    epsilon: float = 1e-4
    r0: float = 1.0
    max_directions: Optional[int] = None
    seed: int = 0
    record_trace: bool = False
    refine_budget: Optional[int] = None

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.r0 <= 0:
            raise ValueError(f"r0 must be positive, got {self.r0}")
        if self.budget < 1:
            raise ValueError(f"budget must be >= 1, got {self.budget}")
        if self.max_directions is not None and self.max_directions < 1:
            raise ValueError("max_directions must be >= 1 or None")
        if self.refine_budget is not None and self.refine_budget < 0:
            raise ValueError("refine_budget must be >= 0")


@dataclass(frozen=True)
class RunRecord:
    algo: str
    x0: Optional[np.ndarray]
    f0: float
    x_final: np.ndarray
    f_final: float
    x_refined: np.ndarray
    f_refined: float
    evals_used: int
    refine_evals_used: int
    iterations: int
    terminated_by: Termination
    f_history: tuple[float, ...]
    trace: Optional[tuple[tuple[int, np.ndarray, float], ...]] = None


@dataclass(frozen=True)
class LineSearchResult:
    success: bool
    x: Optional[np.ndarray]
    f: Optional[float]
    evals: int
    points: int
    exhausted: bool


# ---------------------------------------------------------------------------
# DFDS
# ---------------------------------------------------------------------------


def _extended_steps(box: BoxDomain, x: np.ndarray, d: np.ndarray, r0: float):
    """Yield ``x + j r0 d`` for ``j = 1, 2, ...`` while inside the ``r0``-extended box."""
    j = 1
    while True:
        js = np.arange(j, j + _STEP_CHUNK, dtype=float) * r0
        pts = x + js[:, None] * d
        inside = box.distances_to(pts) <= r0
        for p, ok in zip(pts, inside):
            if not ok:
                return
            yield p
        j += _STEP_CHUNK


def dfds_line_search(
    obj: Objective,
    box: BoxDomain,
    x: np.ndarray,
    fx: float,
    d: np.ndarray,
    r0: float,
    epsilon: float,
    max_evals: Optional[int] = None,
) -> LineSearchResult:
    """One DFDS trial: step along ``d`` until ``f <= fx - epsilon/3`` or the walk exits.

    ``max_evals`` caps the evaluations spent; hitting it sets ``exhausted``.
    """
    threshold = fx - epsilon / 3.0
    evals = 0
    for p in _extended_steps(box, x, d, r0):
        if max_evals is not None and evals >= max_evals:
            return LineSearchResult(False, None, None, evals, evals, True)
        fp = obj(p)
        evals += 1
        if fp <= threshold:
            return LineSearchResult(True, p, fp, evals, evals, False)
    return LineSearchResult(False, None, None, evals, evals, False)


def dfds_run(
    obj: Objective,
    box: BoxDomain,
    cfg: SolverConfig,
    x0,
    direction_sampler: Optional[Callable[[], np.ndarray]] = None,
) -> RunRecord:
    """Depth-first directional search from ``x0``.

    ``direction_sampler`` replaces the uniform sphere sampler (for tests).
    The output is the projection of the last accepted iterate onto the box.
    """
    x = _feasible_start(box, x0)
    rng = np.random.default_rng(cfg.seed)
    sample = direction_sampler or (lambda: sample_unit_direction(box.dim, rng))
    start = obj.eval_count

    fx = obj(x)
    used = 1
    history = [fx]
    trace = [(0, x.copy(), fx)] if cfg.record_trace else None
    k = m = 0
    while True:
        if cfg.max_directions is not None and m >= cfg.max_directions:
            why = Termination.DIRECTION_CAP
            break
        if used >= cfg.budget:
            why = Termination.BUDGET
            break
        res = dfds_line_search(obj, box, x, fx, sample(), cfg.r0, cfg.epsilon, cfg.budget - used)
        used += res.evals
        if res.success:
            x, fx = res.x, res.f
            k += 1
            m = 0
            history.append(fx)
            if trace is not None:
                trace.append((k, x.copy(), fx))
        else:
            m += 1
    assert obj.eval_count - start == used

    x_final = box.project(x)
    if np.array_equal(x_final, x):
        f_final = fx
    else:
        f_final = obj(x_final)
    return _finish("dfds", obj, box, cfg, x0, history, x_final, f_final, used, start, k, why, trace)


# ---------------------------------------------------------------------------
# Baselines
# ---------------------------------------------------------------------------


def prs_run(obj: Objective, box: BoxDomain, cfg: SolverConfig) -> RunRecord:
    """Pure random search: ``budget`` uniform points, keep the first best."""
    rng = np.random.default_rng(cfg.seed)
    start = obj.eval_count
    best_x = None
    best_f = math.inf
    history: list[float] = []
    trace = [] if cfg.record_trace else None
    k = 0
    width = box.upper - box.lower
    done = 0
    while done < cfg.budget:
        n = min(_PRS_CHUNK, cfg.budget - done)
        pts = box.lower + width * rng.random((n, box.dim))
        for p in pts:
            fp = obj(p)
            if fp < best_f:
                if best_x is not None:
                    k += 1
                best_x, best_f = p, fp
                history.append(fp)
                if trace is not None:
                    trace.append((k, p.copy(), fp))
        done += n
    return _finish(
        "prs", obj, box, cfg, None, history, best_x, best_f, cfg.budget, start, k, Termination.BUDGET, trace
    )


def ihr_run(obj: Objective, box: BoxDomain, cfg: SolverConfig, x0) -> RunRecord:
    """Improving hit-and-run: uniform point on a random chord, kept if strictly better."""
    x = _feasible_start(box, x0)
    rng = np.random.default_rng(cfg.seed)
    start = obj.eval_count
    fx = obj(x)
    used = 1
    history = [fx]
    trace = [(0, x.copy(), fx)] if cfg.record_trace else None
    k = m = 0
    while True:
        if cfg.max_directions is not None and m >= cfg.max_directions:
            why = Termination.DIRECTION_CAP
            break
        if used >= cfg.budget:
            why = Termination.BUDGET
            break
        d = sample_unit_direction(box.dim, rng)
        chord = box._chord(x, d)
        t = rng.uniform(chord.t_lo, chord.t_hi)
        y = box.project(x + t * d)
        fy = obj(y)
        used += 1
        if fy < fx:
            x, fx = y, fy
            k += 1
            m = 0
            history.append(fx)
            if trace is not None:
                trace.append((k, x.copy(), fx))
        else:
            m += 1
    return _finish("ihr", obj, box, cfg, x0, history, x, fx, used, start, k, why, trace)


# ---------------------------------------------------------------------------
# Local refinement
# ---------------------------------------------------------------------------


def refine_local(
    obj: Objective,
    box: BoxDomain,
    x,
    refine_budget: Optional[int] = None,
    fx: Optional[float] = None,
    initial_step: Optional[float] = None,
    min_diameter: float = 1e-10,
) -> tuple[np.ndarray, float]:
    """Nelder-Mead descent kept inside the box by projecting every trial point.

    At most ``refine_budget`` evaluations (default ``200 * dim``), including
    the evaluation of ``x`` itself when ``fx`` is not supplied. The initial
    simplex edge is ``initial_step`` times each box side (default 2%).
    Never returns a point worse than ``x``.
    """
    x = _feasible_start(box, x)
    n = box.dim
    budget = 200 * n if refine_budget is None else refine_budget
    spent = 0

    def f(p):
        nonlocal spent
        spent += 1
        return obj(p)

    if fx is None:
        if budget < 1:
            raise ValueError("refine_local needs at least one evaluation when fx is not given")
        fx = f(x)
    if budget - spent < n + 1:
        return x, fx

    width = box.upper - box.lower
    step = (0.02 if initial_step is None else initial_step) * width
    simplex = [x]
    values = [fx]
    for i in range(n):
        v = x.copy()
        v[i] = v[i] + step[i] if v[i] + step[i] <= box.upper[i] else v[i] - step[i]
        simplex.append(v)
        values.append(f(v))
    sim = np.array(simplex)
    fs = np.array(values)

    while True:
        order = np.argsort(fs, kind="stable")
        sim, fs = sim[order], fs[order]
        if np.max(np.linalg.norm(sim[1:] - sim[0], axis=1)) < min_diameter:
            break
        if spent >= budget:
            break
        centroid = sim[:-1].mean(axis=0)
        xr = box.project(centroid + (centroid - sim[-1]))
        fr = f(xr)
        if fr < fs[0]:
            if spent >= budget:
                sim[-1], fs[-1] = xr, fr
                continue
            xe = box.project(centroid + 2.0 * (centroid - sim[-1]))
            fe = f(xe)
            if fe < fr:
                sim[-1], fs[-1] = xe, fe
            else:
                sim[-1], fs[-1] = xr, fr
            continue
        if fr < fs[-2]:
            sim[-1], fs[-1] = xr, fr
            continue
        if spent >= budget:
            if fr < fs[-1]:
                sim[-1], fs[-1] = xr, fr
            continue
        if fr < fs[-1]:
            xc = box.project(centroid + 0.5 * (xr - centroid))
        else:
            xc = box.project(centroid + 0.5 * (sim[-1] - centroid))
        fc = f(xc)
        if fc < min(fr, fs[-1]):
            sim[-1], fs[-1] = xc, fc
            continue
        if fr < fs[-1]:
            sim[-1], fs[-1] = xr, fr
        # shrink toward the best vertex, as far as the budget allows
        for i in range(1, n + 1):
            if spent >= budget:
                break
            sim[i] = sim[0] + 0.5 * (sim[i] - sim[0])
            fs[i] = f(sim[i])

    best = int(np.argmin(fs))
    if fs[best] <= fx:
        return sim[best].copy(), float(fs[best])
    return x, fx


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _feasible_start(box: BoxDomain, x0) -> np.ndarray:
    x = np.array(x0, dtype=float)
    if x.shape != (box.dim,):
        raise DomainViolationError(f"start point must have shape ({box.dim},), got {x.shape}")
    if not box.contains(x):
        raise DomainViolationError(f"start point {x.tolist()} is not in the feasible box")
    return x


def _finish(algo, obj, box, cfg, x0, history, x_final, f_final, used, start, k, why, trace) -> RunRecord:
    search_end = start + used
    if cfg.refine_budget == 0:
        x_ref, f_ref = x_final, f_final
    else:
        x_ref, f_ref = refine_local(obj, box, x_final, cfg.refine_budget, fx=f_final)
    return RunRecord(
        algo=algo,
        x0=None if x0 is None else np.array(x0, dtype=float),
        f0=history[0],
        x_final=np.asarray(x_final),
        f_final=float(f_final),
        x_refined=np.asarray(x_ref),
        f_refined=float(f_ref),
        evals_used=used,
        refine_evals_used=obj.eval_count - search_end,
        iterations=k,
        terminated_by=why,
        f_history=tuple(history),
        trace=None if trace is None else tuple(trace),
    )
