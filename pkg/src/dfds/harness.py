"""Benchmark orchestration: budget-matched multi-seed runs and their outputs.

Seeds come from ``SeedSequence([base_seed, stream_id, run])``. Each
algorithm owns a stream id, and the start points have their own, so
adding or dropping an algorithm never changes another one's draws. DFDS
and IHR share the start point of a run index; PRS needs none.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .geometry import cap_probability_closed_form, cap_probability_lower_bound
from .objectives import BENCHMARKS, FIXED_DIM, is_epsilon_optimal, make_benchmark
from .solvers import RunRecord, SolverConfig, dfds_run, ihr_run, prs_run

ALGOS = ("dfds", "ihr", "prs")
_STREAM_ID = {"dfds": 0, "prs": 1, "ihr": 2}
_X0_STREAM = 1000

CSV_COLUMNS = (
    "problem", "dim", "algo", "budget_level", "n_feval", "run", "seed",
    "evals_used", "f_final", "f_refined", "success",
)

# Standard benchmark instances, run by ``bench --full``.
FULL_TABLES = {
    "goldstein_price": (2,),
    "six_hump_camel": (2,),
    "ackley": (2,) + tuple(range(5, 13)),
    "levy": (2,) + tuple(range(5, 15)),
    "alpine": tuple(range(2, 9)),
}


class BudgetLevel(str, enum.Enum):
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"


_BASE_BUDGET = {BudgetLevel.LOW: 125, BudgetLevel.MEDIUM: 250, BudgetLevel.HIGH: 500}
_FIXED_R0 = {"six_hump_camel": 0.5, "goldstein_price": 0.2}


def default_parameters(problem: str, dim: int, budget_level) -> tuple[int, float]:
    """Standard ``(n_feval, r0)`` for a benchmark instance and budget level."""
    if problem not in BENCHMARKS:
        raise ValueError(f"unknown problem {problem!r}")
    level = BudgetLevel(budget_level)
    if problem in FIXED_DIM:
        if dim != FIXED_DIM[problem]:
            raise ValueError(f"{problem} is defined only for dim={FIXED_DIM[problem]}")
        return _BASE_BUDGET[level], _FIXED_R0[problem]
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    scale = 5 if problem == "alpine" else 1
    return scale * _BASE_BUDGET[level] * 2**dim, math.sqrt(dim) / (2.0 * math.sqrt(2.0))


@dataclass(frozen=True)
class ExperimentSpec:
    """One benchmark instance run by several algorithms.

    ``n_feval`` overrides the budget of ``budget_level``; the level still
    labels the output. ``refine_budget`` of ``None`` takes the solver default.
    """

    problem: str
    dim: int = 2
    algos: tuple[str, ...] = ALGOS
    budget_level: str = "high"
    n_feval: Optional[int] = None
    runs: int = 20
    base_seed: int = 0
    epsilon: float = 1e-4
    r0_override: Optional[float] = None
    refine_budget: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "algos", tuple(self.algos))
        object.__setattr__(self, "budget_level", BudgetLevel(self.budget_level).value)
        if self.problem not in BENCHMARKS:
            raise ValueError(f"unknown problem {self.problem!r}")
        bad = [a for a in self.algos if a not in ALGOS]
        if bad or not self.algos:
            raise ValueError(f"algos must be a nonempty subset of {ALGOS}, got {self.algos}")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.n_feval is not None and self.n_feval < 1:
            raise ValueError("n_feval must be >= 1")
        if not 0 <= self.base_seed < 2**64:
            raise ValueError("base_seed must be a 64-bit unsigned integer")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.r0_override is not None and self.r0_override <= 0:
            raise ValueError("r0_override must be positive")

    def resolved(self) -> tuple[int, float]:
        n, r0 = default_parameters(self.problem, self.dim, self.budget_level)
        return (self.n_feval or n, self.r0_override or r0)

    @classmethod
    def from_dict(cls, cfg: dict) -> "ExperimentSpec":
        known = cls.__dataclass_fields__
        unknown = set(cfg) - set(known)
        if unknown:
            raise ValueError(f"unknown experiment fields: {sorted(unknown)}")
        return cls(**cfg)


@dataclass(frozen=True)
class RunSummary:
    """One CSV row; ``error`` is set (and the numbers are ``None``) for failed runs."""

    problem: str
    dim: int
    algo: str
    budget_level: str
    n_feval: int
    run: int
    seed: int
    evals_used: Optional[int]
    f_final: Optional[float]
    f_refined: Optional[float]
    success: bool
    error: Optional[str] = None


@dataclass(frozen=True)
class AggregateStats:
    success_rate: float
    f_best: Optional[float]
    per_run: tuple[RunSummary, ...]

    @property
    def errors(self) -> int:
        return sum(r.error is not None for r in self.per_run)

    @classmethod
    def from_runs(cls, runs: Sequence[RunSummary]) -> "AggregateStats":
        runs = tuple(runs)
        ok = [r.f_refined for r in runs if r.error is None]
        return cls(
            success_rate=sum(r.success for r in runs) / len(runs),
            f_best=min(ok) if ok else None,
            per_run=runs,
        )


@dataclass(frozen=True)
class ExperimentResult:
    spec: ExperimentSpec
    n_feval: int
    r0: float
    stats: dict[str, AggregateStats] = field(default_factory=dict)
    records: Optional[dict[str, tuple[Optional[RunRecord], ...]]] = field(default=None, compare=False, repr=False)

    @property
    def errors(self) -> int:
        return sum(s.errors for s in self.stats.values())

    def to_dict(self) -> dict:
        return {
            "problem": self.spec.problem,
            "dim": self.spec.dim,
            "budget": self.spec.budget_level,
            "n_feval": self.n_feval,
            "r0": self.r0,
            "spec": asdict(self.spec),
            "algos": {
                algo: {
                    "sr": s.success_rate,
                    "f_best": s.f_best,
                    "runs": [asdict(r) for r in s.per_run],
                }
                for algo, s in self.stats.items()
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentResult":
        spec = dict(d["spec"])
        spec["algos"] = tuple(spec["algos"])
        stats = {
            algo: AggregateStats(cell["sr"], cell["f_best"], tuple(RunSummary(**r) for r in cell["runs"]))
            for algo, cell in d["algos"].items()
        }
        return cls(ExperimentSpec(**spec), d["n_feval"], d["r0"], stats)


def run_seed(base_seed: int, stream: int, run: int) -> int:
    return int(np.random.SeedSequence([base_seed, stream, run]).generate_state(1, np.uint64)[0])


def _one_run(spec: ExperimentSpec, algo: str, run: int, n_feval: int, r0: float):
    seed = run_seed(spec.base_seed, _STREAM_ID[algo], run)
    row = dict(
        problem=spec.problem, dim=spec.dim, algo=algo, budget_level=spec.budget_level,
        n_feval=n_feval, run=run, seed=seed,
    )
    try:
        obj, box = make_benchmark(spec.problem, spec.dim)
        cfg = SolverConfig(budget=n_feval, epsilon=spec.epsilon, r0=r0, seed=seed, refine_budget=spec.refine_budget)
        if algo == "prs":
            rec = prs_run(obj, box, cfg)
        else:
            x0 = box.sample_uniform(np.random.default_rng(run_seed(spec.base_seed, _X0_STREAM, run)))
            rec = (dfds_run if algo == "dfds" else ihr_run)(obj, box, cfg, x0)
        if rec.evals_used > n_feval:
            raise RuntimeError(f"{algo} used {rec.evals_used} evaluations of a budget of {n_feval}")
    except Exception as exc:  # recorded, never raised: one bad run must not sink a table
        return RunSummary(**row, evals_used=None, f_final=None, f_refined=None, success=False,
                          error=f"{type(exc).__name__}: {exc}"), None
    summary = RunSummary(
        **row,
        evals_used=rec.evals_used,
        f_final=rec.f_final,
        f_refined=rec.f_refined,
        success=is_epsilon_optimal(obj, rec.f_refined, spec.epsilon),
    )
    return summary, rec


def _task(args):
    return _one_run(*args)


def run_experiment(spec: ExperimentSpec, workers: int = 1, keep_records: bool = False) -> ExperimentResult:
    """Run every (algorithm, run index) pair of ``spec`` and aggregate.

    With ``workers > 1`` runs go to a process pool; results are collected
    in (algorithm, run) order, so the output does not depend on scheduling.
    """
    n_feval, r0 = spec.resolved()
    tasks = [(spec, algo, i, n_feval, r0) for algo in spec.algos for i in range(spec.runs)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(_task, tasks))
    else:
        out = [_task(t) for t in tasks]

    stats, records = {}, {}
    for j, algo in enumerate(spec.algos):
        chunk = out[j * spec.runs:(j + 1) * spec.runs]
        stats[algo] = AggregateStats.from_runs([s for s, _ in chunk])
        records[algo] = tuple(r for _, r in chunk)
    return ExperimentResult(spec, n_feval, r0, stats, records if keep_records else None)


def run_escalation(
    problem: str,
    dims: Sequence[int],
    stop_below: Optional[float] = None,
    **spec_kwargs,
) -> list[ExperimentResult]:
    """Run ``problem`` at increasing dimensions.

    With ``stop_below`` set (0.5 is the customary threshold), stop
    after the first dimension where at least two algorithms have a success
    rate below it. Off by default.
    """
    results = []
    for dim in sorted(dims):
        res = run_experiment(ExperimentSpec(problem=problem, dim=dim, **spec_kwargs))
        results.append(res)
        if stop_below is not None and sum(s.success_rate < stop_below for s in res.stats.values()) >= 2:
            break
    return results


def _csv_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit_results(results, fmt: str = "csv") -> bytes:
    """Serialize one or more :class:`ExperimentResult` as CSV rows or JSON cells."""
    if isinstance(results, ExperimentResult):
        results = [results]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for res in results:
            for s in res.stats.values():
                for r in s.per_run:
                    w.writerow([_csv_value(getattr(r, c)) for c in CSV_COLUMNS])
        return buf.getvalue().encode()
    if fmt == "json":
        return (json.dumps([r.to_dict() for r in results], indent=2, allow_nan=False) + "\n").encode()
    raise ValueError(f"format must be csv or json, got {fmt!r}")


def parse_results_json(data: bytes) -> list[ExperimentResult]:
    return [ExperimentResult.from_dict(d) for d in json.loads(data)]


@dataclass(frozen=True)
class DecayRow:
    dim: int
    log10_exact: float
    log10_lower_bound: Optional[float]


def emit_fig3_data(n_min: int, n_max: int, alpha: float = math.pi / 4) -> list[DecayRow]:
    """``log10`` of the cap probability and of its lower bound (``N >= 4``) per dimension."""
    if not 2 <= n_min <= n_max:
        raise ValueError(f"need 2 <= n_min <= n_max, got {n_min}, {n_max}")
    if not 0 < alpha < math.pi / 2:
        raise ValueError("alpha must lie in (0, pi/2)")
    rows = []
    for n in range(n_min, n_max + 1):
        exact = math.log10(cap_probability_closed_form(n, alpha).value)
        lb = math.log10(cap_probability_lower_bound(n, alpha).value) if n >= 4 else None
        rows.append(DecayRow(n, exact, lb))
    return rows
