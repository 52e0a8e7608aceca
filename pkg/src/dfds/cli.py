"""Command line entry point: ``dfds solve|bench|theory|verify``."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import harness, theory
from .geometry import (
    cap_probability_closed_form,
    cap_probability_lower_bound,
    cap_probability_monte_carlo,
    cap_probability_quadrature,
)
from .objectives import BENCHMARKS, make_benchmark
from .solvers import SolverConfig, dfds_run, ihr_run, prs_run

OUTPUT_ENV = "DFDS_OUTPUT_DIR"


def _solve(args) -> int:
    obj, box = make_benchmark(args.problem, args.dim)
    level_budget, level_r0 = harness.default_parameters(args.problem, args.dim, args.budget_level)
    cfg = SolverConfig(
        budget=args.budget or level_budget,
        epsilon=args.epsilon,
        r0=args.r0 or level_r0,
        seed=args.seed,
        record_trace=args.trace,
    )
    rng = np.random.default_rng(args.seed)
    if args.algo == "prs":
        rec = prs_run(obj, box, cfg)
    else:
        x0 = box.sample_uniform(rng)
        rec = (dfds_run if args.algo == "dfds" else ihr_run)(obj, box, cfg, x0)
    out = {
        "problem": args.problem,
        "dim": args.dim,
        "algo": args.algo,
        "budget": cfg.budget,
        "r0": cfg.r0,
        "seed": args.seed,
        "evals_used": rec.evals_used,
        "refine_evals_used": rec.refine_evals_used,
        "iterations": rec.iterations,
        "terminated_by": rec.terminated_by.value,
        "f_final": rec.f_final,
        "f_refined": rec.f_refined,
        "x_refined": rec.x_refined.tolist(),
        "f_star": obj.f_star,
        "success": rec.f_refined <= obj.f_star + args.epsilon,
    }
    if args.trace:
        out["trace"] = [{"k": k, "x": x.tolist(), "f": f} for k, x, f in rec.trace]
    print(json.dumps(out, indent=2))
    return 0


def _load_config(path) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise SystemExit(f"config {path} must hold a JSON object")
    return cfg


def _bench(args) -> int:
    cfg = _load_config(args.config)
    for key in ("problem", "dim", "budget_level", "runs", "base_seed", "n_feval", "epsilon", "refine_budget"):
        value = getattr(args, key)
        if value is not None:
            cfg[key] = value
    if args.algos is not None:
        cfg["algos"] = tuple(args.algos.split(","))
    if args.r0 is not None:
        cfg["r0_override"] = args.r0

    if args.full:
        cfg.pop("problem", None)
        cfg.pop("dim", None)
        specs = [
            harness.ExperimentSpec(problem=p, dim=d, **dict(cfg, budget_level=level))
            for p, dims in harness.FULL_TABLES.items()
            for d in dims
            for level in ("low", "medium", "high")
        ]
    else:
        if "problem" not in cfg:
            raise SystemExit("bench needs --problem (or a config file naming one)")
        specs = [harness.ExperimentSpec.from_dict(cfg)]

    results = [harness.run_experiment(s, workers=args.workers) for s in specs]
    payload = harness.emit_results(results, args.format)

    out = args.out
    if out is None and os.environ.get(OUTPUT_ENV):
        name = "full" if args.full else f"{specs[0].problem}_n{specs[0].dim}_{specs[0].budget_level}"
        out = Path(os.environ[OUTPUT_ENV]) / f"{name}.{args.format}"
    if out is None:
        sys.stdout.buffer.write(payload)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_bytes(payload)

    for res in results:
        for algo, s in res.stats.items():
            f_best = "n/a" if s.f_best is None else f"{s.f_best:.6g}"
            print(
                f"{res.spec.problem} N={res.spec.dim} {res.spec.budget_level} ({res.n_feval}) "
                f"{algo}: SR={s.success_rate:.2f} f_best={f_best} errors={s.errors}",
                file=sys.stderr,
            )
    return 1 if any(r.errors for r in results) else 0


def _theory(args) -> int:
    if args.fig3 is not None:
        n_min, n_max, alpha = int(args.fig3[0]), int(args.fig3[1]), float(args.fig3[2])
        print("N,log10_exact,log10_lower_bound")
        for row in harness.emit_fig3_data(n_min, n_max, alpha):
            lb = "" if row.log10_lower_bound is None else repr(row.log10_lower_bound)
            print(f"{row.dim},{row.log10_exact!r},{lb}")
        return 0
    if args.bounds is None:
        raise SystemExit("theory needs --bounds GAP EPSILON DIM D0 R_EPS or --fig3 N_MIN N_MAX ALPHA")
    gap, eps, dim, d0, r = args.bounds
    inp = theory.BoundInputs(float(gap), float(eps), int(dim), float(d0), float(r))
    alpha = theory.worst_case_alpha(inp.diameter, inp.r_eps)
    p = cap_probability_closed_form(inp.dim, alpha).value
    dirs = theory.expected_directions_upper_bound(inp)
    evals = theory.expected_evals_upper_bound(inp)
    out = {
        "k_max": theory.k_max_bound(inp.f0_gap, inp.epsilon),
        "worst_case_alpha": alpha,
        "cap_probability": p,
        "success_probability_per_M": {
            str(M): theory.success_probability_lower_bound(p, M) for M in (1, 10, 100, 1000)
        },
        "expected_directions": dirs.value,
        "expected_evals": evals.value,
        "overflow": dirs.overflow or evals.overflow,
        "step_spans_domain": inp.step_spans_domain,
    }
    print(json.dumps(out, indent=2))
    return 0


def _verify(args) -> int:
    dim, alpha = int(args.cap_probability[0]), float(args.cap_probability[1])
    exact = cap_probability_closed_form(dim, alpha).value
    quad = cap_probability_quadrature(dim, alpha).value
    mc = cap_probability_monte_carlo(dim, alpha, args.samples, np.random.default_rng(args.seed))
    report = {
        "dim": dim,
        "alpha": alpha,
        "closed_form": exact,
        "quadrature": quad,
        "quadrature_abs_diff": abs(exact - quad),
        "monte_carlo": mc.value,
        "monte_carlo_std_error": mc.std_error,
        "monte_carlo_z": (mc.value - exact) / mc.std_error if mc.std_error > 0 else 0.0,
    }
    if dim >= 4 and 0 < alpha < math.pi / 2:
        report["lower_bound"] = cap_probability_lower_bound(dim, alpha).value
    print(json.dumps(report, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dfds", description="Depth-first directional search toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="single run on a benchmark")
    p.add_argument("--problem", required=True, choices=BENCHMARKS)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--algo", choices=harness.ALGOS, default="dfds")
    p.add_argument("--budget", type=int, help="evaluation budget (default: the level's budget)")
    p.add_argument("--budget-level", choices=("low", "medium", "high"), default="high")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--r0", type=float)
    p.add_argument("--epsilon", type=float, default=1e-4)
    p.add_argument("--trace", action="store_true")
    p.set_defaults(func=_solve)

    p = sub.add_parser("bench", help="multi-run experiment")
    p.add_argument("--config", help="JSON file with ExperimentSpec fields")
    p.add_argument("--problem", choices=BENCHMARKS)
    p.add_argument("--dim", type=int)
    p.add_argument("--algos", help="comma separated subset of dfds,ihr,prs")
    p.add_argument("--budget-level", choices=("low", "medium", "high"))
    p.add_argument("--n-feval", type=int, help="explicit budget overriding the level")
    p.add_argument("--runs", type=int)
    p.add_argument("--base-seed", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--r0", type=float)
    p.add_argument("--refine-budget", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--full", action="store_true", help="every standard instance at every level (slow)")
    p.add_argument("--out", help=f"output file (default: ${OUTPUT_ENV} or stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=_bench)

    p = sub.add_parser("theory", help="bound calculators")
    p.add_argument("--bounds", nargs=5, metavar=("GAP", "EPSILON", "DIM", "D0", "R_EPS"))
    p.add_argument("--fig3", nargs=3, metavar=("N_MIN", "N_MAX", "ALPHA"))
    p.set_defaults(func=_theory)

    p = sub.add_parser("verify", help="cross-check cap probability evaluators")
    p.add_argument("--cap-probability", nargs=2, required=True, metavar=("N", "ALPHA"))
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
