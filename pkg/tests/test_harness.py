import csv
import io
import json
import math

import numpy as np
import pytest

from dfds.geometry import cap_probability_closed_form, cap_probability_lower_bound
from dfds.harness import (
    ALGOS,
    CSV_COLUMNS,
    AggregateStats,
    ExperimentResult,
    ExperimentSpec,
    RunSummary,
    default_parameters,
    emit_fig3_data,
    emit_results,
    parse_results_json,
    run_escalation,
    run_experiment,
    run_seed,
)
from dfds.objectives import make_benchmark


def test_default_parameters_examples():
    assert default_parameters("goldstein_price", 2, "high") == (500, 0.2)
    n, r0 = default_parameters("ackley", 5, "low")
    assert n == 4000 and r0 == pytest.approx(math.sqrt(5) / (2 * math.sqrt(2)))
    n, r0 = default_parameters("alpine", 8, "high")
    assert n == 640_000 and r0 == pytest.approx(1.0)
    assert default_parameters("six_hump_camel", 2, "low") == (125, 0.5)
    with pytest.raises(ValueError):
        default_parameters("rosenbrock", 2, "low")
    with pytest.raises(ValueError):
        default_parameters("ackley", 2, "extreme")
    with pytest.raises(ValueError):
        default_parameters("goldstein_price", 3, "low")


# reference budgets of the standard instances
TABLE_CELLS = [
    ("goldstein_price", 2, "low", 125), ("goldstein_price", 2, "medium", 250), ("goldstein_price", 2, "high", 500),
    ("six_hump_camel", 2, "low", 125), ("six_hump_camel", 2, "high", 500),
    ("ackley", 2, "low", 500), ("ackley", 2, "medium", 1000), ("ackley", 2, "high", 2000),
    ("levy", 2, "low", 500), ("levy", 2, "high", 2000),
    ("ackley", 5, "low", 4000), ("ackley", 5, "medium", 8000), ("ackley", 5, "high", 16000),
    ("ackley", 8, "high", 128_000), ("ackley", 12, "low", 512_000), ("ackley", 12, "high", 2_048_000),
    ("levy", 5, "high", 16_000), ("levy", 11, "high", 1_024_000), ("levy", 13, "high", 4_096_000),
    ("levy", 14, "low", 2_048_000), ("levy", 14, "high", 8_192_000),
    ("alpine", 2, "low", 2500), ("alpine", 2, "high", 10_000), ("alpine", 3, "low", 5000),
    ("alpine", 4, "high", 40_000), ("alpine", 6, "low", 40_000), ("alpine", 8, "low", 160_000),
    ("alpine", 8, "high", 640_000),
]


@pytest.mark.parametrize("problem,dim,level,n_feval", TABLE_CELLS)
def test_default_parameters_match_reference_budgets(problem, dim, level, n_feval):
    assert default_parameters(problem, dim, level)[0] == n_feval


def test_spec_validation():
    with pytest.raises(ValueError):
        ExperimentSpec("ackley", runs=0)
    with pytest.raises(ValueError):
        ExperimentSpec("ackley", algos=("dfds", "cmaes"))
    with pytest.raises(ValueError):
        ExperimentSpec("ackley", n_feval=0)
    with pytest.raises(ValueError):
        ExperimentSpec("nope")
    with pytest.raises(ValueError):
        ExperimentSpec.from_dict({"problem": "ackley", "colour": "red"})
    s = ExperimentSpec.from_dict({"problem": "ackley", "dim": 3, "algos": ["prs"], "n_feval": 77})
    assert s.algos == ("prs",) and s.resolved()[0] == 77


def test_seed_streams_are_independent_of_algo_set():
    a = run_experiment(ExperimentSpec("levy", 2, algos=("dfds",), n_feval=200, runs=3, base_seed=5, refine_budget=0))
    b = run_experiment(ExperimentSpec("levy", 2, algos=ALGOS, n_feval=200, runs=3, base_seed=5, refine_budget=0))
    assert a.stats["dfds"] == b.stats["dfds"]
    assert len({run_seed(5, s, 0) for s in range(3)}) == 3


def test_shared_start_point_across_dfds_and_ihr():
    res = run_experiment(ExperimentSpec("ackley", 2, algos=("dfds", "ihr"), n_feval=50, runs=2, refine_budget=0),
                         keep_records=True)
    for i in range(2):
        np.testing.assert_array_equal(res.records["dfds"][i].x0, res.records["ihr"][i].x0)
    assert not np.array_equal(res.records["dfds"][0].x0, res.records["dfds"][1].x0)


def test_goldstein_high_budget_success():
    res = run_experiment(ExperimentSpec("goldstein_price", runs=20, base_seed=1))
    for algo in ALGOS:
        assert res.stats[algo].success_rate >= 0.9


def test_runs_are_deterministic():
    spec = ExperimentSpec("six_hump_camel", runs=1, base_seed=42)
    assert run_experiment(spec) == run_experiment(spec)
    assert emit_results(run_experiment(spec)) == emit_results(run_experiment(spec))


def test_worker_pool_gives_same_result():
    spec = ExperimentSpec("levy", 2, n_feval=300, runs=3, base_seed=9)
    assert run_experiment(spec, workers=2) == run_experiment(spec, workers=1)


def test_aggregate_invariants():
    res = run_experiment(ExperimentSpec("ackley", 2, budget_level="low", runs=6, base_seed=3))
    obj, _ = make_benchmark("ackley", 2)
    for s in res.stats.values():
        assert 0.0 <= s.success_rate <= 1.0
        assert all(s.f_best <= r.f_refined for r in s.per_run)
        assert s.success_rate == sum(r.f_refined <= obj.f_star + 1e-4 for r in s.per_run) / len(s.per_run)
        assert all(r.evals_used <= r.n_feval for r in s.per_run)


def test_failed_runs_are_recorded(monkeypatch):
    import dfds.harness as h

    def boom(*a, **k):
        raise ArithmeticError("synthetic failure")

    monkeypatch.setattr(h, "prs_run", boom)
    res = run_experiment(ExperimentSpec("levy", 2, algos=("prs", "dfds"), n_feval=100, runs=2, refine_budget=0))
    prs = res.stats["prs"]
    assert prs.errors == 2 and prs.success_rate == 0.0 and prs.f_best is None
    assert all("synthetic failure" in r.error for r in prs.per_run)
    assert res.errors == 2 and res.stats["dfds"].errors == 0
    rows = list(csv.DictReader(io.StringIO(emit_results(res).decode())))
    assert [r["success"] for r in rows[:2]] == ["0", "0"] and rows[0]["f_refined"] == ""


def test_csv_layout():
    res = run_experiment(ExperimentSpec("goldstein_price", algos=("prs",), runs=1, base_seed=0))
    text = emit_results(res, "csv").decode()
    lines = text.strip().split("\n")
    assert len(lines) == 2
    assert lines[0] == ",".join(CSV_COLUMNS)
    row = dict(zip(CSV_COLUMNS, lines[1].split(",")))
    f_ref = float(row["f_refined"])
    assert row["success"] == ("1" if f_ref <= 3.0 + 1e-4 else "0")
    assert float(row["f_refined"]) == res.stats["prs"].per_run[0].f_refined  # repr round-trips exactly


def test_json_round_trip_and_cells():
    results = [
        run_experiment(ExperimentSpec("levy", 2, n_feval=150, runs=2, base_seed=1)),
        run_experiment(ExperimentSpec("six_hump_camel", budget_level="low", runs=1, base_seed=2)),
    ]
    data = emit_results(results, "json")
    assert parse_results_json(data) == results
    cells = json.loads(data)
    assert cells[0]["problem"] == "levy" and cells[0]["budget"] == "high"
    assert set(cells[0]["algos"]) == set(ALGOS)
    assert set(cells[0]["algos"]["dfds"]) >= {"sr", "f_best"}
    with pytest.raises(ValueError):
        emit_results(results, "xml")


def test_escalation_stop_rule():
    kw = dict(n_feval=20, runs=2, refine_budget=0, base_seed=0)
    assert len(run_escalation("ackley", [2, 3, 4], **kw)) == 3
    halted = run_escalation("ackley", [2, 3, 4], stop_below=1.01, **kw)
    assert len(halted) == 1


def test_fig3_examples():
    rows = emit_fig3_data(2, 40, math.pi / 4)
    assert rows[0].dim == 2 and rows[0].log10_exact == pytest.approx(math.log10(0.25), abs=1e-14)
    assert rows[0].log10_lower_bound is None and rows[1].log10_lower_bound is None
    assert rows[1].log10_exact == pytest.approx(math.log10((1 - math.sqrt(2) / 2) / 2), abs=1e-14)
    exact = [r.log10_exact for r in rows]
    assert all(b < a for a, b in zip(exact, exact[1:]))
    for r in rows[2:]:
        assert r.log10_lower_bound <= r.log10_exact
        assert r.log10_exact == pytest.approx(math.log10(cap_probability_closed_form(r.dim, math.pi / 4).value))
        assert r.log10_lower_bound == pytest.approx(math.log10(cap_probability_lower_bound(r.dim, math.pi / 4).value))
    with pytest.raises(ValueError):
        emit_fig3_data(1, 5)
    with pytest.raises(ValueError):
        emit_fig3_data(6, 5)


def test_summary_types_round_trip():
    r = RunSummary("ackley", 2, "dfds", "low", 10, 0, 1, 10, 0.5, 0.25, False)
    s = AggregateStats.from_runs([r])
    assert s.f_best == 0.25 and s.success_rate == 0.0
    res = ExperimentResult(ExperimentSpec("ackley"), 10, 0.5, {"dfds": s})
    assert ExperimentResult.from_dict(json.loads(json.dumps(res.to_dict()))) == res
