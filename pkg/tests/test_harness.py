import json

import numpy as np
import pytest

from boolfn import influence_profile, is_bent, make_random, to_file
from cli import config as cfg
from errors import CapacityError, ConfigError, InsufficientCoverageError
from harness import (ExperimentConfig, aggregate, derive_seed, fit_scaling, load_history,
                     make_instance, read_report, run_sweep, save_run)
from solver import Mode, promise_cutoff


def small_config(**kw):
    values = dict(family="random", n_range=(4, 5), trials=3, solvers=("quantum", "classical"), master_seed=7)
    values.update(kw)
    return ExperimentConfig(**values)


def test_derive_seed_is_stable_and_split():
    a = derive_seed(1, 8, 0, "quantum")
    assert a == derive_seed(1, 8, 0, "quantum")
    assert 0 <= a < 2 ** 64
    others = {derive_seed(1, 8, 0, "classical"), derive_seed(1, 8, 1, "quantum"),
              derive_seed(2, 8, 0, "quantum"), derive_seed(1, 9, 0, "quantum")}
    assert a not in others and len(others) == 4


def test_make_instance_families():
    inst = make_instance("bent", 6, 3)
    assert is_bent(inst.f)
    assert inst.planted_shift == make_instance("bent", 6, 3).planted_shift
    inst = make_instance("delta", 5, 3)
    assert inst.f.to_string() == "1" + "0" * 31
    inst = make_instance("random", 2, 11)
    assert influence_profile(inst.f).gamma_min > 0
    with pytest.raises(ConfigError):
        make_instance("file", 3, 0)


def test_config_validation():
    with pytest.raises(ConfigError):
        small_config(family="sparse")
    with pytest.raises(ConfigError):
        small_config(trials=0)
    with pytest.raises(ConfigError):
        small_config(n_range=())
    with pytest.raises(ConfigError):
        small_config(solvers=("grover",))
    with pytest.raises(ConfigError):
        small_config(mode="promise")
    with pytest.raises(ConfigError):
        small_config(family="bent", n_range=(5,))
    with pytest.raises(ConfigError):
        small_config(family="file")
    with pytest.raises(ConfigError):
        small_config(n_range=(4, 5, 4))
    assert small_config(mode="amplified").mode is Mode.AMPLIFIED


def test_config_from_file(tmp_path):
    path = tmp_path / "sweep.conf"
    path.write_text(
        "# separation sweep\n"
        "family = random\n"
        "n-range = 8..12:2\n"
        "trials = 5\n"
        "mode = promise\n"
        "delta = 0.3333\n"
        "epsilon = 0.1\n"
        "solvers = quantum, classical\n"
        "master_seed = 42\n"
        "timing = true\n"
    )
    config = ExperimentConfig.from_file(path)
    assert config.n_range == (8, 10, 12)
    assert config.mode is Mode.PROMISE
    assert config.solvers == ("quantum", "classical")
    assert config.timing is True
    assert config.format == "csv"


@pytest.mark.parametrize("text", [
    "family=random\n",
    "family=random\nn_range=4\nbogus=1\n",
    "family=random\nn_range=4\ntrials=many\n",
    "family=random\nfamily=bent\nn_range=4\n",
    "family=random\nn_range 4\n",
    "family=random\nn_range=a..b\n",
])
def test_config_file_errors(tmp_path, text):
    path = tmp_path / "bad.conf"
    path.write_text(text)
    with pytest.raises(ConfigError):
        ExperimentConfig.from_file(path)


def test_sweep_rows_and_order():
    report = run_sweep(small_config())
    assert len(report.rows) == 2 * 3 * 2
    keys = [(r["n"], r["trial"], r["solver"]) for r in report.rows]
    assert keys == sorted(keys, key=lambda k: (k[0], k[1], k[2] != "quantum"))
    for row in report.rows:
        assert row["success"] is True
        assert row["found_shift"] == row["planted_shift"]
        assert row["queries"] == row["f_queries"] + row["g_queries"]
        assert row["gamma_min"] > 0
    classical = [r for r in report.rows if r["solver"] == "classical"]
    assert all(r["mode"] == "baseline" for r in classical)


def test_sweep_is_reproducible():
    a = run_sweep(small_config()).to_csv()
    b = run_sweep(small_config()).to_csv()
    assert a == b
    assert a.startswith("# schema=1\nn,trial,family,solver,mode,seed,gamma_min,")
    assert "wall_time" not in a


def test_sweep_parallel_matches_serial():
    serial = run_sweep(small_config())
    parallel = run_sweep(small_config(workers=2))
    assert serial.to_csv() == parallel.to_csv()


def test_timing_column_is_opt_in():
    report = run_sweep(small_config(timing=True, n_range=(4,), trials=1))
    header = report.to_csv().splitlines()[1]
    assert header.endswith(",success,wall_time")


def test_aggregates_recompute_from_csv(tmp_path):
    report = run_sweep(small_config(trials=5))
    path = tmp_path / "out.csv"
    report.write(path)
    rows = read_report(path)
    assert len(rows) == len(report.rows)
    assert aggregate(rows) == report.aggregates
    text = path.read_text()
    assert text.count("# aggregate ") == 4


def test_json_report(tmp_path):
    report = run_sweep(small_config(format="json"))
    path = tmp_path / "out.json"
    report.write(path)
    data = json.loads(path.read_text())
    assert data["schema"] == 1
    assert len(data["rows"]) == 12
    assert read_report(path)[0]["n"] == 4
    assert aggregate(read_report(path)) == data["aggregates"]


def test_report_schema_checks(tmp_path):
    newer = tmp_path / "newer.csv"
    newer.write_text("# schema=2\nn,trial\n")
    with pytest.raises(ConfigError):
        read_report(newer)
    missing = tmp_path / "missing.csv"
    missing.write_text("n,trial\n4,0\n")
    with pytest.raises(ConfigError):
        read_report(missing)
    garbage = tmp_path / "garbage.json"
    garbage.write_text(json.dumps({"schema": "one", "rows": []}))
    with pytest.raises(ConfigError):
        read_report(garbage)


def test_file_family(tmp_path):
    path = tmp_path / "f.txt"
    to_file(make_random(5, seed=1), path)
    report = run_sweep(small_config(family="file", file=str(path), n_range=(5,), trials=2))
    assert all(r["success"] for r in report.rows)
    with pytest.raises(ConfigError):
        run_sweep(small_config(family="file", file=str(path), n_range=(6,), trials=1))


def test_capacity_checked_before_work(monkeypatch):
    with pytest.raises(CapacityError):
        run_sweep(small_config(n_range=(4, 27)))
    monkeypatch.setattr(cfg, "MAX_SWEEP_BYTES", 1024)
    with pytest.raises(CapacityError):
        run_sweep(small_config(n_range=(4, 10)))


def test_bent_vs_delta_ratio():
    bent = run_sweep(ExperimentConfig(family="bent", n_range=(10,), trials=30, master_seed=1, path="direct"))
    delta = run_sweep(ExperimentConfig(family="delta", n_range=(10,), trials=30, master_seed=1, path="direct"))
    ratio = delta.aggregates[0]["mean_queries"] / bent.aggregates[0]["mean_queries"]
    assert ratio >= 5


def test_budget_rows_keep_the_query_ledger():
    config = ExperimentConfig(family="delta", n_range=(8,), trials=2, max_queries=20,
                              solvers=("quantum", "classical"), master_seed=4)
    for row in run_sweep(config).rows:
        assert row["success"] is False
        assert row["f_queries"] == row["g_queries"] == row["subroutine_runs"] > 0
        assert row["queries"] <= 20
        if row["solver"] == "quantum":
            steps = [int(t) for t in row["trials_per_rank_step"].split()]
            assert sum(steps) == row["subroutine_runs"]
            assert row["rank"] < 8
        else:
            assert row["rank"] is None


def test_rows_carry_the_rank_trace(tmp_path):
    config = small_config(family="bent", n_range=(6,), trials=2, mode="promise", delta=0.25,
                          epsilon=0.1, solvers=("quantum",))
    report = run_sweep(config)
    for row in report.rows:
        assert row["cutoff"] == promise_cutoff(6, 0.25, 0.1)
        assert row["rank"] == 6
        assert sum(int(t) for t in row["trials_per_rank_step"].split()) == row["subroutine_runs"]
    path = tmp_path / "trace.csv"
    report.write(path)
    header = path.read_text().splitlines()[1]
    assert ",subroutine_runs,trials_per_rank_step,rank,cutoff," in header
    back = read_report(path)
    assert back[0]["cutoff"] == report.rows[0]["cutoff"]
    assert back[0]["trials_per_rank_step"] == report.rows[0]["trials_per_rank_step"]


def _synthetic_rows(solver, ns, median):
    rng = np.random.default_rng(0)
    rows = []
    for n in ns:
        for trial in range(40):
            q = int(round(median(n) * rng.uniform(0.8, 1.2)))
            rows.append({"n": n, "trial": trial, "solver": solver, "queries": q, "success": True})
    return rows


def test_fit_classical_slope():
    rows = _synthetic_rows("classical", range(8, 17, 2), lambda n: 3 * 2 ** (n / 2))
    (result,) = fit_scaling(rows, n_boot=200)
    assert result.scale == "log2"
    assert 0.45 <= result.slope <= 0.55
    assert result.ci_low <= result.slope <= result.ci_high
    assert result.ns == (8, 10, 12, 14, 16)


def test_fit_quantum_slope():
    rows = _synthetic_rows("quantum", range(8, 17, 2), lambda n: 2 * n + 2)
    (result,) = fit_scaling(rows, n_boot=200)
    assert result.scale == "linear"
    assert 1.7 <= result.slope <= 2.3


def test_fit_needs_four_sizes():
    rows = _synthetic_rows("quantum", (8, 10, 12), lambda n: 2 * n)
    with pytest.raises(InsufficientCoverageError):
        fit_scaling(rows)
    with pytest.raises(InsufficientCoverageError):
        fit_scaling([])


def test_history_is_capped(monkeypatch):
    monkeypatch.setitem(cfg.DEFAULTS, "history_limit", 3)
    for k in range(5):
        save_run({"run_id": str(k)})
    history = load_history()
    assert [h["run_id"] for h in history] == ["4", "3", "2"]
    assert "completed" in history[0]


@pytest.mark.slow
def test_random_separation_at_n12():
    report = run_sweep(ExperimentConfig(family="random", n_range=(12,), trials=1000, master_seed=3,
                                        path="direct", workers=4))
    rows = report.rows
    assert sum(r["gamma_min"] >= 1 / 3 for r in rows) >= 990
    assert report.aggregates[0]["mean_queries"] <= 3 * 12
    promise = run_sweep(ExperimentConfig(family="random", n_range=(12,), trials=1000, master_seed=3,
                                         mode="promise", delta=1 / 3, epsilon=0.1, path="direct", workers=4))
    assert promise.aggregates[0]["success_rate"] >= 0.9


@pytest.mark.slow
def test_classical_scaling_and_separation():
    report = run_sweep(ExperimentConfig(family="random", n_range=(8, 10, 12, 14, 16), trials=200,
                                        solvers=("quantum", "classical"), master_seed=5,
                                        path="direct", workers=4))
    fits = {r.solver: r for r in fit_scaling(report.rows, n_boot=300)}
    assert 0.4 <= fits["classical"].slope <= 0.62
    agg = {(a["n"], a["solver"]): a for a in report.aggregates}
    assert agg[(16, "classical")]["median_queries"] >= 8 * agg[(16, "quantum")]["mean_queries"]
    at12 = agg[(12, "classical")]["median_queries"]
    assert 2 ** 7 / 8 <= at12 <= 2 ** 7 * 8
    predicted = 2.0
    assert abs(fits["quantum"].slope - predicted) <= 0.3 * predicted
