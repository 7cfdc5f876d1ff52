import csv
import io
from contextlib import redirect_stdout

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from crisissim.cli import main
from crisissim.engine import deterministic_path, run_batches
from crisissim.model_state import Params
from crisissim.report import (
    REPORT_VARIABLES,
    ReportError,
    emit_all,
    emit_plot_data,
    emit_tables,
    ensemble_stats,
    quantiles,
    rank_strategies,
    stats_from_batch,
    stats_from_paths,
)
from crisissim.scenario import Scenario, load_scenario

from conftest import CALIBRATION, SCENARIOS

KEYS = {key for key, _ in REPORT_VARIABLES.values()}


def fake(name, debt, welfare, n=3, T=40, aborted=None):
    traj = {k: np.ones((n, T + 1)) for k in KEYS}
    traj["Y"] = np.full((n, T + 1), 100.0)
    traj["b"] = np.full((n, T + 1), debt / 100.0)
    traj["W"] = np.full((n, T + 1), welfare)
    return ensemble_stats(name, traj, aborted if aborted is not None else [False] * n, 100.0)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_quantile_examples():
    assert quantiles([1, 2, 3], [0.5]) == [2.0]
    assert quantiles([1, 2, 3, 4], [0.5]) == [2.5]
    assert quantiles([0, 10], [0.25]) == [2.5]


def test_quantile_errors():
    with pytest.raises(ValueError):
        quantiles([], [0.5])
    with pytest.raises(ValueError):
        quantiles([1.0], [1.5])


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=50))
def test_quantiles_monotone(values):
    q = quantiles(values, [0.05, 0.25, 0.5, 0.75, 0.95])
    assert all(a <= b for a, b in zip(q, q[1:]))


def test_ensemble_series_monotone():
    res = run_batches([Scenario("b")], Params(), 1, 50, 10)["b"]
    s = stats_from_batch(res)
    for arr in s.series.values():
        assert np.all(np.diff(arr, axis=0) >= 0)


def test_rank_examples():
    lvt, shock = fake("lvt", 106.25, 20.63), fake("shock", 201.38, 9.53)
    assert [s.scenario for s in rank_strategies([shock, lvt])] == ["lvt", "shock"]
    assert [s.scenario for s in rank_strategies([shock])] == ["shock"]
    tie = [fake("b", 100, 1), fake("a", 100, 1)]
    assert [s.scenario for s in rank_strategies(tie)] == ["a", "b"]
    assert [s.scenario for s in rank_strategies(tie, "welfare")] == ["a", "b"]
    assert [s.scenario for s in rank_strategies([shock, lvt], "welfare")] == ["lvt", "shock"]
    with pytest.raises(ValueError):
        rank_strategies([shock], "gdp")


@given(st.lists(st.tuples(st.floats(0, 300), st.floats(-50, 50)), min_size=1, max_size=12))
def test_ranking_is_permutation(rows):
    items = [fake(f"s{i}", d, w) for i, (d, w) in enumerate(rows)]
    for key in ("debt", "welfare"):
        ranked = rank_strategies(items, key)
        assert sorted(s.scenario for s in ranked) == sorted(s.scenario for s in items)


def test_stats_exclude_aborted_paths():
    traj = {k: np.ones((4, 3)) for k in KEYS}
    traj["Y"] = np.full((4, 3), 100.0)
    traj["b"] = np.array([[1.0] * 3, [2.0] * 3, [3.0] * 3, [np.nan] * 3])
    s = ensemble_stats("x", traj, [False, False, False, True], 100.0)
    assert s.n_aborted == 1 and s.n_included == 3
    assert s.summary()["Debt_med"] == 200.0


def test_empty_ensemble_writes_nothing(tmp_path):
    with pytest.raises(ReportError):
        emit_tables([], tmp_path / "out")
    assert not (tmp_path / "out").exists() or not any((tmp_path / "out").iterdir())
    with pytest.raises(ReportError):
        ensemble_stats("x", {k: np.ones((0, 3)) for k in KEYS}, [], 100.0)


def test_io_errors_carry_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(ReportError, match=str(blocker)):
        emit_tables([fake("a", 1, 1)], blocker)


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    scs = [load_scenario(SCENARIOS / "grid29" / f"{n}.cfg") for n in
           ("Shock-6+Deval", "AggRecomp_GI+TR_modDebt_MKT_LVT", "PSI30+IFI1.5")]
    res = run_batches(scs, Params(), 42, 30, 40)
    stats = [stats_from_batch(res[s.name]) for s in scs]
    emit_tables(stats, out)
    emit_plot_data(stats, out)
    return out, stats


def test_table_headers(small_run):
    out, _ = small_run
    assert read_csv(out / "summary_T40.csv")[0] == [
        "scenario", "GDP_med", "Debt_med", "Welfare_med", "Reserves_med", "n_paths", "n_aborted"]
    assert read_csv(out / "trajectories.csv")[0] == ["scenario", "variable", "quarter", "quantile", "value"]
    assert read_csv(out / "ranking_welfare.csv")[0][:2] == ["rank", "scenario"]
    assert read_csv(out / "fig3_debt_ranking.csv")[0] == ["rank", "scenario", "Debt_med"]


def test_snapshots_cover_table_horizons(small_run):
    out, stats = small_run
    rows = read_csv(out / "snapshots.csv")[1:]
    for s in stats:
        assert sorted(int(r[1]) for r in rows if r[0] == s.scenario) == [0, 16, 40]
    quarters = {int(r[2]) for r in read_csv(out / "trajectories.csv")[1:]}
    assert {0, 16, 40} <= quarters


def test_plot_files_consistent_with_summary(small_run):
    out, stats = small_run
    summary = {r[0]: r for r in read_csv(out / "summary_T40.csv")[1:]}
    fig1 = read_csv(out / "fig1_gdp_vs_debt.csv")[1:]
    fig2 = read_csv(out / "fig2_welfare_vs_debt.csv")[1:]
    assert len(fig1) == len(fig2) == len(stats)
    for name, debt, gdp in fig1:
        assert debt == summary[name][2] and gdp == summary[name][1]
    for name, debt, welfare in fig2:
        assert debt == summary[name][2] and welfare == summary[name][3]
    fig3 = read_csv(out / "fig3_debt_ranking.csv")[1:]
    debts = [float(r[2]) for r in fig3]
    assert debts == sorted(debts)


def test_stats_from_paths_matches_batch():
    res = run_batches([Scenario("b")], Params(), 5, 12, 8)["b"]
    a, b = stats_from_batch(res), stats_from_paths(res.paths())
    for k in a.series:
        np.testing.assert_array_equal(a.series[k], b.series[k])


def test_rerun_byte_identical(tmp_path):
    sc = [Scenario("b")]
    for d in ("x", "y"):
        res = run_batches(sc, Params(), 42, 20, 12, workers=1 if d == "x" else 2, chunk_size=7)
        emit_all([stats_from_batch(res["b"])], tmp_path / d)
    for f in (tmp_path / "x").iterdir():
        assert f.read_bytes() == (tmp_path / "y" / f.name).read_bytes()


def test_cli_run(tmp_path, capsys):
    rc = main(["run", "--scenario", str(SCENARIOS / "baseline.cfg"), "--paths", "5", "--horizon", "8",
               "--seed", "1", "--out", str(tmp_path), "--quantiles", "0.1,0.5,0.9"])
    assert rc == 0
    rows = read_csv(tmp_path / "summary_T8.csv")
    assert rows[1][0] == "baseline" and rows[1][5] == "5"
    qs = {r[3] for r in read_csv(tmp_path / "trajectories.csv")[1:]}
    assert qs == {"0.1", "0.5", "0.9"}


def test_cli_usage_errors(capsys):
    assert main(["run", "--bogus"]) == 1
    assert main([]) == 1
    assert main(["run", "--scenario", "x.cfg", "--out", "o", "--paths", "0"]) == 1
    assert main(["validate"]) == 1


def test_cli_validate(tmp_path, capsys):
    assert main(["validate", "--params", str(CALIBRATION), "--scenario-set", str(SCENARIOS / "grid29.cfg")]) == 0
    bad = tmp_path / "bad.cfg"
    bad.write_text("[multipliers]\nmu_GC_crisis = 0.5\nmu_GI_crisis = 0.4\n")
    assert main(["validate", "--params", str(bad)]) == 2
    assert main(["validate", "--scenario", str(tmp_path / "missing.cfg")]) == 2


def test_cli_invalid_input_writes_nothing(tmp_path, capsys):
    bad = tmp_path / "s.cfg"
    bad.write_text("[scenario]\nname = x\n[debt:a]\nquarter = 4\nhaircut = 2\n")
    out = tmp_path / "out"
    assert main(["run", "--scenario", str(bad), "--out", str(out), "--paths", "2"]) == 2
    assert not out.exists()


def test_cli_oracle_matches_engine():
    buf = io.StringIO()
    with redirect_stdout(buf):
        rc = main(["oracle", "--scenario", str(SCENARIOS / "baseline.cfg")])
    assert rc == 0
    rows = list(csv.reader(io.StringIO(buf.getvalue())))
    header, body = rows[0], rows[1:]
    assert len(body) == 41
    traj = deterministic_path(Scenario("baseline"), Params()).trajectory
    for j, col in enumerate(header[1:], start=1):
        np.testing.assert_array_equal([float(r[j]) for r in body], traj[col])
