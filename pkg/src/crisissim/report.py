"""Ensemble statistics, strategy rankings and CSV emitters.

Quantiles use linear interpolation between the closest ranks (numpy's
``method="linear"``, Hyndman & Fan type 7).  Statistics are computed from
non-aborted paths only; the aborted count travels with every summary row.

Reported units: GDP is an index (100 at t=0), Debt and Reserves are percent
of GDP, Welfare is the raw index.  Other variables keep model units.
"""

from __future__ import annotations

import csv
import io
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

DEFAULT_QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)

# reported name -> (trajectory key, scale); GDP is handled separately
REPORT_VARIABLES = {
    "GDP": ("Y", None),
    "Debt": ("b", 100.0),
    "Welfare": ("W", 1.0),
    "Reserves": ("R", 100.0),
    "Inflation": ("pi", 1.0),
    "Gini": ("Gini", 1.0),
    "Employment": ("E", 1.0),
    "FXGap": ("B", 1.0),
    "RiskPremium": ("rp", 1.0),
    "Unrest": ("Unrest", 1.0),
}
SUMMARY_COLUMNS = ("GDP_med", "Debt_med", "Welfare_med", "Reserves_med")
SUMMARY_HEADER = ("scenario",) + SUMMARY_COLUMNS + ("n_paths", "n_aborted")
TRAJECTORY_HEADER = ("scenario", "variable", "quarter", "quantile", "value")
SNAPSHOT_HEADER = ("scenario", "quarter") + SUMMARY_COLUMNS + ("n_paths", "n_aborted")
RANKING_HEADER = ("rank", "scenario") + SUMMARY_COLUMNS


class ReportError(RuntimeError):
    pass


def quantiles(values, qs=DEFAULT_QUANTILES) -> list[float]:
    """Linear-interpolation quantiles of a non-empty sample."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("quantiles of an empty sample")
    q = np.asarray(qs, dtype=float)
    if np.any((q < 0) | (q > 1)):
        raise ValueError("quantile probabilities must lie in [0, 1]")
    return [float(v) for v in np.quantile(arr, q, method="linear")]


@dataclass(frozen=True)
class EnsembleStats:
    scenario: str
    horizon: int
    qs: tuple
    series: dict  # variable -> array (len(qs), horizon + 1)
    medians: dict  # variable -> array (horizon + 1,)
    n_paths: int
    n_aborted: int
    snapshot_quarters: tuple = field(default=(0, 16, 40))

    @property
    def n_included(self) -> int:
        return self.n_paths - self.n_aborted

    def summary(self, t: int | None = None) -> dict:
        t = self.horizon if t is None else t
        return {
            "GDP_med": float(self.medians["GDP"][t]),
            "Debt_med": float(self.medians["Debt"][t]),
            "Welfare_med": float(self.medians["Welfare"][t]),
            "Reserves_med": float(self.medians["Reserves"][t]),
        }


def _reported(traj: dict, Y0: float) -> dict:
    out = {}
    for name, (key, scale) in REPORT_VARIABLES.items():
        x = np.asarray(traj[key], dtype=float)
        out[name] = 100.0 * x / Y0 if name == "GDP" else scale * x
    return out


def ensemble_stats(scenario: str, traj: dict, aborted, Y0: float,
                   qs=DEFAULT_QUANTILES) -> EnsembleStats:
    """Quantile statistics of a ``(n_paths, T+1)`` trajectory dict."""
    aborted = np.asarray(aborted, dtype=bool)
    n_paths = aborted.size
    if n_paths == 0:
        raise ReportError(f"{scenario}: empty ensemble")
    horizon = np.asarray(traj["b"]).shape[1] - 1
    keep = ~aborted
    rep = _reported(traj, Y0)
    series, medians = {}, {}
    for name, x in rep.items():
        x = x[keep]
        if x.shape[0] == 0:
            series[name] = np.full((len(qs), horizon + 1), np.nan)
            medians[name] = np.full(horizon + 1, np.nan)
            continue
        series[name] = np.quantile(x, np.asarray(qs, dtype=float), axis=0, method="linear")
        medians[name] = np.quantile(x, 0.5, axis=0, method="linear")
    snaps = tuple(sorted({0, horizon} | {h for h in (16, 40) if h <= horizon}))
    return EnsembleStats(scenario, horizon, tuple(float(q) for q in qs), series, medians,
                         n_paths, int(aborted.sum()), snaps)


def stats_from_batch(batch, qs=DEFAULT_QUANTILES) -> EnsembleStats:
    aborted = [r is not None for r in batch.abort_reason]
    return ensemble_stats(batch.scenario, batch.traj, aborted, batch.Y0, qs)


def stats_from_paths(paths, qs=DEFAULT_QUANTILES) -> EnsembleStats:
    """Statistics from a list of PathResult of a single scenario."""
    paths = list(paths)
    if not paths:
        raise ReportError("empty ensemble")
    names = {p.scenario for p in paths}
    if len(names) != 1:
        raise ReportError(f"paths from several scenarios: {sorted(names)}")
    traj = {k: np.stack([p.trajectory[k] for p in paths]) for k in paths[0].trajectory}
    return ensemble_stats(paths[0].scenario, traj, [p.aborted is not None for p in paths],
                          paths[0].Y0, qs)


def rank_strategies(stats, key: str = "debt") -> list[EnsembleStats]:
    """Ascending Debt_med (``key="debt"``) or descending Welfare_med
    (``key="welfare"``); ties broken by scenario name.  NaN medians sort last."""
    items = list(stats.values()) if isinstance(stats, dict) else list(stats)
    if key == "debt":
        col, sign = "Debt_med", 1.0
    elif key == "welfare":
        col, sign = "Welfare_med", -1.0
    else:
        raise ValueError(f"unknown ranking key {key!r}")

    def sort_key(s):
        v = s.summary()[col]
        return (np.isnan(v), sign * v if not np.isnan(v) else 0.0, s.scenario)

    return sorted(items, key=sort_key)


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _write_all(out_dir, files: dict[str, str]) -> list[Path]:
    """Write every file or none: stage to temporaries, then rename."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ReportError(f"cannot create {out}: {exc}") from exc
    staged = []
    try:
        for name, text in files.items():
            fd, tmp = tempfile.mkstemp(prefix=f".{name}.", dir=out)
            staged.append((tmp, out / name))
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            os.chmod(tmp, 0o644)
    except OSError as exc:
        for tmp, _ in staged:
            Path(tmp).unlink(missing_ok=True)
        raise ReportError(f"cannot write to {out}: {exc}") from exc
    for tmp, final in staged:
        os.replace(tmp, final)
    return [final for _, final in staged]


def _as_list(stats) -> list[EnsembleStats]:
    items = list(stats.values()) if isinstance(stats, dict) else list(stats)
    if not items:
        raise ReportError("empty ensemble: nothing to report")
    return items


def _summary_row(s: EnsembleStats, t=None):
    m = s.summary(t)
    return [m[c] for c in SUMMARY_COLUMNS]


def table_texts(stats) -> dict[str, str]:
    items = _as_list(stats)
    horizon = items[0].horizon
    summary = [[s.scenario] + _summary_row(s) + [s.n_paths, s.n_aborted] for s in items]
    traj = []
    for s in items:
        for var, arr in s.series.items():
            for t in range(s.horizon + 1):
                for qi, q in enumerate(s.qs):
                    traj.append([s.scenario, var, t, q, arr[qi, t]])
    snaps = [[s.scenario, t] + _summary_row(s, t) + [s.n_paths, s.n_aborted]
             for s in items for t in s.snapshot_quarters]
    ranking = [[i + 1, s.scenario] + _summary_row(s)
               for i, s in enumerate(rank_strategies(items, "welfare"))]
    return {
        f"summary_T{horizon}.csv": _csv_text(SUMMARY_HEADER, summary),
        "trajectories.csv": _csv_text(TRAJECTORY_HEADER, traj),
        "snapshots.csv": _csv_text(SNAPSHOT_HEADER, snaps),
        "ranking_welfare.csv": _csv_text(RANKING_HEADER, ranking),
    }


def plot_texts(stats) -> dict[str, str]:
    items = _as_list(stats)
    rows = [(s.scenario, s.summary()) for s in items]
    by_debt = rank_strategies(items, "debt")
    return {
        "fig1_gdp_vs_debt.csv": _csv_text(
            ("scenario", "Debt_med", "GDP_med"), [[n, m["Debt_med"], m["GDP_med"]] for n, m in rows]),
        "fig2_welfare_vs_debt.csv": _csv_text(
            ("scenario", "Debt_med", "Welfare_med"), [[n, m["Debt_med"], m["Welfare_med"]] for n, m in rows]),
        "fig3_debt_ranking.csv": _csv_text(
            ("rank", "scenario", "Debt_med"),
            [[i + 1, s.scenario, s.summary()["Debt_med"]] for i, s in enumerate(by_debt)]),
    }


def emit_tables(stats, out_dir) -> list[Path]:
    return _write_all(out_dir, table_texts(stats))


def emit_plot_data(stats, out_dir) -> list[Path]:
    return _write_all(out_dir, plot_texts(stats))


def emit_all(stats, out_dir) -> list[Path]:
    """Tables and plot data in one all-or-nothing write."""
    return _write_all(out_dir, {**table_texts(stats), **plot_texts(stats)})
