"""KPI tables and SVG figures with byte-stable output."""
from __future__ import annotations

import csv
import logging
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .metrics import NOT_SETTLED, KpiRow  # noqa: E402

log = logging.getLogger(__name__)

KPI_COLUMNS = ("controller", "iae", "mo", "ts", "cev")
_SVG_META = {"Date": None, "Creator": None}


def _fmt(v: float) -> str:
    return "not-settled" if v == NOT_SETTLED else repr(float(v))


def write_kpi_csv(rows: list[KpiRow], path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(KPI_COLUMNS)
        for r in rows:
            w.writerow([r.controller, _fmt(r.iae), _fmt(r.mo), _fmt(r.ts), _fmt(r.cev)])
    return path


def read_kpi_csv(path) -> list[KpiRow]:
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            num = {k: (NOT_SETTLED if rec[k] == "not-settled" else float(rec[k]))
                   for k in KPI_COLUMNS[1:]}
            rows.append(KpiRow(rec["controller"], **num))
    return rows


def kpi_table(rows: list[KpiRow]) -> str:
    head = f"{'controller':<12}{'IAE [degC*s]':>14}{'MO [degC]':>11}{'Ts [s]':>13}{'CEV [(kg/s)^2]':>16}"
    lines = [head, "-" * len(head)]
    for r in rows:
        ts = "not settled" if r.ts == NOT_SETTLED else f"{r.ts:.0f}"
        lines.append(f"{r.controller:<12}{r.iae:>14.1f}{r.mo:>11.2f}{ts:>13}{r.cev:>16.4f}")
    return "\n".join(lines) + "\n"


def _save(fig, path: Path) -> None:
    with plt.rc_context({"svg.hashsalt": "hrsglab", "svg.fonttype": "path"}):
        fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)


def plot_temperature(traces, path) -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(8, 4))
    if traces:
        ax.plot(traces[0].t, traces[0].r, "k--", lw=1.0, label="setpoint")
    for tr in traces:
        ax.plot(tr.t, tr.y, lw=1.2, label=tr.controller)
    ax.set_xlabel("time [s]")
    ax.set_ylabel("outlet steam temperature [degC]")
    ax.legend(loc="best")
    ax.grid(alpha=0.3)
    _save(fig, path)
    return path


def plot_control(traces, path) -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(8, 4))
    for tr in traces:
        ax.plot(tr.t, tr.u, lw=1.2, label=tr.controller)
    ax.set_xlabel("time [s]")
    ax.set_ylabel("spray flow u [kg/s]")
    ax.legend(loc="best")
    ax.grid(alpha=0.3)
    _save(fig, path)
    return path


def plot_gains(trace, path) -> Path:
    path = Path(path)
    fig, axes = plt.subplots(3, 1, figsize=(8, 6), sharex=True)
    for ax, name in zip(axes, ("kp", "ki", "kff")):
        ax.plot(trace.t, getattr(trace, name), lw=1.2)
        ax.set_ylabel(name)
        ax.grid(alpha=0.3)
    axes[0].set_title(f"gain evolution: {trace.controller}")
    axes[-1].set_xlabel("time [s]")
    _save(fig, path)
    return path


def render_report(rows: list[KpiRow], traces, out_dir) -> dict[str, Path]:
    """KPI CSV, text table and (when traces are given) SVG figures in ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {"kpi_csv": write_kpi_csv(rows, out / "kpi.csv")}
    table = out / "kpi_table.txt"
    table.write_text(kpi_table(rows))
    files["kpi_table"] = table
    traces = list(traces or [])
    if not traces:
        log.warning("no traces supplied; writing the KPI table only")
        return files
    files["temperature"] = plot_temperature(traces, out / "temperature.svg")
    files["control"] = plot_control(traces, out / "control.svg")
    for tr in traces:
        files[f"gains_{tr.controller}"] = plot_gains(tr, out / f"gains_{tr.controller}.svg")
    return files
