import logging

import numpy as np

from hrsglab.metrics import NOT_SETTLED, KpiRow
from hrsglab.report import kpi_table, read_kpi_csv, render_report, write_kpi_csv

from oracles import make_trace

ROWS = [KpiRow("pi", 676.8, 0.93, 144.0, 0.0276), KpiRow("lstm", 500.1, 0.5, NOT_SETTLED, 0.03),
        KpiRow("pinn", 272.5, 0.4, 0.0, 0.0173)]


def test_kpi_csv_round_trip(tmp_path):
    write_kpi_csv(ROWS, tmp_path / "k.csv")
    assert read_kpi_csv(tmp_path / "k.csv") == ROWS
    assert (tmp_path / "k.csv").read_text().splitlines()[0] == "controller,iae,mo,ts,cev"


def test_table_has_one_line_per_controller():
    lines = kpi_table(ROWS).splitlines()
    assert len(lines) == 2 + 3
    assert "not settled" in lines[3]
    for col in ("IAE", "MO", "Ts", "CEV"):
        assert col in lines[0]


def _traces():
    out = []
    for name, amp in (("pi", 1.0), ("pinn", 0.3)):
        tr = make_trace(amp * np.sin(np.arange(50) / 5.0), 0.8 + 0.1 * np.cos(np.arange(50)))
        tr.controller = name
        out.append(tr)
    return out


def test_report_is_byte_stable(tmp_path):
    a = render_report(ROWS, _traces(), tmp_path / "a")
    b = render_report(ROWS, _traces(), tmp_path / "b")
    assert sorted(a) == sorted(b)
    for key in a:
        assert a[key].read_bytes() == b[key].read_bytes(), key
    assert {"temperature", "control", "gains_pi", "gains_pinn"} <= set(a)


def test_empty_trace_list_gives_table_only(tmp_path, caplog):
    with caplog.at_level(logging.WARNING):
        files = render_report(ROWS, [], tmp_path)
    assert set(files) == {"kpi_csv", "kpi_table"}
    assert not list(tmp_path.glob("*.svg"))
    assert "no traces" in caplog.text
