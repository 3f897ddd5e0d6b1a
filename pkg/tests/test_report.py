from __future__ import annotations

import pytest

from trajkit import DataFormatError, ResultTable, write_result_csv
from trajkit.harness import write_sweep_csv
from trajkit.report import read_result_rows, render_report


def _table(errors=(0.0, 0.5), **over):
    kw = dict(dataset="d", featurization="vq", landmarks="random(2)",
              classifier="dt", errors=errors, seconds=(1.0,) * len(errors))
    kw.update(over)
    return ResultTable(**kw)


def test_read_result_rows_drops_summary(tmp_path):
    p = tmp_path / "results.csv"
    write_result_csv(_table(), p)
    rows = read_result_rows(p)
    assert len(rows) == 2
    assert rows[0]["trial"] == "0" and rows[0]["error"] == 0.0
    assert rows[1]["error"] == 0.5
    assert all("parameter" not in r for r in rows)


def test_read_result_rows_sweep_format(tmp_path):
    p = tmp_path / "sweep.csv"
    write_sweep_csv("n_landmarks", [2, 4], [_table(), _table(errors=(0.25, 0.75))], p)
    rows = read_result_rows(p)
    assert len(rows) == 4
    assert rows[0]["parameter"] == "n_landmarks" and rows[0]["value"] == "2"
    assert rows[2]["value"] == "4" and rows[2]["error"] == 0.25


def test_read_result_rows_errors(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("nope,header\n")
    with pytest.raises(DataFormatError):
        read_result_rows(p)
    p.write_text("")
    with pytest.raises(DataFormatError):
        read_result_rows(p)
    p.write_text("dataset,featurization,landmarks,classifier,trial,error\n")
    with pytest.raises(DataFormatError):
        read_result_rows(p)
    p.write_text("dataset,featurization,landmarks,classifier,trial,error\n"
                 "d,vq,random(2),dt,0,oops\n")
    with pytest.raises(DataFormatError):
        read_result_rows(p)


def test_render_report_run_table(tmp_path):
    results = tmp_path / "results.csv"
    write_result_csv(_table(), results)
    out = tmp_path / "report"
    written = render_report([results], out)
    assert written == [out / "errors.png", out / "summary.csv"]
    assert (out / "errors.png").stat().st_size > 0
    lines = (out / "summary.csv").read_text().splitlines()
    assert lines[0] == ("dataset,featurization,landmarks,classifier,"
                        "parameter,value,trials,mean,std")
    assert lines[1] == "d,vq,random(2),dt,,,2,0.25,0.25"


def test_render_report_sweep_table(tmp_path):
    p = tmp_path / "sweep.csv"
    write_sweep_csv("n_landmarks", [2, 4], [_table(), _table(errors=(0.25, 0.75))], p)
    out = tmp_path / "report"
    written = render_report([p], out)
    assert written == [out / "sweep_n_landmarks.png", out / "summary.csv"]
    lines = (out / "summary.csv").read_text().splitlines()
    assert len(lines) == 3
    assert lines[1].startswith("d,vq,random(2),dt,n_landmarks,2,2,")


def test_render_report_mixed_inputs(tmp_path):
    run_csv = tmp_path / "results.csv"
    write_result_csv(_table(), run_csv)
    sweep_csv = tmp_path / "sweep.csv"
    write_sweep_csv("voters", [1], [_table()], sweep_csv)
    out = tmp_path / "report"
    written = render_report([run_csv, sweep_csv], out)
    assert set(w.name for w in written) == {"errors.png", "sweep_voters.png",
                                            "summary.csv"}
