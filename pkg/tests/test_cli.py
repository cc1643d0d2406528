import json

import pytest

from nbdiff.cli import EXIT_DEGENERATE, EXIT_INPUT, EXIT_OK, main, read_counts, read_grouped
from nbdiff.results_io import COLUMNS

SMALL_CFG = """
mu_x = 5
mu_y = 5, 10
theta_x = 0.025
theta_y = 0.05
n_x = 10, 30
n_y = 20
trials = 150
seed = 11
"""


@pytest.fixture
def samples(tmp_path):
    x = tmp_path / "x.txt"
    y = tmp_path / "y.txt"
    x.write_text("0\n3\n12\n0\n1\n# note\n\n7\n")
    y.write_text("2\n0\n0\n7\n40\n1\n")
    return x, y


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def record_of(out):
    return json.loads(out.strip().splitlines()[-1])


def test_read_inputs(tmp_path, samples):
    assert read_counts(samples[0]) == [0, 3, 12, 0, 1, 7]
    data = tmp_path / "d.csv"
    data.write_text("group,count\nx,1\ny,2\nx,3\n")
    assert read_grouped(data) == ([1, 3], [2])


def test_analyze_normal_smoke(capsys, samples):
    code, out, _ = run(capsys, "analyze", "--x", samples[0], "--y", samples[1], "--method", "normal",
                       "--alpha", "0.05")
    assert code == EXIT_OK
    assert sum("CI:" in line for line in out.splitlines()) == 1
    rec = record_of(out)
    assert set(rec["intervals"]) == {"normal"}
    assert rec["difference"] == pytest.approx(23 / 6 - 50 / 6)


def test_analyze_mixture_is_weighted_average(capsys, samples):
    code, out, _ = run(capsys, "analyze", "--x", samples[0], "--y", samples[1],
                       "--method", "normal,bernstein,mixture", "--weight", "0.3")
    assert code == EXIT_OK
    iv = record_of(out)["intervals"]
    for end in ("lower", "upper"):
        assert iv["mixture"][end] == pytest.approx(0.3 * iv["normal"][end] + 0.7 * iv["bernstein"][end])


def test_analyze_identical_samples_null_zero(capsys, tmp_path):
    code, out, _ = run(capsys, "analyze", "--x-values", "0,4,9,0,1", "--y-values", "0,4,9,0,1",
                       "--null", "0", "--method", "normal,bernstein")
    assert code == EXIT_OK
    tests = record_of(out)["tests"]
    assert tests["bernstein"]["p_value"] == 1.0
    assert tests["normal"]["p_value"] == 1.0


def test_analyze_grouped_csv_and_record(capsys, tmp_path):
    data = tmp_path / "d.csv"
    data.write_text("x,1\nx,5\nx,0\ny,2\ny,9\ny,30\n")
    rec_path = tmp_path / "rec.json"
    code, out, _ = run(capsys, "analyze", "--data", data, "--record", rec_path)
    assert code == EXIT_OK
    assert json.loads(rec_path.read_text()) == record_of(out)
    assert "one-sample recommendation for x" in out


def test_analyze_grid_mode(capsys, samples):
    code, out, _ = run(capsys, "analyze", "--x", samples[0], "--y", samples[1], "--variance-mode", "grid",
                       "--kinds", "gamma,gamma", "--method", "normal")
    assert code == EXIT_OK
    assert record_of(out)["variance_mode"] == "grid"
    code, _, err = run(capsys, "analyze", "--x", samples[0], "--y", samples[1], "--variance-mode", "grid")
    assert code == EXIT_INPUT and "--kinds" in err


@pytest.mark.parametrize("content", ["1\n-2\n", "1\nabc\n", ""])
def test_analyze_bad_input(capsys, tmp_path, samples, content):
    bad = tmp_path / "bad.txt"
    bad.write_text(content)
    code, _, err = run(capsys, "analyze", "--x", bad, "--y", samples[1])
    assert code == EXIT_INPUT
    assert err.startswith("nbdiff: error:")


def test_analyze_missing_file_and_bad_method(capsys, samples):
    assert run(capsys, "analyze", "--x", "/nonexistent", "--y", samples[1])[0] == EXIT_INPUT
    assert run(capsys, "analyze", "--x", samples[0], "--y", samples[1], "--method", "gamma")[0] == EXIT_INPUT
    assert run(capsys, "analyze", "--x", samples[0], "--y", samples[1], "--alpha", "1.5")[0] == EXIT_INPUT


def test_analyze_degenerate_strict(capsys):
    args = ["analyze", "--x-values", "0,0,0", "--y-values", "0,0"]
    code, out, err = run(capsys, *args)
    assert code == EXIT_OK and "warning" in err
    assert record_of(out)["warnings"]
    assert run(capsys, *args, "--strict")[0] == EXIT_DEGENERATE


def test_simulate_and_report(capsys, tmp_path):
    cfg = tmp_path / "g.cfg"
    cfg.write_text(SMALL_CFG)
    out_csv = tmp_path / "r.csv"
    code, _, _ = run(capsys, "simulate", cfg, "-o", out_csv)
    assert code == EXIT_OK
    lines = out_csv.read_text().splitlines()
    assert lines[0] == ",".join(COLUMNS)
    assert len(lines) == 1 + 4 * 3

    code, out, _ = run(capsys, "report", out_csv, "--out-dir", tmp_path / "rep")
    assert code == EXIT_OK
    rows = {l.split(",")[0]: l.split(",")[1:] for l in out.splitlines()[1:]}
    assert float(rows["bernstein-normal"][0]) > 0
    assert (tmp_path / "rep" / "length_summary.csv").exists()
    assert len(list((tmp_path / "rep").glob("coverage_*.csv"))) == 6


def test_simulate_rerun_identical(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "g.cfg"
    cfg.write_text(SMALL_CFG)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, "simulate", cfg, "-o", a)[0] == EXIT_OK
    monkeypatch.setenv("NBDIFF_PARALLELISM", "3")
    assert run(capsys, "simulate", cfg, "-o", b)[0] == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    c = tmp_path / "c.csv"
    assert run(capsys, "simulate", cfg, "-o", c, "--seed", "12")[0] == EXIT_OK
    assert c.read_bytes() != a.read_bytes()


def test_simulate_errors(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "g.cfg"
    cfg.write_text("mu_x = 5\n")
    assert run(capsys, "simulate", cfg, "-o", tmp_path / "o.csv")[0] == EXIT_INPUT
    assert run(capsys, "simulate", "nope.cfg", "-o", tmp_path / "o.csv")[0] == EXIT_INPUT
    assert run(capsys, "simulate", "-o", tmp_path / "o.csv")[0] == EXIT_INPUT
    good = tmp_path / "ok.cfg"
    good.write_text(SMALL_CFG)
    assert run(capsys, "simulate", good, "-o", tmp_path / "missing" / "o.csv")[0] == EXIT_INPUT
    monkeypatch.setenv("NBDIFF_PARALLELISM", "zero")
    assert run(capsys, "simulate", good, "-o", tmp_path / "o.csv")[0] == EXIT_INPUT


def test_simulate_strict_on_degenerate(capsys, tmp_path):
    cfg = tmp_path / "d.cfg"
    cfg.write_text(SMALL_CFG.replace("theta_x = 0.025", "theta_x = 0.01").replace("theta_y = 0.05", "theta_y = 0.01")
                   .replace("n_x = 10, 30", "n_x = 3").replace("n_y = 20", "n_y = 3"))
    out_csv = tmp_path / "r.csv"
    assert run(capsys, "simulate", cfg, "-o", out_csv, "--strict")[0] == EXIT_DEGENERATE
    assert run(capsys, "report", out_csv)[0] == EXIT_OK


def test_report_schema_mismatch(capsys, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y\n1,2\n")
    assert run(capsys, "report", bad)[0] == EXIT_INPUT
    empty = tmp_path / "empty.csv"
    empty.write_text(",".join(COLUMNS) + "\n")
    assert run(capsys, "report", empty)[0] == EXIT_INPUT


def test_bundled_config_by_name(capsys, tmp_path, monkeypatch):
    import nbdiff.gridconfig as gc

    # shrink the bundled anchor so the smoke run stays fast
    text = gc.bundled_config("two_sample_anchor.cfg").read_text().replace("trials = 10000", "trials = 20")
    small = tmp_path / "two_sample_anchor.cfg"
    small.write_text(text)
    monkeypatch.chdir(tmp_path)
    assert run(capsys, "simulate", "two_sample_anchor.cfg", "-o", "o.csv")[0] == EXIT_OK


def test_resolve_bundled_name(tmp_path, monkeypatch):
    from nbdiff.cli import _resolve_config

    monkeypatch.chdir(tmp_path)
    assert _resolve_config("figure1.cfg").parent.name == "configs"
