from __future__ import annotations

import csv
import io
import json

import pytest

from chroma_mst.cli import EXIT_IO, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, main


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_sample_and_reuse(tmp_path, capsys):
    path = tmp_path / "pts.csv"
    assert _run(capsys, "sample", "--n", "40", "--seed", "3", "--out", str(path))[0] == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(path.read_text())))
    assert len(rows) == 40 and set(rows[0]) == {"x", "y", "color"}
    code, out, _ = _run(capsys, "lunar", "--input", str(path))
    assert code == EXIT_OK and json.loads(out)["cost"] > 0


def test_persist_writes_diagrams(tmp_path, capsys):
    diag, cells = tmp_path / "d.csv", tmp_path / "c.csv"
    code, out, _ = _run(capsys, "persist", "--n", "100", "--topology", "torus", "--out", str(diag), "--cells", str(cells))
    assert code == EXIT_OK
    summary = json.loads(out)
    assert summary["h1_essential"] == 2
    assert summary["h0_norm"] == pytest.approx(summary["emst_length"] / 2)
    assert diag.read_text().startswith("degree,birth,death")
    assert cells.exists()


def test_lunar_events(tmp_path, capsys):
    ev = tmp_path / "ev.csv"
    code, out, _ = _run(capsys, "lunar", "--n", "30", "--lunar-mode", "exact", "--events", str(ev))
    assert code == EXIT_OK and json.loads(out)["mode"] == "exact"
    assert ev.read_text().startswith("radius,kind,indices")


def test_sixpack_from_norms_and_points(capsys):
    code, out, _ = _run(capsys, "sixpack", "--norms", "2", "1", "1.5", "0.5", "0.8")
    assert code == EXIT_OK and json.loads(out)["cok1"] == pytest.approx(0.3)
    code, _, err = _run(capsys, "sixpack", "--norms", "1", "1", "1.5", "0.5", "0.8")
    assert code == EXIT_NUMERIC and "negative" in err
    code, out, _ = _run(capsys, "sixpack", "--n", "120", "--seed", "2")
    rec = json.loads(out)
    assert rec["cod0"] == pytest.approx(rec["emst_length"] / 2)


def test_analytic(capsys):
    code, out, _ = _run(capsys, "analytic")
    assert code == EXIT_OK
    t = json.loads(out)
    assert t["theorem31"]["lower_bound"] == pytest.approx(0.6289, abs=1e-4)


def test_estimate_small(tmp_path, capsys):
    code, out, _ = _run(
        capsys, "estimate", "--n", "50", "100", "--trials", "2", "--topology", "both", "--out", str(tmp_path), "--no-plots"
    )
    assert code == EXIT_OK
    assert set(json.loads(out)["estimates"]) == {"square", "torus"}
    assert (tmp_path / "results.csv").exists() and not (tmp_path / "plot_square.svg").exists()


def test_estimate_config_file(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_values": [40, 80], "trials": 2, "topologies": ["square"], "plots": False}))
    code, _, _ = _run(capsys, "estimate", "--config", str(cfg), "--out", str(tmp_path / "o"))
    assert code == EXIT_OK
    assert json.loads((tmp_path / "o" / "config.json").read_text())["n_values"] == [40, 80]


def test_exit_codes(tmp_path, capsys):
    assert _run(capsys, "bogus")[0] == EXIT_USAGE
    assert _run(capsys)[0] == EXIT_USAGE
    assert _run(capsys, "lunar", "--n", "10", "20")[0] == EXIT_USAGE
    assert _run(capsys, "sample", "--n", "5", "--p", "1.5")[0] == EXIT_USAGE
    assert _run(capsys, "estimate", "--config", str(tmp_path / "missing.json"))[0] == EXIT_IO
    bad = tmp_path / "bad.json"
    bad.write_text('{"trials": 0}')
    assert _run(capsys, "estimate", "--config", str(bad))[0] == EXIT_USAGE
    assert _run(capsys, "persist", "--n", "2", "--topology", "torus")[0] == EXIT_NUMERIC
    assert _run(capsys, "lunar", "--input", str(tmp_path / "nope.csv"))[0] == EXIT_IO
