import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from hdgauss.cli import main, resolve_threads
from hdgauss.exceptions import ConfigError


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestSubcommands:
    def test_distgrid(self, tmp_path, capsys):
        out = tmp_path / "dg"
        code, stdout, _ = run(["distgrid", "--n", "64,128,256", "--d", "n^0.5", "--marginal", "rademacher",
                               "--samples", "2000", "--seed", "3", "--out-dir", str(out)], capsys)
        assert code == 0
        rows = read_rows(out / "results.csv")
        assert [int(r["d"]) for r in rows] == [8, 11, 16]
        assert all(0.0 <= float(r["distance"]) <= 1.0 for r in rows)
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["seed"] == 3 and len(manifest["configHash"]) == 64
        assert (out / "plot.svg").read_text().startswith("<svg")
        assert json.loads(stdout)["rows"] == 3

    def test_threads_do_not_change_results(self, tmp_path, capsys):
        args = ["distgrid", "--n", "64,128", "--d", "4", "--marginal", "exp-std", "--samples", "20000"]
        run(args + ["--threads", "1", "--out-dir", str(tmp_path / "a")], capsys)
        run(args + ["--threads", "3", "--out-dir", str(tmp_path / "b")], capsys)
        assert (tmp_path / "a/results.csv").read_bytes() == (tmp_path / "b/results.csv").read_bytes()

    def test_rerun_identical(self, tmp_path, capsys):
        args = ["coverage", "--n", "30", "--d", "2", "-B", "50", "-R", "100", "--kind", "wild"]
        run(args + ["--out-dir", str(tmp_path / "a")], capsys)
        run(args + ["--out-dir", str(tmp_path / "b")], capsys)
        assert (tmp_path / "a/results.csv").read_bytes() == (tmp_path / "b/results.csv").read_bytes()
        summary = json.loads((tmp_path / "a/summary.json").read_text())
        assert summary[0]["kind"] == "wild"

    def test_ratefit(self, tmp_path, capsys):
        out = tmp_path / "rf"
        code, _, _ = run(["ratefit", "--n", "64,128,256", "--d", "4", "--samples", "2000",
                          "--marginal", "exp-std", "--out-dir", str(out)], capsys)
        assert code == 0
        fit = json.loads((out / "fit.json").read_text())
        assert "slope" in fit["distanceFit"]
        code, stdout, _ = run(["ratefit", "--input", str(out / "results.csv")], capsys)
        assert code == 0 and json.loads(stdout)["slope"] == fit["distanceFit"]["slope"]

    def test_counterexample(self, tmp_path, capsys):
        out = tmp_path / "ce"
        code, _, _ = run(["counterexample", "--dgp", "nagaev", "--n", "1000", "--d", "nagaev",
                          "--samples", "10000", "--out-dir", str(out)], capsys)
        assert code == 0
        row = read_rows(out / "results.csv")[0]
        assert row["statistic"] == "halfspace-gap-at-0" and float(row["c0"]) > 0

    def test_boundreport_grid(self, tmp_path, capsys):
        out = tmp_path / "br"
        code, _, _ = run(["boundreport", "--n", "50", "--d", "3", "--out-dir", str(out)], capsys)
        assert code == 0
        report = json.loads((out / "report.json").read_text())
        assert report[0]["n"] == 50

    def test_anticonc(self, tmp_path, capsys):
        out = tmp_path / "ac"
        code, _, _ = run(["anticonc", "--dims", "2", "--eps", "0.1", "--random-diag", "0",
                          "--out-dir", str(out)], capsys)
        assert code == 0
        rows = read_rows(out / "results.csv")
        assert len(rows) == 1 and 0 < float(rows[0]["ratio"]) < 1

    def test_ballprob(self, tmp_path, capsys):
        p = tmp_path / "s.csv"
        p.write_text("dim=2\n1,0\n0,1\n")
        code, stdout, _ = run(["ballprob", "--sigma", str(p), "-r", "1"], capsys)
        assert code == 0
        assert json.loads(stdout)["value"] == pytest.approx(1 - np.exp(-0.5), abs=1e-8)


class TestErrors:
    def test_config_error_exit_code(self, tmp_path, capsys):
        cfg = tmp_path / "bad.ini"
        cfg.write_text("[experiment]\nkind = distance-grid\nbogus = 1\n")
        code, _, err = run(["distgrid", "--config", str(cfg)], capsys)
        assert code == 2 and "line 3" in err

    def test_kind_mismatch(self, tmp_path, capsys):
        cfg = tmp_path / "c.ini"
        cfg.write_text("[experiment]\nkind = coverage\n[grid]\nn = 10\nd = 2\n")
        code, _, _ = run(["distgrid", "--config", str(cfg)], capsys)
        assert code == 2

    def test_failure_writes_error_file(self, tmp_path, capsys):
        out = tmp_path / "fail"
        code, _, err = run(["counterexample", "--dgp", "iid-marginal", "--n", "10", "--d", "2",
                            "--out-dir", str(out)], capsys)
        assert code == 2
        assert "Traceback" in (out / "error.txt").read_text()

    def test_threads_env(self, monkeypatch):
        monkeypatch.setenv("HDGAUSS_THREADS", "3")
        assert resolve_threads(None) == 3
        assert resolve_threads(2) == 2
        monkeypatch.setenv("HDGAUSS_THREADS", "x")
        with pytest.raises(ConfigError):
            resolve_threads(None)
        with pytest.raises(ConfigError):
            resolve_threads(0)

    def test_module_entry_point(self):
        res = subprocess.run([sys.executable, "-m", "hdgauss", "--help"], capture_output=True, text=True)
        assert res.returncode == 0 and "distgrid" in res.stdout
