import csv
import io
import json
import math
import subprocess
import sys

import pytest

from anchordeploy import cli
from anchordeploy.errors import InvariantViolation


def run(capsys, *args):
    code = cli.main(list(args))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_optimal_iso(capsys):
    code, out, _ = run(capsys, "--ssp", "iso:1500", "--depth", "3000", "optimal")
    assert code == 0
    (r,) = rows(out)
    assert float(r["alpha_star_deg"]) == pytest.approx(49.45, abs=0.01)
    assert float(r["radius_m"]) == pytest.approx(3000 / math.tan(math.radians(49.4497)), abs=0.5)
    assert len(r["betas_deg"].split()) == 5


def test_optimal_ssp1(capsys):
    code, out, _ = run(capsys, "--depth", "2500", "optimal")
    assert code == 0
    assert abs(float(rows(out)[0]["alpha_star_deg"]) - 48.4) <= 2.0


def test_missing_file(capsys, tmp_path):
    missing = tmp_path / "missing_cast.txt"
    code, _, err = run(capsys, "--ssp", str(missing), "optimal")
    assert code == 1
    assert "missing_cast.txt" in err


def test_file_profile(capsys, tmp_path):
    f = tmp_path / "cast.txt"
    f.write_text("# depth speed\n0 1500\n2000 1500\n", encoding="utf-8")
    code, out, _ = run(capsys, "--ssp", str(f), "--depth", "1000", "optimal")
    assert code == 0
    assert float(rows(out)[0]["alpha_star_deg"]) == pytest.approx(49.45, abs=0.01)


def test_sweep_table3(capsys):
    code, out, _ = run(capsys, "--ssp", "builtin:experiment", "--depth", "3070", "sweep", "--alphas", "62.4727,31.5499")
    assert code == 0
    small, large = rows(out)
    assert float(small["tr_bound"]) < float(large["tr_bound"])


def test_sweep_iso_ratio(capsys):
    code, out, _ = run(capsys, "--ssp", "iso:1500", "--depth", "3070", "sweep", "--alphas", "62.4727 31.5499")
    a, b = rows(out)
    # hand value of (1/u)(4/(1-u) + 1/u) at u = sin^2 of each angle
    def form(deg):
        u = math.sin(math.radians(deg)) ** 2
        return (4 / (1 - u) + 1 / u) / u
    assert form(62.4727) == pytest.approx(25.40, abs=0.05)
    assert form(31.5499) == pytest.approx(33.46, abs=0.05)
    assert float(a["tr_bound"]) / float(b["tr_bound"]) == pytest.approx(form(62.4727) / form(31.5499), rel=1e-9)


def test_sweep_invalid_range(capsys):
    assert run(capsys, "sweep", "--alphas", "")[0] == 1
    assert run(capsys, "sweep", "--alpha-min", "50", "--alpha-max", "40")[0] == 1
    assert run(capsys, "sweep", "--alpha-step", "0")[0] == 1


def test_sweep_j(capsys):
    code, out, _ = run(capsys, "sweep", "--variable", "J", "--j-list", "3,6")
    r3, r6 = rows(out)
    assert float(r3["tr_bound"]) == pytest.approx(2 * float(r6["tr_bound"]), rel=1e-12)


def test_sweep_with_trials(capsys):
    code, out, _ = run(capsys, "sweep", "--alphas", "46.5", "--trials", "2")
    assert code == 0
    assert "mean_error" in rows(out)[0]


def test_ratio_check_iso(capsys):
    code, out, _ = run(capsys, "--ssp", "iso:1500", "--depth", "1000", "ratio-check", "--theta-step", "5")
    assert code == 0
    assert all(float(r["ratio"]) == pytest.approx(1.0, abs=1e-12) for r in rows(out))


def test_ratio_check_ssp1(capsys):
    code, out, _ = run(capsys, "ratio-check", "--theta-min", "20", "--theta-max", "80", "--theta-step", "1")
    vals = [float(r["ratio"]) for r in rows(out)]
    assert len(vals) == 61
    assert max(abs(v - 1) for v in vals) > 0


def test_ratio_check_too_deep(capsys):
    code, _, err = run(capsys, "--depth", "9000", "ratio-check")
    assert code == 1 and "exceeds" in err


def test_simulate_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for f in (a, b):
        assert run(capsys, "--seed", "7", "--out", str(f), "simulate", "--trials", "4", "--alphas", "30,46.5")[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().splitlines()[0] == "variable,mean,std,min,max,failures"


def test_simulate_zero_gamma(capsys):
    code, out, _ = run(capsys, "--gamma", "0", "simulate", "--mode", "nodes", "--j-list", "3,5", "--trials", "2")
    assert code == 0
    assert all(float(r["mean"]) < 0.5 for r in rows(out))


def test_simulate_random(capsys):
    code, out, _ = run(capsys, "simulate", "--mode", "random", "--j-list", "4", "--trials", "3")
    assert code == 0 and rows(out)[0]["variable"] == "4"


def test_json_matches_csv_fields(capsys):
    _, out_csv, _ = run(capsys, "-J", "3", "layout")
    _, out_json, _ = run(capsys, "-J", "3", "--format", "json", "layout")
    recs = json.loads(out_json)
    assert list(recs[0]) == list(rows(out_csv)[0])
    assert len(recs) == 3


def test_trace_and_profile(capsys):
    code, out, _ = run(capsys, "--ssp", "iso:1500", "--depth", "1000", "trace", "--theta0", "45")
    (r,) = rows(out)
    assert float(r["h_m"]) == pytest.approx(1000, rel=1e-12)
    code, out, _ = run(capsys, "profile", "--step", "1000")
    assert [r["depth_m"] for r in rows(out)] == ["0.0", "1000.0", "2000.0", "3000.0", "4000.0", "5000.0"]


def test_bad_iso_spec(capsys):
    assert run(capsys, "--ssp", "iso:fast", "optimal")[0] == 1


def test_usage_error_exit(capsys):
    assert run(capsys, "no-such-command")[0] == 1


def test_help_exit(capsys):
    code, out, _ = run(capsys, "simulate", "--help")
    assert code == 0 and "variable, mean, std, min, max, failures" in out


def test_invariant_exit_code(capsys, monkeypatch):
    def boom(*a, **k):
        raise InvariantViolation("broken")

    monkeypatch.setattr(cli, "optimal_deployment", boom)
    code, _, err = run(capsys, "optimal")
    assert code == 2 and "broken" in err


def test_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "anchordeploy.cli", "--ssp", "iso:1500", "--depth", "1000", "optimal"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("alpha_star_deg,")
