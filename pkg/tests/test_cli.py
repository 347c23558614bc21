import csv
import json
import math
import shutil
from pathlib import Path

import numpy as np
import pytest

from nematic_or.cli import EXIT_CONFIG, EXIT_OK, main
from nematic_or.io import MANIFEST, read_manifest, read_table

REPRO = Path(__file__).resolve().parents[1] / "reproductions"


def run(tmp_path, *argv, name="out"):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    return code, out


def repro(name):
    return str(REPRO / f"{name}.json")


def test_relax_multiplicity_two_tables(tmp_path):
    code, out = run(tmp_path, "relax", "--config", repro("figS1_multiplicity"))
    assert code == EXIT_OK
    man = read_manifest(out / MANIFEST)
    assert man["status"] == "ok" and len(man["runs"]) == 2
    centres = []
    for i in (0, 1):
        t = read_table(out / f"profile_{i}.csv")
        centres.append(t["s"][t["y"].size // 2])
        assert "energy" in read_table(out / f"trace_{i}.csv")
    assert centres[0] < 1e-2 and centres[1] > 0.1
    for f in man["files"]:
        assert (out / f).is_file()


def test_newton_flags_and_stability(tmp_path):
    code, out = run(
        tmp_path, "newton", "--seed", "twist", "--l-star", "1e-3", "--l2", "1e-3",
        "--p-x", "-1", "--omega", "-0.25", "--n-cells", "128", "--max-iter", "60",
    )
    assert code == EXIT_OK
    run0 = read_manifest(out / MANIFEST)["runs"][0]
    assert run0["converged"] and run0["residual"] < 1e-10
    assert run0["stability"]["verdict"] == "stable"


def test_invalid_config_exits_2_and_writes_nothing(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"model": {"lstar": 1e-3}}))
    code, out = run(tmp_path, "relax", "--config", str(cfg))
    assert code == EXIT_CONFIG and not out.exists()
    code, out = run(tmp_path, "relax", "--seed", "spiral")
    assert code == EXIT_CONFIG and not out.exists()


def test_existing_output_needs_force(tmp_path):
    args = ("asymptotic", "--mode", "eps_to_0", "--omega", "0.25", "--n-cells", "16")
    assert run(tmp_path, *args)[0] == EXIT_OK
    code, out = run(tmp_path, *args)
    assert code == EXIT_CONFIG
    assert run(tmp_path, *args, "--force")[0] == EXIT_OK


def test_file_seed_converges_immediately(tmp_path):
    _, first = run(tmp_path, "newton", "--seed", "passive_or", "--l-star", "1e-2",
                   "--p-x", "-1", "--omega", "-0.25", "--n-cells", "64", "--no-stability", name="a")
    code, out = run(tmp_path, "newton", "--seed", "file", "--seed-path", str(first / "profile.csv"),
                    "--l-star", "1e-2", "--p-x", "-1", "--omega", "-0.25", "--n-cells", "64",
                    "--no-stability", name="b")
    assert code == EXIT_OK
    run0 = read_manifest(out / MANIFEST)["runs"][0]
    assert run0["converged"] and run0["iterations"] == 0
    assert (first / "profile.csv").read_bytes() == (out / "profile.csv").read_bytes()


def test_asymptotic_small_eps_has_zero_centre(tmp_path):
    code, out = run(tmp_path, "asymptotic", "--mode", "eps_to_0", "--omega", "0.25", "--n-cells", "64")
    assert code == EXIT_OK
    t = read_table(out / "profile.csv")
    assert t["s"][32] == 0.0


def test_asymptotic_passive_or_unforced(tmp_path):
    code, out = run(tmp_path, "asymptotic", "--mode", "passive_or", "--k", "0", "--p-x", "0",
                    "--omega", "-0.25", "--l-star", "1e-3", "--n-cells", "64")
    assert code == EXIT_OK
    t = read_table(out / "profile.csv")
    y, th = t["y"], t["theta"]
    assert np.allclose(th[y < 0], 0.25 * math.pi) and np.allclose(th[y > 0], -0.25 * math.pi)
    assert np.all(t["u"] == 0.0)


def test_active_zero_gamma_matches_passive(tmp_path):
    common = ("--k", "1", "--p-x", "-2", "--omega", "-0.25", "--l-star", "1e-3", "--n-cells", "64")
    run(tmp_path, "asymptotic", "--mode", "passive_or", *common, name="p")
    run(tmp_path, "asymptotic", "--mode", "active_or_explicit", "--gamma-act", "0", "--regime", "active",
        *common, name="a")
    assert (tmp_path / "p" / "profile.csv").read_bytes() == (tmp_path / "a" / "profile.csv").read_bytes()


def test_compare_self_is_zero(tmp_path):
    common = ("--k", "1", "--p-x", "-1", "--omega", "-0.25", "--l-star", "1e-2", "--n-cells", "64")
    _, prof = run(tmp_path, "asymptotic", "--mode", "passive_or", *common, name="p")
    code, out = run(tmp_path, "compare", "--mode", "passive_or", "--numeric", str(prof / "profile.csv"),
                    *common, name="c")
    assert code == EXIT_OK
    norms = read_manifest(out / MANIFEST)["norms"]
    for name in ("q11", "q12", "u"):
        assert norms[name]["sup"] == 0.0
    assert norms["s"]["sup"] < 1e-15
    assert list(read_table(out / "errors.csv")) == ["y", "dq11", "dq12", "ds_half", "du"]


def test_compare_without_numeric_is_usage_error(tmp_path):
    code, _ = run(tmp_path, "compare", "--mode", "passive_or")
    assert code == EXIT_CONFIG


def test_large_forcing_compare_runs(tmp_path):
    cfg = json.loads((REPRO / "fig13_solve_large.json").read_text())
    cfg["grid"] = {"n_cells": 256}
    path = tmp_path / "solve.json"
    path.write_text(json.dumps(cfg))
    code, solved = run(tmp_path, "newton", "--config", str(path), "--no-stability", name="s")
    assert code == EXIT_OK
    code, out = run(tmp_path, "compare", "--config", repro("fig13_compare_large"),
                    "--numeric", str(solved / "profile.csv"), name="c")
    assert code == EXIT_OK
    norms = read_manifest(out / MANIFEST)["norms"]
    assert norms["u"]["sup"] > 0.05


def test_empty_sweep(tmp_path):
    cfg = tmp_path / "empty.json"
    cfg.write_text(json.dumps({"sweep": {"points": []}}))
    code, out = run(tmp_path, "sweep", "--config", str(cfg))
    assert code == EXIT_OK
    assert (out / "summary.csv").read_text().splitlines() == ["index,s_min,theta_jump,is_or_type,"
                                                              "rightmost_re,verdict,converged,error"]


def test_l_star_sweep_summary(tmp_path):
    code, out = run(tmp_path, "sweep", "--config", repro("fig08_wall_deepening"), "--no-stability")
    assert code == EXIT_OK
    with open(out / "summary.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [float(r["l_star"]) for r in rows] == [5e-4, 3e-4, 1e-4]
    s = [float(r["s_min"]) for r in rows]
    assert s[0] > s[1] > s[2]
    for j in range(3):
        assert (out / f"point_{j:03d}" / "profile.csv").is_file()


def test_cold_relax_sweep(tmp_path):
    cfg = json.loads((REPRO / "fig04_passive_stable.json").read_text())
    cfg["grid"] = {"n_cells": 64}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    code, out = run(tmp_path, "sweep", "--config", str(path))
    assert code == EXIT_OK
    with open(out / "summary.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["verdict"] for r in rows] == ["stable"] * 3


def test_runs_are_deterministic(tmp_path):
    args = ("relax", "--config", repro("figS1_multiplicity"), "--n-cells", "50")
    run(tmp_path, *args, name="a")
    run(tmp_path, *args, name="b")
    for f in ("profile_0.csv", "profile_1.csv", "trace_0.csv", "trace_1.csv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_force_clears_previous_outputs(tmp_path):
    run(tmp_path, "relax", "--config", repro("figS1_multiplicity"), "--n-cells", "20", "--max-steps", "3")
    code, out = run(tmp_path, "asymptotic", "--mode", "eps_to_0", "--n-cells", "20", "--force")
    assert code == EXIT_OK
    assert sorted(p.name for p in out.iterdir()) == ["manifest.json", "profile.csv"]



def test_console_script_version():
    exe = shutil.which("nematic-or")
    if exe is None:
        pytest.skip("console script not on PATH")
    import subprocess
    res = subprocess.run([exe, "--version"], capture_output=True, text=True, check=True)
    assert res.stdout.startswith("nematic-or ")
