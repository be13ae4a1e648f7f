import csv
import io
import json
import subprocess
import sys

import pytest

from verdant.cli import main
from verdant.pipeline import SWEEP_COLUMNS


def run(*argv):
    return main([str(a) for a in argv])


def body(path):
    """File content with the manifest stripped."""
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        doc = json.loads(text)
        doc.pop("manifest")
        return json.dumps(doc, sort_keys=True)
    return "".join(line for line in text.splitlines(True) if not line.startswith("# manifest:"))


def read_csv(path):
    lines = [ln for ln in path.read_text(encoding="utf-8").splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


@pytest.fixture(scope="module")
def library(tmp_path_factory):
    path = tmp_path_factory.mktemp("lib") / "lib.json"
    assert run("gen-multipliers", "--bitwidth", 8, "--pop", 16, "--gens", 4, "--seed", 1, "--out", path) == 0
    return path


def test_gen_multipliers_contains_exact(library):
    doc = json.loads(library.read_text())
    exact = [v for v in doc["variants"] if v["MRED"] == 0.0]
    assert exact and exact[0]["id"] == "m8_exact" and exact[0]["area"] == 584.0
    assert doc["manifest"]["command"] == "gen-multipliers"
    assert doc["manifest"]["seed"] == 1


def test_gen_multipliers_rerun_identical(library, tmp_path):
    again = tmp_path / "again.json"
    assert run("gen-multipliers", "--bitwidth", 8, "--pop", 16, "--gens", 4, "--seed", 1,
               "--workers", 4, "--out", again) == 0
    assert body(again) == body(library)


def test_gen_multipliers_summary(tmp_path, capsys):
    assert run("gen-multipliers", "--bitwidth", 4, "--pop", 8, "--gens", 2, "--out", tmp_path / "l.json") == 0
    out = capsys.readouterr().out
    assert "variants" in out and "MRED" in out and "area" in out


def test_gen_multipliers_errors(tmp_path, capsys):
    assert run("gen-multipliers", "--bitwidth", 1, "--out", tmp_path / "x.json") == 1
    assert run("gen-multipliers", "--bitwidth", 4, "--out", tmp_path / "missing" / "x.json") == 1
    assert "does not exist" in capsys.readouterr().err


def test_evaluate_exact_sweep(tmp_path):
    out = tmp_path / "sweep.csv"
    assert run("evaluate", "--workload", "vgg16", "--node", 7, "--out", out) == 0
    text = out.read_text(encoding="utf-8")
    assert text.startswith("# manifest: {")
    rows = read_csv(out)
    assert tuple(rows[0]) == SWEEP_COLUMNS
    assert [int(r["pes"]) for r in rows] == [64, 128, 256, 512, 1024, 2048]
    carbon = [float(r["embodied_g"]) for r in rows]
    assert all(a < b for a, b in zip(carbon, carbon[1:]))
    assert {r["variant_id"] for r in rows} == {"m8_exact"}


def test_evaluate_lower_area_variant_below_exact(library, tmp_path):
    doc = json.loads(library.read_text())
    smallest = min(doc["variants"], key=lambda v: v["area"])["id"]
    out = tmp_path / "sweep.csv"
    assert run("evaluate", "--variants", library, "--variant", "m8_exact", "--variant", smallest,
               "--sweep", "64,256,1024", "--out", out) == 0
    rows = read_csv(out)
    exact = {r["pes"]: float(r["embodied_g"]) for r in rows if r["variant_id"] == "m8_exact"}
    approx = {r["pes"]: float(r["embodied_g"]) for r in rows if r["variant_id"] == smallest}
    assert set(exact) == set(approx) == {"64", "256", "1024"}
    assert all(approx[p] < exact[p] for p in exact)


def test_evaluate_missing_inputs(tmp_path, capsys):
    assert run("evaluate", "--variants", tmp_path / "nope.json") == 1
    assert "nope.json" in capsys.readouterr().err
    assert run("evaluate", "--workload", tmp_path / "nope.yaml") == 1
    assert run("evaluate", "--node", 5) == 1


def test_optimize_report(library, tmp_path):
    out = tmp_path / "report.json"
    assert run("optimize", "--variants", library, "--fps-min", 30, "--drop-max", 2.0, "--seed", 3,
               "--gens", 20, "--out", out) == 0
    doc = json.loads(out.read_text())
    assert doc["status"] == "ok"
    assert doc["manifest"]["seed"] == 3
    assert len(doc["history"]) == 21
    assert doc["result"]["feasible"] and doc["result"]["fps"] >= 30
    assert "carbon_reduction_pct" in doc["baseline"]["best_exact"]
    assert doc["best"]["variant"]["id"]


def test_optimize_deterministic_across_workers(library, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    common = ["optimize", "--variants", library, "--seed", 4, "--gens", 15]
    assert run(*common, "--workers", 1, "--out", a) == 0
    assert run(*common, "--workers", 4, "--out", b) == 0
    assert body(a) == body(b)


def test_optimize_zero_drop_uses_exact(library, tmp_path):
    out = tmp_path / "r.json"
    assert run("optimize", "--variants", library, "--drop-max", 0, "--gens", 10, "--out", out) == 0
    assert json.loads(out.read_text())["best"]["variant"]["MRED"] == 0.0


def test_optimize_infeasible_exit_code(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert run("optimize", "--fps-min", 1e9, "--gens", 2, "--pop", 4, "--out", out) == 2
    doc = json.loads(out.read_text())
    assert doc["status"] == "infeasible" and doc["binding"] == "fps_min"
    assert "fps_min" in capsys.readouterr().err


def test_config_env_var(tmp_path, monkeypatch, capsys):
    import yaml
    from importlib import resources

    raw = yaml.safe_load(resources.files("verdant").joinpath("data", "verdant.yaml").read_text())
    del raw["nodes"][14]
    (tmp_path / "verdant.yaml").write_text(yaml.safe_dump(raw))
    monkeypatch.setenv("VERDANT_CONFIG", str(tmp_path))
    assert run("evaluate", "--node", 14, "--sweep", "64") == 1
    assert "verdant.yaml" in capsys.readouterr().err
    out = tmp_path / "s.csv"
    assert run("evaluate", "--node", 7, "--sweep", "64", "--out", out) == 0
    assert str(tmp_path) in out.read_text().splitlines()[0]


def test_netlist_export(library, capsys):
    assert run("netlist", "--bitwidth", 4) == 0
    text = capsys.readouterr().out
    assert text.startswith("B=4\n") and "\nPO " in text


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "verdant", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "verdant" in res.stdout
