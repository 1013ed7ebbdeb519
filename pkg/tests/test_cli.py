import json

import pytest
from click.testing import CliRunner

from supercohom.algebra import build, from_json, to_json
from supercohom.cli import main
from supercohom.modules import module_to_json, natural


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *args):
    return runner.invoke(main, list(args), catch_exceptions=False)


def test_build_outputs_round_tripping_json(runner):
    res = invoke(runner, "build", "--family", "gl", "--m", "1", "--n", "1")
    assert res.exit_code == 0
    data = json.loads(res.output)
    assert json.dumps(data, sort_keys=True, ensure_ascii=False, indent=2) + "\n" == res.output
    assert to_json(from_json(res.output)) == to_json(build("GL", (1, 1)))


def test_validate_exit_codes(runner, tmp_path):
    assert invoke(runner, "validate", "--family", "osp", "--m", "1", "--n", "2").exit_code == 0
    assert invoke(runner, "validate", "--family", "sl", "--m", "2", "--n", "2").exit_code == 1


def test_missing_parameters_are_usage_errors(runner):
    res = runner.invoke(main, ["build", "--family", "psl"])
    assert res.exit_code != 0


@pytest.mark.parametrize("args", [
    ("tables", "--table", "3", "--max-size", "6"),
    ("tables", "--table", "1", "--family", "gl", "--m", "2", "--n", "2", "--max-degree", "8"),
    ("tables", "--table", "4", "--family", "psl", "--n", "2"),
])
def test_table_reproduction_matches(runner, args):
    res = invoke(runner, *args)
    assert res.exit_code == 0, res.output
    assert "MISMATCH" not in res.output
    assert "MATCH" in res.output


def test_tables_write_json_and_text(runner, tmp_path):
    res = invoke(runner, "tables", "--table", "4", "--family", "gl", "--m", "2", "--n", "3", "--out", str(tmp_path))
    assert res.exit_code == 0
    assert (tmp_path / "table4.json").exists()
    text = (tmp_path / "table4.txt").read_text(encoding="utf-8")
    assert "MATCH" in text


def test_invariants_command(runner):
    res = invoke(runner, "invariants", "--family", "gl", "--m", "1", "--n", "1", "--max-degree", "4")
    assert res.exit_code == 0
    rep = json.loads(res.output)
    assert rep["computed"] == [1, 0, 1, 0, 1]
    assert rep["match"]


def test_detect_command(runner):
    res = invoke(runner, "detect", "--family", "gl", "--m", "2", "--n", "2")
    assert res.exit_code == 0
    rep = json.loads(res.output)
    assert rep["dims"]["lieH"] == 2
    assert rep["checks"]["table4"]


def test_cohom_commands(runner):
    res = invoke(runner, "cohom", "--family", "gl", "--m", "1", "--n", "1", "--max-degree", "5")
    assert json.loads(res.output)["dims"] == [1, 0, 1, 0, 1, 0]
    res = invoke(runner, "cohom", "--family", "gl", "--m", "1", "--n", "1", "--pair", "e", "--coeff", "regular",
                 "--max-degree", "3", "--annihilator")
    rep = json.loads(res.output)
    assert rep["dims"][1:] == [0, 0, 0]
    assert rep["ideal"]["generators"]


def test_cohom_with_module_file(runner, tmp_path):
    path = tmp_path / "nat.json"
    path.write_text(module_to_json(natural(build("GL", (1, 1)))), encoding="utf-8")
    res = invoke(runner, "cohom", "--family", "gl", "--m", "1", "--n", "1", "--coeff", str(path), "--max-degree", "2")
    assert res.exit_code == 0
    assert json.loads(res.output)["d_squared_zero"]


def test_module_validate(runner, tmp_path):
    good = tmp_path / "good.json"
    good.write_text(module_to_json(natural(build("GL", (1, 1)))), encoding="utf-8")
    assert invoke(runner, "module", "validate", str(good)).exit_code == 0
    raw = json.loads(good.read_text(encoding="utf-8"))
    raw["action"] = [row for row in raw["action"] if row[0] != 0]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(raw), encoding="utf-8")
    assert invoke(runner, "module", "validate", str(bad)).exit_code == 2


def test_rankvar_command(runner):
    res = invoke(runner, "rankvar", "--family", "gl", "--m", "2", "--n", "2", "--module", "trivial", "--seed", "3")
    assert res.exit_code == 0
    assert json.loads(res.output)["estimated_dim"] == 2


def test_atyp_command(runner):
    res = invoke(runner, "atyp", "--family", "gl", "--m", "1", "--n", "1")
    assert res.exit_code == 0
    assert json.loads(res.output)["atypicality"] == 1


@pytest.mark.parametrize("args", [
    ("rankvar", "--family", "gl", "--m", "2", "--n", "2", "--module", "natural", "--seed", "9"),
    ("invariants", "--family", "q", "--n", "3", "--max-degree", "6", "--seed", "4"),
    ("detect", "--family", "osp", "--m", "3", "--n", "2", "--which", "F"),
])
def test_identical_runs_are_byte_identical(runner, args):
    first = invoke(runner, *args).output
    second = invoke(runner, *args).output
    assert first == second
    assert json.loads(first) == json.loads(json.dumps(json.loads(first)))


def test_prime_environment_override(runner):
    res = invoke(runner, "--prime", "1000003", "invariants", "--family", "gl", "--m", "1", "--n", "1",
                 "--max-degree", "4")
    assert res.exit_code == 0
    assert json.loads(res.output)["match"]


def test_pipeline_gl11(runner, tmp_path):
    res = invoke(runner, "pipeline", "--family", "gl", "--m", "1", "--n", "1", "--out", str(tmp_path))
    assert res.exit_code == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text(encoding="utf-8"))
    names = [s["name"] for s in manifest["stages"]]
    assert names == ["build", "validate", "invariants", "detect", "cohom", "rankvar"]
    for stage in manifest["stages"]:
        json.loads((tmp_path / stage["file"]).read_text(encoding="utf-8"))


def test_pipeline_psl22_skips_polar_path(runner, tmp_path):
    res = invoke(runner, "pipeline", "--family", "psl", "--n", "2", "--out", str(tmp_path))
    assert res.exit_code == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text(encoding="utf-8"))
    assert sorted(s["name"] for s in manifest["stages"]) == ["detect", "invariants"]


def test_pipeline_fails_at_build(runner, tmp_path):
    res = runner.invoke(main, ["pipeline", "--family", "sl", "--m", "2", "--n", "2", "--out", str(tmp_path)])
    assert res.exit_code == 1
    assert "stage build failed" in res.output
