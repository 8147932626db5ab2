import io
import json
import os
import subprocess
import sys

import pytest

from ovlab import cli
from ovlab import catalog as cat
from ovlab import relstruct as rs


def run(argv, cwd):
    out = io.StringIO()
    old = os.getcwd()
    os.chdir(cwd)
    try:
        code = cli.run(argv, stdout=out)
    finally:
        os.chdir(old)
    return code, out.getvalue()


def stripped(text):
    obj = json.loads(text)
    obj.pop("metadata")
    return obj


@pytest.fixture
def files(tmp_path):
    (tmp_path / "K43.json").write_text(json.dumps(cat.complete(4, 3).to_json()))
    (tmp_path / "twograph4.json").write_text(json.dumps(rs.hypergraph(4, 3, [(1, 2, 3), (1, 2, 4)]).to_json()))
    return tmp_path


def test_check_rejects_tetrahedron(files):
    code, out = run(["class", "check", "--class", "catalog:tet_free", "--in", "K43.json", "-o", "r.json"], files)
    assert code == 1
    rep = json.loads((files / "r.json").read_text())
    assert rep["verdict"] == "negative"
    assert rep["result"]["witness"]["embedding"] == [1, 2, 3, 4]


def test_steiner_gen_then_verify(files):
    code, _ = run(["steiner", "gen", "-n", "40", "-r", "3", "-k", "2", "-J", "3", "--epsilon", "0.3",
                   "--seed", "7", "-o", "sys.json"], files)
    assert code == 0
    code, out = run(["steiner", "verify", "--in", "sys.json"], files)
    assert code == 0 and out.strip() == "verified"


def test_kaygraph_count_prints_eight(files):
    code, out = run(["kaygraph", "count", "--size", "4", "-k", "2", "--in", "twograph4.json"], files)
    assert code == 0 and out.strip() == "8"


def test_usage_errors_exit_two(files):
    assert run(["struct", "canon", "--in", "missing.json"], files)[0] == 2
    (files / "bad.json").write_text("{not json")
    assert run(["struct", "canon", "--in", "bad.json"], files)[0] == 2
    assert run(["class", "check", "--class", "catalog:nosuch", "--in", "K43.json"], files)[0] == 2
    with pytest.raises(SystemExit) as exc:
        cli.run(["steiner", "gen"])
    assert exc.value.code == 2


def test_validate_reports_violation(files):
    obj = cat.complete(4, 3).to_json()
    obj["relations"]["R"].append([1, 1, 2])
    (files / "bad.json").write_text(json.dumps(obj))
    code, out = run(["struct", "validate", "--in", "bad.json"], files)
    assert code == 1 and "repeated" in out


def test_json_output_round_trips(files):
    code, out = run(["struct", "canon", "--in", "catalog:petal", "--json"], files)
    assert code == 0
    obj = json.loads(out)
    canon = rs.Structure.from_json(obj["result"]["canonical"])
    assert rs.is_isomorphic(canon, cat.petal(4, 3))
    assert json.loads(json.dumps(obj)) == obj


RANDOMIZED = [
    ["steiner", "gen", "-n", "30", "--seed", "3"],
    ["overlap", "place", "--class", "catalog:tet_free", "--H1", "catalog:hyperedge", "--H2", "catalog:empty",
     "-k", "2", "--n-grid", "20", "--trials", "10", "--adversary-steps", "20", "--seed", "4"],
    ["amalg", "sample", "--class", "catalog:hypergraphs", "--ground", "catalog:petal?n=3", "--seed", "5"],
    ["kaygraph", "concentrate", "--A", "catalog:hyperedge", "--n-grid", "10", "--trials", "3", "--seed", "6"],
]


@pytest.mark.parametrize("argv", RANDOMIZED, ids=lambda a: " ".join(a[:2]))
def test_randomized_commands_are_deterministic(argv, files):
    _, a = run(argv + ["--json"], files)
    _, b = run(argv + ["--json"], files)
    assert stripped(a) == stripped(b)
    assert json.dumps(stripped(a), sort_keys=True) == json.dumps(stripped(b), sort_keys=True)
    assert "seed" in json.loads(a)


def test_seed_from_environment(files, monkeypatch):
    monkeypatch.setenv("OVLAB_SEED", "3")
    _, a = run(["steiner", "gen", "-n", "30", "--json"], files)
    monkeypatch.delenv("OVLAB_SEED")
    _, b = run(["steiner", "gen", "-n", "30", "--seed", "3", "--json"], files)
    ra, rb = stripped(a), stripped(b)
    assert ra["seed"] == 3
    assert ra["result"] == rb["result"]


def test_separate_processes_agree(files):
    cmd = [sys.executable, "-m", "ovlab", "steiner", "gen", "-n", "30", "--seed", "11", "--json"]
    a = subprocess.run(cmd, capture_output=True, text=True, cwd=files, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, text=True, cwd=files, check=True).stdout
    assert stripped(a) == stripped(b)


def test_certify_exit_codes(files):
    assert run(["overlap", "certify", "--class", "catalog:tet_free", "-k", "2"], files)[0] == 0
    assert run(["overlap", "certify", "--class", "catalog:kaygraph", "-k", "2"], files)[0] == 1


def test_dichotomy_exit_codes(files):
    assert run(["amalg", "dichotomy", "--class", "catalog:hypergraphs"], files)[0] == 0
    code, out = run(["amalg", "dichotomy", "--class", "catalog:tet_free"], files)
    assert code == 1 and "non-hyperedge" in out


def test_cre_commands(files):
    code, out = run(["cre", "gap", "--class", "catalog:kaygraph", "--expansion", "catalog:graphs",
                     "--H1", "catalog:hyperedge", "--H2", "catalog:empty", "--Hp", "catalog:complete?n=3&r=2",
                     "--levels", "3", "--export-lp", "lp.txt", "--json"], files)
    assert code == 0
    assert json.loads(out)["result"]["max_over_orderings"] == ["2/3"]
    assert (files / "lp.txt").read_text().startswith("\\ level 3")
    code, out = run(["cre", "mc", "--class", "catalog:hypergraphs"], files)
    assert code == 0 and out.startswith("0 minimal")
    code, out = run(["cre", "keisler", "--class", "catalog:kaygraph", "--level", "3"], files)
    assert code == 0 and out.strip().endswith("1/2")


def test_class_commands(files):
    assert run(["class", "catalog"], files)[0] == 0
    code, out = run(["class", "catalog", "--name", "petal"], files)
    assert code == 0 and "5 vertices" in out
    assert run(["class", "exc", "--class", "catalog:graphs"], files)[0] == 2


def test_amalg_commands(files):
    code, out = run(["amalg", "find", "--class", "catalog:tet_free", "-n", "4", "--base-cap", "0", "-o", "p.json"], files)
    assert code == 1
    rep = json.loads((files / "p.json").read_text())
    (files / "prob.json").write_text(json.dumps(rep["result"]["failing"]))
    assert run(["amalg", "solve", "--class", "catalog:tet_free", "--problem", "prob.json"], files)[0] == 1
    assert run(["amalg", "solve", "--class", "catalog:hypergraphs", "--problem", "prob.json"], files)[0] == 0


def test_struct_and_kaygraph_commands(files):
    code, out = run(["struct", "embed", "--H", "catalog:hyperedge", "--G", "K43.json"], files)
    assert code == 0 and out.startswith("24 ")
    code, out = run(["kaygraph", "reduct", "--in", "catalog:complete?n=4&r=2"], files)
    assert code == 0
    code, out = run(["kaygraph", "fraction", "--A", "catalog:hyperedge", "--Astar", "catalog:complete?n=3&r=2",
                     "--B", "twograph4.json"], files)
    assert code == 0 and "1/4" in out
