import json

import pytest

from cohap.cli import main
from cohap.plantree import CSV_HEADER, from_json


@pytest.fixture()
def inst_file(tmp_path):
    path = tmp_path / "inst.json"
    assert main(["gen", "--seed", "7", "--out", str(path)]) == 0
    return path


@pytest.fixture()
def tree_file(tmp_path, inst_file):
    path = tmp_path / "tree.json"
    assert main(["plan", "--instance", str(inst_file),
                 "--out", str(path)]) == 0
    return path


def test_gen_axis(tmp_path, capsys):
    assert main(["gen", "--axis", "P", "--size", "3"]) == 0
    doc = json.loads(capsys.readouterr().out)
    parts = [c for c, s in doc["constants"].items() if s == "part"]
    assert len(parts) == 4


def test_gen_bad_params():
    assert main(["gen", "--feet", "0", "--unsafe", "1"]) == 1


def test_plan_writes_valid_tree(tree_file):
    tree = from_json(tree_file.read_text())
    assert tree.root == 0
    assert tree.check_structure() == []


def test_plan_deterministic_bytes(tmp_path, inst_file):
    outs = []
    for i in range(2):
        path = tmp_path / f"t{i}.json"
        assert main(["plan", "--instance", str(inst_file),
                     "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    jobs = tmp_path / "tj.json"
    assert main(["plan", "--instance", str(inst_file), "--jobs", "8",
                 "--out", str(jobs)]) == 0
    assert outs[0] == outs[1] == jobs.read_bytes()


def test_plan_timings_flag(tmp_path, inst_file):
    path = tmp_path / "t.json"
    assert main(["plan", "--instance", str(inst_file), "--timings",
                 "--out", str(path)]) == 0
    doc = json.loads(path.read_text())
    assert set(doc["timings"]) == {"plan_s", "checks_s"}


def test_plan_unsolvable_exit_code(tmp_path, inst_file):
    assert main(["plan", "--instance", str(inst_file),
                 "--max-horizon", "2"]) == 1


def test_plan_missing_instance_usage_error(capsys):
    with pytest.raises(SystemExit) as e:
        main(["plan"])
    assert e.value.code == 2


def test_unknown_subcommand_usage_error():
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == 2


def test_stats(tree_file, capsys):
    assert main(["stats", "--tree", str(tree_file)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["metrics"]["N"] > 0
    assert "safety" in doc


def test_validate_ok(inst_file, tree_file, capsys):
    assert main(["validate", "--instance", str(inst_file),
                 "--tree", str(tree_file)]) == 0
    assert "ok" in capsys.readouterr().out


def test_validate_catches_corrupt_tree(tmp_path, inst_file, tree_file):
    doc = json.loads(tree_file.read_text())
    for node in doc["nodes"]:
        if len(node["children"]) > 1:
            node["children"].reverse()
            break
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    assert main(["validate", "--instance", str(inst_file),
                 "--tree", str(bad)]) == 1


def test_validate_domain_errors(tmp_path):
    bad = tmp_path / "bad.adlh"
    bad.write_text("sort s { a };\nfluent f(s);\n"
                   "actuation go(x: s)\n  effect g(x);\n")
    assert main(["validate", "--domain", str(bad)]) == 1


def test_check(capsys):
    assert main(["check"]) == 0
    out = capsys.readouterr().out
    assert "0 error(s)" in out


def test_check_bad_domain(tmp_path, capsys):
    bad = tmp_path / "bad.adlh"
    bad.write_text("sort s {")
    assert main(["check", "--domain", str(bad)]) == 1


def test_export_dot(tree_file, capsys):
    assert main(["export-dot", "--tree", str(tree_file)]) == 0
    assert capsys.readouterr().out.startswith("digraph plan {")


def test_exec_random(inst_file, capsys):
    assert main(["exec", "--instance", str(inst_file), "--mode", "random",
                 "--seed", "1"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["reachedGoal"] is True


def test_exec_scripted_requires_script(inst_file):
    assert main(["exec", "--instance", str(inst_file),
                 "--mode", "scripted"]) == 1


def test_exec_scripted(inst_file, tmp_path, capsys):
    # walk the first-outcome path: labels collected from a fresh plan
    tree_path = tmp_path / "t.json"
    assert main(["plan", "--instance", str(inst_file),
                 "--out", str(tree_path)]) == 0
    tree = from_json(tree_path.read_text())
    script = []
    nid = tree.root
    while tree.nodes[nid].children:
        n = tree.nodes[nid]
        lbl, child = n.children[0]
        if lbl is not None and len(n.children) > 1:
            script.append(lbl)
        nid = child
    assert main(["exec", "--instance", str(inst_file), "--mode", "scripted",
                 "--script", ",".join(script)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["reachedGoal"] is True


def test_bench_csv(tmp_path, capsys):
    out = tmp_path / "bench.csv"
    assert main(["bench", "--axis", "R", "--min", "2", "--max", "3",
                 "--out", str(out)]) == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == CSV_HEADER
    assert len(lines) == 3


def test_missing_file_fails_cleanly(capsys):
    assert main(["plan", "--instance", "/nonexistent.json"]) == 1
    assert "error" in capsys.readouterr().err
