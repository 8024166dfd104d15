import io
import json

import pytest

from counterfeit.cli import main
from counterfeit.model import Instance, outcome
from counterfeit.strategy import Node, parse


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_emit_then_verify(tmp_path, capsys):
    path = tmp_path / "s.json"
    code, out, _ = run(capsys, "solve", "5,5", "--emit", str(path))
    assert code == 0 and "= 3" in out and path.exists()
    code, out, _ = run(capsys, "verify", str(path))
    assert code == 0 and out.startswith("VERIFIED")


def test_solve_json_is_stable(capsys):
    code, out, _ = run(capsys, "solve", "2,2,2", "--json", "--no-timing")
    data = json.loads(out)
    assert code == 0
    assert data["depth"] == 2 and data["instance"] == [2, 2, 2] and data["status"] == "optimal"
    assert "wall_time" not in data
    _, again, _ = run(capsys, "solve", "2,2,2", "--json", "--no-timing")
    assert again == out


def test_solve_power_syntax(capsys):
    code, out, _ = run(capsys, "solve", "2^3", "--json")
    assert code == 0 and json.loads(out)["instance"] == [2, 2, 2]


def test_solve_budget_exhausted(capsys):
    code, out, _ = run(capsys, "solve", "7,7,14", "--node-limit", "3")
    assert code == 3 and "budget" in out


def test_solve_depth_limit(capsys):
    code, out, _ = run(capsys, "solve", "3,4", "--max-depth", "2", "--json")
    assert code == 3 and json.loads(out)["status"] == "infeasible"


def test_usage_errors(capsys):
    assert run(capsys, "solve", "4,x")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys)[0] == 2
    assert run(capsys, "verify", "/nonexistent/file.json")[0] == 2
    assert run(capsys, "arrow", "10,10", "--profile", "bad")[0] == 2
    assert run(capsys, "bounds", "0", "3")[0] == 2


def _first_answer(obj):
    if "weigh" not in obj:
        return obj if obj.get("answer") else None
    for branch in ("left_heavy", "balanced", "right_heavy"):
        hit = _first_answer(obj[branch])
        if hit is not None:
            return hit
    return None


def test_verify_detects_bad_tree(tmp_path, capsys):
    path = tmp_path / "s.json"
    run(capsys, "solve", "2,2", "--emit", str(path))
    obj = json.loads(path.read_text())
    leaf = _first_answer(obj)
    leaf["answer"] = {"s1": 1, "s2": 1} if leaf["answer"] != {"s1": 1, "s2": 1} else {"s1": 2, "s2": 2}
    path.write_text(json.dumps(obj))
    code, out, _ = run(capsys, "verify", str(path))
    assert code == 1 and out.startswith("FAILED")
    path.write_text("{ not json")
    code, out, _ = run(capsys, "verify", str(path), "--json")
    assert code == 1 and "line 1" in json.loads(out)["error"]


def test_bounds_command(capsys):
    code, out, _ = run(capsys, "bounds", "100", "2", "--json")
    data = json.loads(out)
    assert code == 0
    assert data["lower"] == 9 and data["constructive"] == 9
    assert data["upper_claimed_epsilon"] == 9 and data["upper_derived_epsilon"] >= 9
    code, out, _ = run(capsys, "bounds", "4,4,5")
    assert code == 0 and out.strip().endswith("4")
    code, out, _ = run(capsys, "bounds", "10", "16", "--json")
    assert json.loads(out)["table_bound"]["value"] == 34


def test_table_command(capsys):
    code, out, _ = run(capsys, "table")
    assert code == 0
    assert "EXCEEDS 0.076" in out and "d=28" in out
    code, out, _ = run(capsys, "table", "--json")
    data = json.loads(out)
    assert len(data["rows"]) == 81 and data["gap_report"]["argmax_d"] == 28


def test_audit_command(tmp_path, capsys):
    code, out, _ = run(capsys, "audit")
    assert code == 0 and "IT-tight" in out
    code, out, _ = run(capsys, "audit", "--json")
    assert code == 0 and json.loads(out)["all_tight"]
    bad = tmp_path / "claims.json"
    bad.write_text(json.dumps([{"tag": "x", "subject": [5, 5], "kind": "exact", "value": 4,
                                "status": "PaperClaimed"}]))
    code, _, _ = run(capsys, "audit", "--claims", str(bad))
    assert code == 1


def test_arrow_command(tmp_path, capsys):
    path = tmp_path / "a.json"
    code, out, _ = run(capsys, "arrow", "5,5", "--profile", "2:3", "--close", "--emit", str(path), "--json")
    data = json.loads(out)
    assert code == 0 and data["closed_verified"] and data["closed_depth"] == 3
    code, _, _ = run(capsys, "verify", str(path))
    assert code == 0
    code, _, _ = run(capsys, "arrow", "2,2", "--profile", "0:singleton")
    assert code == 1


def _play(monkeypatch, capsys, path, answers):
    monkeypatch.setattr("sys.stdin", io.StringIO("".join(a + "\n" for a in answers)))
    return run(capsys, "play", str(path))


def test_play_depth_zero(tmp_path, monkeypatch, capsys):
    path = tmp_path / "z.json"
    path.write_text('{"answer": {"s1": 1, "s2": 1}}')
    code, out, _ = _play(monkeypatch, capsys, path, [])
    assert code == 0 and "s1.1 s2.1" in out


def test_play_follows_outcomes(tmp_path, monkeypatch, capsys):
    path = tmp_path / "s.json"
    run(capsys, "solve", "5,5", "--emit", str(path))
    tree = parse(path.read_text())
    truth = (4, 2)
    answers, node = [], tree
    letters = {"left_heavy": "L", "balanced": "B", "right_heavy": "r"}
    while isinstance(node, Node):
        o = outcome(node.weigh, truth)
        answers.append(letters[o.value])
        node = node.child(o)
    code, out, _ = _play(monkeypatch, capsys, path, ["X"] + answers)
    assert code == 0
    assert "Please answer" in out
    assert "Counterfeit coins: s1.4 s2.2" in out


def test_play_eof_aborts(tmp_path, monkeypatch, capsys):
    path = tmp_path / "s.json"
    run(capsys, "solve", "5,5", "--emit", str(path))
    code, out, _ = _play(monkeypatch, capsys, path, ["B"])
    assert code == 2 and "aborted" in out
