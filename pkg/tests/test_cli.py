import json
import subprocess
import sys

import pytest

from flbot.cli import EXIT_DEFECT, EXIT_LIMIT, EXIT_NO, EXIT_USAGE, EXIT_YES, main

from fixtures import GOALS


def g(name):
    return str(GOALS / name)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestCheck:
    def test_subsumed(self, capsys):
        assert run(capsys, "check", "all r.bot <= all r.all s.A")[:2] == (EXIT_YES, "SUBSUMED\n")

    def test_not_subsumed(self, capsys):
        assert run(capsys, "check", "all r.bot <= bot")[:2] == (EXIT_NO, "NOT_SUBSUMED\n")

    def test_from_file(self, capsys, tmp_path):
        f = tmp_path / "s.txt"
        f.write_text("# comment\nA and B <= A\n")
        assert run(capsys, "check", str(f))[0] == EXIT_YES

    def test_json(self, capsys):
        code, out, _ = run(capsys, "check", "--json", "A and bot <= A")
        assert code == EXIT_YES
        assert json.loads(out) == {"schema": 1, "result": True, "diagnostics": {"lhs": "bot", "rhs": "A"}}

    @pytest.mark.parametrize("text", ["A and", "A B", "all r.A"])
    def test_bad_input(self, capsys, text):
        code, _, err = run(capsys, "check", text)
        assert code == EXIT_USAGE and err.startswith("error:")


class TestUnify:
    def test_unifiable(self, capsys):
        assert run(capsys, "unify", g("cyclic.goal"))[:2] == (EXIT_YES, "UNIFIABLE\n")

    def test_not_unifiable(self, capsys):
        assert run(capsys, "unify", g("bottom_chain.goal"))[:2] == (EXIT_NO, "NOT_UNIFIABLE\n")

    def test_emit_roundtrip(self, capsys, tmp_path):
        sub = tmp_path / "w.sub"
        assert run(capsys, "unify", g("two_constants.goal"), "--emit", str(sub))[0] == EXIT_YES
        assert run(capsys, "verify", g("two_constants.goal"), str(sub))[:2] == (EXIT_YES, "VALID\n")

    def test_emit_to_stdout(self, capsys):
        code, out, err = run(capsys, "unify", g("cyclic.goal"), "--emit")
        assert code == EXIT_YES
        assert err == "UNIFIABLE\n"
        assert out.startswith("X := ")

    def test_json_schema(self, capsys):
        code, out, _ = run(capsys, "unify", "--json", g("cyclic.goal"))
        data = json.loads(out)
        assert code == EXIT_YES
        assert set(data) == {"schema", "result", "witness", "diagnostics"}
        assert data["schema"] == 1 and data["result"] is True
        assert set(data["witness"]) == {"X", "Y"}

    def test_json_negative_has_no_witness(self, capsys):
        data = json.loads(run(capsys, "unify", "--json", g("bottom_chain.goal"))[1])
        assert data["result"] is False and "witness" not in data

    def test_dump_both_formats(self, capsys, tmp_path):
        base = tmp_path / "store"
        run(capsys, "unify", g("cyclic.goal"), "--dump-shortcuts", str(base))
        dot = (tmp_path / "store.dot").read_text()
        data = json.loads((tmp_path / "store.json").read_text())
        assert dot.startswith("digraph shortcuts {")
        assert set(data) == {"shortcuts", "resolve", "depend"}
        assert all("stage" in s for s in data["shortcuts"])

    def test_dump_tagged_per_constant(self, capsys, tmp_path):
        goal = tmp_path / "two.goal"
        goal.write_text("vars: X, Y\nroles: r\nX <= all r.X and A\nY <= all r.Y and B\n")
        run(capsys, "unify", str(goal), "--dump-shortcuts", str(tmp_path / "s.json"))
        names = sorted(p.name for p in tmp_path.iterdir() if p.suffix == ".json")
        assert names == ["s-A.json", "s-B.json"]

    def test_trace(self, capsys, tmp_path):
        trace = tmp_path / "t.jsonl"
        run(capsys, "unify", g("cyclic.goal"), "--trace-construction", str(trace))
        entries = [json.loads(line) for line in trace.read_text().splitlines()]
        assert entries
        assert [e["step"] for e in entries] == list(range(len(entries)))
        assert all(set(e) == {"step", "shortcut", "particle"} for e in entries)

    def test_branch_cap(self, capsys):
        code, _, err = run(capsys, "unify", g("bottom_chain.goal"), "--max-branches", "1")
        assert code == EXIT_LIMIT and "resource limit" in err

    def test_missing_file(self, capsys):
        assert run(capsys, "unify", "/nonexistent/goal")[0] == EXIT_USAGE

    def test_malformed_goal(self, capsys, tmp_path):
        f = tmp_path / "bad.goal"
        f.write_text("vars: X\nX <= all r.\n")
        assert run(capsys, "unify", str(f))[0] == EXIT_USAGE


class TestVerify:
    def test_bottom_witness(self, capsys):
        assert run(capsys, "verify", g("two_constants.goal"), g("two_constants_bot.sub"))[0] == EXIT_YES

    def test_cyclic_goal(self, capsys):
        assert run(capsys, "verify", g("cyclic.goal"), g("cyclic.sub"))[0] == EXIT_YES

    def test_decreasing_rule(self, capsys):
        code, out, _ = run(capsys, "verify", g("bottom_chain.goal"), g("bottom_chain_bogus.sub"),
                           "--registry", g("bottom_chain_registry.json"))
        assert code == EXIT_NO
        assert out.splitlines()[0] == "INVALID"
        assert "  decreasing rule: Z holds all r.bot" in out.splitlines()

    def test_failing_subsumption_json(self, capsys, tmp_path):
        f = tmp_path / "w.sub"
        f.write_text("X := top\n")
        code, out, _ = run(capsys, "verify", "--json", g("two_constants.goal"), str(f))
        data = json.loads(out)
        assert code == EXIT_NO and data["result"] is False
        assert data["diagnostics"]["problems"]

    def test_bad_registry(self, capsys, tmp_path):
        f = tmp_path / "r.json"
        f.write_text("{nope")
        assert run(capsys, "verify", g("bottom_chain.goal"), g("bottom_chain_bogus.sub"), "--registry", str(f))[0] == EXIT_USAGE


class TestOracle:
    def test_witness(self, capsys):
        code, out, _ = run(capsys, "oracle", g("two_constants.goal"), "--depth", "0", "--width", "1")
        assert code == EXIT_YES and out == "WITNESS\nX := bot\n"

    def test_none(self, capsys):
        code, out, _ = run(capsys, "oracle", g("bottom_chain.goal"), "--depth", "1", "--width", "1")
        assert code == EXIT_NO and out == "NONE_WITHIN_BOUNDS\n"

    def test_cap(self, capsys):
        assert run(capsys, "oracle", g("bottom_chain.goal"), "--cap", "5")[0] == EXIT_LIMIT

    def test_bad_bounds(self, capsys):
        assert run(capsys, "oracle", g("bottom_chain.goal"), "--width", "0")[0] == EXIT_USAGE


def test_no_command(capsys):
    assert run(capsys)[0] == EXIT_USAGE


def test_defect_exit_code(capsys, monkeypatch):
    from flbot import cli
    from flbot.errors import EngineDefect

    def boom(*a, **k):
        raise EngineDefect("boom")

    monkeypatch.setattr(cli, "decide_unification", boom)
    assert run(capsys, "unify", g("cyclic.goal"))[0] == EXIT_DEFECT


def test_output_is_byte_identical_across_processes(tmp_path):
    outputs = []
    for i in range(2):
        dump = tmp_path / f"d{i}.json"
        proc = subprocess.run(
            [sys.executable, "-m", "flbot", "unify", "--json", g("two_constants.goal"), "--dump-shortcuts", str(dump)],
            capture_output=True, check=False, env={"PYTHONHASHSEED": str(i + 1), "PATH": ""},
        )
        outputs.append((proc.returncode, proc.stdout, dump.parent.joinpath(f"d{i}.json").read_bytes()))
    assert outputs[0] == outputs[1]
