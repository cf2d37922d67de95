import json

import pytest
from click.testing import CliRunner

from tracepush.cli import main

AB = {"letters": ["a", "b"], "dependence": []}
AB_STAR = {"states": 2, "initial": [0], "final": [0], "transitions": [[0, "a", 1], [1, "b", 0]]}


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def files(tmp_path):
    def write(name, doc):
        path = tmp_path / name
        path.write_text(doc if isinstance(doc, str) else json.dumps(doc))
        return str(path)

    return write


def test_validate(runner, files):
    res = runner.invoke(main, ["validate", "--example", "grid"])
    assert res.exit_code == 0 and "valid" in res.output
    bad = files("p1.json", {"alphabet": AB, "system": {"states": 1, "transitions": [[0, "a", "b", 0]]}})
    res = runner.invoke(main, ["validate", "--system", bad])
    assert res.exit_code == 1
    assert json.loads(res.output.splitlines()[0])["property"] == "P1"
    res = runner.invoke(main, ["validate", "--system", files("broken.json", "{oops")])
    assert res.exit_code == 2


def test_validate_separate_alphabet(runner, files):
    alpha = files("ab.json", AB)
    system = files("s.json", {"states": 1, "transitions": [[0, "a", "", 0]]})
    assert runner.invoke(main, ["validate", "--alphabet", alpha, "--system", system]).exit_code == 0
    assert runner.invoke(main, ["validate", "--system", system]).exit_code == 2
    assert runner.invoke(main, ["validate", "--example", "nope"]).exit_code == 2


def test_saturate(runner, tmp_path):
    res = runner.invoke(main, ["saturate", "--example", "shortcuts"])
    assert res.exit_code == 0
    doc = json.loads(res.output)
    assert doc["added_per_round"] == [2, 1, 0]
    assert doc["rounds"][1]["added"] == [[0, "a", "", 2]]
    out = tmp_path / "sat.json"
    res = runner.invoke(main, ["saturate", "--example", "shortcuts", "--out", str(out)])
    assert res.exit_code == 0
    saturated = str(out)
    assert runner.invoke(main, ["validate", "--system", saturated]).exit_code == 0


def test_lnf_and_equiv(runner, files):
    alpha = files("ab.json", AB)
    res = runner.invoke(main, ["lnf", "--alphabet", alpha, "ba"])
    assert res.output.strip() == "ab"
    assert runner.invoke(main, ["equiv", "--alphabet", alpha, "ab", "ba"]).exit_code == 0
    assert runner.invoke(main, ["equiv", "--example", "shortcuts", "ab", "ba"]).exit_code == 1
    assert runner.invoke(main, ["lnf", "--alphabet", alpha, "abz"]).exit_code == 2


def test_check_closed(runner, files):
    alpha = files("ab.json", AB)
    res = runner.invoke(main, ["check-closed", "--alphabet", alpha, "--nfa", files("n.json", AB_STAR)])
    assert res.exit_code == 1
    witness = json.loads(res.output.split("\n", 1)[1])
    assert witness == {"accepted": "ab", "rejected": "ba"}
    full = {"states": 1, "initial": [0], "final": [0], "transitions": [[0, "a", 0], [0, "b", 0]]}
    assert runner.invoke(main, ["check-closed", "--alphabet", alpha, "--nfa", files("u.json", full)]).exit_code == 0


def test_check_leftclosed(runner, files):
    alpha = files("abc.json", {"letters": ["a", "b", "c"], "dependence": [["a", "b"], ["b", "c"]]})
    # the subword relation: (u, v) with u a subword of v
    trans = [[0, "", x, 0] for x in "abc"] + [[0, x, "", i + 1] for i, x in enumerate("abc")]
    trans += [[i + 1, "", x, 0] for i, x in enumerate("abc")]
    path = files("sub.json", {"states": 4, "initial": [0], "final": [0], "transitions": trans})
    res = runner.invoke(main, ["check-leftclosed", "--alphabet", alpha, "--transducer", path, "--maxlen", "2"])
    assert res.exit_code == 1
    assert json.loads(res.output.split("\n", 1)[1]) == {"u": "ca", "u_equivalent": "ac", "output": "abc"}


def test_relation(runner):
    res = runner.invoke(main, ["relation", "--example", "grid", "--src", "0", "--dst", "0", "--pair", "c", "caabb"])
    assert res.exit_code == 0 and json.loads(res.output)[0]["member"] is True
    res = runner.invoke(main, ["relation", "--example", "grid", "--src", "0", "--dst", "0", "--pair", "c", "cb"])
    assert res.exit_code == 1
    res = runner.invoke(main, ["relation", "--example", "shortcuts", "--src", "0", "--dst", "2"])
    assert res.exit_code == 0
    assert json.loads(res.output)["states"] > 0
    res = runner.invoke(main, ["relation", "--example", "twophases", "--src", "0", "--dst", "3", "--max-states", "20"])
    assert res.exit_code == 3


def test_prestar_and_poststar(runner, files, tmp_path):
    c_only = files("c.json", {"states": 2, "initial": [0], "final": [1], "transitions": [[0, "c", 1]]})
    out = tmp_path / "post.json"
    res = runner.invoke(main, ["poststar", "--example", "grid", "--src", "0", "--dst", "0", "--nfa", c_only, "--out", str(out)])
    assert res.exit_code == 0
    assert json.loads(out.read_text())["states"] >= 3
    res = runner.invoke(main, ["prestar", "--example", "grid", "--src", "0", "--dst", "0", "--nfa", c_only])
    assert res.exit_code == 0
    not_closed = files("ab.json", {"states": 3, "initial": [0], "final": [2], "transitions": [[0, "a", 1], [1, "b", 2]]})
    res = runner.invoke(main, ["prestar", "--example", "grid", "--src", "0", "--dst", "0", "--nfa", not_closed])
    assert res.exit_code == 3


def test_decide(runner, files):
    res = runner.invoke(main, ["decide", "--example", "twophases", "--from", "0:a", "--to", "3:eeeecccc"])
    assert res.exit_code == 0 and res.output.strip() == "REACHABLE"
    res = runner.invoke(main, ["decide", "--example", "grid", "--from", "0:c", "--to", "0:cb"])
    assert res.exit_code == 1 and res.output.strip() == "UNREACHABLE"
    c_only = files("c.json", {"states": 2, "initial": [0], "final": [1], "transitions": [[0, "c", 1]]})
    res = runner.invoke(main, ["decide", "--example", "grid", "--from-nfa", f"0:{c_only}", "--to", '[0, "cba"]'])
    assert res.exit_code == 0
    assert runner.invoke(main, ["decide", "--example", "grid", "--from", "0:c"]).exit_code == 2
    assert runner.invoke(main, ["decide", "--example", "grid", "--from", "x:c", "--to", "0:c"]).exit_code == 2


def test_oracle(runner):
    res = runner.invoke(main, ["oracle", "--example", "grid", "--config", "0:c", "--max-stack", "9"])
    assert res.exit_code == 0
    found = {tuple(x) for x in json.loads(res.output)}
    expected = {(0, "c" + "a" * i + "b" * j) for i in range(9) for j in range(i + 1) if 1 + i + j <= 9}
    assert found == expected
    res = runner.invoke(main, ["oracle", "--example", "grid", "--config", "0:c", "--max-stack", "3", "--max-steps", "1"])
    assert {tuple(x) for x in json.loads(res.output)} == {(0, "c"), (0, "ca"), (0, "cab")}
    res = runner.invoke(main, ["oracle", "--example", "grid", "--config", "0:c", "--max-stack", "2", "--dot"])
    assert res.output.startswith("digraph") and '"(0,[c])" -> "(0,[ca])";' in res.output


def test_realize(runner, files):
    alpha = files("ab.json", AB)
    res = runner.invoke(main, ["realize", "--alphabet", alpha, "--nfa", files("n.json", AB_STAR)])
    assert res.exit_code == 0
    doc = json.loads(res.output)
    assert doc["start"] == [0, "#"]
    assert doc["system"]["states"] == 1
    assert set(doc["state_letters"].values()) == {"s0", "s1"}


def test_output_is_deterministic(runner):
    args = ["relation", "--example", "shortcuts", "--src", "0", "--dst", "2"]
    first = runner.invoke(main, args).output
    assert first == runner.invoke(main, args).output


def test_emitted_nfa_reparses(runner, files, tmp_path):
    from tracepush.automata import nfa_from_json, nfa_to_json
    from tracepush.systems import bundled

    alpha, _ = bundled("grid")
    c_only = files("c.json", {"states": 2, "initial": [0], "final": [1], "transitions": [[0, "c", 1]]})
    out = tmp_path / "post.json"
    runner.invoke(main, ["poststar", "--example", "grid", "--src", "0", "--dst", "0", "--nfa", c_only, "--out", str(out)])
    doc = json.loads(out.read_text())
    assert nfa_to_json(nfa_from_json(alpha, doc)) == doc
