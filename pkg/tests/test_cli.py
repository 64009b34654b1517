import json

import pytest

from hypfir.cli import Scenario, main, run_scenario


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    human, _, body = out.partition("---json---\n")
    return code, human, json.loads(body)


def test_reduce_worked(capsys):
    code, human, doc = run(capsys, "reduce", "--xi", "1+a", " -1-a-b-ba", "--alpha", "1+b", "1")
    assert code == 0
    assert doc["outputs"]["result"] == "-1-a"
    assert (doc["outputs"]["diam_before"], doc["outputs"]["diam_after"]) == ("3", "1")
    assert "diam: 3 -> 1" in human


def test_ideal_basis_inconclusive(capsys):
    code, _, doc = run(capsys, "ideal-basis", "--rmax", "2", "1+a", "1+b")
    assert code == 2 and doc["outputs"]["status"] == "INDEPENDENT_UP_TO(2)"


def test_check_hypothesis(capsys):
    code, _, doc = run(capsys, "check-hypothesis", "--n", "5")
    assert code == 0 and doc["outputs"]["satisfied"] is True


def test_bass_failure_exit(capsys):
    code, _, doc = run(capsys, "bass-descent", "2", "a-1")
    assert code == 1 and doc["outputs"]["p"] == 2 and doc["outputs"]["witness"] == "(2)"


def test_ge_random(capsys):
    code, _, doc = run(capsys, "ge-factor", "--domain", "fp:5", "--random", "6", "--size", "3", "--count", "5")
    assert code == 0 and doc["outputs"]["verified"] == 5


def test_trials_zero_is_an_error(capsys):
    code, human, doc = run(capsys, "audit-lemmas", "--trials", "0")
    assert code == 1 and "trials" in doc["outputs"]["message"]


def test_parse_error_is_reported(capsys):
    code, _, doc = run(capsys, "ideal-basis", "1+")
    assert code == 1 and doc["outputs"]["error"] == "ElementParseError"


def test_replay(capsys, tmp_path):
    log = tmp_path / "ops.log"
    log.write_text("# size 2 domain q\nE 1 2 -b\nE 1 2 -1\n")
    code, _, doc = run(capsys, "replay", "--log", str(log), "1+a", "1+a+b+ba")
    assert code == 0 and doc["outputs"]["items"] == ["1+a", "0"]
    code, _, doc = run(capsys, "replay", "--log", str(log), "--inverse", "1+a", "0")
    assert doc["outputs"]["items"] == ["1+a", "1+a+b+ba"]


def test_scenario_file(capsys, tmp_path):
    path = tmp_path / "s.txt"
    path.write_text("# worked example\ntask = ideal-basis\ngenerator = 1+a\ngenerator = 1+a+b+ba\n")
    code, _, doc = run(capsys, "run", str(path))
    assert code == 0 and doc["outputs"]["basis"] == ["1+a"]


def test_scenario_text_round_trip():
    sc = Scenario("reduce", domain="fp:2", seed=3, inputs={"xi": ["1+a", "b"], "alpha": ["b", "1"]})
    back = Scenario.from_text(sc.to_text())
    assert back == sc


def test_reports_are_deterministic():
    sc = Scenario("ge-factor", domain="fp:2", seed=11, inputs={"random": ["8"], "size": ["3"], "count": ["4"]})
    assert run_scenario(sc).json() == run_scenario(sc).json()


def test_unknown_task():
    rep = run_scenario(Scenario("nope"))
    assert rep.exit_code == 1


def test_usage_error_exits():
    with pytest.raises(SystemExit):
        main(["reduce"])
