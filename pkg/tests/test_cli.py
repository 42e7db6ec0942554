import json

import pytest

from skelpair.cli import main

INTERVAL = {"vertices": ["0", "1"], "edges": [["0", "1"]], "name": "I"}


def expr_doc(text, smooth="cubes"):
    return {"type": "expr", "smooth": smooth, "charts": {"*": text}}


def error_of(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def test_vanishing_passes(capsys):
    assert main(["chow", "vanishing", "--d", "2"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["violations"] == []
    assert report["d"] == 2


def test_vanishing_timeout_exit_code(capsys):
    assert main(["chow", "vanishing", "--d", "2", "--time-limit", "0"]) == 4
    error = error_of(capsys)
    assert error["error"] == "Timeout"
    assert error["detail"]["d"] == 2


def test_chow_table_csv(capsys):
    assert main(["--format", "csv", "chow", "table", "--d", "2", "--nonzero"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "tuple,ldeg"
    assert "01 10 11,16/1" in lines


def test_counterexample_demo(capsys):
    assert main(["demo", "counterexample", "--n", "5"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["rows"][0]["value"] == "10/1"
    assert report["rows"][0]["passed"] is True


def test_output_is_byte_stable(capsys):
    main(["demo", "counterexample", "--n", "3"])
    first = capsys.readouterr().out
    main(["demo", "counterexample", "--n", "3"])
    assert capsys.readouterr().out == first


def test_output_file(tmp_path, capsys):
    path = tmp_path / "report.json"
    assert main(["--output", str(path), "demo", "counterexample", "--n", "2"]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(path.read_text())["demo"] == "counterexample"


def test_pair_exact_on_interval(write_json, capsys):
    graph = write_json("I.json", INTERVAL)
    f = write_json("f.json", expr_doc("x1"))
    assert main(["pair", "exact", "--graph", graph, "--d", "1", "--n", "2", f, f]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["value"] == "-1/1"
    assert report["meta"]["run"]["n"] == 2


def test_pair_exact_grid_level_must_match(write_json, capsys):
    graph = write_json("I.json", INTERVAL)
    grid = write_json("g.json", {"type": "grid", "n": 1, "values": {"0": ["0", "1"]}})
    assert main(["pair", "exact", "--graph", graph, "--d", "1", "--n", "2", grid, grid]) == 3
    assert error_of(capsys)["error"] == "LevelMismatch"


def test_converge_csv_header(write_json, capsys):
    graph = write_json("I.json", INTERVAL)
    f = write_json("f.json", expr_doc("x1*x2"))
    argv = ["--format", "csv", "converge", "--graph", graph, "--d", "2", "--levels", "1,2", "--m", "8", f, f, f]
    assert main(argv) == 0
    out = capsys.readouterr().out
    lines = out.splitlines()
    assert lines[0] == "n,exact,limit,gap"
    assert lines[1].startswith("1,1/1,")
    assert main(argv) == 0
    assert capsys.readouterr().out == out


def test_self_loop_is_input_error(write_json, capsys):
    graph = write_json("loop.json", {"vertices": ["a", "b"], "edges": [["a", "a"]]})
    f = write_json("f.json", expr_doc("x1"))
    assert main(["pair", "limit", "--graph", graph, "--d", "1", f, f]) == 3
    error = error_of(capsys)
    assert error["error"] == "SelfLoop"
    assert error["detail"] == {"vertex": "a"}


def test_grid_rejected_by_limit(write_json, capsys):
    graph = write_json("I.json", INTERVAL)
    grid = write_json("g.json", {"type": "grid", "n": 1, "values": {"0": ["0", "1"]}})
    assert main(["pair", "limit", "--graph", graph, "--d", "1", grid, grid]) == 3
    assert error_of(capsys)["error"] == "MalformedDocument"


def test_missing_file(write_json, capsys):
    graph = write_json("I.json", INTERVAL)
    assert main(["pair", "limit", "--graph", graph, "--d", "1", "nope.json", "nope.json"]) == 3
    assert error_of(capsys)["error"] == "MalformedDocument"


def test_bad_expression(write_json, capsys):
    graph = write_json("I.json", INTERVAL)
    f = write_json("f.json", expr_doc("x1 +"))
    assert main(["pair", "limit", "--graph", graph, "--d", "1", f, f]) == 3
    error = error_of(capsys)
    assert error["error"] == "ExprSyntaxError"
    assert error["detail"]["position"] == 4


@pytest.mark.parametrize("argv", [
    [],
    ["nonsense"],
    ["pair", "bogus"],
    ["demo", "counterexample"],
    ["converge", "--graph", "g.json", "--d", "2", "--levels", "4,2"],
])
def test_usage_errors(argv, capsys):
    assert main(argv) == 2
