import io
import json

import pytest

from profree import cli

BS12 = {"baumslag_solitar": [1, 2]}
BS23 = {"baumslag_solitar": [2, 3]}


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, data in {"bs12": BS12, "bs23": BS23}.items():
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(data))
        paths[name] = str(path)
    table = tmp_path / "c3.json"
    table.write_text(json.dumps({"name": "C3file", "order": 3, "table": [[0, 1, 2], [1, 2, 0], [2, 0, 1]]}))
    paths["c3"] = str(table)
    return paths


def call(argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run(argv, out, err)
    return code, out.getvalue(), err.getvalue()


def invocations(f):
    return {
        "reduce": ["reduce", "abBA"],
        "orbit": ["orbit", "ab", "aab"],
        "primitive": ["primitive", "aab"],
        "closure": ["closure", "aabb"],
        "malnormal": ["malnormal", "a", "b", "ab"],
        "collapse": ["collapse", f["bs12"]],
        "gamma": ["gamma", f["bs12"]],
        "decide": ["decide", f["bs23"]],
        "britton": ["britton", f["bs12"], "t a t^-1 AA"],
        "edges": ["edges", f["bs12"]],
        "cohom": ["cohom", f["bs12"], "--prime", "2"],
        "sc-check": ["sc-check", "abAB"],
        "sc-exponents": ["sc-exponents", "a", "b", "ab", "--family", "C7,S3"],
        "fox": ["fox", "abAB"],
        "tau": ["tau", "ab", "2"],
        "trace": ["trace", "4", "--prime", "3"],
        "resolution-check": ["resolution-check", "abAB", "6", "--group", "S3", "--prime", "5"],
        "group": ["group", "@" + f["c3"]],
        "measure": ["measure", "abAB", "--group", "S3"],
        "equiv": ["equiv", "aa", "abAB", "--family", "S3"],
        "homcount": ["homcount", "--gens", "2", "--group", "S3"],
        "epicount": ["epicount", "--gens", "2", "--group", "S3"],
        "bprime": ["bprime", "a", "--gens", "2", "--prime", "2,3", "--family", "C2,S3"],
        "rigidity": ["rigidity", "--rank", "1", "--max-len", "4", "--family", "C2,C3,C4,C5"],
    }


def test_every_verb_is_covered(files):
    assert set(invocations(files)) == set(cli.COMMANDS)


@pytest.mark.parametrize("verb", sorted(cli.COMMANDS))
def test_verb_round_trips_through_verify(verb, files, tmp_path):
    code, out, err = call(invocations(files)[verb] + ["--json"])
    assert code == 0, err
    report = json.loads(out)
    assert report["command"] == verb and set(report) == {"schema", "command", "input", "result"}
    saved = tmp_path / f"{verb}.json"
    saved.write_text(out)
    assert call(["--verify", str(saved)])[:2] == (0, "verified\n")


@pytest.mark.parametrize("verb", sorted(cli.COMMANDS))
def test_text_mode(verb, files):
    code, out, _ = call(invocations(files)[verb])
    assert code == 0 and out.strip()
    assert all(": " in line for line in out.splitlines())


def test_selected_results(files):
    assert json.loads(call(["reduce", "aA", "--json"])[1])["result"]["word"] == "1"
    assert json.loads(call(["decide", files["bs23"], "--json"])[1])["result"]["rf"] == "NotRF"
    assert json.loads(call(["epicount", "--gens", "2", "--group", "S3", "--json"])[1])["result"]["count"] == "18"
    ratio = json.loads(call(["sc-check", "abAB", "--json"])[1])["result"]["worst"]["ratio"]
    assert ratio == "1/4"


def test_verify_detects_tampering(files, tmp_path):
    code, out, _ = call(["measure", "abAB", "--group", "S3", "--json"])
    saved = tmp_path / "m.json"
    report = json.loads(out)
    report["result"]["denominator"] = "35"
    saved.write_text(cli.render_json(report))
    assert call(["--verify", str(saved)])[:2] == (1, "MISMATCH\n")


def test_exit_codes(tmp_path, monkeypatch):
    assert call(["reduce", "a9"])[0] == 2
    assert call(["nonsense"])[0] == 2
    assert call([])[0] == 2
    assert call(["decide", str(tmp_path / "missing.json")])[0] == 2
    assert call(["--verify", str(tmp_path / "missing.json")])[0] == 2
    assert call(["trace", "6", "--prime", "3"])[0] == 2
    assert call(["homcount", "--gens", "3", "--group", "S4", "--budget", "100"])[0] == 3
    monkeypatch.setenv("PROFREE_BUDGET", "100")
    assert call(["homcount", "--gens", "3", "--group", "S4"])[0] == 3
    monkeypatch.setenv("PROFREE_BUDGET", "lots")
    assert call(["reduce", "a"])[0] == 2


def test_main_entry_point(monkeypatch, capsys):
    monkeypatch.setattr("sys.argv", ["profree", "reduce", "aab"])
    with pytest.raises(SystemExit) as exc:
        cli.main()
    assert exc.value.code == 0
    assert capsys.readouterr().out.splitlines()[0] == 'word: "aab"'
