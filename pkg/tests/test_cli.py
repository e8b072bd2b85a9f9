import json

import pytest

from quasiline_ising.cli import main
from quasiline_ising.graphs import complete_graph, dump_graph, graph_from_dict


@pytest.fixture
def k2(tmp_path):
    p = tmp_path / "k2.json"
    p.write_text(dump_graph(complete_graph(2)))
    return p


@pytest.fixture
def k4(tmp_path):
    p = tmp_path / "k4.json"
    p.write_text(dump_graph(complete_graph(4)))
    return p


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cutpoly_k2(capsys, k2):
    code, out, _ = run(capsys, "cutpoly", "--graph", k2)
    assert code == 0 and json.loads(out) == [2, 2]


def test_audit_gadget(capsys):
    code, out, _ = run(capsys, "audit-gadget", "--kind", "H")
    d = json.loads(out)
    assert code == 0 and (d["max_cut"], d["maximisers"], d["runner_up"]) == (18, 2, 17)


def test_build_gstar_artifact(capsys, k4, tmp_path):
    dest = tmp_path / "out" / "gdag.json"
    code, out, _ = run(capsys, "build-gstar", "--base", k4, "--kind", "J", "--out", dest)
    assert code == 0 and json.loads(out)["n"] == 24
    art = json.loads(dest.read_text())
    assert art["command"] == "build-gstar" and art["config"]["kind"] == "J" and len(art["input_hash"]) == 64
    g = graph_from_dict({k: art["result"][k] for k in ("n", "edges")})
    assert g.n == 24 and g.m == 42 and "layout" in art["result"]


def test_artifacts_are_byte_identical(capsys, k4, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, "decode", "--base", k4, "--samples", "200", "--seed", "4", "--out", a)
    run(capsys, "decode", "--base", k4, "--samples", "200", "--seed", "4", "--out", b)
    assert a.read_bytes() == b.read_bytes()


def test_env_output_dir(capsys, k2, tmp_path, monkeypatch):
    monkeypatch.setenv("QLISING_OUT_DIR", str(tmp_path / "env"))
    assert run(capsys, "maxcut", "--graph", k2)[0] == 0
    assert json.loads((tmp_path / "env" / "maxcut.json").read_text())["result"]["cut_size"] == 1
    assert not list((tmp_path / "env").glob("*.tmp"))


def test_escape_writes_csv(capsys, tmp_path):
    dest = tmp_path / "esc.json"
    code, out, _ = run(capsys, "escape", "--sizes", "3", "--replicates", "2", "--mu", "4",
                       "--control-burn", "10000", "--out", dest)
    assert code == 0
    lines = dest.with_suffix(".csv").read_text().splitlines()
    assert lines[0] == "kind,size,replicate,hit_time,censored" and len(lines) == 5


def test_exit_codes(capsys, k2, tmp_path):
    assert run(capsys, "cutpoly", "--family", "complete", "--size", "30")[0] == 2
    assert run(capsys, "cutpoly", "--graph", tmp_path / "missing.json")[0] == 2
    assert run(capsys, "bottleneck", "--base", k2)[0] == 2
    with pytest.raises(SystemExit) as e:
        main(["cutpoly", "--bogus"])
    assert e.value.code == 2
    assert "usage" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["gen", "--family", "bipartite-cubic", "--size", "4", "--seed", "7"],
    ["check-class", "--family", "line-of-cubic", "--size", "6"],
    ["zsigma", "--family", "complete", "--size", "4", "--sigma", "+-+-", "--mu", "2^76"],
    ["sandwich", "--family", "complete", "--size", "4", "--sigma", "++--"],
    ["bottleneck", "--family", "bipartite-cubic", "--size", "3"],
    ["roots", "--family", "complete", "--size", "3", "--mu", "2"],
    ["maxcut", "--family", "petersen", "--local-search"],
])
def test_subcommands_succeed(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    json.loads(out)
