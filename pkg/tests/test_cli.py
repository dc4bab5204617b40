import json

import pytest

from macsearch.cli import main
from macsearch.results import communities_by_cell, read_jsonl

FIX = ["--fixture", "running-example", "--q", "v2,v3,v6", "--k", "3", "--t", "9"]
REGION = ["--region", "0.1,0.5x0.2,0.4"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_query_fixture(capsys):
    code, out, _ = run(capsys, "query", *FIX, *REGION)
    assert code == 0
    header, cells = read_jsonl(out)
    assert header["cells"] == len(cells) == 6
    found = {c[0] for c in communities_by_cell(out)}
    assert found == {frozenset({"v2", "v3", "v6", "v7"}), frozenset({"v2", "v3", "v4", "v5", "v6"})}


def test_local_search_matches_global(capsys):
    _, gs, _ = run(capsys, "query", *FIX, *REGION, "--mode", "gs-nc")
    _, ls, _ = run(capsys, "query", *FIX, *REGION, "--mode", "ls-nc", "--seed", "3")
    assert {c[0] for c in communities_by_cell(ls)} == {c[0] for c in communities_by_cell(gs)}
    assert read_jsonl(ls)[0]["query"]["seed"] == 3


def test_timings_are_opt_in(capsys):
    _, out, _ = run(capsys, "query", *FIX, *REGION, "--timings")
    assert set(read_jsonl(out)[0]["timings"]) == {"prepare_s", "search_s"}


def test_j_with_nc_mode_is_usage_error(capsys):
    code, _, err = run(capsys, "query", *FIX, *REGION, "--mode", "gs-nc", "--j", "5")
    assert code == 1 and "--j" in err


def test_topj_default_j(capsys):
    _, out, _ = run(capsys, "query", *FIX, *REGION, "--mode", "gs-t")
    assert read_jsonl(out)[0]["j"] == 20


def test_no_core_exit_code(capsys):
    code, out, err = run(capsys, "query", "--fixture", "running-example", "--q", "v2,v3,v6", "--k", "5",
                         "--t", "9", *REGION)
    assert code == 2 and "no (k,t)-core" in err
    assert read_jsonl(out)[0]["cells"] == 0


def test_bad_region(capsys):
    code, _, err = run(capsys, "query", *FIX, "--region", "0.1,0.5")
    assert code == 1 and "intervals" in err


def test_unknown_user(capsys):
    code, _, err = run(capsys, "query", "--fixture", "running-example", "--q", "v99", "--k", "3", "--t", "9", *REGION)
    assert code == 1 and "v99" in err


def test_oracle(capsys):
    code, out, _ = run(capsys, "oracle", *FIX, "--at-weight", "0.19,0.3", "--j", "2")
    assert code == 0
    comms = json.loads(out)["communities"]
    assert comms[0]["members"] == ["v2", "v3", "v6", "v7"]
    assert comms[1]["members"] == ["v2", "v3", "v4", "v5", "v6", "v7"]


def test_gen_index_and_query_round_trip(tmp_path, capsys):
    assert run(capsys, "gen", "--fixture", "running-example", "--out", str(tmp_path / "net"))[0] == 0
    data = ["--data", str(tmp_path / "net"), "--q", "v2,v3,v6", "--k", "3", "--t", "9"]
    idx = tmp_path / "q.idx"
    assert run(capsys, "index", "build", *data, *REGION, "--out", str(idx))[0] == 0
    code, _, _ = run(capsys, "index", "load", *data[:2], "--index", str(idx), "--dump-dag", str(tmp_path / "g.dot"))
    assert code == 0 and '"v6" -> "v2"' in (tmp_path / "g.dot").read_text()
    _, direct, _ = run(capsys, "query", *data, *REGION)
    _, via_index, _ = run(capsys, "query", *data, "--index", str(idx))
    assert communities_by_cell(via_index) == communities_by_cell(direct)


def test_generated_network(tmp_path, capsys):
    assert run(capsys, "gen", "--n", "200", "--seed", "1", "--out", str(tmp_path / "g"))[0] == 0
    assert (tmp_path / "g" / "attributes.tsv").read_text().count("\n") == 200


def test_bench_csv(capsys):
    code, out, _ = run(capsys, "bench", "--n", "300", "--avg-degree", "10", "--queries", "1", "--set", "k=3",
                       "--set", "t=1", "--set", "q_size=2", "--algorithms", "gs-nc,ls-nc")
    assert code == 0
    assert out.splitlines()[0].startswith("algorithm,param,value")
    assert len(out.splitlines()) == 3


def test_plot(tmp_path, capsys):
    pytest.importorskip("matplotlib")
    png = tmp_path / "cells.png"
    assert run(capsys, "query", *FIX, *REGION, "--plot", str(png))[0] == 0
    assert png.read_bytes()[:4] == b"\x89PNG"
