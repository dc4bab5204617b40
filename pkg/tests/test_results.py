import json

import pytest

from macsearch.global_search import gs_search
from macsearch.results import communities_by_cell, natural_key, read_jsonl, to_jsonl, validate_document


@pytest.fixture(scope="module")
def document(example):
    rsn, region, ids = example
    rs = gs_search(rsn, sorted(ids(2, 3, 6)), 3, 9, region, "topj", 2)
    text = to_jsonl(rs, rsn.social.names, rsn.social.attributes, {"Q": ["v2", "v3", "v6"], "k": 3, "t": 9.0})
    return rsn, rs, text


def test_header_and_cells(document):
    _, rs, text = document
    header, cells = read_jsonl(text)
    assert header["format"] == "macsearch-result/1"
    assert header["cells"] == len(cells) == len(rs)
    assert "timings" not in header
    assert [c["rank"] for c in cells[0]["communities"]] == [1, 2]


def test_witness_rescoring_agrees(document):
    rsn, _, text = document
    assert validate_document(text, rsn.social.names, rsn.social.attributes) == []


def test_tampered_score_is_reported(document):
    rsn, _, text = document
    lines = text.splitlines()
    rec = json.loads(lines[1])
    rec["communities"][0]["score"] += 1.0
    lines[1] = json.dumps(rec)
    problems = validate_document("\n".join(lines), rsn.social.names, rsn.social.attributes)
    assert problems and "rank 1" in problems[0]


def test_members_in_natural_order(document):
    _, _, text = document
    for comms in communities_by_cell(text):
        assert frozenset({"v2", "v3", "v6"}) <= comms[0]
    assert sorted(["v10", "v2", "v1"], key=natural_key) == ["v1", "v2", "v10"]


def test_not_a_document():
    with pytest.raises(ValueError):
        read_jsonl('{"format": "other"}\n')
