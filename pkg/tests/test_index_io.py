import pytest

from macsearch.dominance import build_rdominance_graph
from macsearch.index_io import IndexFormatError, IndexMismatchError, QueryIndex, dumps, load_index, loads, save_index
from macsearch.ktcore import maximal_kt_core
from macsearch.synth import generate_road_social


@pytest.fixture(scope="module")
def index(example):
    rsn, region, ids = example
    core = maximal_kt_core(rsn, sorted(ids(2, 3, 6)), 3, 9)
    gd = build_rdominance_graph(rsn.social.attributes, core.members, region, rsn.social.names)
    return rsn, QueryIndex(core, gd, region)


def test_round_trip(tmp_path, index):
    rsn, idx = index
    save_index(tmp_path / "q.idx", idx, rsn)
    back = load_index(tmp_path / "q.idx", rsn)
    assert back.core.members == idx.core.members and back.core.Q == idx.core.Q
    assert back.core.query_distance == idx.core.query_distance
    assert back.gd.arcs() == idx.gd.arcs() and back.gd.layers == idx.gd.layers
    assert back.gd.pop_order == idx.gd.pop_order
    assert back.region.bounds == idx.region.bounds
    assert dumps(back, rsn) == dumps(idx, rsn)


def test_bad_magic(index):
    rsn, idx = index
    with pytest.raises(IndexFormatError, match="magic"):
        loads(b"XXXXXXXX" + dumps(idx, rsn)[8:], rsn)


def test_truncated(index):
    rsn, idx = index
    with pytest.raises(IndexFormatError):
        loads(dumps(idx, rsn)[:40], rsn)


def test_other_dataset(index):
    rsn, idx = index
    other = generate_road_social(30, 3, seed=2, grid=(3, 3))
    with pytest.raises(IndexMismatchError):
        loads(dumps(idx, rsn), other)
