import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from macsearch.dominance import build_rdominance_graph
from macsearch.geometry import HalfSpaceCache, Region
from macsearch.global_search import gs_search
from macsearch.ktcore import maximal_kt_core
from macsearch.local_search import _Context, detect_bound, expand, is_promising, ls_search, verify
from macsearch.oracle import random_instance


@pytest.fixture(scope="module")
def ctx(example):
    rsn, region, ids = example
    Q = tuple(sorted(ids(2, 3, 6)))
    core = maximal_kt_core(rsn, Q, 3, 9)
    gd = build_rdominance_graph(rsn.social.attributes, core.members, region, rsn.social.names)
    return _Context(core, gd, rsn.social.adjacency, 3, Q, rsn.social.attributes, region,
                    HalfSpaceCache(rsn.social.attributes))


def test_verify_first_community(ctx, example):
    _, _, ids = example
    out = verify(ids(2, 3, 6, 7), ctx)
    assert out.valid and len(out.cells) == 1
    assert is_promising(ids(2, 3, 6, 7), ctx) == (True, "")


def test_verify_discards_when_all_leaves_are_anchors(ctx, example):
    _, _, ids = example
    out = verify(ids(1, 2, 3, 6, 7), ctx)
    assert not out.valid and out.reason == "empty-partition"


def test_detect_bound(ctx, example):
    _, _, ids = example
    gc = ctx.gd.restrict(ids(1, 4, 5))
    assert detect_bound(gc, min(ids(4)), ctx.core, ctx.adj, 3) == ("mutually-bound", min(ids(5)))


def test_expand_rejects_unknown_strategy(ctx):
    with pytest.raises(ValueError, match="unknown strategy"):
        expand(ctx.core, ctx.gd, ctx.adj, ctx.Q, 3, strategy="random")
    with pytest.raises(ValueError, match="lambda"):
        expand(ctx.core, ctx.gd, ctx.adj, ctx.Q, 3, lam=0)


def test_expand_cluster_example(example):
    # growth from v9 takes v14 first, yet the first recorded core skips it
    rsn, _, ids = example
    Q = tuple(ids(9))
    core = maximal_kt_core(rsn, Q, 2, 2)
    assert core.members == ids(8, 9, 10, 11, 12, 13, 14)
    region = Region.rectangle([(0.1, 0.5), (0.2, 0.4)])
    gd = build_rdominance_graph(rsn.social.attributes, core.members, region)
    first = expand(core, gd, rsn.social.adjacency, Q, 2, budget=1)[0]
    assert min(ids(14)) in first.trace[:1]
    assert first.members == ids(9, 10, 11)
    assert gs_search(rsn, Q, 2, 2, region).pairs() == {ids(8, 9, 10, 11)}


def test_running_example_matches_gs(example):
    rsn, region, ids = example
    Q = sorted(ids(2, 3, 6))
    ls = ls_search(rsn, Q, 3, 9, region)
    gs = gs_search(rsn, Q, 3, 9, region)
    assert ls.pairs() == gs.pairs()
    W = region.sample(np.random.default_rng(1), 300)
    for w in W:
        assert ls.at(w) == gs.at(w)


@pytest.mark.parametrize("strategy", ["layer-density", "layer-mindeg"])
def test_top2_on_example(example, strategy):
    rsn, region, ids = example
    Q = sorted(ids(2, 3, 6))
    ls = ls_search(rsn, Q, 3, 9, region, "topj", 2, strategy=strategy)
    gs = gs_search(rsn, Q, 3, 9, region, "topj", 2)
    for e in ls.entries:
        assert gs.at(e.cell.witness) == e.communities


@settings(max_examples=20)
@given(st.integers(0, 100_000))
def test_sound_on_random_instances(seed):
    inst = random_instance(seed)
    region = Region.rectangle(inst["bounds"])
    args = (inst["rsn"], inst["Q"], inst["k"], inst["t"], region)
    gs = gs_search(*args)
    for e in ls_search(*args).entries:
        assert gs.at(e.cell.witness) == (e.nc,)


def _context(inst):
    rsn = inst["rsn"]
    region = Region.rectangle(inst["bounds"])
    Q = tuple(sorted(inst["Q"]))
    core = maximal_kt_core(rsn, Q, inst["k"], inst["t"])
    gd = build_rdominance_graph(rsn.social.attributes, core.members, region)
    return _Context(core, gd, rsn.social.adjacency, inst["k"], Q, rsn.social.attributes, region,
                    HalfSpaceCache(rsn.social.attributes))


@settings(max_examples=15)
@given(st.integers(0, 100_000))
def test_discarded_candidates_never_win(seed):
    from macsearch.oracle import oracle_enumerate, OracleRefused
    inst = random_instance(seed, n_max=20)
    ctx = _context(inst)
    try:
        cores = oracle_enumerate(inst["rsn"], inst["Q"], inst["k"], inst["t"])
    except OracleRefused:
        return
    winners = gs_search(inst["rsn"], inst["Q"], inst["k"], inst["t"], ctx.region).pairs()
    for c in cores:
        if not is_promising(c, ctx)[0] or not verify(c, ctx).valid:
            assert c not in winners


@settings(max_examples=30)
@given(st.integers(0, 100_000))
def test_anchors_match_trial_deletion(seed):
    import networkx as nx
    from macsearch.local_search import find_anchors
    from macsearch.oracle import social_graph
    inst = random_instance(seed)
    ctx = _context(inst)
    members = ctx.core.members
    g = social_graph(inst["rsn"].social)
    leaves = ctx.gd.restrict(members).leaves()
    expected = set()
    for e in leaves - set(ctx.Q):
        core = nx.k_core(g.subgraph(members - {e}), ctx.k)
        comp = nx.node_connected_component(core, ctx.Q[0]) if ctx.Q[0] in core else set()
        if set(ctx.Q) <= comp:
            expected.add(e)
    assert find_anchors(members, ctx.gd, ctx.adj, ctx.k, ctx.Q) == expected
