"""Brute-force references, written independently of the search engines.

Distances come from networkx Dijkstra over a road graph in which every user
location is spliced in as its own node, and k-cores come from
``networkx.k_core``.  Nothing here imports the engine's peeling or
geometry code, so agreement between the two is meaningful.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import networkx as nx
import numpy as np

from .network import Location, RoadNetwork, RoadSocialNetwork, SocialNetwork

ENUMERATION_LIMIT = 15


class OracleRefused(RuntimeError):
    """Raised when a brute-force routine would exceed its size guard."""


# ---------------------------------------------------------------------------
# distances and the maximal (k, t)-core

def spliced_road_graph(rsn: RoadSocialNetwork) -> nx.Graph:
    """Road graph with each user location inserted as node ``("user", v)``."""
    road, social = rsn.road, rsn.social
    g = nx.Graph()
    g.add_nodes_from(("road", r) for r in range(road.n))
    on_edge: dict[int, list[tuple[float, int]]] = {}
    for v, loc in enumerate(social.locations):
        on_edge.setdefault(loc.edge, []).append((loc.offset, v))
    for e, (u, v, w) in enumerate(road.edges):
        stops = [(0.0, ("road", u))] + [(off, ("user", x)) for off, x in sorted(on_edge.get(e, []))]
        stops.append((w, ("road", v)))
        for (o1, a), (o2, b) in zip(stops, stops[1:]):
            cost = o2 - o1
            if g.has_edge(a, b):
                cost = min(cost, g[a][b]["weight"])
            g.add_edge(a, b, weight=cost)
    return g


def brute_query_distances(rsn: RoadSocialNetwork, Q: Sequence[int]) -> np.ndarray:
    g = spliced_road_graph(rsn)
    worst = np.zeros(rsn.social.n)
    for q in Q:
        lengths = nx.single_source_dijkstra_path_length(g, ("user", q), weight="weight")
        d = np.array([lengths.get(("user", v), math.inf) for v in range(rsn.social.n)])
        worst = np.maximum(worst, d)
    return worst


def brute_distance_filter(rsn: RoadSocialNetwork, Q: Sequence[int], t: float) -> set[int]:
    D = brute_query_distances(rsn, Q)
    return {v for v in range(rsn.social.n) if D[v] <= t}


def social_graph(social: SocialNetwork) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(range(social.n))
    g.add_edges_from(social.edges)
    return g


def _q_core(g: nx.Graph, members, k: int, Q: Sequence[int]) -> frozenset[int]:
    core = nx.k_core(g.subgraph(members), k)
    if not all(q in core for q in Q):
        return frozenset()
    comp = nx.node_connected_component(core, Q[0])
    return frozenset(comp) if all(q in comp for q in Q) else frozenset()


def brute_kt_core(rsn: RoadSocialNetwork, Q: Sequence[int], k: int, t: float) -> frozenset[int]:
    Q = sorted(set(Q))
    return _q_core(social_graph(rsn.social), brute_distance_filter(rsn, Q, t), k, Q)


# ---------------------------------------------------------------------------
# fixed-weight deletion chain

@dataclass
class FixedWeightRanking:
    w: np.ndarray
    chain: list[frozenset[int]] = field(default_factory=list)  # largest first
    scores: list[float] = field(default_factory=list)

    @property
    def nc(self) -> frozenset[int] | None:
        return self.chain[-1] if self.chain else None

    def top(self, j: int) -> list[frozenset[int]]:
        return list(reversed(self.chain[-j:]))


def oracle_chain_at(rsn: RoadSocialNetwork, Q: Sequence[int], k: int, t: float, w) -> FixedWeightRanking:
    """Delete the minimum-score vertex until a query vertex would be lost.

    Exact score ties (identical attribute vectors) delete the larger id first.
    """
    return oracle_chains(rsn, Q, k, t, np.atleast_2d(np.asarray(w, dtype=float)))[0]


def oracle_chains(rsn: RoadSocialNetwork, Q: Sequence[int], k: int, t: float, W) -> list[FixedWeightRanking]:
    """:func:`oracle_chain_at` for every row of ``W``, sharing one core computation."""
    Q = sorted(set(int(q) for q in Q))
    adj = {v: set(nb) for v, nb in enumerate(rsn.social.adjacency)}
    core = brute_kt_core(rsn, Q, k, t)
    return [_chain(rsn, adj, core, Q, k, w) for w in np.atleast_2d(W)]


def _chain(rsn, adj, H, Q, k, w) -> FixedWeightRanking:
    w = np.asarray(w, dtype=float).reshape(-1)
    full = np.append(w, 1.0 - w.sum())
    if not np.all((full > 0) & (full < 1)):
        raise ValueError("weight outside the open simplex")
    out = FixedWeightRanking(w)
    S = rsn.social.attributes @ full
    while H:
        out.chain.append(H)
        out.scores.append(float(min(S[v] for v in H)))
        victim = min(H, key=lambda v: (S[v], -v))
        if victim in Q:
            break
        H = _naive_q_core(adj, H - {victim}, k, Q)
    return out


def _naive_q_core(adj: dict[int, set[int]], members, k: int, Q: Sequence[int]) -> frozenset[int]:
    """Strip vertices of degree below k until none remain, then keep Q's component."""
    alive = set(members)
    changed = True
    while changed:
        low = {v for v in alive if len(adj[v] & alive) < k}
        changed = bool(low)
        alive -= low
    if not all(q in alive for q in Q):
        return frozenset()
    seen, todo = {Q[0]}, [Q[0]]
    while todo:
        x = todo.pop()
        for y in adj[x] & alive:
            if y not in seen:
                seen.add(y)
                todo.append(y)
    return frozenset(seen) if all(q in seen for q in Q) else frozenset()


def tie_distance(X: np.ndarray, members, W: np.ndarray) -> np.ndarray:
    """Distance of each weight row to the nearest score-tie hyperplane among ``members``."""
    members = sorted(members)
    W = np.atleast_2d(W)
    if len(members) < 2:
        return np.full(len(W), np.inf)
    iu, iv = np.triu_indices(len(members), 1)
    Xm = X[members]
    delta = Xm[iu] - Xm[iv]
    norms = np.linalg.norm(delta[:, :-1] - delta[:, -1:], axis=1)
    keep = norms > 0
    delta, norms = delta[keep], norms[keep]
    if len(delta) == 0:
        return np.full(len(W), np.inf)
    Wf = np.hstack([W, 1.0 - W.sum(axis=1, keepdims=True)])
    return np.min(np.abs(Wf @ delta.T) / norms, axis=1)


def oracle_enumerate(rsn: RoadSocialNetwork, Q: Sequence[int], k: int, t: float) -> list[frozenset[int]]:
    """Every connected k-core containing Q whose members all meet the distance budget."""
    Q = sorted(set(Q))
    H = brute_kt_core(rsn, Q, k, t)
    if len(H) > ENUMERATION_LIMIT:
        raise OracleRefused(f"maximal core has {len(H)} vertices; enumeration is limited to {ENUMERATION_LIMIT}")
    if not H:
        return []
    g = social_graph(rsn.social)
    optional = sorted(H - set(Q))
    out = []
    for r in range(len(optional) + 1):
        for extra in itertools.combinations(optional, r):
            S = set(Q) | set(extra)
            sub = g.subgraph(S)
            if min(dict(sub.degree()).values()) >= k and nx.is_connected(sub):
                out.append(frozenset(S))
    return out


# ---------------------------------------------------------------------------
# random small instances

def random_instance(seed: int, n_max: int = 40, d_choices=(2, 3)) -> dict:
    """A small road-social network plus a query (Q, k, t, region bounds) with a nonempty core.

    Returns a dict with keys ``rsn, Q, k, t, bounds``.
    """
    rng = np.random.default_rng(seed)
    for _ in range(200):
        n = int(rng.integers(8, n_max + 1))
        d = int(rng.choice(d_choices))
        rows, cols = int(rng.integers(2, 5)), int(rng.integers(2, 5))
        road = _small_grid(rows, cols, rng)
        X = rng.random((n, d))
        if rng.random() < 0.2:  # a few identical vectors exercise the tie rule
            X[rng.integers(n)] = X[rng.integers(n)]
        locs = []
        for _v in range(n):
            e = int(rng.integers(len(road.edges)))
            w = road.edges[e][2]
            locs.append(Location(e, float(rng.choice([0.0, w, float(rng.uniform(0, w))]))))
        p = float(rng.uniform(0.15, 0.45))
        edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p]
        social = SocialNetwork.build([f"v{i}" for i in range(n)], edges, locs, X)
        rsn = RoadSocialNetwork(road, social)
        k = int(rng.integers(1, 4))
        g = social_graph(social)
        core = nx.k_core(g, k)
        if core.number_of_nodes() == 0:
            continue
        comp = sorted(max(nx.connected_components(core), key=lambda c: (len(c), -min(c))))
        qn = int(rng.integers(1, min(4, len(comp)) + 1))
        Q = sorted(int(x) for x in rng.choice(comp, size=qn, replace=False))
        D = brute_query_distances(rsn, Q)
        finite = np.sort(D[np.isfinite(D)])
        t = float(finite[int(rng.integers(len(finite) // 2, len(finite)))]) + 0.5
        if not brute_kt_core(rsn, Q, k, t):
            continue
        bounds = []
        for _i in range(d - 1):
            side = float(rng.uniform(0.05, 0.3))
            hi_max = (1.0 - 1e-3) / (d - 1) - side
            lo = float(rng.uniform(0.01, max(0.011, hi_max)))
            bounds.append((lo, lo + side))
        return {"rsn": rsn, "Q": Q, "k": k, "t": t, "bounds": bounds}
    raise RuntimeError("could not draw an instance with a nonempty core")


def _small_grid(rows: int, cols: int, rng: np.random.Generator) -> RoadNetwork:
    edges = []
    for i in range(rows):
        for j in range(cols):
            u = i * cols + j
            if j + 1 < cols:
                edges.append((u, u + 1, float(rng.integers(1, 6))))
            if i + 1 < rows:
                edges.append((u, u + cols, float(rng.integers(1, 6))))
    return RoadNetwork.build(rows * cols, edges)


# ---------------------------------------------------------------------------
# running example

RUNNING_EXAMPLE_REGION = ((0.1, 0.5), (0.2, 0.4))

# v1..v14; attributes of v1..v7 were found by a constrained random search
# and are frozen here.  v8..v14 form a separate cluster far away on the road.
_CORE_ATTRIBUTES = (
    (9.78, 3.84, 2.17),   # v1
    (5.66, 4.47, 7.55),   # v2
    (4.70, 3.63, 7.24),   # v3
    (10.39, 4.35, 2.30),  # v4
    (7.23, 9.16, 2.29),   # v5
    (6.05, 4.13, 8.15),   # v6
    (3.58, 2.40, 6.068),  # v7, S(v7) = 4.47 at w = (0.2, 0.3)
)

_SOCIAL_EDGES = (
    (2, 3), (2, 6), (2, 7), (3, 6), (3, 7), (6, 7),  # K4 on v2, v3, v6, v7
    (4, 2), (4, 3), (4, 5), (5, 3), (5, 6),          # v4 and v5 lean on each other
    (1, 7), (1, 2), (1, 6),                          # v1 hangs on v7
    (9, 10), (10, 11), (11, 9), (8, 10), (8, 11),    # cluster core around v9
    (9, 14), (14, 12), (14, 13), (12, 13),           # v14's branch
)

_ROAD_EDGES = (
    (3, 2, 4.0), (2, 6, 5.0), (7, 2, 2.0), (1, 2, 1.0), (4, 2, 1.0), (5, 2, 1.0),
    (9, 6, 30.0), (8, 9, 1.0), (10, 9, 1.0), (11, 9, 1.0), (12, 9, 1.0), (13, 9, 1.0), (14, 9, 1.0),
)

_CLUSTER_ATTRIBUTES = (
    (5.1, 4.8, 5.3),  # v8
    (5.6, 5.2, 4.9),  # v9
    (4.7, 5.5, 5.0),  # v10
    (5.0, 4.6, 5.4),  # v11
    (1.2, 0.9, 1.4),  # v12
    (0.8, 1.3, 1.1),  # v13
    (9.2, 9.5, 9.1),  # v14
)

RUNNING_EXAMPLE_ATTRIBUTES = _CORE_ATTRIBUTES + _CLUSTER_ATTRIBUTES


def build_running_example_fixture(attributes=None, *, check: bool = True) -> tuple[RoadSocialNetwork, Region]:
    """The 14-user network of the worked examples and the region R.

    With ``check`` the oracle-verifiable facts about the example are asserted.
    """
    from .geometry import Region

    X = np.array(attributes if attributes is not None else RUNNING_EXAMPLE_ATTRIBUTES, dtype=float)
    road = RoadNetwork.build([f"r{i}" for i in range(1, 15)],
                             [(u - 1, v - 1, w) for u, v, w in _ROAD_EDGES])
    locs = [road.location_at_vertex(i) for i in range(14)]  # v_i stands on r_i
    social = SocialNetwork.build([f"v{i}" for i in range(1, 15)],
                                 [(u - 1, v - 1) for u, v in _SOCIAL_EDGES], locs, X)
    rsn = RoadSocialNetwork(road, social)
    if check:
        _check_running_example(rsn)
    return rsn, Region.rectangle(RUNNING_EXAMPLE_REGION)


def _check_running_example(rsn: RoadSocialNetwork) -> None:
    v = {name: i for i, name in enumerate(rsn.social.names)}
    ids = lambda *ns: frozenset(v[f"v{n}"] for n in ns)  # noqa: E731
    Q = tuple(sorted(ids(2, 3, 6)))
    g = social_graph(rsn.social)
    for members in (ids(2, 3, 6, 7), ids(2, 3, 4, 5, 6), ids(2, 3, 4, 5, 6, 7), ids(1, 2, 3, 4, 5, 6, 7)):
        assert min(dict(g.subgraph(members).degree).values()) >= 3, "fixture: a quoted 3-core is broken"
    D = brute_query_distances(rsn, Q)
    assert D[v["v7"]] == 7 and D[v["v3"]] == 9, "fixture: quoted query distances differ"
    assert brute_kt_core(rsn, Q, 3, 9) == ids(1, 2, 3, 4, 5, 6, 7), "fixture: H_3^9 differs"
    assert oracle_chain_at(rsn, Q, 3, 9, (0.2, 0.3)).nc == ids(2, 3, 4, 5, 6), "fixture: NC at (0.2, 0.3)"
    assert oracle_chain_at(rsn, Q, 3, 9, (0.19, 0.3)).nc == ids(2, 3, 6, 7), "fixture: NC at (0.19, 0.3)"
