"""Network distances, the query-distance filter, k-core peeling and the maximal (k,t)-core."""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .network import Location, RoadNetwork, RoadSocialNetwork, SocialNetwork

INF = math.inf


# ---------------------------------------------------------------------------
# road distances

def _seeds(road: RoadNetwork, p: Location) -> list[tuple[float, int]]:
    u, v, w = road.edges[p.edge]
    return [(p.offset, u), (w - p.offset, v)]


def road_distances(road: RoadNetwork, p: Location, limit: float = INF) -> np.ndarray:
    """Shortest-path cost from point ``p`` to every road vertex; ``inf`` beyond ``limit``."""
    dist = np.full(road.n, INF)
    heap = [(c, r) for c, r in _seeds(road, p) if c <= limit]
    heapq.heapify(heap)
    done = np.zeros(road.n, dtype=bool)
    while heap:
        c, r = heapq.heappop(heap)
        if done[r]:
            continue
        done[r] = True
        dist[r] = c
        for x, w, _ in road.adjacency[r]:
            nc = c + w
            if nc <= limit and not done[x] and nc < dist[x]:
                dist[x] = nc
                heapq.heappush(heap, (nc, x))
    dist[~done] = INF
    return dist


def _point_distance(road: RoadNetwork, src: Location, vertex_dist: np.ndarray, dst: Location) -> float:
    u, v, w = road.edges[dst.edge]
    best = min(vertex_dist[u] + dst.offset, vertex_dist[v] + (w - dst.offset))
    if src.edge == dst.edge:
        best = min(best, abs(src.offset - dst.offset))
    return best


def network_distance(road: RoadNetwork, p: Location, q: Location) -> float:
    if p == q:
        return 0.0
    return _point_distance(road, p, road_distances(road, p), q)


def query_distances(rsn: RoadSocialNetwork, Q: Sequence[int], t: float = INF) -> np.ndarray:
    """``D_Q(v)`` for every social vertex, with values above ``t`` reported as ``inf``."""
    if not Q:
        raise ValueError("query set Q must be nonempty")
    road, social = rsn.road, rsn.social
    eu = np.array([road.edges[loc.edge][0] for loc in social.locations], dtype=np.int64)
    ev = np.array([road.edges[loc.edge][1] for loc in social.locations], dtype=np.int64)
    ew = np.array([road.edges[loc.edge][2] for loc in social.locations])
    off = np.array([loc.offset for loc in social.locations])
    edge_of = np.array([loc.edge for loc in social.locations], dtype=np.int64)
    worst = np.zeros(social.n)
    for q in Q:
        if not 0 <= q < social.n:
            raise ValueError(f"query vertex {q} has no location")
        src = social.locations[q]
        vd = road_distances(road, src, t)
        dq = np.minimum(vd[eu] + off, vd[ev] + (ew - off))
        same = edge_of == src.edge
        dq[same] = np.minimum(dq[same], np.abs(off[same] - src.offset))
        np.maximum(worst, dq, out=worst)
    worst[worst > t] = INF
    return worst


def query_distance_filter(rsn: RoadSocialNetwork, Q: Sequence[int], t: float) -> set[int]:
    D = query_distances(rsn, Q, t)
    if t == INF:
        return set(range(rsn.social.n))
    return {int(v) for v in np.flatnonzero(D <= t)}


# ---------------------------------------------------------------------------
# induced subgraphs and peeling

def induced_degree(adj, members, v: int) -> int:
    return sum(1 for x in adj[v] if x in members)


@dataclass(frozen=True)
class Subgraph:
    parent: SocialNetwork = field(repr=False)
    members: frozenset[int]
    degree: dict[int, int] = field(repr=False, compare=False)

    @classmethod
    def of(cls, parent: SocialNetwork, members: Iterable[int]) -> "Subgraph":
        members = frozenset(members)
        adj = parent.adjacency
        return cls(parent, members, {v: induced_degree(adj, members, v) for v in members})

    def __len__(self) -> int:
        return len(self.members)

    def min_degree(self) -> int:
        return min(self.degree.values()) if self.degree else 0

    def is_connected(self) -> bool:
        if not self.members:
            return True
        return len(component(self.parent.adjacency, self.members, next(iter(self.members)))) == len(self.members)


def component(adj, members, start: int) -> set[int]:
    seen = {start}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        for y in adj[x]:
            if y in members and y not in seen:
                seen.add(y)
                queue.append(y)
    return seen


def peel(adj, members, k: int) -> set[int]:
    """Vertex set of the maximal k-core of the subgraph induced by ``members``."""
    alive = set(members)
    deg = {v: induced_degree(adj, alive, v) for v in alive}
    stack = [v for v, dv in deg.items() if dv < k]
    gone = set(stack)
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if y in alive and y not in gone:
                deg[y] -= 1
                if deg[y] < k:
                    gone.add(y)
                    stack.append(y)
    return alive - gone


def q_component_core(adj, members, k: int, Q: Sequence[int]) -> frozenset[int]:
    """Connected component containing all of Q inside the maximal k-core of ``members``.

    Returns the empty set when Q does not survive peeling or is split.
    """
    core = peel(adj, members, k)
    if not all(q in core for q in Q):
        return frozenset()
    comp = component(adj, core, Q[0])
    if not all(q in comp for q in Q):
        return frozenset()
    return frozenset(comp)


def core_decomposition(g) -> dict[int, int]:
    """Core number of every vertex, by bucket peeling in O(n + m)."""
    if isinstance(g, Subgraph):
        adj, vertices = g.parent.adjacency, g.members
    elif isinstance(g, SocialNetwork):
        adj, vertices = g.adjacency, range(g.n)
    else:
        adj, vertices = g, range(len(g))
    members = set(vertices)
    deg = {v: induced_degree(adj, members, v) for v in members}
    if not deg:
        return {}
    maxdeg = max(deg.values())
    buckets: list[set[int]] = [set() for _ in range(maxdeg + 1)]
    for v, dv in deg.items():
        buckets[dv].add(v)
    core: dict[int, int] = {}
    current = 0
    for _ in range(len(deg)):
        while not buckets[current]:
            current += 1
        v = buckets[current].pop()
        core[v] = current
        for y in adj[v]:
            if y in deg and y not in core and deg[y] > current:
                buckets[deg[y]].discard(y)
                deg[y] -= 1
                buckets[deg[y]].add(y)
    return core


def coreness_upper_bound(n: int, m: int) -> int:
    if m < n - 1:
        return 1
    return (1 + math.isqrt(9 + 8 * (m - n))) // 2


# ---------------------------------------------------------------------------
# maximal (k, t)-core

@dataclass(frozen=True)
class KTCore:
    subgraph: Subgraph
    k: int
    t: float
    Q: tuple[int, ...]
    query_distance: dict[int, float] = field(repr=False, compare=False)

    @property
    def members(self) -> frozenset[int]:
        return self.subgraph.members

    def __len__(self) -> int:
        return len(self.subgraph)


@dataclass(frozen=True)
class NoCore:
    """The query has no (k, t)-core; a normal outcome, not an error."""

    reason: str

    def __bool__(self) -> bool:
        return False


def maximal_kt_core(rsn: RoadSocialNetwork, Q: Sequence[int], k: int, t: float) -> KTCore | NoCore:
    Q = tuple(sorted(set(int(q) for q in Q)))
    if not Q:
        raise ValueError("query set Q must be nonempty")
    social = rsn.social
    adj = social.adjacency
    D = query_distances(rsn, Q, t)
    alive = {int(v) for v in np.flatnonzero(D <= t)} if t != INF else set(range(social.n))
    if not all(q in alive for q in Q):
        return NoCore("a query vertex violates the distance budget")
    comp = component(adj, alive, Q[0])
    if not all(q in comp for q in Q):
        return NoCore("query vertices lie in different components")
    n_f = len(comp)
    m_f = sum(induced_degree(adj, comp, v) for v in comp) // 2
    if k > coreness_upper_bound(n_f, m_f):
        return NoCore(f"k={k} exceeds the coreness upper bound")
    members = q_component_core(adj, comp, k, Q)
    if not members:
        return NoCore("query vertices do not share a connected k-core")
    sub = Subgraph.of(social, members)
    return KTCore(sub, k, t, Q, {v: float(D[v]) for v in members})


# ---------------------------------------------------------------------------
# cascaded deletion

@dataclass(frozen=True)
class EarlyTermination:
    reason: str

    def __bool__(self) -> bool:
        return False


def cascade_delete(adj, members, u: int, k: int, Q: Sequence[int]) -> set[int] | None:
    """Vertices removed when ``u`` is deleted from ``members`` and the k-core is restored.

    ``None`` when the deletion would remove or disconnect a query vertex.
    """
    if u in Q:
        return None
    qset = set(Q)
    removed = {u}
    deg: dict[int, int] = {}
    stack = [u]
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if y not in members or y in removed:
                continue
            if y not in deg:
                deg[y] = induced_degree(adj, members, y)
            deg[y] -= 1
            if deg[y] < k:
                if y in qset:
                    return None
                removed.add(y)
                stack.append(y)
    # Remaining vertices form a k-core; keep only the part reachable from Q.
    start = Q[0]
    seen = {start}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        for y in adj[x]:
            if y in members and y not in removed and y not in seen:
                seen.add(y)
                queue.append(y)
    if not qset <= seen:
        return None
    if len(seen) + len(removed) < len(members):
        removed |= set(members) - seen - removed
    return removed


def dfs_delete(h: Subgraph, u: int, k: int, Q: Sequence[int]) -> tuple[Subgraph, frozenset[int]] | EarlyTermination:
    if u not in h.members:
        raise ValueError(f"vertex {u} is not in the subgraph")
    Q = tuple(Q)
    if u in Q:
        return EarlyTermination("deleted vertex is a query vertex")
    removed = cascade_delete(h.parent.adjacency, h.members, u, k, Q)
    if removed is None:
        return EarlyTermination("deletion disconnects or removes a query vertex")
    return Subgraph.of(h.parent, h.members - removed), frozenset(removed)
