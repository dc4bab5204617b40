"""Local search: grow candidate communities around Q, then verify them.

Verification rests on one fact about the deletion chain at a fixed weight
``w``: the chain passes through a community ``H`` exactly when ``H`` is the
Q-component of the maximal k-core of ``C - L``, where ``C`` is the maximal
(k,t)-core and ``L`` holds the outside vertices scoring below ``S(H)``.  The
chain stops at ``H`` when its minimum vertex is not an anchor.  Verify splits
the region until both tests have a constant answer in every piece; pieces
where both pass are exactly the cells in which ``H`` is the non-contained
community.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dominance import DominanceGraph, bits, build_rdominance_graph, induced_views
from .geometry import Cell, HalfSpaceCache, Region, full_weight, root_cell, split_cell
from .global_search import local_leaves, parse_mode, split_by_minimum
from .ktcore import KTCore, NoCore, cascade_delete, component, maximal_kt_core, peel, q_component_core
from .network import RoadSocialNetwork
from .results import ResultEntry, ResultSet

STRATEGIES = ("layer-density", "layer-mindeg")


@dataclass(frozen=True)
class Candidate:
    members: frozenset[int]
    trace: tuple[int, ...] = ()


@dataclass(eq=False)
class VerifyOutcome:
    status: str  # "valid" or "discarded"
    reason: str = ""
    cells: list[Cell] = field(default_factory=list)
    anchors: frozenset[int] = frozenset()
    halfspaces: list = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return self.status == "valid"


@dataclass(eq=False)
class _Context:
    """Per-query data shared by Expand and Verify."""

    core: KTCore
    gd: DominanceGraph
    adj: tuple
    k: int
    Q: tuple[int, ...]
    X: np.ndarray
    region: Region
    cache: HalfSpaceCache

    def f(self, low_mask: int) -> frozenset[int]:
        """Q-component of the maximal k-core after deleting ``low_mask``."""
        alive = self.core.members - frozenset(self.gd.vertices(low_mask))
        return q_component_core(self.adj, alive, self.k, self.Q)


# ---------------------------------------------------------------------------
# Expand

def expand(core: KTCore, gd: DominanceGraph, adj, Q: Sequence[int], k: int,
           strategy: str = "layer-density", budget: int = 128, zeta: float = 100.0,
           lam: float = 10.0, *, region: Region | None = None, X: np.ndarray | None = None,
           seed: int = 0, patience: int = 16) -> list[Candidate]:
    """Candidates found by priority-driven growth from Q inside the maximal core.

    The first run uses ``strategy`` with the layers of ``gd`` and records
    the Q-component of the grown set's k-core whenever it grows.  Each
    further run (up to ``budget`` runs in total) is a restart at one weight
    of the region, pivot first, then corners, then seeded samples; it
    contributes every community of the deletion chain at that weight.
    Restarts stop early once ``patience`` of them in a row found nothing new.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    if lam <= 0:
        raise ValueError("lambda must be positive")
    Q = tuple(sorted(Q))
    if not set(Q) <= core.members:
        return []
    out: list[Candidate] = []
    seen: set[frozenset[int]] = set()
    base_deg = {v: sum(1 for x in adj[v] if x in core.members) for v in core.members}
    idle = 0
    for run, layer in enumerate(_layerings(core, gd, budget, region, X, seed)):
        if run == 0:
            z = max(float(zeta), max(layer.values(), default=0) + 1.0)
            found = _grow(core, layer, adj, Q, k, strategy, z, lam)
        else:
            if idle >= patience:
                break
            found = _chain_states(core, adj, Q, k, sorted(layer, key=layer.__getitem__, reverse=True),
                                  base_deg)
        fresh = [c for c in found if c.members not in seen]
        idle = 0 if fresh else idle + 1
        for cand in fresh:
            seen.add(cand.members)
            out.append(cand)
    return out


def _layerings(core: KTCore, gd: DominanceGraph, budget: int, region: Region | None,
               X: np.ndarray | None, seed: int):
    if budget < 1:
        return
    yield gd.layers
    if region is None or X is None:
        return
    members = np.array(sorted(core.members))
    points = [region.pivot, *region.corners]
    rng = np.random.default_rng(seed)
    need = budget - 1 - len(points)
    if need > 0:
        points.extend(region.sample(rng, need))
    for w in points[:budget - 1]:
        s = X[members] @ full_weight(w)
        order = np.lexsort((members, -s))  # decreasing score, lower id first
        yield {int(members[i]): r for r, i in enumerate(order)}


def _grow(core, layer, adj, Q, k, strategy, zeta, lam) -> list[Candidate]:
    allowed = core.members
    members = set(Q)
    deg = {v: sum(1 for x in adj[v] if x in members) for v in members}
    nbr_in = {}  # frontier vertex -> neighbours inside members
    for v in members:
        for x in adj[v]:
            if x in allowed and x not in members:
                nbr_in[x] = nbr_in.get(x, 0) + 1
    trace: list[int] = []
    snaps: list[Candidate] = []
    kcore = set(peel(adj, members, k))
    pending = members - kcore
    last = frozenset()

    def snapshot():
        nonlocal last
        if not all(q in kcore for q in Q):
            return
        comp = component(adj, kcore, Q[0])
        if all(q in comp for q in Q) and len(comp) > len(last):
            last = frozenset(comp)
            snaps.append(Candidate(last, tuple(trace)))

    def absorb(v: int) -> bool:
        # New core vertices are connected to v through pending vertices of degree >= k.
        if deg[v] < k:
            return False
        reach, stack = {v}, [v]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y in pending and y not in reach and deg[y] >= k:
                    reach.add(y)
                    stack.append(y)
        rdeg = {x: sum(1 for y in adj[x] if y in reach or y in kcore) for x in reach}
        stack = [x for x, dx in rdeg.items() if dx < k]
        gone = set(stack)
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y in reach and y not in gone:
                    rdeg[y] -= 1
                    if rdeg[y] < k:
                        gone.add(y)
                        stack.append(y)
        grown = reach - gone
        if not grown:
            return False
        kcore.update(grown)
        pending.difference_update(grown)
        return True

    def priority(v: int) -> float:
        return lam * nbr_in[v] + (zeta - layer[v])

    heap = [(-priority(v), v, nbr_in[v]) for v in nbr_in] if strategy != "layer-mindeg" else []
    heapq.heapify(heap)

    def pick() -> int:
        if strategy != "layer-mindeg":
            while True:
                _, v, seen_at = heapq.heappop(heap)
                if nbr_in.get(v) == seen_at:
                    return v
        delta = min(deg.values())
        at_min = sum(1 for d in deg.values() if d == delta)

        def mindeg_priority(v: int) -> float:
            inside = nbr_in[v]
            covered = sum(1 for x in adj[v] if x in members and deg[x] == delta)
            new_min = min(inside, delta + 1 if covered == at_min else delta)
            return zeta * (new_min - delta) + (zeta - layer[v])

        return max(nbr_in, key=lambda x: (mindeg_priority(x), -x))

    snapshot()
    while nbr_in:
        v = pick()
        del nbr_in[v]
        members.add(v)
        pending.add(v)
        trace.append(v)
        deg[v] = 0
        for x in adj[v]:
            if x in members:
                deg[x] += 1
                deg[v] += 1
            elif x in allowed:
                nbr_in[x] = nbr_in.get(x, 0) + 1
                if strategy != "layer-mindeg":
                    heapq.heappush(heap, (-priority(x), x, nbr_in[x]))
        if absorb(v):
            snapshot()
    return snaps


def _chain_states(core, adj, Q, k, order, base_deg=None) -> list[Candidate]:
    """Communities of the deletion chain that deletes vertices in ``order``.

    A forward pass peels the core in deletion order and stops before a batch
    that would remove a query vertex.  A backward pass re-inserts the batches
    with union-find, so the query component of every state costs near-linear
    time overall.  Returned largest first.
    """
    alive = set(core.members)
    if base_deg is None:
        base_deg = {v: sum(1 for x in adj[v] if x in alive) for v in alive}
    deg = dict(base_deg)
    qs = set(Q)
    batches: list[list[int]] = []
    for v in order:
        if v not in alive:
            continue
        if v in qs:
            break
        batch, stack = [v], [v]
        alive.discard(v)
        hit_q = False
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y in alive:
                    deg[y] -= 1
                    if deg[y] < k:
                        alive.discard(y)
                        batch.append(y)
                        stack.append(y)
                        hit_q = hit_q or y in qs
        if hit_q:
            alive.update(batch)
            break
        batches.append(batch)

    parent: dict[int, int] = {}
    items: dict[int, list[int]] = {}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def insert(vertices) -> None:
        for v in vertices:
            parent[v] = v
            items[v] = [v]
        for v in vertices:
            for y in adj[v]:
                if y in parent:
                    a, b = find(v), find(y)
                    if a != b:
                        if len(items[a]) < len(items[b]):
                            a, b = b, a
                        parent[b] = a
                        items[a].extend(items.pop(b))

    states: list[Candidate] = []
    insert(sorted(alive))
    for batch in [None] + batches[::-1]:
        if batch is not None:
            insert(batch)
        root = find(Q[0])
        if all(find(q) == root for q in Q):
            members = frozenset(items[root])
            if not states or len(members) != len(states[-1].members):
                states.append(Candidate(members))
    return states[::-1]


# ---------------------------------------------------------------------------
# Verify

def outside_split(members: frozenset[int], gd: DominanceGraph) -> tuple[int, int]:
    """Masks ``(P, N)`` of outside vertices.

    ``N`` holds outside vertices that r-dominate some member, so they can
    never score below the community; ``P`` is the rest.
    """
    hmask = gd.mask(members)
    outside = gd.scope & ~hmask
    n_mask = 0
    for i in bits(outside):
        if gd.desc[i] & hmask:
            n_mask |= 1 << i
    return outside & ~n_mask, n_mask


def is_promising(members: frozenset[int], ctx: _Context) -> tuple[bool, str]:
    gd = ctx.gd
    P, N = outside_split(members, gd)
    outside = P | N
    if outside:
        leaves = gd.leaves_mask()
        if not outside & leaves:
            return False, "no-outside-leaf"
    if ctx.f(P) != members:
        return False, "not-closed"
    return True, ""


def find_anchors(members: frozenset[int], gd: DominanceGraph, adj, k: int, Q: Sequence[int]) -> frozenset[int]:
    """Non-query leaves of the candidate's dominance view whose deletion leaves a valid core."""
    mask = gd.mask(members)
    Q = tuple(sorted(Q))
    return frozenset(e for e in local_leaves(gd, mask)
                     if e not in Q and cascade_delete(adj, members, e, k, Q) is not None)


def detect_bound(gc: DominanceGraph, v: int, core: KTCore, adj, k: int) -> tuple[str, int | None]:
    """Classify a top vertex of the outside view by cascaded deletion inside the core.

    Returns ``("deletable-from-below", None)``, ``("mutually-bound", v2)`` or
    ``("free", None)``.
    """
    below = gc.descendants(v)
    if below and v not in peel(adj, core.members - below, k):
        return "deletable-from-below", None
    gone_v = core.members - peel(adj, core.members - {v}, k)
    for other in sorted(gc.roots() - {v}):
        if other in gone_v:
            gone_other = core.members - peel(adj, core.members - {other}, k)
            if v in gone_other:
                return "mutually-bound", other
    return "free", None


def verify(members: frozenset[int], ctx: _Context, *, resolve_all: bool = False) -> VerifyOutcome:
    """Cells of the region in which ``members`` is the non-contained community.

    With ``resolve_all`` every outside vertex that could score below the
    community is compared with it, so each cell knows its exact low set.
    """
    gd, X = ctx.gd, ctx.X
    anchors = find_anchors(members, gd, ctx.adj, ctx.k, ctx.Q)
    E = local_leaves(gd, gd.mask(members))
    if all(e in anchors for e in E):
        return VerifyOutcome("discarded", "empty-partition", anchors=anchors)
    P, _ = outside_split(members, gd)
    outcome = VerifyOutcome("valid", anchors=anchors)
    stack = [(root_cell(ctx.region), None)]
    while stack:
        cell, emin = stack.pop()
        if emin is None:
            for sub, e in reversed(split_by_minimum(cell, E, ctx.region, ctx.cache, X)):
                if e not in anchors:
                    stack.append((sub, e))
            continue
        sure, maybe, unknown = _low_bounds(cell, emin, P, gd)
        if ctx.f(maybe) != members:
            continue
        if not unknown or (not resolve_all and ctx.f(sure) == members):
            cell.annotations["emin"] = emin
            outcome.cells.append(cell)
            continue
        v = _pick_split(cell, emin, unknown, gd, X)
        hs, _ = ctx.cache.get(v, emin)
        outcome.halfspaces.append(hs)
        for side, child in sorted(split_cell(cell, hs, ctx.region).items(), reverse=True):
            if side > 0:
                child.learn(hs.winner, hs.loser)
            else:
                child.learn(hs.loser, hs.winner)
            stack.append((child, emin))
    if not outcome.cells:
        outcome.status, outcome.reason = "discarded", "empty-partition"
    return outcome


def _low_bounds(cell: Cell, e: int, P: int, gd: DominanceGraph) -> tuple[int, int, int]:
    """Masks of vertices surely below ``S(e)``, possibly below it, and undecided."""
    rel = cell.relation()
    ie = gd.index[e]
    sure = P & gd.desc[ie]
    above = 0
    for i in bits(P & ~sure):
        v = gd.members[i]
        if (e, v) in rel:
            sure |= 1 << i
        elif (v, e) in rel:
            above |= 1 << i
    # lower than a low vertex is low; higher than a high vertex is high
    for i in bits(sure):
        sure |= gd.desc[i] & P
    for i in bits(above):
        above |= gd.anc[i] & P
    maybe = P & ~above
    return sure, maybe, maybe & ~sure


def _pick_split(cell: Cell, e: int, unknown: int, gd: DominanceGraph, X: np.ndarray) -> int:
    """Undecided vertex whose comparison with ``e`` settles the most others."""
    w = full_weight(cell.witness)
    se = float(X[e] @ w)
    best, best_gain = -1, -1
    for i in bits(unknown):
        v = gd.members[i]
        closure = gd.desc[i] if float(X[v] @ w) < se else gd.anc[i]
        gain = (closure & unknown).bit_count()
        if gain > best_gain:
            best, best_gain = v, gain
    return best


# ---------------------------------------------------------------------------
# top-j extension

def _rank_chain(cell: Cell, members: frozenset[int], e: int, ctx: _Context, j: int
                ) -> list[tuple[Cell, tuple[frozenset[int], ...]]]:
    """Split a fully resolved cell until the first ``j`` chain ancestors are fixed."""
    gd, X = ctx.gd, ctx.X
    P, _ = outside_split(members, gd)
    low, _, unknown = _low_bounds(cell, e, P, gd)
    assert not unknown
    out = []
    stack = [(cell, low, (members,))]
    while stack:
        cur, low, ranks = stack.pop()
        if len(ranks) == j or not low:
            out.append((cur, ranks))
            continue
        tops = [gd.members[i] for i in bits(low) if not gd.anc[i] & low]
        for sub, x in reversed(_split_by_maximum(cur, tops, ctx)):
            rest = low & ~(1 << gd.index[x])
            grown = ctx.f(rest)
            stack.append((sub, rest, ranks + (grown,) if grown != ranks[-1] else ranks))
    return out


def _split_by_maximum(cell: Cell, candidates: list[int], ctx: _Context) -> list[tuple[Cell, int]]:
    return split_by_minimum(cell, candidates, ctx.region, ctx.cache, ctx.X, largest=True)


# ---------------------------------------------------------------------------
# driver

def ls_search(rsn: RoadSocialNetwork, Q: Sequence[int], k: int, t: float, region: Region,
              mode: str = "nc", j: int | None = None, *, strategy: str = "layer-density",
              budget: int = 128, zeta: float = 100.0, lam: float = 10.0, seed: int = 0,
              core: KTCore | NoCore | None = None, gd: DominanceGraph | None = None) -> ResultSet:
    mode, j = parse_mode(mode, j)
    X = rsn.social.attributes
    if region.dim != rsn.social.d - 1:
        raise ValueError(f"region has dimension {region.dim}, expected {rsn.social.d - 1}")
    Q = tuple(sorted(set(int(q) for q in Q)))
    if core is None:
        core = maximal_kt_core(rsn, Q, k, t)
    if not core:
        return ResultSet(mode, j, region, diagnostic=f"no (k,t)-core: {core.reason}")
    if gd is None:
        gd = build_rdominance_graph(X, core.members, region, rsn.social.names)
    ctx = _Context(core, gd, rsn.social.adjacency, k, Q, X, region, HalfSpaceCache(X))
    result = ResultSet(mode, j, region, core_size=len(core))
    candidates = expand(core, gd, ctx.adj, Q, k, strategy, budget, zeta, lam, region=region, X=X, seed=seed)
    discarded: dict[str, int] = {}
    for cand in sorted(candidates, key=lambda c: (len(c.members), sorted(c.members))):
        ok, reason = is_promising(cand.members, ctx)
        if not ok:
            discarded[reason] = discarded.get(reason, 0) + 1
            continue
        outcome = verify(cand.members, ctx, resolve_all=(mode == "topj"))
        if not outcome.valid:
            discarded[outcome.reason] = discarded.get(outcome.reason, 0) + 1
            continue
        for cell in outcome.cells:
            if mode == "nc":
                result.entries.append(ResultEntry(Cell(cell.constraints, cell.witness), (cand.members,)))
                continue
            for sub, ranks in _rank_chain(cell, cand.members, cell.annotations["emin"], ctx, j):
                result.entries.append(ResultEntry(Cell(sub.constraints, sub.witness), ranks))
    result.stats.update(candidates=len(candidates), discarded=discarded, halfspaces=ctx.cache.computed)
    return result


__all__ = [
    "Candidate", "VerifyOutcome", "STRATEGIES", "expand", "is_promising", "find_anchors",
    "detect_bound", "verify", "ls_search", "induced_views",
]
