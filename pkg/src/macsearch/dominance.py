"""The r-dominance graph over a query's maximal (k,t)-core.

Vertices are swept best-first over an STR-packed R-tree of their attribute
vectors, keyed by score at the region pivot.  Every popped vertex is tested
only against vertices confirmed before it; a confirmed vertex that strictly
beats a box's upper-right corner at every region corner is inherited by every
vertex in that box without further tests.

Reachability is stored as Python-int bitmasks over member positions (``anc``
and ``desc``), which makes induced views and leaf/top queries cheap.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

from .geometry import Region, corner_weights, dominators_among

FANOUT = 16


def bits(mask: int) -> Iterator[int]:
    """Positions of the set bits of ``mask``, lowest first."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


# ---------------------------------------------------------------------------
# STR-packed R-tree

@dataclass(eq=False)
class RNode:
    node_id: int
    lo: np.ndarray
    hi: np.ndarray
    children: list["RNode"] = field(default_factory=list)
    entries: tuple[int, ...] = ()

    @property
    def is_leaf(self) -> bool:
        return not self.children


@dataclass(eq=False)
class SpatialIndex:
    root: RNode
    vectors: dict[int, np.ndarray] = field(repr=False)
    height: int = 1

    def nodes(self) -> Iterator[RNode]:
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def find(self, v: int) -> RNode | None:
        """Leaf holding ``v``, located by box descent."""
        x = self.vectors[v]
        stack = [self.root]
        while stack:
            node = stack.pop()
            if np.any(x < node.lo) or np.any(x > node.hi):
                continue
            if node.is_leaf:
                if v in node.entries:
                    return node
            else:
                stack.extend(node.children)
        return None


def _str_groups(keys: np.ndarray, ids: np.ndarray, fanout: int) -> list[np.ndarray]:
    """Sort-tile-recursive grouping of rows of ``keys`` into runs of at most ``fanout``."""
    n, dim = keys.shape
    if n <= fanout:
        return [ids]

    def tile(rows: np.ndarray, axis: int) -> list[np.ndarray]:
        if axis == dim - 1 or len(rows) <= fanout:
            order = rows[np.lexsort((ids[rows], keys[rows, axis]))]
            return [order[i:i + fanout] for i in range(0, len(order), fanout)]
        remaining = dim - axis
        slabs = int(np.ceil((-(-len(rows) // fanout)) ** (1.0 / remaining)))
        per = fanout * int(np.ceil(-(-len(rows) // fanout) / slabs))
        order = rows[np.lexsort((ids[rows], keys[rows, axis]))]
        out = []
        for i in range(0, len(order), per):
            out.extend(tile(order[i:i + per], axis + 1))
        return out

    return [ids[g] for g in tile(np.arange(n), 0)]


def build_spatial_index(X: np.ndarray, members: Iterable[int], fanout: int = FANOUT) -> SpatialIndex:
    members = np.array(sorted(members), dtype=np.int64)
    if len(members) == 0:
        raise ValueError("spatial index needs at least one vector")
    counter = itertools.count()
    vecs = np.asarray(X[members], dtype=float)
    pos = {int(v): i for i, v in enumerate(members)}
    level = []
    for group in _str_groups(vecs, members, fanout):
        rows = vecs[[pos[int(v)] for v in group]]
        level.append(RNode(next(counter), rows.min(axis=0), rows.max(axis=0), entries=tuple(int(v) for v in group)))
    height = 1
    while len(level) > 1:
        centres = np.array([(node.lo + node.hi) / 2.0 for node in level])
        ids = np.arange(len(level))
        parents = []
        for group in _str_groups(centres, ids, fanout):
            kids = [level[i] for i in group]
            parents.append(RNode(next(counter), np.min([k.lo for k in kids], axis=0),
                                 np.max([k.hi for k in kids], axis=0), children=kids))
        level = parents
        height += 1
    return SpatialIndex(level[0], {int(v): vecs[i] for i, v in enumerate(members)}, height)


# ---------------------------------------------------------------------------
# dominance graph

@dataclass(eq=False)
class DominanceGraph:
    """Reachability of r-dominance among ``members`` (sorted global ids).

    ``anc[i]``/``desc[i]`` are bitmasks over member positions.  ``scope`` is
    the mask of positions that belong to this (possibly induced) view.
    """

    members: tuple[int, ...]
    anc: list[int] = field(repr=False)
    desc: list[int] = field(repr=False)
    scope: int = field(repr=False)
    names: tuple[str, ...] | None = field(default=None, repr=False)
    pop_order: tuple[int, ...] = field(default=(), repr=False)
    pop_scores: tuple[float, ...] = field(default=(), repr=False)

    @cached_property
    def index(self) -> dict[int, int]:
        return {v: i for i, v in enumerate(self.members)}

    # --- membership helpers -------------------------------------------------

    def pos(self, v: int) -> int:
        i = self.index.get(v)
        if i is None or not (self.scope >> i) & 1:
            raise KeyError(f"vertex {v} is not in the dominance graph")
        return i

    def mask(self, vertices: Iterable[int]) -> int:
        m = 0
        for v in vertices:
            m |= 1 << self.index[v]
        return m

    def vertices(self, mask: int) -> list[int]:
        return [self.members[i] for i in bits(mask)]

    @property
    def vertex_set(self) -> list[int]:
        return self.vertices(self.scope)

    def __len__(self) -> int:
        return self.scope.bit_count()

    def __contains__(self, v: int) -> bool:
        i = self.index.get(v)
        return i is not None and bool((self.scope >> i) & 1)

    # --- relations -----------------------------------------------------------

    def ancestors_mask(self, v: int) -> int:
        return self.anc[self.pos(v)] & self.scope

    def descendants_mask(self, v: int) -> int:
        return self.desc[self.pos(v)] & self.scope

    def ancestors(self, v: int) -> frozenset[int]:
        return frozenset(self.vertices(self.ancestors_mask(v)))

    def descendants(self, v: int) -> frozenset[int]:
        return frozenset(self.vertices(self.descendants_mask(v)))

    def dominates(self, u: int, v: int) -> bool:
        """True iff ``u`` r-dominates ``v`` (reachability in the DAG)."""
        return bool((self.anc[self.pos(v)] >> self.pos(u)) & 1)

    def leaves_mask(self) -> int:
        out = 0
        for i in bits(self.scope):
            if not self.desc[i] & self.scope:
                out |= 1 << i
        return out

    def roots_mask(self) -> int:
        out = 0
        for i in bits(self.scope):
            if not self.anc[i] & self.scope:
                out |= 1 << i
        return out

    def leaves(self) -> frozenset[int]:
        return frozenset(self.vertices(self.leaves_mask()))

    def roots(self) -> frozenset[int]:
        return frozenset(self.vertices(self.roots_mask()))

    @cached_property
    def _topo(self) -> list[int]:
        # a strict ancestor always has strictly fewer ancestors
        return sorted(bits(self.scope), key=lambda i: ((self.anc[i] & self.scope).bit_count(), i))

    @cached_property
    def parents(self) -> dict[int, tuple[int, ...]]:
        """Transitively reduced in-arcs of every vertex in scope."""
        out = {}
        for i in self._topo:
            a = self.anc[i] & self.scope
            implied = 0
            for j in bits(a):
                implied |= self.anc[j]
            out[self.members[i]] = tuple(self.vertices(a & ~implied))
        return out

    def arcs(self) -> list[tuple[int, int]]:
        return sorted((u, v) for v, ps in self.parents.items() for u in ps)

    @cached_property
    def layers(self) -> dict[int, int]:
        """Longest-path depth from the roots, found by peeling roots round by round."""
        layer: dict[int, int] = {}
        rest = list(bits(self.scope))
        remaining = self.scope
        depth = 0
        while rest:
            roots = [i for i in rest if not self.anc[i] & remaining]
            for i in roots:
                layer[self.members[i]] = depth
                remaining &= ~(1 << i)
            rest = [i for i in rest if (remaining >> i) & 1]
            depth += 1
        return layer

    def layer_of(self, v: int) -> int:
        self.pos(v)
        return self.layers[v]

    def rdominance_count(self, v: int) -> int:
        return self.ancestors_mask(v).bit_count()

    @property
    def max_layer(self) -> int:
        return max(self.layers.values(), default=0)

    def restrict(self, vertices: Iterable[int] | int) -> "DominanceGraph":
        m = vertices if isinstance(vertices, int) else self.mask(vertices)
        return DominanceGraph(self.members, self.anc, self.desc, m & self.scope, self.names)

    def to_dot(self) -> str:
        name = (lambda v: self.names[v]) if self.names else str
        lines = ["digraph rdominance {"]
        for v in self.vertex_set:
            lines.append(f'  "{name(v)}" [label="{name(v)} (l={self.layers[v]})"];')
        for u, v in self.arcs():
            lines.append(f'  "{name(u)}" -> "{name(v)}";')
        lines.append("}")
        return "\n".join(lines) + "\n"


def induced_views(gd: DominanceGraph, members: Iterable[int]) -> tuple[DominanceGraph, DominanceGraph]:
    """``(G_e, G_c)``: the graph restricted to ``members`` and to the rest."""
    m = gd.mask(members) & gd.scope
    return gd.restrict(m), gd.restrict(gd.scope & ~m)


def from_relation(members: Sequence[int], dominators: dict[int, Iterable[int]], names=None) -> DominanceGraph:
    """Graph whose reachability is the transitive closure of ``dominators``."""
    members = tuple(sorted(members))
    index = {v: i for i, v in enumerate(members)}
    preds = {index[v]: {index[u] for u in dominators.get(v, ())} for v in members}
    indeg = {i: len(p) for i, p in preds.items()}
    succ: dict[int, list[int]] = {i: [] for i in preds}
    for i, p in preds.items():
        for j in p:
            succ[j].append(i)
    ready = sorted(i for i, c in indeg.items() if c == 0)
    heapq.heapify(ready)
    anc = [0] * len(members)
    done = 0
    while ready:
        i = heapq.heappop(ready)
        done += 1
        a = 0
        for j in preds[i]:
            a |= anc[j] | (1 << j)
        anc[i] = a
        for s in succ[i]:
            indeg[s] -= 1
            if indeg[s] == 0:
                heapq.heappush(ready, s)
    if done != len(members):
        raise ValueError("dominance relation has a cycle")
    desc = [0] * len(members)
    for i, a in enumerate(anc):
        for j in bits(a):
            desc[j] |= 1 << i
    return DominanceGraph(members, anc, desc, (1 << len(members)) - 1, names)


def build_rdominance_graph(X: np.ndarray, members: Iterable[int], region: Region,
                           names: Sequence[str] | None = None, fanout: int = FANOUT) -> DominanceGraph:
    """Best-first sweep over the R-tree in decreasing pivot score."""
    members = sorted(members)
    if not members:
        raise ValueError("dominance graph needs at least one vertex")
    X = np.asarray(X, dtype=float)
    index = build_spatial_index(X, members, fanout)
    C = corner_weights(region)
    pivot = np.append(region.pivot, 1.0 - region.pivot.sum())

    confirmed: list[int] = []
    conf_pos: dict[int, int] = {}
    dominators: dict[int, list[int]] = {}
    pops: list[int] = []
    pop_scores: list[float] = []
    # heap entries: (-score, kind, id, payload, inherited confirmed-count-mask)
    heap = [(-float(index.root.hi @ pivot), 0, index.root.node_id, index.root, 0)]
    while heap:
        neg, kind, ident, payload, inherited = heapq.heappop(heap)
        # confirmed vertices not yet tested against this entry
        untested = [u for u in confirmed if not (inherited >> conf_pos[u]) & 1]
        if kind == 0:
            node: RNode = payload
            if untested:
                vals = (X[untested] - node.hi) @ C.T
                for u, strict in zip(untested, np.all(vals > 0.0, axis=1)):
                    if strict:
                        inherited |= 1 << conf_pos[u]
            if node.is_leaf:
                for v in node.entries:
                    heapq.heappush(heap, (-float(X[v] @ pivot), 1, v, v, inherited))
            else:
                for child in node.children:
                    heapq.heappush(heap, (-float(child.hi @ pivot), 0, child.node_id, child, inherited))
            continue
        v: int = payload
        doms = [confirmed[j] for j in bits(inherited)]
        if untested:
            hit = dominators_among(v, untested, C, X)
            doms.extend(u for u, h in zip(untested, hit) if h)
        dominators[v] = doms
        conf_pos[v] = len(confirmed)
        confirmed.append(v)
        pops.append(v)
        pop_scores.append(-neg)
    _repair_order(X, C, pops, pop_scores, dominators)
    gd = from_relation(members, dominators, tuple(names) if names is not None else None)
    gd.pop_order = tuple(pops)
    gd.pop_scores = tuple(pop_scores)
    return gd


def _repair_order(X, C, pops, pop_scores, dominators) -> None:
    """Catch dominators popped later than their dominee because of rounding.

    Exact arithmetic makes this impossible; in floating point it can only
    happen between vertices whose pivot scores agree to rounding error.
    """
    for i, v in enumerate(pops):
        j = i + 1
        while j < len(pops) and pop_scores[j] >= pop_scores[i] - 1e-9 * max(1.0, abs(pop_scores[i])):
            u = pops[j]
            if dominators_among(v, [u], C, X)[0]:
                dominators[v].append(u)
            j += 1


def pairwise_dominance(X: np.ndarray, members: Iterable[int], region: Region) -> dict[int, list[int]]:
    """Direct O(n^2) corner test between every ordered pair (reference relation)."""
    members = sorted(members)
    C = corner_weights(region)
    out = {}
    for v in members:
        others = [u for u in members if u != v]
        hit = dominators_among(v, others, C, X)
        out[v] = [u for u, h in zip(others, hit) if h]
    return out
