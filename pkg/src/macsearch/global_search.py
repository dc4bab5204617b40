"""Global search: partition the region cell by cell along deletion chains.

A search state is a cell of the region together with the current community
``H`` and the stack of vertex batches deleted so far.  Inside the state's cell
the leaves of the dominance graph restricted to ``H`` compete for the minimum
score; the cell is split until every sub-cell has a single minimum leaf, which
is then deleted with its cascade.  When a deletion would remove or disconnect
a query vertex, ``H`` is the non-contained community for that sub-cell, and
replaying the batch stack gives the next ranks.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dominance import DominanceGraph, bits, build_rdominance_graph
from .geometry import (
    Arrangement,
    Cell,
    HalfSpace,
    HalfSpaceCache,
    Region,
    full_weight,
    partition_insert,
    root_cell,
)
from .ktcore import KTCore, NoCore, cascade_delete, maximal_kt_core
from .network import RoadSocialNetwork
from .results import ResultEntry, ResultSet


@dataclass(eq=False)
class SearchState:
    cell: Cell
    community: frozenset[int]
    mask: int  # community as a dominance-graph bitmask
    ignored: tuple[frozenset[int], ...] = ()


def parse_mode(mode: str, j: int | None) -> tuple[str, int]:
    if mode == "nc":
        if j not in (None, 1):
            raise ValueError("j applies only to top-j mode")
        return "nc", 1
    if mode == "topj":
        if j is None or j < 1:
            raise ValueError("top-j mode needs j >= 1")
        return "topj", int(j)
    raise ValueError(f"unknown mode {mode!r}")


def local_leaves(gd: DominanceGraph, mask: int) -> list[int]:
    """Members of ``mask`` with no descendant inside ``mask``."""
    return [gd.members[i] for i in bits(mask) if not gd.desc[i] & mask]


def smallest_score_candidates(local: DominanceGraph, cell: Cell, cache: HalfSpaceCache
                              ) -> tuple[list[int], list[tuple[HalfSpace, int]]]:
    """Leaves of ``local`` and the half-spaces ``S(u) >= S(v)`` for every leaf pair."""
    leaves = sorted(local.leaves())
    return leaves, [cache.get(u, v) for u, v in itertools.combinations(leaves, 2)]


def split_by_minimum(cell: Cell, candidates: Sequence[int], region: Region, cache: HalfSpaceCache,
                     X: np.ndarray, *, largest: bool = False) -> list[tuple[Cell, int]]:
    """Sub-cells of ``cell``, each paired with its unique minimum-score candidate.

    Works as a tournament: in each sub-cell the two lowest candidates at the
    witness are separated by their hyperplane, which eliminates one of them
    on each side.  Half-spaces that miss the sub-cell eliminate without a split.
    ``largest`` looks for the maximum instead.
    """
    sign = -1.0 if largest else 1.0
    arrangement = Arrangement(region, Cell(cell.constraints, cell.witness, {"rel": dict(cell.relation())}))
    out = []
    work = [(arrangement.root, list(candidates))]
    while work:
        node, cand = work.pop()
        cell_here = node.cell
        if largest:
            cand = [x for x in cand if not any(cell_here.knows(y, x) for y in cand if y != x)]
        else:
            cand = [x for x in cand if not any(cell_here.knows(x, y) for y in cand if y != x)]
        if len(cand) == 1:
            out.append((cell_here, cand[0]))
            continue
        s = sign * (X[cand] @ full_weight(cell_here.witness))
        order = np.lexsort((sign * np.array(cand), s))
        low, second = cand[order[0]], cand[order[1]]
        hs, _ = cache.get(low, second)
        partition_insert(arrangement, node, hs)
        if node.is_leaf:
            work.append((node, cand))
        else:
            for side in (1, -1):
                if side in node.children:
                    work.append((node.children[side], cand))
    return out


def _ranked(state: SearchState, j: int) -> tuple[frozenset[int], ...]:
    ranks = [state.community]
    current = state.community
    for batch in reversed(state.ignored):
        if len(ranks) == j:
            break
        current = current | batch
        ranks.append(current)
    return tuple(ranks)


def gs_search(rsn: RoadSocialNetwork, Q: Sequence[int], k: int, t: float, region: Region,
              mode: str = "nc", j: int | None = None, *,
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
    adj = rsn.social.adjacency
    cache = HalfSpaceCache(X)
    result = ResultSet(mode, j, region, core_size=len(core))

    stack = [SearchState(root_cell(region), core.members, gd.mask(core.members))]
    states = 0
    while stack:
        state = stack.pop()
        states += 1
        leaves = local_leaves(gd, state.mask)
        children = []
        for sub, u in split_by_minimum(state.cell, leaves, region, cache, X):
            removed = cascade_delete(adj, state.community, u, k, Q)
            if removed is None:
                result.entries.append(ResultEntry(Cell(sub.constraints, sub.witness), _ranked(state, j)))
                continue
            batch = frozenset(removed)
            children.append(SearchState(sub, state.community - batch, state.mask & ~gd.mask(batch),
                                        state.ignored + (batch,)))
        stack.extend(reversed(children))
    result.stats.update(states=states, halfspaces=cache.computed)
    return result
