"""Synthetic road-social networks.

Attribute tables follow the usual skyline benchmark generator: independent
(uniform per dimension), correlated (points hug the diagonal) and
anti-correlated (points hug the plane ``sum(x) = d/2``).  Users are placed
uniformly on road edges and befriend mostly road-nearby users, so k-cores are
spatially local the way check-in based social graphs are.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from .network import Location, RoadNetwork, RoadSocialNetwork, SocialNetwork

MODES = ("independent", "correlated", "anti-correlated")


def _rejection(rng: np.random.Generator, n: int, d: int, draw) -> np.ndarray:
    out = np.empty((0, d))
    while len(out) < n:
        batch = draw(max(2 * (n - len(out)), 16))
        ok = np.all((batch >= 0.0) & (batch <= 1.0), axis=1)
        out = np.vstack([out, batch[ok]])
    return out[:n]


def generate_attributes(n: int, d: int, mode: str = "independent", seed=None) -> np.ndarray:
    if n < 1 or d < 1:
        raise ValueError("need n >= 1 and d >= 1")
    if mode not in MODES:
        raise ValueError(f"unknown attribute mode {mode!r}; expected one of {MODES}")
    rng = np.random.default_rng(seed)
    if mode == "independent":
        return rng.random((n, d))
    if mode == "correlated":
        def draw(m):
            centre = rng.normal(0.5, 0.2, size=(m, 1))
            return centre + rng.normal(0.0, 0.05, size=(m, d))
        return _rejection(rng, n, d, draw)

    def draw(m):
        centre = rng.normal(0.5, 0.05, size=(m, 1))
        spread = rng.uniform(-0.5, 0.5, size=(m, d))
        spread -= spread.mean(axis=1, keepdims=True)
        return centre + spread
    return _rejection(rng, n, d, draw)


def grid_road(rows: int, cols: int, weight: float = 1.0) -> RoadNetwork:
    names = [f"r{i}_{j}" for i in range(rows) for j in range(cols)]
    edges = []
    for i in range(rows):
        for j in range(cols):
            u = i * cols + j
            if j + 1 < cols:
                edges.append((u, u + 1, weight))
            if i + 1 < rows:
                edges.append((u, u + cols, weight))
    return RoadNetwork.build(names, edges)


def _hop_ball(road: RoadNetwork, src: int, hops: int) -> list[int]:
    seen = {src}
    frontier = deque([(src, 0)])
    while frontier:
        u, h = frontier.popleft()
        if h == hops:
            continue
        for v, _, _ in road.adjacency[u]:
            if v not in seen:
                seen.add(v)
                frontier.append((v, h + 1))
    return sorted(seen)


def generate_road_social(
    n_social: int,
    d: int,
    mode: str = "independent",
    road_shape: str = "grid",
    seed=None,
    *,
    grid: tuple[int, int] | None = None,
    road: RoadNetwork | None = None,
    avg_degree: float = 8.0,
    hops: int = 1,
    p_local: float = 0.9,
) -> RoadSocialNetwork:
    """Build a random road-social network.

    ``road_shape="grid"`` makes a unit-weight ``grid`` (default roughly
    ``sqrt(n/2)`` per side); ``"loaded"`` places users on the given ``road``.
    """
    if n_social < 1:
        raise ValueError("n_social must be positive")
    if road_shape == "grid":
        if grid is None:
            side = max(2, int(np.ceil(np.sqrt(n_social / 2))))
            grid = (side, side)
        road = grid_road(*grid)
    elif road_shape == "loaded":
        if road is None:
            raise ValueError("road_shape='loaded' needs a road network")
    else:
        raise ValueError(f"unknown road shape {road_shape!r}")
    if not road.edges:
        raise ValueError("no edges to place users")

    rng = np.random.default_rng(seed)
    attr_seed = int(rng.integers(2**63))
    X = generate_attributes(n_social, d, mode, attr_seed)

    edge_ids = rng.integers(len(road.edges), size=n_social)
    fracs = rng.random(n_social)
    locations = []
    anchor = np.empty(n_social, dtype=np.int64)
    for i, (e, f) in enumerate(zip(edge_ids, fracs)):
        u, v, w = road.edges[int(e)]
        locations.append(Location(int(e), float(f * w)))
        anchor[i] = u if f <= 0.5 else v

    by_vertex: dict[int, list[int]] = {}
    for i, r in enumerate(anchor):
        by_vertex.setdefault(int(r), []).append(i)
    local_pool: dict[int, np.ndarray] = {}

    def pool(r: int) -> np.ndarray:
        if r not in local_pool:
            members = [i for x in _hop_ball(road, r, hops) for i in by_vertex.get(x, ())]
            local_pool[r] = np.array(sorted(members), dtype=np.int64)
        return local_pool[r]

    target = int(round(n_social * avg_degree / 2))
    max_edges = n_social * (n_social - 1) // 2
    target = min(target, max_edges)
    edges: set[tuple[int, int]] = set()
    attempts = 0
    while len(edges) < target and attempts < 50 * target + 100:
        attempts += 1
        u = int(rng.integers(n_social))
        cand = pool(int(anchor[u]))
        if rng.random() < p_local and len(cand) > 1:
            v = int(cand[rng.integers(len(cand))])
        else:
            v = int(rng.integers(n_social))
        if u != v:
            edges.add((min(u, v), max(u, v)))
    social = SocialNetwork.build([f"u{i}" for i in range(n_social)], sorted(edges), locations, X)
    return RoadSocialNetwork(road, social)
