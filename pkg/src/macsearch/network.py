"""Road-social network types and TSV ingestion.

A road network is an undirected weighted graph.  A social network carries,
per user, a location on the road network and a d-dimensional attribute
vector.  Both are immutable once built; external string ids are mapped to
dense integers at load time and kept in ``names`` for output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np


class NetworkFormatError(ValueError):
    """Raised for malformed input files or invariant violations."""


@dataclass(frozen=True)
class Location:
    """A point on road edge ``edge`` at cost ``offset`` from the edge's first endpoint."""

    edge: int
    offset: float

    def on_vertex(self, road: "RoadNetwork") -> int | None:
        u, v, w = road.edges[self.edge]
        if self.offset == 0.0:
            return u
        if self.offset == w:
            return v
        return None


@dataclass(frozen=True)
class RoadNetwork:
    names: tuple[str, ...]
    edges: tuple[tuple[int, int, float], ...]
    adjacency: tuple[tuple[tuple[int, float, int], ...], ...] = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.names)

    def edge_index(self, u: int, v: int) -> int:
        key = (u, v) if u < v else (v, u)
        try:
            return self._edge_lookup[key]
        except KeyError:
            raise KeyError(f"no road edge between {self.names[u]} and {self.names[v]}") from None

    @property
    def _edge_lookup(self) -> dict[tuple[int, int], int]:
        lookup = self.__dict__.get("_lookup")
        if lookup is None:
            lookup = {}
            for i, (u, v, _) in enumerate(self.edges):
                lookup[(u, v) if u < v else (v, u)] = i
            object.__setattr__(self, "_lookup", lookup)
        return lookup

    def degree(self, u: int) -> int:
        return len(self.adjacency[u])

    def location_at_vertex(self, r: int) -> Location:
        if not self.adjacency[r]:
            raise NetworkFormatError(f"road vertex {self.names[r]} has no incident edge")
        _, w, e = self.adjacency[r][0]
        return Location(e, 0.0 if self.edges[e][0] == r else self.edges[e][2])

    def location_on_edge(self, u: int, v: int, offset: float) -> Location:
        e = self.edge_index(u, v)
        a, _, w = self.edges[e]
        if not 0.0 <= offset <= w:
            raise NetworkFormatError(f"offset {offset} outside [0, {w}] on edge ({self.names[u]}, {self.names[v]})")
        return Location(e, offset if a == u else w - offset)

    @classmethod
    def build(cls, n_or_names: int | Sequence[str], edges: Iterable[tuple[int, int, float]]) -> "RoadNetwork":
        names = tuple(str(i) for i in range(n_or_names)) if isinstance(n_or_names, int) else tuple(n_or_names)
        adj: list[list[tuple[int, float, int]]] = [[] for _ in names]
        seen: set[tuple[int, int]] = set()
        stored = []
        for u, v, w in edges:
            w = float(w)
            if not (w >= 0.0 and math.isfinite(w)):
                raise NetworkFormatError(f"negative or invalid weight {w} on edge ({u}, {v})")
            if u == v:
                raise NetworkFormatError(f"self-loop on road vertex {names[u]}")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise NetworkFormatError(f"duplicate road edge ({names[u]}, {names[v]})")
            seen.add(key)
            e = len(stored)
            stored.append((u, v, w))
            adj[u].append((v, w, e))
            adj[v].append((u, w, e))
        return cls(names, tuple(stored), tuple(tuple(a) for a in adj))


@dataclass(frozen=True)
class SocialNetwork:
    names: tuple[str, ...]
    edges: tuple[tuple[int, int], ...]
    adjacency: tuple[tuple[int, ...], ...] = field(repr=False)
    locations: tuple[Location, ...] = field(repr=False)
    attributes: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.names)

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def d(self) -> int:
        return self.attributes.shape[1]

    def ids(self, names: Iterable[str]) -> list[int]:
        index = {name: i for i, name in enumerate(self.names)}
        out = []
        for name in names:
            if name not in index:
                raise KeyError(f"unknown social vertex {name!r}")
            out.append(index[name])
        return out

    @classmethod
    def build(
        cls,
        names: Sequence[str] | int,
        edges: Iterable[tuple[int, int]],
        locations: Sequence[Location],
        attributes,
    ) -> "SocialNetwork":
        names = tuple(str(i) for i in range(names)) if isinstance(names, int) else tuple(names)
        n = len(names)
        X = np.array(attributes, dtype=float)
        if X.ndim != 2 or X.shape[0] != n or X.shape[1] < 1:
            raise NetworkFormatError(f"attribute table must be {n} x d with d >= 1, got shape {X.shape}")
        if len(locations) != n:
            raise NetworkFormatError("every social vertex needs exactly one location")
        adj: list[set[int]] = [set() for _ in range(n)]
        stored = []
        for u, v in edges:
            if u == v:
                raise NetworkFormatError(f"self-loop on social vertex {names[u]}")
            if v in adj[u]:
                raise NetworkFormatError(f"duplicate social edge ({names[u]}, {names[v]})")
            adj[u].add(v)
            adj[v].add(u)
            stored.append((u, v))
        X.setflags(write=False)
        return cls(names, tuple(stored), tuple(tuple(sorted(a)) for a in adj), tuple(locations), X)


@dataclass(frozen=True)
class RoadSocialNetwork:
    road: RoadNetwork
    social: SocialNetwork

    def __post_init__(self):
        validate(self)


def validate(rsn: RoadSocialNetwork) -> None:
    """Check every type invariant; raise NetworkFormatError on the first violation."""
    road, social = rsn.road, rsn.social
    for i, (u, v, w) in enumerate(road.edges):
        if not (0 <= u < road.n and 0 <= v < road.n) or u == v:
            raise NetworkFormatError(f"road edge {i} has invalid endpoints")
        if w < 0:
            raise NetworkFormatError(f"road edge {i} has negative weight")
    for u, v in social.edges:
        if v not in social.adjacency[u] or u not in social.adjacency[v]:
            raise NetworkFormatError("social adjacency out of sync with edge list")
    if social.attributes.shape != (social.n, social.d) or not np.all(np.isfinite(social.attributes)):
        raise NetworkFormatError("attribute table has wrong shape or non-finite values")
    for i, loc in enumerate(social.locations):
        if not 0 <= loc.edge < len(road.edges):
            raise NetworkFormatError(f"location of {social.names[i]} references a missing road edge")
        w = road.edges[loc.edge][2]
        if not 0.0 <= loc.offset <= w:
            raise NetworkFormatError(f"location of {social.names[i]} has offset outside its edge")


# ---------------------------------------------------------------------------
# TSV ingestion

def _rows(path: str | Path) -> Iterator[tuple[int, list[str]]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if line:
                yield lineno, line.split()


def _float(tok: str, path, lineno: int) -> float:
    try:
        return float(tok)
    except ValueError:
        raise NetworkFormatError(f"{path}: bad number {tok!r} at line {lineno}") from None


def load_road_network(path: str | Path) -> RoadNetwork:
    names: list[str] = []
    index: dict[str, int] = {}
    edges = []
    seen = set()

    def vid(tok: str) -> int:
        if tok not in index:
            index[tok] = len(names)
            names.append(tok)
        return index[tok]

    for lineno, toks in _rows(path):
        if len(toks) != 3:
            raise NetworkFormatError(f"{path}: expected 'u v weight' at line {lineno}")
        w = _float(toks[2], path, lineno)
        if w < 0 or not math.isfinite(w):
            raise NetworkFormatError(f"{path}: negative weight at line {lineno}")
        if toks[0] == toks[1]:
            raise NetworkFormatError(f"{path}: self-loop at line {lineno}")
        u, v = vid(toks[0]), vid(toks[1])
        key = (min(u, v), max(u, v))
        if key in seen:
            raise NetworkFormatError(f"{path}: duplicate edge at line {lineno}")
        seen.add(key)
        edges.append((u, v, w))
    return RoadNetwork.build(names, edges)


def load_social_network(edges_path, attrs_path, locations_path, road: RoadNetwork) -> SocialNetwork:
    """Read the three social TSV files; vertex ids come from the attribute file order."""
    names: list[str] = []
    index: dict[str, int] = {}
    rows: list[list[float]] = []
    d = None
    for lineno, toks in _rows(attrs_path):
        if len(toks) < 2:
            raise NetworkFormatError(f"{attrs_path}: expected 'v x_1 .. x_d' at line {lineno}")
        vals = [_float(t, attrs_path, lineno) for t in toks[1:]]
        if d is None:
            d = len(vals)
        elif len(vals) != d:
            raise NetworkFormatError(f"{attrs_path}: inconsistent dimensionality at line {lineno}")
        if toks[0] in index:
            raise NetworkFormatError(f"{attrs_path}: duplicate attributes for {toks[0]} at line {lineno}")
        index[toks[0]] = len(names)
        names.append(toks[0])
        rows.append(vals)

    edges = []
    seen = set()
    for lineno, toks in _rows(edges_path):
        if len(toks) != 2:
            raise NetworkFormatError(f"{edges_path}: expected 'u v' at line {lineno}")
        for tok in toks:
            if tok not in index:
                raise NetworkFormatError(f"missing attributes for {tok}")
        u, v = index[toks[0]], index[toks[1]]
        if u == v:
            raise NetworkFormatError(f"{edges_path}: self-loop at line {lineno}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise NetworkFormatError(f"{edges_path}: duplicate edge at line {lineno}")
        seen.add(key)
        edges.append((u, v))

    road_index = {name: i for i, name in enumerate(road.names)}
    locs: list[Location | None] = [None] * len(names)
    for lineno, toks in _rows(locations_path):
        if toks[0] not in index:
            raise NetworkFormatError(f"missing attributes for {toks[0]}")
        v = index[toks[0]]
        try:
            if len(toks) == 2:
                loc = road.location_at_vertex(road_index[toks[1]])
            elif len(toks) == 4:
                loc = road.location_on_edge(road_index[toks[1]], road_index[toks[2]], _float(toks[3], locations_path, lineno))
            else:
                raise NetworkFormatError(f"{locations_path}: expected 'v eu ev offset' or 'v r' at line {lineno}")
        except KeyError as exc:
            raise NetworkFormatError(f"{locations_path}: unknown road reference at line {lineno}: {exc}") from None
        if locs[v] is not None:
            raise NetworkFormatError(f"{locations_path}: duplicate location for {toks[0]} at line {lineno}")
        locs[v] = loc
    for v, loc in enumerate(locs):
        if loc is None:
            raise NetworkFormatError(f"missing location for {names[v]}")
    if d is None:
        raise NetworkFormatError(f"{attrs_path}: no attribute rows")
    return SocialNetwork.build(names, edges, locs, rows)


def load_road_social(directory: str | Path) -> RoadSocialNetwork:
    directory = Path(directory)
    road = load_road_network(directory / "road.tsv")
    social = load_social_network(directory / "social_edges.tsv", directory / "attributes.tsv",
                                 directory / "locations.tsv", road)
    return RoadSocialNetwork(road, social)


# ---------------------------------------------------------------------------
# Canonical writers (inverse of the loaders)

def _num(x: float) -> str:
    return repr(float(x))


def save_road_network(road: RoadNetwork, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for u, v, w in road.edges:
            fh.write(f"{road.names[u]}\t{road.names[v]}\t{_num(w)}\n")


def save_social_network(social: SocialNetwork, road: RoadNetwork, edges_path, attrs_path, locations_path) -> None:
    with open(edges_path, "w", encoding="utf-8") as fh:
        for u, v in social.edges:
            fh.write(f"{social.names[u]}\t{social.names[v]}\n")
    with open(attrs_path, "w", encoding="utf-8") as fh:
        for name, row in zip(social.names, social.attributes):
            fh.write(name + "\t" + "\t".join(_num(x) for x in row) + "\n")
    with open(locations_path, "w", encoding="utf-8") as fh:
        for name, loc in zip(social.names, social.locations):
            u, v, _ = road.edges[loc.edge]
            fh.write(f"{name}\t{road.names[u]}\t{road.names[v]}\t{_num(loc.offset)}\n")


def save_road_social(rsn: RoadSocialNetwork, directory: str | Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    save_road_network(rsn.road, directory / "road.tsv")
    save_social_network(rsn.social, rsn.road, directory / "social_edges.tsv",
                        directory / "attributes.tsv", directory / "locations.tsv")
