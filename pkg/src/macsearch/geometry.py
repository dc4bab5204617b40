"""Preference-domain geometry.

Weights live in the (d-1)-dimensional preference domain: ``w_d`` is implied
by ``1 - sum(w)``.  A comparison ``S(u) >= S(v)`` is a half-space
``a.w + b >= 0`` there, regions are convex polytopes given by their corners,
and cells are regions cut by signed half-spaces.  Cells are treated as open:
a cell exists only if it contains a point at distance greater than
``EPS_FEAS`` from every bounding hyperplane.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull

EPS_FEAS = 1e-9


# ---------------------------------------------------------------------------
# scores

def full_weight(w) -> np.ndarray:
    w = np.asarray(w, dtype=float).reshape(-1)
    return np.append(w, 1.0 - w.sum())


def check_weight(w) -> np.ndarray:
    full = full_weight(w)
    if not np.all((full > 0.0) & (full < 1.0)):
        raise ValueError(f"weight {tuple(np.asarray(w).tolist())} is outside the open simplex")
    return full


def score(v: int, w, X: np.ndarray) -> float:
    return float(X[v] @ check_weight(w))


def scores(X: np.ndarray, w, members: Iterable[int] | None = None) -> np.ndarray:
    full = check_weight(w)
    if members is None:
        return X @ full
    return X[list(members)] @ full


def community_score(members: Iterable[int], w, X: np.ndarray) -> tuple[float, int]:
    """Minimum member score and the vertex attaining it (smallest id on ties)."""
    members = sorted(members)
    if not members:
        raise ValueError("community must be nonempty")
    s = X[members] @ check_weight(w)
    i = int(np.argmin(s))  # argmin returns the first, i.e. smallest id, among ties
    return float(s[i]), members[i]


# ---------------------------------------------------------------------------
# half-spaces

@dataclass(frozen=True, eq=False)
class HalfSpace:
    """``a.w + b >= 0``, equivalent to ``S(winner) >= S(loser)``."""

    a: np.ndarray
    b: float
    winner: int = -1
    loser: int = -1

    @property
    def dim(self) -> int:
        return len(self.a)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.a))

    @property
    def degenerate(self) -> bool:
        return not np.any(self.a)

    def value(self, w) -> float:
        return float(self.a @ np.asarray(w, dtype=float) + self.b)

    def values(self, W: np.ndarray) -> np.ndarray:
        return W @ self.a + self.b

    def slack(self, w, side: int = 1) -> float:
        """Signed Euclidean distance of ``w`` into side ``side`` of the hyperplane."""
        n = self.norm
        if n == 0.0:
            return np.inf if side * self.b > 0 else -np.inf if side * self.b < 0 else 0.0
        return side * self.value(w) / n


def halfspace_of(u: int, v: int, X: np.ndarray) -> HalfSpace:
    if u == v:
        raise ValueError("half-space needs two distinct vertices")
    delta = np.asarray(X[u], dtype=float) - np.asarray(X[v], dtype=float)
    a = delta[:-1] - delta[-1]
    return HalfSpace(a, float(delta[-1]), u, v)


class HalfSpaceCache:
    """Pairwise half-spaces, each computed once per query."""

    def __init__(self, X: np.ndarray):
        self.X = X
        self._store: dict[tuple[int, int], HalfSpace] = {}
        self.computed = 0

    def get(self, u: int, v: int) -> tuple[HalfSpace, int]:
        """Half-space for the pair and the side on which ``S(u) >= S(v)``."""
        key = (u, v) if u < v else (v, u)
        hs = self._store.get(key)
        if hs is None:
            hs = halfspace_of(key[0], key[1], self.X)
            self._store[key] = hs
            self.computed += 1
        return hs, (1 if u == key[0] else -1)


# ---------------------------------------------------------------------------
# regions

@dataclass(frozen=True, eq=False)
class Region:
    corners: np.ndarray
    pivot: np.ndarray = field(repr=False)
    A: np.ndarray = field(repr=False)  # rows are unit outward normals
    c: np.ndarray = field(repr=False)  # A w <= c inside
    bounds: tuple[tuple[float, float], ...] | None = None

    @property
    def dim(self) -> int:
        return self.corners.shape[1]

    @classmethod
    def rectangle(cls, bounds: Sequence[tuple[float, float]]) -> "Region":
        bounds = tuple((float(lo), float(hi)) for lo, hi in bounds)
        if not bounds:
            raise ValueError("region needs at least one dimension")
        for lo, hi in bounds:
            if not lo < hi:
                raise ValueError(f"empty interval [{lo}, {hi}]")
        corners = np.array(list(itertools.product(*bounds)), dtype=float)
        m = len(bounds)
        A = np.vstack([np.eye(m), -np.eye(m)])
        c = np.array([hi for _, hi in bounds] + [-lo for lo, _ in bounds])
        return cls._make(corners, A, c, bounds)

    @classmethod
    def from_corners(cls, corners) -> "Region":
        corners = np.atleast_2d(np.asarray(corners, dtype=float))
        m = corners.shape[1]
        if m == 1:
            lo, hi = float(corners.min()), float(corners.max())
            return cls.rectangle([(lo, hi)])
        hull = ConvexHull(corners)
        eq = hull.equations  # n.x + off <= 0 inside
        norms = np.linalg.norm(eq[:, :-1], axis=1)
        A = eq[:, :-1] / norms[:, None]
        c = -eq[:, -1] / norms
        return cls._make(corners[hull.vertices], A, c, None)

    @classmethod
    def _make(cls, corners, A, c, bounds) -> "Region":
        pivot = corners.mean(axis=0)
        full = np.hstack([corners, 1.0 - corners.sum(axis=1, keepdims=True)])
        if not np.all((full > 0.0) & (full < 1.0)):
            raise ValueError("region must lie inside the open preference simplex")
        corners.setflags(write=False)
        return cls(corners, pivot, A, c, bounds)

    @classmethod
    def parse(cls, text: str) -> "Region":
        """Parse ``lo1,hi1xlo2,hi2[x...]``."""
        parts = text.strip().split("x")
        bounds = []
        for part in parts:
            try:
                lo, hi = (float(x) for x in part.split(","))
            except ValueError:
                raise ValueError(f"bad region interval {part!r}; expected 'lo,hi'") from None
            bounds.append((lo, hi))
        return cls.rectangle(bounds)

    def format(self) -> str:
        if self.bounds is None:
            raise ValueError("only rectangles have a compact text form")
        return "x".join(f"{lo!r},{hi!r}" for lo, hi in self.bounds)

    def contains(self, w, eps: float = 0.0) -> bool:
        return bool(np.all(self.A @ np.asarray(w, dtype=float) <= self.c - eps))

    def slack(self, W: np.ndarray) -> np.ndarray:
        """Distance of each row of ``W`` to the region boundary (negative outside)."""
        return np.min(self.c[None, :] - W @ self.A.T, axis=1)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        lo, hi = self.corners.min(axis=0), self.corners.max(axis=0)
        out = np.empty((0, self.dim))
        while len(out) < n:
            W = rng.uniform(lo, hi, size=(2 * (n - len(out)) + 8, self.dim))
            out = np.vstack([out, W[self.slack(W) > 0]])
        return out[:n]


# ---------------------------------------------------------------------------
# r-dominance

class Dominance(enum.Enum):
    DOMINATES = "dominates"
    DOMINATED_BY = "dominated_by"
    INCOMPARABLE = "incomparable"


def corner_weights(region: Region) -> np.ndarray:
    return np.hstack([region.corners, 1.0 - region.corners.sum(axis=1, keepdims=True)])


def r_dominance_test(u: int, v: int, region: Region, X: np.ndarray) -> Dominance:
    """Compare two vertices over every weight in ``region`` via its corners.

    Identical score functions are ordered by id: the smaller id dominates.
    """
    if u == v:
        raise ValueError("r-dominance test needs two distinct vertices")
    vals = corner_weights(region) @ (np.asarray(X[u], dtype=float) - np.asarray(X[v], dtype=float))
    return _classify(vals, u < v)


def _classify(vals: np.ndarray, u_first: bool) -> Dominance:
    if not np.any(vals):
        return Dominance.DOMINATES if u_first else Dominance.DOMINATED_BY
    if np.all(vals >= 0.0):
        return Dominance.DOMINATES
    if np.all(vals <= 0.0):
        return Dominance.DOMINATED_BY
    return Dominance.INCOMPARABLE


def dominators_among(v: int, others: Sequence[int], region_corner_w: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Boolean mask: which of ``others`` r-dominate ``v`` (vectorised corner test)."""
    if len(others) == 0:
        return np.zeros(0, dtype=bool)
    others = np.asarray(others)
    vals = (X[others] - X[v]) @ region_corner_w.T
    ge = np.all(vals >= 0.0, axis=1)
    zero = ~np.any(vals, axis=1)
    return np.where(zero, others < v, ge)


# ---------------------------------------------------------------------------
# cells and feasibility

Constraint = tuple[HalfSpace, int]


def constraint_slacks(constraints: Sequence[Constraint], W: np.ndarray) -> np.ndarray:
    """Matrix of signed distances, one column per constraint."""
    if not constraints:
        return np.empty((len(W), 0))
    A = np.array([side * hs.a for hs, side in constraints])
    b = np.array([side * hs.b for hs, side in constraints])
    norms = np.linalg.norm(A, axis=1)
    norms[norms == 0.0] = 1.0
    return (W @ A.T + b) / norms


def _min_slack(constraints: Sequence[Constraint], region: Region, w: np.ndarray) -> float:
    s = float(region.slack(w[None, :])[0])
    for hs, side in constraints:
        s = min(s, hs.slack(w, side))
    return s


def cell_feasible(constraints: Sequence[Constraint], region: Region, eps: float = EPS_FEAS) -> np.ndarray | None:
    """Interior witness of ``region`` cut by the signed constraints, or None.

    The witness maximises the minimum distance to all bounding hyperplanes.
    """
    m = region.dim
    rows, rhs = [], []
    for hs, side in constraints:
        if hs.dim != m:
            raise ValueError(f"half-space dimension {hs.dim} does not match region dimension {m}")
        if hs.degenerate:
            if side * hs.b > 0:
                continue
            return None
        a = side * hs.a
        n = float(np.linalg.norm(a))
        rows.append(a / n)
        rhs.append(side * hs.b / n)
    if not rows:
        return region.pivot.copy() if region.slack(region.pivot[None, :])[0] > eps else None
    G = np.array(rows)
    h = np.array(rhs)
    if m == 1:
        return _interval_witness(G[:, 0], h, region, eps)
    # maximise s subject to  G w + h >= s,  A w + s <= c
    A_ub = np.vstack([np.hstack([-G, np.ones((len(G), 1))]),
                      np.hstack([region.A, np.ones((len(region.A), 1))])])
    b_ub = np.concatenate([h, region.c])
    cost = np.zeros(m + 1)
    cost[-1] = -1.0
    res = linprog(cost, A_ub=A_ub, b_ub=b_ub, bounds=[(None, None)] * m + [(None, 1.0)], method="highs")
    if res.status != 0 or -res.fun <= eps:
        return None
    w = res.x[:m]
    if min(float(np.min(G @ w + h)), float(region.slack(w[None, :])[0])) <= eps:
        return None
    return w


def _interval_witness(g: np.ndarray, h: np.ndarray, region: Region, eps: float) -> np.ndarray | None:
    (lo, hi), = ((float(region.corners.min()), float(region.corners.max())),)
    for gi, hi_ in zip(g, h):
        bound = -hi_ / gi
        if gi > 0:
            lo = max(lo, bound)
        else:
            hi = min(hi, bound)
    if hi - lo <= 2 * eps:
        return None
    return np.array([(lo + hi) / 2.0])


@dataclass(eq=False)
class Cell:
    constraints: tuple[Constraint, ...]
    witness: np.ndarray
    annotations: dict = field(default_factory=dict)

    def relation(self) -> dict[tuple[int, int], bool]:
        """Pairs ``(x, y)`` known to satisfy ``S(x) > S(y)`` throughout the cell."""
        rel = self.annotations.get("rel")
        if rel is None:
            rel = {}
            for hs, side in self.constraints:
                if hs.winner >= 0:
                    rel[(hs.winner, hs.loser) if side > 0 else (hs.loser, hs.winner)] = True
            self.annotations["rel"] = rel
        return rel

    def knows(self, x: int, y: int) -> bool:
        return (x, y) in self.relation()

    def learn(self, x: int, y: int) -> None:
        self.relation()[(x, y)] = True

    def contains(self, W: np.ndarray, eps: float = EPS_FEAS) -> np.ndarray:
        W = np.atleast_2d(W)
        s = constraint_slacks(self.constraints, W)
        return np.all(s > eps, axis=1) if s.shape[1] else np.ones(len(W), dtype=bool)


def root_cell(region: Region) -> Cell:
    return Cell((), region.pivot.copy())


def split_cell(cell: Cell, hs: HalfSpace, region: Region, eps: float = EPS_FEAS) -> dict[int, Cell]:
    """Children of ``cell`` on each feasible side of ``hs``.

    A single entry means the hyperplane misses the cell's interior.
    """
    out: dict[int, Cell] = {}
    if hs.degenerate:
        side = 1 if hs.b >= 0 else -1
        out[side] = Cell(cell.constraints, cell.witness, _child_annotations(cell))
        return out
    poly = cell_polygon(cell, region) if region.dim == 2 else None
    for side in (1, -1):
        cons = cell.constraints + ((hs, side),)
        ann = _child_annotations(cell)
        w = None
        if poly is not None:
            piece = clip_polygon(poly, side * hs.a, side * hs.b)
            ann["poly"] = piece
            verdict = _polygon_verdict(piece, eps)
            if verdict is False:
                continue
            if hs.slack(cell.witness, side) > 1e-6:
                w = cell.witness
            elif verdict is True:
                c = piece.mean(axis=0)
                if _min_slack(cons, region, c) > 1e-7:
                    w = c
        elif hs.slack(cell.witness, side) > 1e-6:
            w = cell.witness
        if w is None:
            w = cell_feasible(cons, region, eps)
        if w is not None:
            out[side] = Cell(cons, w, ann)
    if not out:
        # numerically thin cell: keep it whole on the witness's side
        side = 1 if hs.value(cell.witness) >= 0 else -1
        out[side] = Cell(cell.constraints, cell.witness, _child_annotations(cell))
    elif len(out) == 1:
        (side, child), = out.items()
        child.constraints = cell.constraints
    return out


def _child_annotations(cell: Cell) -> dict:
    out = {}
    rel = cell.annotations.get("rel")
    if rel is not None:
        out["rel"] = dict(rel)
    if "poly" in cell.annotations:
        out["poly"] = cell.annotations["poly"]
    return out


# ---------------------------------------------------------------------------
# exact polygons for two-dimensional domains

def region_polygon(region: Region) -> np.ndarray:
    """Region corners in counter-clockwise order (two-dimensional regions only)."""
    c = region.corners
    ang = np.arctan2(c[:, 1] - region.pivot[1], c[:, 0] - region.pivot[0])
    return c[np.argsort(ang, kind="stable")]


def cell_polygon(cell: Cell, region: Region) -> np.ndarray:
    poly = cell.annotations.get("poly")
    if poly is None:
        poly = region_polygon(region)
        for hs, side in cell.constraints:
            poly = clip_polygon(poly, side * hs.a, side * hs.b)
        cell.annotations["poly"] = poly
    return poly


def clip_polygon(poly: np.ndarray, a: np.ndarray, b: float) -> np.ndarray:
    """Part of a convex polygon where ``a.x + b >= 0`` (Sutherland-Hodgman, one plane)."""
    if len(poly) == 0:
        return poly
    vals = poly @ a + b
    if np.all(vals >= 0):
        return poly
    if np.all(vals <= 0):
        return poly[:0]
    out = []
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        vp, vq = vals[i], vals[(i + 1) % n]
        if vp >= 0:
            out.append(p)
        if (vp > 0 > vq) or (vp < 0 < vq):
            out.append(p + (q - p) * (vp / (vp - vq)))
    return np.array(out) if out else poly[:0]


def _polygon_verdict(poly: np.ndarray, eps: float) -> bool | None:
    """True/False when the inradius is clearly above/below ``eps``, None if unsure.

    For a convex polygon with area A and perimeter P the inradius r obeys
    A/P <= r <= 2A/P.
    """
    if len(poly) < 3:
        return False
    x, y = poly[:, 0], poly[:, 1]
    area = 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))
    perim = float(np.sum(np.linalg.norm(poly - np.roll(poly, -1, axis=0), axis=1)))
    if perim == 0.0 or 2 * area / perim <= eps:
        return False
    if area / perim > 10 * eps:
        return True
    return None


# ---------------------------------------------------------------------------
# recursive arrangement index

@dataclass(eq=False)
class ArrangementNode:
    cell: Cell
    hyperplane: HalfSpace | None = None
    children: dict[int, "ArrangementNode"] = field(default_factory=dict)
    forced: list[Constraint] = field(default_factory=list)

    @property
    def is_leaf(self) -> bool:
        return not self.children


class Arrangement:
    """Binary partition of a cell by hyperplanes; leaves are the current cells."""

    def __init__(self, region: Region, root: Cell | None = None):
        self.region = region
        self.root = ArrangementNode(root if root is not None else root_cell(region))
        self.inserted = 0

    def leaves(self) -> list[ArrangementNode]:
        out, stack = [], [self.root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                out.append(node)
            else:
                stack.extend(node.children[s] for s in (-1, 1) if s in node.children)
        return out

    def leaf_cells(self) -> list[Cell]:
        return [node.cell for node in self.leaves()]

    def locate(self, w) -> ArrangementNode | None:
        w = np.asarray(w, dtype=float)
        node = self.root
        while not node.is_leaf:
            side = 1 if node.hyperplane.value(w) >= 0 else -1
            if side not in node.children:
                return None
            node = node.children[side]
        return node


def partition_insert(arrangement: Arrangement, node: ArrangementNode, hs: HalfSpace) -> list[ArrangementNode]:
    """Route ``hs`` into the subtree at ``node``; return the leaves it touched."""
    if hs.dim != arrangement.region.dim:
        raise ValueError(f"hyperplane dimension {hs.dim} does not match region dimension {arrangement.region.dim}")
    arrangement.inserted += 1
    touched = []
    stack = [node]
    while stack:
        cur = stack.pop()
        if not cur.is_leaf:
            stack.extend(cur.children[s] for s in (-1, 1) if s in cur.children)
            continue
        parts = split_cell(cur.cell, hs, arrangement.region)
        if len(parts) == 2:
            cur.hyperplane = hs
            cur.children = {s: ArrangementNode(c) for s, c in parts.items()}
            for s, child in cur.children.items():
                _note(child.cell, hs, s)
            touched.extend(cur.children.values())
        elif len(parts) == 1:
            (s, child), = parts.items()
            cur.forced.append((hs, s))
            _note(cur.cell, hs, s)
            touched.append(cur)
    return touched


def _note(cell: Cell, hs: HalfSpace, side: int) -> None:
    if hs.winner >= 0:
        if side > 0:
            cell.learn(hs.winner, hs.loser)
        else:
            cell.learn(hs.loser, hs.winner)
