"""Benchmark harness: time the four engines over randomized queries.

For every grid point (one parameter changed from the defaults) the same
sampled queries are run by each algorithm.  Rows report mean wall time and
mean output sizes; the ``ratio`` column of ``ls-nc`` rows is the share of
distinct GS-NC communities that LS-NC also returned, pooled over queries.
"""

from __future__ import annotations

import csv
import time
from dataclasses import asdict, dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .geometry import Region
from .global_search import gs_search
from .ktcore import KTCore, core_decomposition, maximal_kt_core
from .local_search import ls_search
from .network import RoadSocialNetwork

ALGORITHMS = ("gs-nc", "gs-t", "ls-nc", "ls-t")
FIELDS = ("algorithm", "param", "value", "queries", "mean_time_s", "mean_cells", "mean_communities", "ratio")


@dataclass(frozen=True)
class BenchParams:
    k: int = 8
    t: float = 10.0
    q_size: int = 4
    sigma: float = 0.01
    j: int = 20
    strategy: str = "layer-density"
    budget: int = 128
    zeta: float = 100.0
    lam: float = 10.0


@dataclass(frozen=True)
class BenchQuery:
    Q: tuple[int, ...]
    region: Region
    core: KTCore


@dataclass
class BenchRow:
    algorithm: str
    param: str
    value: float | int | str
    queries: int
    mean_time_s: float
    mean_cells: float
    mean_communities: float
    ratio: float | None = None


def random_region(rng: np.random.Generator, dim: int, sigma: float) -> Region:
    """Axis-aligned box of side ``sigma`` placed uniformly inside the simplex."""
    if not 0 < sigma * (dim + 1) < 1:
        raise ValueError(f"side {sigma} does not fit in the weight simplex")
    while True:
        lo = rng.uniform(0.0, 1.0 - sigma, size=dim)
        if lo.sum() + dim * sigma < 1.0:
            return Region.rectangle([(float(a), float(a + sigma)) for a in lo])


def sample_queries(rsn: RoadSocialNetwork, params: BenchParams, count: int, seed: int = 0,
                   max_tries: int = 1000) -> list[BenchQuery]:
    """Query sets drawn from the k-core whose maximal (k,t)-core exists.

    Each Q is a vertex of coreness at least k plus random k-core neighbours.
    """
    rng = np.random.default_rng(seed)
    coreness = core_decomposition(rsn.social)
    pool = np.array(sorted(v for v, c in coreness.items() if c >= params.k), dtype=np.int64)
    if not len(pool):
        raise ValueError(f"the social network has no {params.k}-core")
    adj = rsn.social.adjacency
    out: list[BenchQuery] = []
    for _ in range(max_tries):
        if len(out) == count:
            break
        q0 = int(rng.choice(pool))
        near = [v for v in adj[q0] if coreness[v] >= params.k]
        if len(near) < params.q_size - 1:
            continue
        rest = rng.choice(near, size=params.q_size - 1, replace=False) if params.q_size > 1 else []
        Q = tuple(sorted({q0, *(int(v) for v in rest)}))
        core = maximal_kt_core(rsn, Q, params.k, params.t)
        if not core:
            continue
        out.append(BenchQuery(Q, random_region(rng, rsn.social.d - 1, params.sigma), core))
    if len(out) < count:
        raise RuntimeError(f"found only {len(out)} of {count} feasible queries")
    return out


def _run(algorithm: str, rsn: RoadSocialNetwork, q: BenchQuery, p: BenchParams):
    engine, mode = algorithm.split("-")
    mode, j = ("nc", None) if mode == "nc" else ("topj", p.j)
    if engine == "gs":
        return gs_search(rsn, q.Q, p.k, p.t, q.region, mode, j)
    return ls_search(rsn, q.Q, p.k, p.t, q.region, mode, j, strategy=p.strategy,
                     budget=p.budget, zeta=p.zeta, lam=p.lam)


def bench_point(rsn: RoadSocialNetwork, params: BenchParams, queries: Sequence[BenchQuery],
                algorithms: Iterable[str] = ALGORITHMS, param: str = "defaults", value="") -> list[BenchRow]:
    rows = []
    found: dict[str, list[set]] = {}
    for alg in algorithms:
        if alg not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {alg!r}")
        times, cells, comms, ncs = [], [], [], []
        for q in queries:
            start = time.perf_counter()
            rs = _run(alg, rsn, q, params)
            times.append(time.perf_counter() - start)
            cells.append(len(rs))
            comms.append(len({c for e in rs.entries for c in e.communities}))
            ncs.append(rs.pairs())
        found[alg] = ncs
        rows.append(BenchRow(alg, param, value, len(queries), float(np.mean(times)),
                             float(np.mean(cells)), float(np.mean(comms))))
    if "gs-nc" in found and "ls-nc" in found:
        total = sum(len(g) for g in found["gs-nc"])
        hit = sum(len(g & l) for g, l in zip(found["gs-nc"], found["ls-nc"]))
        for row in rows:
            if row.algorithm == "ls-nc":
                row.ratio = hit / total if total else 1.0
    return rows


def run_bench(rsn: RoadSocialNetwork, grid: dict[str, Sequence], queries: int = 10, seed: int = 0,
              defaults: BenchParams = BenchParams(), algorithms: Iterable[str] = ALGORITHMS) -> list[BenchRow]:
    """One block of rows per (parameter, value); other parameters stay at ``defaults``."""
    algorithms = tuple(algorithms)
    rows: list[BenchRow] = []
    if not grid:
        grid = {"k": [defaults.k]}
    for name, values in grid.items():
        if name not in BenchParams.__dataclass_fields__:
            raise ValueError(f"unknown bench parameter {name!r}")
        for value in values:
            params = replace(defaults, **{name: value})
            qs = sample_queries(rsn, params, queries, seed)
            rows.extend(bench_point(rsn, params, qs, algorithms, name, value))
    return rows


def write_csv(rows: Sequence[BenchRow], fh) -> None:
    writer = csv.DictWriter(fh, fieldnames=FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        rec = asdict(row)
        rec["ratio"] = "" if row.ratio is None else f"{row.ratio:.4f}"
        rec["mean_time_s"] = f"{row.mean_time_s:.6f}"
        writer.writerow(rec)
