"""Acceptance runs shared by ``test_acceptance.py`` and the determinism re-run.

Each ``criterion_N`` returns a :class:`Outcome`.  ``digest`` hashes every
search output the criterion produced (never timings), so two executions can
be compared bit for bit.  Run as a script to print the digests as JSON.
"""

from __future__ import annotations

import hashlib
import json
import sys
import time
from dataclasses import dataclass, field
from functools import lru_cache

import networkx as nx
import numpy as np

from macsearch.bench import BenchParams, random_region, sample_queries
from macsearch.dominance import build_rdominance_graph, pairwise_dominance
from macsearch.geometry import Region
from macsearch.global_search import gs_search
from macsearch.ktcore import core_decomposition, coreness_upper_bound, maximal_kt_core, query_distance_filter
from macsearch.local_search import ls_search
from macsearch.oracle import (
    brute_distance_filter, brute_kt_core, build_running_example_fixture, oracle_chain_at, random_instance,
    tie_distance,
)
from macsearch.synth import generate_road_social

SUITE_SIZE = 200
WEIGHTS_PER_INSTANCE = 100
TILING_SAMPLES = 10_000
EPS = 1e-9
RECALL_TARGET = 0.90

PERF_N, PERF_SEED, PERF_AVG_DEGREE = 10_000, 7, 16
PERF_PARAMS = BenchParams(k=8, t=25.0)
PERF_QUERIES, PERF_QUERY_SEED = 20, 1


@dataclass
class Outcome:
    passed: bool
    detail: str
    digest: str = ""
    failures: list[str] = field(default_factory=list)


class Digest:
    def __init__(self):
        self._h = hashlib.sha256()

    def add(self, *parts) -> None:
        for p in parts:
            if isinstance(p, np.ndarray):
                self._h.update(np.ascontiguousarray(p, dtype="<f8").tobytes())
            else:
                self._h.update(repr(p).encode())

    def add_result(self, rs) -> None:
        self.add(len(rs.entries), rs.core_size)
        for e in rs.entries:
            self.add([sorted(c) for c in e.communities], e.cell.witness)
            for hs, side in e.cell.constraints:
                self.add(hs.a, hs.b, side)

    def hexdigest(self) -> str:
        return self._h.hexdigest()


def interior_weights(rng, region: Region, X, members, n: int) -> np.ndarray:
    """``n`` weights of ``region`` at least EPS from its boundary and from every tie hyperplane."""
    out = np.empty((0, region.dim))
    while len(out) < n:
        W = region.sample(rng, n)
        ok = (region.slack(W) > EPS) & (tie_distance(X, members, W) > EPS)
        out = np.vstack([out, W[ok]])
    return out[:n]


# ---------------------------------------------------------------------------
# the random instance suite, shared by criteria 1, 3 and 4

@dataclass
class SuiteRun:
    seed: int
    inst: dict
    region: Region
    j: int
    nc: object
    topj: object


@lru_cache(maxsize=1)
def suite() -> tuple[SuiteRun, ...]:
    runs = []
    for seed in range(SUITE_SIZE):
        inst = random_instance(seed)
        region = Region.rectangle(inst["bounds"])
        args = (inst["rsn"], inst["Q"], inst["k"], inst["t"], region)
        j = 1 + seed % 3
        runs.append(SuiteRun(seed, inst, region, j, gs_search(*args), gs_search(*args, "topj", j)))
    return tuple(runs)


def criterion_1() -> Outcome:
    dig, failures, checked = Digest(), [], 0
    for run in suite():
        rsn, Q, k, t = run.inst["rsn"], run.inst["Q"], run.inst["k"], run.inst["t"]
        dig.add_result(run.nc)
        dig.add_result(run.topj)
        members = brute_kt_core(rsn, Q, k, t)
        W = interior_weights(np.random.default_rng(run.seed), run.region, rsn.social.attributes, members,
                             WEIGHTS_PER_INSTANCE)
        for w in W:
            truth = oracle_chain_at(rsn, Q, k, t, w)
            checked += 1
            if run.nc.at(w) != (truth.nc,) or run.topj.at(w) != tuple(truth.top(run.j)):
                failures.append(f"seed {run.seed} w={w.tolist()}")
                break
    n = len(suite())
    return Outcome(not failures, f"{n} instances, {checked} weights, {len(failures)} mismatching instances",
                   dig.hexdigest(), failures)


def criterion_2() -> Outcome:
    rsn, region = build_running_example_fixture()
    index = {name: i for i, name in enumerate(rsn.social.names)}
    ids = lambda *ns: frozenset(index[f"v{n}"] for n in ns)  # noqa: E731
    Q = sorted(ids(2, 3, 6))
    h1, h2, h3 = ids(2, 3, 6, 7), ids(2, 3, 4, 5, 6, 7), ids(2, 3, 4, 5, 6)
    dig, failures = Digest(), []
    core = maximal_kt_core(rsn, Q, 3, 9)
    if core.members != ids(1, 2, 3, 4, 5, 6, 7):
        failures.append("maximal (3,9)-core differs from {v1..v7}")
    for engine in (gs_search, ls_search):
        nc = engine(rsn, Q, 3, 9, region)
        top2 = engine(rsn, Q, 3, 9, region, "topj", 2)
        dig.add_result(nc)
        dig.add_result(top2)
        name = engine.__name__
        if nc.at((0.19, 0.3)) != (h1,):
            failures.append(f"{name}: NC at (0.19, 0.3)")
        if nc.at((0.2, 0.3)) != (h3,):
            failures.append(f"{name}: NC at (0.2, 0.3)")
        cells = [e for e in top2.entries if e.nc == h1]
        rng = np.random.default_rng(2)
        W = region.sample(rng, 2000)
        inside = [w for w in W if any(e.cell.contains(w[None, :])[0] for e in cells)]
        points = [e.cell.witness for e in cells] + inside
        if not cells or any(top2.at(w) != (h1, h2) for w in points):
            failures.append(f"{name}: top-2 inside the cells of {{v2,v3,v6,v7}}")
    return Outcome(not failures, "H_3^9, NC at two weights, top-2 in H1 cells, for GS and LS",
                   dig.hexdigest(), failures)


def criterion_3() -> Outcome:
    dig, failures = Digest(), []
    hit = total = 0
    for run in suite():
        rsn = run.inst["rsn"]
        ls = ls_search(rsn, run.inst["Q"], run.inst["k"], run.inst["t"], run.region)
        dig.add_result(ls)
        rng = np.random.default_rng(run.seed)
        for e in ls.entries:
            W = np.vstack([e.cell.witness[None, :], run.region.sample(rng, 50)])
            W = W[e.cell.contains(W)]
            if any(run.nc.at(w) not in (None, (e.nc,)) for w in W) or run.nc.at(e.cell.witness) != (e.nc,):
                failures.append(f"seed {run.seed}: LS community {sorted(e.nc)} not in GS")
                break
        for e in run.nc.entries:
            total += 1
            hit += ls.at(e.cell.witness) == (e.nc,)
    recall = hit / total
    passed = not failures and recall >= RECALL_TARGET
    return Outcome(passed, f"soundness violations {len(failures)}, recall {recall:.4f} ({hit}/{total} GS cells)",
                   dig.hexdigest(), failures)


def criterion_4() -> Outcome:
    dig, failures, outputs = Digest(), [], 0
    for run in suite():
        for rs in (run.nc, run.topj):
            outputs += 1
            for e in rs.entries:
                w = e.cell.witness
                slack = min([run.region.slack(w[None, :])[0]] + [hs.slack(w, s) for hs, s in e.cell.constraints])
                if not slack > EPS:
                    failures.append(f"seed {run.seed}: witness slack {slack:.3g}")
            W = run.region.sample(np.random.default_rng(run.seed + 7), TILING_SAMPLES)
            W = W[run.region.slack(W) > EPS]
            S = rs.min_slacks(W)
            clear = ~np.any(np.abs(S) <= EPS, axis=1)
            counts = np.sum(S[clear] > EPS, axis=1)
            dig.add(int(clear.sum()), counts.tolist())
            bad = int(np.sum(counts != 1))
            if bad:
                failures.append(f"seed {run.seed} {rs.mode}: {bad} samples not in exactly one cell")
    return Outcome(not failures, f"{outputs} outputs x {TILING_SAMPLES} samples, {len(failures)} failures",
                   dig.hexdigest(), failures)


def _closure(members, relation) -> dict:
    g = nx.DiGraph()
    g.add_nodes_from(members)
    g.add_edges_from((u, v) for v, us in relation.items() for u in us)
    return {v: frozenset(nx.ancestors(g, v)) for v in members}


def criterion_5() -> Outcome:
    rng = np.random.default_rng(5)
    dig, failures = Digest(), []
    for trial in range(100):
        n, d = int(rng.integers(2, 201)), int(rng.integers(2, 5))
        X = rng.random((n, d))
        if trial % 5 == 0:
            X[rng.integers(n)] = X[rng.integers(n)]
        region = random_region(rng, d - 1, float(rng.uniform(0.01, 0.9 / d)))
        gd = build_rdominance_graph(X, range(n), region)
        arcs = gd.arcs()
        dig.add(arcs)
        ref = _closure(range(n), pairwise_dominance(X, range(n), region))
        if any(gd.ancestors(v) != ref[v] for v in range(n)):
            failures.append(f"trial {trial}: reachability differs")
        reduced = sorted(nx.transitive_reduction(nx.DiGraph(arcs)).edges) if arcs else []
        if reduced != arcs:
            failures.append(f"trial {trial}: arcs are not a transitive reduction")
    return Outcome(not failures, f"100 attribute sets, {len(failures)} failures", dig.hexdigest(), failures)


def peeling_coreness(g: nx.Graph) -> dict:
    """Core numbers by repeated minimum-degree removal, one vertex at a time."""
    h = g.copy()
    core, k = {}, 0
    while h:
        v = min(h, key=lambda x: (h.degree(x), x))
        k = max(k, h.degree(v))
        core[v] = k
        h.remove_node(v)
    return core


def criterion_6() -> Outcome:
    rng = np.random.default_rng(6)
    dig, failures = Digest(), []
    for trial in range(100):
        n = int(rng.integers(1, 80))
        g = nx.gnp_random_graph(n, float(rng.uniform(0.02, 0.5)), seed=int(rng.integers(2**31)))
        adj = tuple(frozenset(g[v]) for v in range(n))
        got = core_decomposition(adj)
        dig.add(sorted(got.items()))
        if got != peeling_coreness(g):
            failures.append(f"graph {trial}: core numbers differ")
        for comp in nx.connected_components(g):
            sub = g.subgraph(comp)
            if coreness_upper_bound(sub.number_of_nodes(), sub.number_of_edges()) < max(got[v] for v in comp):
                failures.append(f"graph {trial}: coreness bound too small")
    for seed in range(1000, 1050):
        inst = random_instance(seed)
        got = query_distance_filter(inst["rsn"], inst["Q"], inst["t"])
        dig.add(sorted(got))
        if got != brute_distance_filter(inst["rsn"], inst["Q"], inst["t"]):
            failures.append(f"instance {seed}: distance filter differs")
    return Outcome(not failures, f"100 graphs, 50 distance filters, {len(failures)} failures",
                   dig.hexdigest(), failures)


def criterion_7() -> Outcome:
    rsn = generate_road_social(PERF_N, 3, "independent", "grid", PERF_SEED, avg_degree=PERF_AVG_DEGREE)
    p = PERF_PARAMS
    queries = sample_queries(rsn, p, PERF_QUERIES, seed=PERF_QUERY_SEED)
    dig = Digest()
    gs_t, ls_t = [], []
    for q in queries:
        start = time.perf_counter()
        gs = gs_search(rsn, q.Q, p.k, p.t, q.region)
        gs_t.append(time.perf_counter() - start)
        start = time.perf_counter()
        ls = ls_search(rsn, q.Q, p.k, p.t, q.region, budget=p.budget)
        ls_t.append(time.perf_counter() - start)
        dig.add(q.Q, q.region.corners)
        dig.add_result(gs)
        dig.add_result(ls)
    g, l = float(np.mean(gs_t)), float(np.mean(ls_t))
    return Outcome(l < g, f"{len(queries)} queries: mean ls-nc {l:.3f}s vs gs-nc {g:.3f}s", dig.hexdigest())


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5, 6: criterion_6,
            7: criterion_7}


def main() -> None:
    print(json.dumps({n: fn().digest for n, fn in CRITERIA.items()}))


if __name__ == "__main__":
    sys.exit(main())
