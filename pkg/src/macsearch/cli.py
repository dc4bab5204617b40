"""Command-line front end.

Exit status: 0 when the query produced results, 2 when Q has no maximal
(k,t)-core, 1 on any error (including bad flags).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import bench as bench_mod
from .dominance import build_rdominance_graph
from .geometry import Region, check_weight, community_score
from .global_search import gs_search
from .index_io import IndexFormatError, IndexMismatchError, QueryIndex, load_index, save_index
from .ktcore import maximal_kt_core
from .local_search import STRATEGIES, ls_search
from .network import NetworkFormatError, load_road_social, save_road_social
from .oracle import OracleRefused, build_running_example_fixture, oracle_chain_at
from .results import natural_key, to_jsonl
from .synth import generate_road_social

MODES = ("gs-nc", "gs-t", "ls-nc", "ls-t")
DEFAULT_J = 20
EXIT_OK, EXIT_ERROR, EXIT_NO_CORE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# shared flag groups

def _add_data(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--data", metavar="DIR", help="directory with road.tsv, social_edges.tsv, attributes.tsv, locations.tsv")
    g.add_argument("--fixture", choices=["running-example"], help="use a built-in network")


def _add_query(p: argparse.ArgumentParser, region_required: bool = True) -> None:
    p.add_argument("--q", required=True, help="comma-separated query user names")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--region", required=region_required, help='preference box, e.g. "0.1,0.5x0.2,0.4"')


def _add_search(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=MODES, default="gs-nc")
    p.add_argument("--j", type=int, help=f"number of ranks for *-t modes (default {DEFAULT_J})")
    p.add_argument("--strategy", choices=STRATEGIES, default="layer-density")
    p.add_argument("--zeta", type=float, default=100.0)
    p.add_argument("--lambda", dest="lam", type=float, default=10.0)
    p.add_argument("--budget", type=int, default=128)
    p.add_argument("--seed", type=int, default=0, help="seed for restart weights of local search")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="macsearch", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a road-social network")
    g.add_argument("--n", type=int, default=1000, help="number of social users")
    g.add_argument("--d", type=int, default=3)
    g.add_argument("--attributes", choices=["independent", "correlated", "anti-correlated"], default="independent")
    g.add_argument("--avg-degree", type=float, default=8.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--fixture", choices=["running-example"], help="write a built-in network instead")
    g.add_argument("--out", required=True, metavar="DIR")

    ix = sub.add_parser("index", help="persist or inspect the core and dominance graph of one query")
    ixs = ix.add_subparsers(dest="index_command", required=True, parser_class=_Parser)
    b = ixs.add_parser("build")
    _add_data(b)
    _add_query(b)
    b.add_argument("--out", required=True, metavar="FILE")
    ld = ixs.add_parser("load")
    _add_data(ld)
    ld.add_argument("--index", required=True, metavar="FILE")
    ld.add_argument("--dump-dag", metavar="FILE", help="write the reduced DAG in DOT format")

    q = sub.add_parser("query", help="run a MAC search")
    _add_data(q)
    _add_query(q, region_required=False)
    _add_search(q)
    q.add_argument("--index", metavar="FILE", help="reuse a prebuilt index for this (Q, k, t, region)")
    q.add_argument("--out", metavar="FILE", help="write the result document here instead of stdout")
    q.add_argument("--dump-dag", metavar="FILE", help="write the reduced DAG in DOT format")
    q.add_argument("--plot", metavar="FILE", help="draw the cells (d = 3 only)")
    q.add_argument("--timings", action="store_true", help="include wall-clock timings in the header")

    o = sub.add_parser("oracle", help="brute-force ranking at one weight vector")
    _add_data(o)
    _add_query(o, region_required=False)
    o.add_argument("--at-weight", required=True, help="w1,...,w_{d-1}")
    o.add_argument("--j", type=int, default=1)

    bn = sub.add_parser("bench", help="time the engines on a generated network; CSV output")
    bn.add_argument("--n", type=int, default=10000)
    bn.add_argument("--d", type=int, default=3)
    bn.add_argument("--attributes", choices=["independent", "correlated", "anti-correlated"], default="independent")
    bn.add_argument("--avg-degree", type=float, default=16.0)
    bn.add_argument("--seed", type=int, default=0)
    bn.add_argument("--queries", type=int, default=10)
    bn.add_argument("--grid", action="append", default=[], metavar="NAME=V1,V2",
                    help="parameter sweep, e.g. k=4,8 (repeatable)")
    bn.add_argument("--set", action="append", default=[], metavar="NAME=V",
                    help="override a default, e.g. t=20 (repeatable)")
    bn.add_argument("--algorithms", default=",".join(bench_mod.ALGORITHMS))
    bn.add_argument("--out", metavar="FILE")
    return parser


# ---------------------------------------------------------------------------
# helpers

def _load(args):
    if args.fixture:
        return build_running_example_fixture()[0]
    return load_road_social(args.data)


def _query_ids(rsn, text: str) -> tuple[int, ...]:
    names = [x.strip() for x in text.split(",") if x.strip()]
    if not names:
        raise UsageError("--q needs at least one user")
    try:
        return tuple(sorted(rsn.social.ids(names)))
    except KeyError as exc:
        raise UsageError(f"unknown query user {exc.args[0]}") from None


def _region(text: str | None, d: int) -> Region:
    if text is None:
        raise UsageError("--region is required")
    try:
        region = Region.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if region.dim != d - 1:
        raise UsageError(f"--region has {region.dim} intervals; this network needs {d - 1}")
    return region


def _mode(args) -> tuple[str, str, int | None]:
    engine, kind = args.mode.split("-")
    if kind == "nc":
        if args.j is not None:
            raise UsageError(f"--j is only valid with *-t modes, not {args.mode}")
        return engine, "nc", None
    j = DEFAULT_J if args.j is None else args.j
    if j < 1:
        raise UsageError("--j must be at least 1")
    return engine, "topj", j


def _parse_value(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def _write(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------
# subcommands

def cmd_gen(args) -> int:
    if args.fixture:
        rsn = build_running_example_fixture()[0]
    else:
        rsn = generate_road_social(args.n, args.d, args.attributes, "grid", args.seed, avg_degree=args.avg_degree)
    save_road_social(rsn, args.out)
    print(f"wrote {rsn.social.n} users, {rsn.social.m} friendships, {len(rsn.road.edges)} road edges to {args.out}",
          file=sys.stderr)
    return EXIT_OK


def cmd_index(args) -> int:
    rsn = _load(args)
    if args.index_command == "build":
        Q = _query_ids(rsn, args.q)
        region = _region(args.region, rsn.social.d)
        core = maximal_kt_core(rsn, Q, args.k, args.t)
        if not core:
            print(f"no (k,t)-core: {core.reason}", file=sys.stderr)
            return EXIT_NO_CORE
        gd = build_rdominance_graph(rsn.social.attributes, core.members, region, rsn.social.names)
        save_index(args.out, QueryIndex(core, gd, region), rsn)
        print(f"index: {len(core)} core members, {len(gd.arcs())} arcs", file=sys.stderr)
        return EXIT_OK
    index = load_index(args.index, rsn)
    names = rsn.social.names
    summary = {
        "Q": [names[q] for q in index.core.Q],
        "k": index.core.k,
        "t": index.core.t,
        "region": index.region.format() if index.region.bounds else index.region.corners.tolist(),
        "core_size": len(index.core),
        "arcs": len(index.gd.arcs()),
        "layers": index.gd.max_layer + 1 if len(index.gd) else 0,
    }
    print(json.dumps(summary))
    if args.dump_dag:
        Path(args.dump_dag).write_text(index.gd.to_dot(), encoding="utf-8")
    return EXIT_OK


def cmd_query(args) -> int:
    engine, mode, j = _mode(args)
    rsn = _load(args)
    Q = _query_ids(rsn, args.q)
    clock = {}
    start = time.perf_counter()
    if args.index:
        index = load_index(args.index, rsn)
        if index.core.Q != Q or index.core.k != args.k or index.core.t != args.t:
            raise UsageError("--index was built for a different (Q, k, t)")
        region = index.region if args.region is None else _region(args.region, rsn.social.d)
        if region.format() != index.region.format():
            raise UsageError("--index was built for a different region")
        core, gd = index.core, index.gd
    else:
        region = _region(args.region, rsn.social.d)
        core = maximal_kt_core(rsn, Q, args.k, args.t)
        gd = None
        if core:
            gd = build_rdominance_graph(rsn.social.attributes, core.members, region, rsn.social.names)
    clock["prepare_s"] = time.perf_counter() - start

    start = time.perf_counter()
    if not core:
        rs = gs_search(rsn, Q, args.k, args.t, region, mode, j, core=core)
    elif engine == "gs":
        rs = gs_search(rsn, Q, args.k, args.t, region, mode, j, core=core, gd=gd)
    else:
        rs = ls_search(rsn, Q, args.k, args.t, region, mode, j, strategy=args.strategy, budget=args.budget,
                       zeta=args.zeta, lam=args.lam, seed=args.seed, core=core, gd=gd)
    clock["search_s"] = time.perf_counter() - start

    names = rsn.social.names
    echo = {
        "Q": [names[q] for q in Q], "k": args.k, "t": args.t, "region": region.format(),
        "mode": args.mode, "j": j,
    }
    if engine == "ls":
        echo.update(strategy=args.strategy, zeta=args.zeta, **{"lambda": args.lam}, budget=args.budget, seed=args.seed)
    _write(to_jsonl(rs, names, rsn.social.attributes, echo, clock if args.timings else None), args.out)
    if args.dump_dag and gd is not None:
        Path(args.dump_dag).write_text(gd.to_dot(), encoding="utf-8")
    if args.plot and rs.entries:
        from .plotting import plot_cells

        plot_cells(rs, names, args.plot)
    if not core:
        print(rs.diagnostic, file=sys.stderr)
        return EXIT_NO_CORE
    return EXIT_OK


def cmd_oracle(args) -> int:
    rsn = _load(args)
    Q = _query_ids(rsn, args.q)
    try:
        w = np.array([float(x) for x in args.at_weight.split(",")])
        if len(w) != rsn.social.d - 1:
            raise ValueError(f"expected {rsn.social.d - 1} values")
        check_weight(w)
    except ValueError as exc:
        raise UsageError(f"--at-weight: {exc}") from None
    if args.j < 1:
        raise UsageError("--j must be at least 1")
    core = maximal_kt_core(rsn, Q, args.k, args.t)
    if not core:
        print(f"no (k,t)-core: {core.reason}", file=sys.stderr)
        return EXIT_NO_CORE
    ranking = oracle_chain_at(rsn, Q, args.k, args.t, w)
    names, X = rsn.social.names, rsn.social.attributes
    out = []
    for rank, members in enumerate(ranking.top(args.j), start=1):
        value, argmin = community_score(members, w, X)
        out.append({"rank": rank, "members": sorted((names[v] for v in members), key=natural_key),
                    "score": value, "argmin": names[argmin]})
    print(json.dumps({"weight": [float(x) for x in w], "communities": out}))
    return EXIT_OK


def cmd_bench(args) -> int:
    grid = {}
    for item in args.grid:
        name, _, values = item.partition("=")
        if not values:
            raise UsageError(f"--grid expects NAME=V1,V2, got {item!r}")
        grid[name.strip()] = [_parse_value(v) for v in values.split(",")]
    overrides = {}
    for item in args.set:
        name, _, value = item.partition("=")
        overrides[name.strip()] = _parse_value(value)
    try:
        defaults = bench_mod.BenchParams(**overrides)
    except TypeError as exc:
        raise UsageError(f"--set: {exc}") from None
    rsn = generate_road_social(args.n, args.d, args.attributes, "grid", args.seed, avg_degree=args.avg_degree)
    algorithms = [a.strip() for a in args.algorithms.split(",") if a.strip()]
    rows = bench_mod.run_bench(rsn, grid, args.queries, args.seed, defaults, algorithms)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            bench_mod.write_csv(rows, fh)
    else:
        bench_mod.write_csv(rows, sys.stdout)
    return EXIT_OK


COMMANDS = {"gen": cmd_gen, "index": cmd_index, "query": cmd_query, "oracle": cmd_oracle, "bench": cmd_bench}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"macsearch: error: {exc}", file=sys.stderr)
    except (NetworkFormatError, IndexFormatError, IndexMismatchError, OracleRefused,
            ValueError, RuntimeError, OSError) as exc:
        print(f"macsearch: error: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
