"""Query answers: cells of the region, each with a ranked community list.

A :class:`ResultSet` serializes to JSON Lines.  The first line is a header
(query echo, core size, cell count and optional timings); every further line
is one cell::

    {"cell": 0, "halfspaces": [{"a": [...], "b": ..., "side": 1,
      "winner": "v7", "loser": "v5"}], "witness": [...],
     "communities": [{"rank": 1, "members": [...], "score": ..., "argmin": "v7"}]}

Members are sorted by name and keys are emitted in a fixed order, so equal
answers give byte-identical documents.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .geometry import EPS_FEAS, Cell, HalfSpace, Region, community_score, constraint_slacks

FORMAT = "macsearch-result/1"


@dataclass(eq=False)
class ResultEntry:
    cell: Cell
    communities: tuple[frozenset[int], ...]

    @property
    def nc(self) -> frozenset[int]:
        return self.communities[0]


@dataclass(eq=False)
class ResultSet:
    mode: str  # "nc" or "topj"
    j: int
    region: Region
    entries: list[ResultEntry] = field(default_factory=list)
    core_size: int = 0
    diagnostic: str = ""
    stats: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def found_core(self) -> bool:
        return self.core_size > 0

    def locate(self, w, eps: float = EPS_FEAS) -> list[ResultEntry]:
        """Entries whose open cell contains ``w`` with slack above ``eps``."""
        w = np.atleast_2d(np.asarray(w, dtype=float))
        return [e for e in self.entries if e.cell.contains(w, eps)[0]]

    def at(self, w) -> tuple[frozenset[int], ...] | None:
        hits = self.locate(w)
        return hits[0].communities if len(hits) == 1 else None

    def pairs(self) -> set[frozenset[int]]:
        """Distinct NC communities over all cells."""
        return {e.nc for e in self.entries}

    def min_slacks(self, W: np.ndarray) -> np.ndarray:
        """Matrix ``[sample, entry]`` of the minimum constraint slack (``inf`` if none)."""
        out = np.full((len(W), len(self.entries)), np.inf)
        for i, e in enumerate(self.entries):
            s = constraint_slacks(e.cell.constraints, W)
            if s.shape[1]:
                out[:, i] = s.min(axis=1)
        return out


# ---------------------------------------------------------------------------
# serialization

def _hs_record(hs: HalfSpace, side: int, names: Sequence[str]) -> dict:
    return {
        "a": [float(x) for x in hs.a],
        "b": float(hs.b),
        "side": int(side),
        "winner": names[hs.winner] if hs.winner >= 0 else None,
        "loser": names[hs.loser] if hs.loser >= 0 else None,
    }


def to_jsonl(rs: ResultSet, names: Sequence[str], X: np.ndarray, query: dict,
             timings: dict | None = None) -> str:
    header = {
        "format": FORMAT,
        "query": query,
        "mode": rs.mode,
        "j": rs.j,
        "core_size": rs.core_size,
        "cells": len(rs.entries),
        "diagnostic": rs.diagnostic,
    }
    if timings is not None:
        header["timings"] = {k: round(float(v), 6) for k, v in sorted(timings.items())}
    lines = [json.dumps(header)]
    for i, e in enumerate(rs.entries):
        w = e.cell.witness
        comms = []
        for rank, members in enumerate(e.communities, start=1):
            value, argmin = community_score(members, w, X)
            comms.append({
                "rank": rank,
                "members": sorted((names[v] for v in members), key=natural_key),
                "score": value,
                "argmin": names[argmin],
            })
        lines.append(json.dumps({
            "cell": i,
            "halfspaces": [_hs_record(hs, s, names) for hs, s in e.cell.constraints],
            "witness": [float(x) for x in w],
            "communities": comms,
        }))
    return "\n".join(lines) + "\n"


def natural_key(name: str):
    """Sort key placing ``v2`` before ``v10``."""
    head = name.rstrip("0123456789")
    tail = name[len(head):]
    return (head, int(tail) if tail else -1, name)


def read_jsonl(text: str) -> tuple[dict, list[dict]]:
    lines = [json.loads(line) for line in text.splitlines() if line.strip()]
    if not lines or lines[0].get("format") != FORMAT:
        raise ValueError("not a result document")
    return lines[0], lines[1:]


def validate_document(text: str, names: Sequence[str], X: np.ndarray, tol: float = 1e-9) -> list[str]:
    """Re-score every community at its witness; return a list of problems."""
    index = {name: i for i, name in enumerate(names)}
    _, cells = read_jsonl(text)
    problems = []
    for rec in cells:
        w = np.asarray(rec["witness"], dtype=float)
        for hs in rec["halfspaces"]:
            a = np.asarray(hs["a"])
            val = hs["side"] * (a @ w + hs["b"])
            if val <= 0:
                problems.append(f"cell {rec['cell']}: witness violates a half-space")
        for comm in rec["communities"]:
            value, argmin = community_score([index[m] for m in comm["members"]], w, X)
            if abs(value - comm["score"]) > tol:
                problems.append(f"cell {rec['cell']} rank {comm['rank']}: score {comm['score']} != {value}")
            if names[argmin] != comm["argmin"]:
                problems.append(f"cell {rec['cell']} rank {comm['rank']}: argmin mismatch")
    return problems


def communities_by_cell(text: str) -> list[list[frozenset[str]]]:
    _, cells = read_jsonl(text)
    return [[frozenset(c["members"]) for c in rec["communities"]] for rec in cells]


def as_name_sets(communities: Iterable[Iterable[int]], names: Sequence[str]) -> list[frozenset[str]]:
    return [frozenset(names[v] for v in c) for c in communities]
