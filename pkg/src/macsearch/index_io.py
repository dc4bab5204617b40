"""Binary persistence of a query's maximal (k,t)-core and dominance graph.

Layout (all integers little-endian)::

    magic    8 bytes   b"MACIDX\\r\\n"
    version  u32
    count    u32       number of sections
    table    count x (tag 4 bytes, offset u64, length u64)
    payload  sections at their offsets

Sections: ``META`` (UTF-8 JSON with the query, region and a dataset
fingerprint), ``CORE`` (member ids as i64 then query distances as f64),
``ARCS`` (reduced arcs as i64 pairs) and ``POPS`` (sweep order as i64 then
the matching pivot scores as f64).
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dominance import DominanceGraph, from_relation
from .geometry import Region
from .ktcore import KTCore, Subgraph
from .network import RoadSocialNetwork

MAGIC = b"MACIDX\r\n"
VERSION = 1
_HEAD = struct.Struct("<8sII")
_ENTRY = struct.Struct("<4sQQ")


class IndexFormatError(ValueError):
    """The file is not an index of a supported version, or is damaged."""


class IndexMismatchError(ValueError):
    """The index was built for a different dataset."""


@dataclass(eq=False)
class QueryIndex:
    core: KTCore
    gd: DominanceGraph
    region: Region


def fingerprint(rsn: RoadSocialNetwork) -> str:
    """Hash of the social graph, attributes and locations."""
    s = rsn.social
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(s.attributes, dtype="<f8").tobytes())
    h.update(np.asarray(s.edges, dtype="<i8").tobytes())
    h.update(np.asarray([(loc.edge, loc.offset) for loc in s.locations], dtype="<f8").tobytes())
    return h.hexdigest()


def _region_record(region: Region) -> dict:
    if region.bounds is not None:
        return {"bounds": [list(b) for b in region.bounds]}
    return {"corners": region.corners.tolist()}


def _region_from(rec: dict) -> Region:
    if "bounds" in rec:
        return Region.rectangle([tuple(b) for b in rec["bounds"]])
    return Region.from_corners(np.asarray(rec["corners"], dtype=float))


def dumps(index: QueryIndex, rsn: RoadSocialNetwork) -> bytes:
    core, gd = index.core, index.gd
    names = rsn.social.names
    meta = {
        "Q": [names[q] for q in core.Q],
        "k": int(core.k),
        "t": float(core.t),
        "region": _region_record(index.region),
        "n": rsn.social.n,
        "d": rsn.social.d,
        "fingerprint": fingerprint(rsn),
    }
    members = np.array(sorted(core.members), dtype="<i8")
    dist = np.array([core.query_distance[v] for v in members], dtype="<f8")
    arcs = np.array(gd.arcs(), dtype="<i8").reshape(-1, 2)
    sections = [
        (b"META", json.dumps(meta, sort_keys=True).encode("utf-8")),
        (b"CORE", members.tobytes() + dist.tobytes()),
        (b"ARCS", arcs.tobytes()),
        (b"POPS", np.asarray(gd.pop_order, dtype="<i8").tobytes()
         + np.asarray(gd.pop_scores, dtype="<f8").tobytes()),
    ]
    offset = _HEAD.size + _ENTRY.size * len(sections)
    table, payload = [], []
    for tag, blob in sections:
        table.append(_ENTRY.pack(tag, offset, len(blob)))
        payload.append(blob)
        offset += len(blob)
    return _HEAD.pack(MAGIC, VERSION, len(sections)) + b"".join(table) + b"".join(payload)


def loads(data: bytes, rsn: RoadSocialNetwork) -> QueryIndex:
    if len(data) < _HEAD.size:
        raise IndexFormatError("file too short for an index header")
    magic, version, count = _HEAD.unpack_from(data)
    if magic != MAGIC:
        raise IndexFormatError("bad magic bytes: not a macsearch index")
    if version != VERSION:
        raise IndexFormatError(f"index version {version} is not supported (expected {VERSION})")
    sections = {}
    for i in range(count):
        tag, off, length = _ENTRY.unpack_from(data, _HEAD.size + i * _ENTRY.size)
        if off + length > len(data):
            raise IndexFormatError(f"section {tag!r} runs past the end of the file")
        sections[tag] = data[off:off + length]
    missing = {b"META", b"CORE", b"ARCS", b"POPS"} - sections.keys()
    if missing:
        raise IndexFormatError(f"missing sections {sorted(missing)}")

    meta = json.loads(sections[b"META"].decode("utf-8"))
    if meta["fingerprint"] != fingerprint(rsn):
        raise IndexMismatchError("index was built for a different dataset")
    core_blob = sections[b"CORE"]
    m = len(core_blob) // 16
    members = np.frombuffer(core_blob[:8 * m], dtype="<i8").tolist()
    dist = np.frombuffer(core_blob[8 * m:], dtype="<f8").tolist()
    Q = tuple(sorted(rsn.social.ids(meta["Q"])))
    core = KTCore(Subgraph.of(rsn.social, members), int(meta["k"]), float(meta["t"]), Q,
                  dict(zip(members, dist)))

    arcs = np.frombuffer(sections[b"ARCS"], dtype="<i8").reshape(-1, 2)
    dominators: dict[int, list[int]] = {}
    for u, v in arcs.tolist():
        dominators.setdefault(v, []).append(u)
    gd = from_relation(members, dominators, rsn.social.names)
    pops = sections[b"POPS"]
    p = len(pops) // 16
    gd.pop_order = tuple(np.frombuffer(pops[:8 * p], dtype="<i8").tolist())
    gd.pop_scores = tuple(np.frombuffer(pops[8 * p:], dtype="<f8").tolist())
    return QueryIndex(core, gd, _region_from(meta["region"]))


def save_index(path: str | Path, index: QueryIndex, rsn: RoadSocialNetwork) -> None:
    Path(path).write_bytes(dumps(index, rsn))


def load_index(path: str | Path, rsn: RoadSocialNetwork) -> QueryIndex:
    return loads(Path(path).read_bytes(), rsn)
