"""Draw the cells of a 2-D result (d = 3) with matplotlib."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .geometry import cell_polygon
from .results import ResultSet


def cell_polygons(rs: ResultSet) -> list[np.ndarray]:
    """Vertices (counter-clockwise) of every cell, clipped to the region."""
    if rs.region.dim != 2:
        raise ValueError("cell plots need a two-dimensional region")
    return [cell_polygon(e.cell, rs.region) for e in rs.entries]


def plot_cells(rs: ResultSet, names: Sequence[str], path=None, ax=None):
    """Fill each cell with a colour per distinct NC community and mark the witnesses."""
    import matplotlib

    if ax is None:
        matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig = None
    if ax is None:
        fig, ax = plt.subplots(figsize=(6, 5))
    labels = sorted({tuple(sorted(e.nc)) for e in rs.entries})
    colour = {c: plt.cm.tab20(i % 20) for i, c in enumerate(labels)}
    shown = set()
    for e, poly in zip(rs.entries, cell_polygons(rs)):
        key = tuple(sorted(e.nc))
        label = None
        if key not in shown:
            shown.add(key)
            label = "{" + ",".join(names[v] for v in key) + "}"
        if len(poly) >= 3:
            ax.fill(poly[:, 0], poly[:, 1], color=colour[key], alpha=0.6, edgecolor="k", lw=0.5, label=label)
        ax.plot(*e.cell.witness, "k.", ms=3)
    lo, hi = rs.region.corners.min(axis=0), rs.region.corners.max(axis=0)
    ax.set_xlim(lo[0], hi[0])
    ax.set_ylim(lo[1], hi[1])
    ax.set_xlabel("w1")
    ax.set_ylabel("w2")
    if len(labels) <= 12:
        ax.legend(fontsize="small", loc="best")
    if fig is not None and path is not None:
        fig.savefig(path, dpi=120, bbox_inches="tight")
        plt.close(fig)
    return ax
