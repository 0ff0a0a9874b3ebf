"""Radius function on a Delaunay mosaic, critical cells, and moment counters."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .delaunay import Mosaic, _circumcircles
from .geom import Topology

__all__ = [
    "FilteredMosaic",
    "MomentCounters",
    "radius_values",
    "filtration_order",
    "moment_counters",
    "critical_fractions",
    "write_cells_csv",
]

_EPS = np.finfo(float).eps


@dataclass
class FilteredMosaic:
    mosaic: Mosaic
    edge_value: np.ndarray
    edge_critical: np.ndarray
    tri_value: np.ndarray
    tri_critical: np.ndarray
    edge_center: np.ndarray  # midpoints, reduced mod 1 on the torus
    tri_center: np.ndarray  # circumcenters, reduced mod 1 on the torus

    @property
    def vertex_value(self) -> np.ndarray:
        return np.zeros(self.mosaic.n)

    @property
    def topology(self) -> Topology:
        return self.mosaic.topology


@dataclass(frozen=True)
class MomentCounters:
    N1: float
    F1: float
    S1: float
    N2: float
    F2: float
    S2: float

    def as_dict(self) -> dict[str, float]:
        return {k: getattr(self, k) for k in ("N1", "F1", "S1", "N2", "F2", "S2")}


def _acute_sign(c: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Sign of (a - c).(b - c): +1 iff the angle at c is strictly acute."""
    ux, uy = a[:, 0] - c[:, 0], a[:, 1] - c[:, 1]
    vx, vy = b[:, 0] - c[:, 0], b[:, 1] - c[:, 1]
    px, py = ux * vx, uy * vy
    dot = px + py
    bound = 4 * _EPS * (np.abs(px) + np.abs(py))
    out = np.where(dot > bound, 1, np.where(-dot > bound, -1, 0)).astype(np.int8)
    for i in np.flatnonzero(out == 0):
        cx, cy = Fraction(c[i, 0]), Fraction(c[i, 1])
        d = (Fraction(a[i, 0]) - cx) * (Fraction(b[i, 0]) - cx) + (Fraction(a[i, 1]) - cy) * (Fraction(b[i, 1]) - cy)
        out[i] = (d > 0) - (d < 0)
    return out


def radius_values(mosaic: Mosaic) -> FilteredMosaic:
    """Radius of the smallest empty circle for every cell, plus criticality.

    A triangle is critical iff it is acute.  An edge is critical (Gabriel)
    iff the angle opposite to it is acute in every incident triangle; a
    right angle counts as obstructing.  A non-Gabriel edge takes the
    circumradius of the smallest incident triangle that obstructs it.
    """
    tc = mosaic.tri_coords()
    T = len(tc)
    if T:
        centers, R = _circumcircles(tc)
        acute = np.stack(
            [_acute_sign(tc[:, k], tc[:, (k + 1) % 3], tc[:, (k + 2) % 3]) > 0 for k in range(3)], axis=1
        )
        tri_critical = acute.all(axis=1)
    else:
        centers, R = np.zeros((0, 2)), np.zeros(0)
        tri_critical = np.zeros(0, bool)

    ec = mosaic.edge_coords()
    E = len(ec)
    a, b = ec[:, 0], ec[:, 1]
    half = np.hypot(b[:, 0] - a[:, 0], b[:, 1] - a[:, 1]) / 2.0
    value = half.copy()
    gabriel = np.ones(E, bool)
    obstructed_r = np.full(E, np.inf)
    for s in range(2):
        t = mosaic.edge_tris[:, s]
        has = t >= 0
        if not np.any(has):
            continue
        idx = np.flatnonzero(has)
        opp = mosaic.edge_opp[idx, s]
        ok = _acute_sign(opp, a[idx], b[idx]) > 0
        bad = idx[~ok]
        gabriel[bad] = False
        obstructed_r[bad] = np.minimum(obstructed_r[bad], R[t[bad]])
    value[~gabriel] = obstructed_r[~gabriel]

    tri_value = R.copy()
    if T:
        # guard the filtration property against last-bit rounding
        tri_value = np.maximum(tri_value, value[mosaic.tri_edges].max(axis=1))

    edge_center = (a + b) / 2.0
    tri_center = centers
    if mosaic.topology is Topology.TORUS:
        edge_center = edge_center - np.floor(edge_center)
        tri_center = tri_center - np.floor(tri_center)
    return FilteredMosaic(
        mosaic=mosaic,
        edge_value=value,
        edge_critical=gabriel,
        tri_value=tri_value,
        tri_critical=tri_critical,
        edge_center=edge_center,
        tri_center=tri_center,
    )


def _sorted_vertices(cells: np.ndarray, width: int) -> np.ndarray:
    out = np.full((len(cells), 3), -1, dtype=np.int64)
    if len(cells):
        out[:, :width] = np.sort(cells, axis=1)
    return out


def filtration_order(fm: FilteredMosaic) -> np.ndarray:
    """Cells sorted by (value, dimension, sorted vertex indices).

    Returns an (N, 2) array of (dimension, index) rows.
    """
    m = fm.mosaic
    n, E, T = m.n, len(m.edges), len(m.triangles)
    values = np.concatenate([np.zeros(n), fm.edge_value, fm.tri_value])
    dims = np.concatenate([np.zeros(n, np.int64), np.ones(E, np.int64), np.full(T, 2, np.int64)])
    idx = np.concatenate([np.arange(n), np.arange(E), np.arange(T)])
    verts = np.concatenate(
        [
            _sorted_vertices(np.arange(n)[:, None], 1),
            _sorted_vertices(m.edges, 2),
            _sorted_vertices(m.triangles, 3),
        ]
    )
    order = np.lexsort((verts[:, 2], verts[:, 1], verts[:, 0], dims, values))
    return np.stack([dims[order], idx[order]], axis=1)


def edge_order(fm: FilteredMosaic) -> np.ndarray:
    """Edge indices in filtration order."""
    verts = _sorted_vertices(fm.mosaic.edges, 2)
    return np.lexsort((verts[:, 1], verts[:, 0], fm.edge_value))


def triangle_order(fm: FilteredMosaic) -> np.ndarray:
    verts = _sorted_vertices(fm.mosaic.triangles, 3)
    return np.lexsort((verts[:, 2], verts[:, 1], verts[:, 0], fm.tri_value))


def _in_box(centers: np.ndarray, region) -> np.ndarray:
    if region is None:
        return np.ones(len(centers), bool)
    x0, y0, x1, y1 = region
    return (centers[:, 0] >= x0) & (centers[:, 0] <= x1) & (centers[:, 1] >= y0) & (centers[:, 1] <= y1)


def moment_counters(fm: FilteredMosaic, r0: float = math.inf, region=(0.0, 0.0, 1.0, 1.0)) -> MomentCounters:
    """Counts, summed radii and summed squared radii of critical cells.

    Edges are located by their midpoints and triangles by their
    circumcenters; ``region`` is a closed box ``(x0, y0, x1, y1)`` or None.
    """
    if r0 < 0:
        raise ValueError("r0 must be non-negative")
    e = fm.edge_critical & (fm.edge_value <= r0) & _in_box(fm.edge_center, region)
    t = fm.tri_critical & (fm.tri_value <= r0) & _in_box(fm.tri_center, region)
    ev, tv = fm.edge_value[e], fm.tri_value[t]
    return MomentCounters(
        N1=float(len(ev)),
        F1=math.fsum(ev),
        S1=math.fsum(ev * ev),
        N2=float(len(tv)),
        F2=math.fsum(tv),
        S2=math.fsum(tv * tv),
    )


def critical_fractions(fm: FilteredMosaic) -> tuple[float, float]:
    """Fraction of critical edges among all edges, and of critical triangles."""
    E = len(fm.edge_critical)
    T = len(fm.tri_critical)
    return (
        float(fm.edge_critical.sum()) / E if E else 0.0,
        float(fm.tri_critical.sum()) / T if T else 0.0,
    )


def write_cells_csv(fm: FilteredMosaic, path_or_file) -> None:
    """Per-cell rows ``dimension,value,critical`` in filtration order."""
    values = {1: fm.edge_value, 2: fm.tri_value}
    crit = {1: fm.edge_critical, 2: fm.tri_critical}

    def rows():
        for dim, i in filtration_order(fm):
            if dim == 0:
                yield (0, 0.0, 1)
            else:
                yield (int(dim), repr(float(values[dim][i])), int(crit[dim][i]))

    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    f = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        w = csv.writer(f)
        w.writerow(["dimension", "value", "critical"])
        w.writerows(rows())
    finally:
        if own:
            f.close()
