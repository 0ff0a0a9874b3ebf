"""Lunar EMST of a two-colored point set.

A lune L(a, b) at radius r is the intersection of the closed disks of
radius r about a color-0 point a and a color-1 point b.  It wakes up at
half the distance |ab|.  Two lunes meet at the radius of the smallest
circle enclosing their defining points.  If L(a, b) and L(a', b') meet,
then L(a, b') meets both, so the components of the union of lunes are
already determined by lunes sharing an endpoint.  The sweep therefore
only needs the triples (a, b, b') and (a, a', b), which keeps the graph
small.

The cost is ``2 * (sum of merge radii - sum of birth radii + min birth)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, minimum_spanning_tree
from scipy.spatial import cKDTree

from .geom import Topology, smallest_enclosing_circle, torus_displacement

__all__ = [
    "Lune",
    "LunarTree",
    "LunarAuditError",
    "merge_radius",
    "lunar_emst",
    "relative1_norm",
    "audit",
    "write_events_csv",
    "sec3_radius",
]

TORUS_RADIUS_CAP = 0.25  # lifted triples are exact below this radius
_GROWTH = 1.5


class LunarAuditError(RuntimeError):
    """A lunar sweep failed a consistency check."""


@dataclass(frozen=True)
class Lune:
    a: int
    b: int
    wake_radius: float
    pa: tuple[float, float] = (0.0, 0.0)
    pb: tuple[float, float] = (0.0, 0.0)


@dataclass
class LunarTree:
    component_births: list[tuple[tuple[int, int], float]]  # (lune, 2 * wake radius)
    merges: list[tuple[tuple[tuple[int, int], tuple[int, int]], float]]  # (lune pair, 2 * radius)
    cost: float
    mode: str = "exact"
    radius: float = math.inf  # sweep horizon; everything below it is exact
    n_lunes: int = 0
    n_edges: int = 0
    events: list[tuple[float, str, tuple[int, ...]]] = field(default_factory=list, repr=False)


def relative1_norm(tree: LunarTree) -> float:
    return tree.cost / 2.0


# ---------------------------------------------------------------------------
# distances and the three-point kernel


def sec3_radius(x: np.ndarray, y: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Smallest enclosing circle radius of triangles given by their side lengths.

    Right and obtuse triangles take half the longest side; acute ones take
    the circumradius, computed from a stable Heron formula.
    """
    x, y, z = (np.asarray(t, dtype=float) for t in (x, y, z))
    lo, hi = np.minimum(x, y), np.maximum(x, y)
    a = np.maximum(hi, z)
    c = np.minimum(lo, z)
    b = np.maximum(lo, np.minimum(hi, z))  # a >= b >= c
    half = a / 2.0
    acute = b * b + c * c > a * a
    out = half.copy()
    if np.any(acute):
        a, b, c = a[acute], b[acute], c[acute]
        prod = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))
        area = 0.25 * np.sqrt(np.maximum(prod, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            R = np.where(area > 0, a * b * c / (4.0 * area), half[acute])
        out[acute] = np.maximum(R, half[acute])
    return out


def merge_radius(l1: Lune, l2: Lune, topology: Topology | str = Topology.SQUARE) -> float:
    """Radius at which two lunes first intersect."""
    topology = Topology.parse(topology)
    pts = [l1.pa, l1.pb, l2.pa, l2.pb]
    if topology is Topology.TORUS:
        o = l1.pa
        pts = [(o[0] + dx, o[1] + dy) for dx, dy in (torus_displacement(o, p) for p in pts)]
    return smallest_enclosing_circle(pts).radius


# ---------------------------------------------------------------------------
# candidate graph


def _pairs_within_groups(group: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """All index pairs i < j with group[i] == group[j]; ``group`` must be sorted."""
    m = len(group)
    if m < 2:
        return np.zeros(0, np.int64), np.zeros(0, np.int64)
    starts = np.flatnonzero(np.r_[True, group[1:] != group[:-1]])
    ends = np.r_[starts[1:], m]
    end_of = np.repeat(ends, ends - starts)
    cnt = end_of - np.arange(m) - 1
    total = int(cnt.sum())
    first = np.repeat(np.arange(m), cnt)
    offs = np.repeat(np.cumsum(cnt) - cnt, cnt)
    second = first + 1 + (np.arange(total) - offs)
    return first, second


def _lune_pairs(P0, P1, torus: bool, radius: float):
    """Color pairs (a, b) with wake radius <= radius, sorted by (a, b).

    Also returns the displacement from a to b (the shortest one on the torus).
    """
    n0, n1 = len(P0), len(P1)
    if math.isinf(radius):
        a = np.repeat(np.arange(n0), n1)
        b = np.tile(np.arange(n1), n0)
    else:
        box = 1.0 if torus else None
        t0 = cKDTree(P0, boxsize=box)
        t1 = cKDTree(P1, boxsize=box)
        hits = t0.sparse_distance_matrix(t1, 2.0 * radius * (1 + 1e-9) + 1e-15, output_type="ndarray")
        order = np.lexsort((hits["j"], hits["i"]))
        a = hits["i"][order].astype(np.int64)
        b = hits["j"][order].astype(np.int64)
    D = P1[b] - P0[a]
    if torus:
        D = D - np.floor(D + 0.5)
    wake = np.hypot(D[:, 0], D[:, 1]) / 2.0
    keep = wake <= radius
    return a[keep], b[keep], wake[keep], D[keep]


def _candidate_graph(P0, P1, torus: bool, radius: float):
    """Lunes up to ``radius`` and the merge edges between lunes sharing a point.

    Each triple is laid out in the plane by the displacements from the
    shared point.  On the torus this lift is the optimal one whenever the
    resulting radius is below 1/4, so values under that cap are exact.
    """
    a, b, wake, D = _lune_pairs(P0, P1, torus, radius)
    n1 = len(P1)
    lid = a * n1 + b
    us, vs, vals = [], [], []
    # lunes sharing a color-0 point (a, b, b'), then a color-1 point (a, a', b)
    order_b = np.lexsort((a, b))
    for order, group in ((None, a), (order_b, b[order_b])):
        i, j = _pairs_within_groups(group)
        if order is not None:
            i, j = order[i], order[j]
        d = D[j] - D[i]
        side = np.hypot(d[:, 0], d[:, 1])
        us.append(i)
        vs.append(j)
        vals.append(sec3_radius(2 * wake[i], 2 * wake[j], side))
    u, v, val = np.concatenate(us), np.concatenate(vs), np.concatenate(vals)
    keep = val <= radius
    return lid, a, b, wake, u[keep], v[keep], val[keep]


def _n_components(m: int, u, v) -> int:
    g = coo_matrix((np.ones(len(u), np.int8), (u, v)), shape=(m, m))
    return int(connected_components(g, directed=False)[0])


def _spanning_edges(m: int, u, v, val):
    """A minimum spanning forest of the candidate graph; its values match the full graph's."""
    if len(u) == 0 or m < 2:
        return u[:0], v[:0], val[:0]
    tiny = np.nextafter(0.0, 1.0)
    w = np.where(val > 0, val, tiny)  # explicit zeros vanish from sparse matrices
    g = coo_matrix((w, (u, v)), shape=(m, m)).tocsr()
    f = minimum_spanning_tree(g).tocoo()
    fw = np.where(f.data == tiny, 0.0, f.data)
    uu, vv = np.minimum(f.row, f.col), np.maximum(f.row, f.col)
    return uu.astype(np.int64), vv.astype(np.int64), fw


# ---------------------------------------------------------------------------
# sweep


def _sweep(lid, a, b, wake, u, v, val, keep_events: bool = False):
    """Elder-rule sweep over the spanning-forest edges.

    Every edge is at least as large as the wake radii of its lunes, and wakes
    come first at equal radii, so only merge edges need processing.  Edges are
    ordered by (radius, lune ids); a component is keyed by its oldest lune
    (wake radius, lune id) and the younger key dies at each merge.  Returns
    the pairs (dying lune id, birth, death, lune pair) and the event log.
    """
    m = len(lid)
    order = np.lexsort((lid[v], lid[u], val))
    parent = list(range(m))
    key = list(zip(wake.tolist(), lid.tolist()))
    al, bl = a.tolist(), b.tolist()
    ul, vl, vall = u[order].tolist(), v[order].tolist(), val[order].tolist()
    pairs = []
    for x, y, r in zip(ul, vl, vall):
        rx = x
        while parent[rx] != rx:
            parent[rx] = parent[parent[rx]]
            rx = parent[rx]
        ry = y
        while parent[ry] != ry:
            parent[ry] = parent[parent[ry]]
            ry = parent[ry]
        if rx == ry:
            continue
        young, old = (rx, ry) if key[rx] > key[ry] else (ry, rx)
        parent[young] = old
        kb, kl = key[young]
        pairs.append((kl, kb, r, ((al[x], bl[x]), (al[y], bl[y]))))
    events = []
    if keep_events:
        events = [(w, 0, (al[i], bl[i])) for i, w in enumerate(wake.tolist())]
        events += [(r, 1, lp[0] + lp[1]) for _, _, r, lp in pairs]
        events.sort()
        events = [(r, "wake" if k == 0 else "merge", ids) for r, k, ids in events]
    return pairs, events


def _finish(n1, lid, wake, pairs, events, mode, radius, n_edges) -> LunarTree:
    # pairs of zero persistence belong to lunes that wake inside a component
    pos = [p for p in pairs if p[2] > p[1]]
    i0 = int(np.lexsort((lid, wake))[0]) if len(lid) else 0
    births = [(int(lid[i0]), float(wake[i0]))] + [(p[0], p[1]) for p in pos]
    births.sort(key=lambda t: (t[1], t[0]))
    # the essential birth and the minimum birth cancel in the cost
    cost = math.fsum([2.0 * p[2] for p in pos] + [-2.0 * p[1] for p in pos])
    return LunarTree(
        component_births=[((L // n1, L % n1), 2.0 * w) for L, w in births],
        merges=[(p[3], 2.0 * p[2]) for p in pos],
        cost=cost,
        mode=mode,
        radius=radius,
        n_lunes=len(lid),
        n_edges=n_edges,
        events=events,
    )


def _prepare(points0, points1, topology):
    topology = Topology.parse(topology)
    P0 = np.asarray(points0, dtype=float).reshape(-1, 2)
    P1 = np.asarray(points1, dtype=float).reshape(-1, 2)
    if len(P0) == 0 or len(P1) == 0:
        raise ValueError("both color classes must be nonempty")
    torus = topology is Topology.TORUS
    if torus:
        P0 = P0 - np.floor(P0)
        P1 = P1 - np.floor(P1)
    return P0, P1, torus


def _birth_bound(P0, P1, torus: bool, fm=None) -> float | None:
    """Largest half-length of a bichromatic Gabriel edge of the union.

    Components of the union of lunes are born only at such edges (or at
    points carrying both colors, at radius 0).  Returns None when the
    bound cannot be certified.
    """
    from .delaunay import TorusGuardError, triangulate
    from .filtration import radius_values

    n0 = len(P0)
    if fm is not None:
        verts = fm.mosaic.edges
        color = np.r_[np.zeros(n0, bool), np.ones(len(P1), bool)]
        if fm.mosaic.n != n0 + len(P1):
            raise ValueError("filtration does not match the colored point set")
        c0, c1 = ~color, color
    else:
        allp = np.vstack([P0, P1])
        U, inv = np.unique(allp, axis=0, return_inverse=True)
        inv = inv.reshape(-1)
        c0 = np.zeros(len(U), bool)
        c1 = np.zeros(len(U), bool)
        c0[inv[:n0]] = True
        c1[inv[n0:]] = True
        if len(U) == 1:
            return 0.0
        try:
            fm = radius_values(triangulate(U, Topology.TORUS if torus else Topology.SQUARE, allow_degenerate=True))
        except (TorusGuardError, ValueError):
            return None
        verts = fm.mosaic.edges
    u, v = verts[:, 0], verts[:, 1]
    # a lune at a point carrying both colors swallows its neighbours' lunes as they wake
    single = c0 ^ c1
    bichrom = ((c0[u] & c1[v]) | (c1[u] & c0[v])) & single[u] & single[v]
    sel = fm.edge_critical & bichrom
    return float(fm.edge_value[sel].max()) if np.any(sel) else 0.0


def lunar_emst(
    points0,
    points1,
    topology: Topology | str = Topology.SQUARE,
    mode: str = "pruned",
    *,
    fm=None,
    keep_events: bool = False,
) -> LunarTree:
    """Sweep the union of lunes and return the lunar EMST.

    ``mode="exact"`` uses all |A0|*|A1| lunes and all candidate merge edges.
    ``mode="pruned"`` truncates the graph at a radius that grows geometrically
    until every component birth lies below it and one component remains.
    ``fm`` may be the filtration of the union (color 0 first) to reuse its
    Gabriel edges.
    """
    P0, P1, torus = _prepare(points0, points1, topology)
    mode = mode.lower()
    if mode not in ("exact", "pruned"):
        raise ValueError(f"unknown mode {mode!r}")
    bound = _birth_bound(P0, P1, torus, fm) if mode == "pruned" else None
    cap = np.nextafter(TORUS_RADIUS_CAP, 0.0)
    mode_used = mode
    if mode == "pruned" and (bound is None or (torus and bound >= cap)):
        mode_used = "exact"

    graph = None
    if mode_used == "pruned":
        n = len(P0) + len(P1)
        # the bound and the wake radii round differently; keep a relative margin
        radius = max(bound * (1.0 + 1e-9), 0.5 / math.sqrt(n))
        while True:
            if torus:
                radius = min(radius, cap)
            graph = _candidate_graph(P0, P1, torus, radius)
            if _n_components(len(graph[0]), graph[4], graph[5]) == 1:
                break
            if torus and radius >= cap:
                # tiny torus sets: let the exact sweep decide
                mode_used, graph = "exact", None
                break
            radius *= _GROWTH
    if mode_used == "exact":
        radius = math.inf
        graph = _candidate_graph(P0, P1, torus, radius)
    lid, a, b, wake, u, v, val = graph
    n_edges = len(u)
    u, v, val = _spanning_edges(len(lid), u, v, val)
    pairs, events = _sweep(lid, a, b, wake, u, v, val, keep_events)
    tree = _finish(len(P1), lid, wake, pairs, events, mode_used, radius, n_edges)

    if torus:
        top = max([r for _, r in tree.merges] + [r for _, r in tree.component_births], default=0.0) / 2.0
        if top >= TORUS_RADIUS_CAP:
            raise LunarAuditError("torus lunar event above radius 1/4; distances are not canonical")
    audit(tree)
    return tree


def audit(tree: LunarTree, tol: float = 1e-12) -> None:
    """Check the bookkeeping invariants of a lunar tree; raises LunarAuditError."""
    if len(tree.merges) != len(tree.component_births) - 1:
        raise LunarAuditError("merge count differs from birth count minus one")
    births = [c for _, c in tree.component_births]
    for (l1, l2), r in tree.merges:
        if r + tol < 0:
            raise LunarAuditError("negative merge radius")
    expected = math.fsum([r for _, r in tree.merges]) - math.fsum(births) + min(births)
    if abs(expected - tree.cost) > 1e-9 * max(1.0, abs(tree.cost)):
        raise LunarAuditError("cost differs from merges - births + min birth")


def write_events_csv(tree: LunarTree, path_or_file) -> None:
    """Rows ``radius,kind,indices``; run with ``keep_events=True`` to fill the log."""
    own = isinstance(path_or_file, str) or hasattr(path_or_file, "__fspath__")
    f = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        w = csv.writer(f)
        w.writerow(["radius", "kind", "indices"])
        for r, kind, ids in tree.events:
            w.writerow([repr(float(r)), kind, " ".join(map(str, ids))])
    finally:
        if own:
            f.close()
