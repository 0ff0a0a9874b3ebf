"""Delaunay mosaics in the unit square and on the flat torus."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import Delaunay as _Qhull
from scipy.spatial import QhullError

from .geom import DegenerateError, Topology, incircle_array, incircle_sos, orient2d, orient2d_array

__all__ = ["Mosaic", "TorusGuardError", "triangulate", "validate", "dumps", "loads"]

_OFFSETS = [(ox, oy) for ox in (-1, 0, 1) for oy in (-1, 0, 1)]
_CENTRAL = _OFFSETS.index((0, 0))
STRICT_TORUS_EDGE = 1.0 / 3.0  # optional length guard for the periodic construction


class TorusGuardError(DegenerateError):
    """The periodic construction could not be certified for this point set."""


@dataclass
class Mosaic:
    """Vertices, edges and triangles of a Delaunay triangulation.

    Triangles are stored counterclockwise.  On the torus every cell is
    anchored at its first vertex; ``tri_offsets[t, k]`` is the integer
    translation applied to vertex ``triangles[t, k]`` to place it next to
    the anchor, and ``edge_offsets[e]`` does the same for the second
    endpoint of edge ``e``.  In the square all offsets are zero.
    """

    points: np.ndarray
    topology: Topology
    triangles: np.ndarray
    tri_offsets: np.ndarray
    edges: np.ndarray
    edge_offsets: np.ndarray
    edge_tris: np.ndarray  # (E, 2), -1 where missing
    edge_opp: np.ndarray  # (E, 2, 2) opposite vertex of each incident triangle, edge frame
    tri_edges: np.ndarray = field(repr=False)  # (T, 3), edge opposite vertex k

    @property
    def n(self) -> int:
        return len(self.points)

    def tri_coords(self) -> np.ndarray:
        """Unwrapped triangle coordinates, shape (T, 3, 2)."""
        return self.points[self.triangles] + self.tri_offsets

    def edge_coords(self) -> np.ndarray:
        """Unwrapped edge endpoints, shape (E, 2, 2)."""
        p = self.points[self.edges]
        p[:, 1] += self.edge_offsets
        return p

    def euler_characteristic(self) -> int:
        return self.n - len(self.edges) + len(self.triangles)


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or (len(pts) and pts.shape[1] != 2):
        pts = pts.reshape(-1, 2)
    if not np.all(np.isfinite(pts)):
        raise ValueError("coordinates must be finite")
    return pts


def _ccw(P: np.ndarray, tris: np.ndarray) -> np.ndarray:
    o = orient2d_array(P[tris[:, 0]], P[tris[:, 1]], P[tris[:, 2]])
    tris = tris.copy()
    neg = o < 0
    tris[neg, 1], tris[neg, 2] = tris[neg, 2], tris[neg, 1].copy()
    return tris[o != 0]


def _half_edges(tris: np.ndarray):
    """(u, v, w, t) for every directed edge uv of a ccw triangle t with apex w."""
    T = len(tris)
    u = tris[:, [0, 1, 2]].ravel()
    v = tris[:, [1, 2, 0]].ravel()
    w = tris[:, [2, 0, 1]].ravel()
    t = np.repeat(np.arange(T), 3)
    return u, v, w, t


def _non_delaunay_edges(P: np.ndarray, tris: np.ndarray, keys: np.ndarray) -> bool:
    """True if some interior edge fails the (tie-broken) empty-circle test."""
    u, v, w, t = _half_edges(tris)
    m = len(P)
    key = np.minimum(u, v) * m + np.maximum(u, v)
    order = np.argsort(key, kind="stable")
    ks = key[order]
    same = np.flatnonzero(ks[1:] == ks[:-1])
    if len(same) == 0:
        return False
    h1, h2 = order[same], order[same + 1]
    a, b, c, d = u[h1], v[h1], w[h1], w[h2]

    s = incircle_array(P[a], P[b], P[c], P[d])
    if np.any(s > 0):
        return True
    for i in np.flatnonzero(s == 0):
        ii = (a[i], b[i], c[i], d[i])
        if incircle_sos(P[ii[0]], P[ii[1]], P[ii[2]], P[ii[3]], [keys[j] for j in ii]) > 0:
            return True
    return False


def _lawson(P: np.ndarray, tris: np.ndarray, keys: np.ndarray) -> np.ndarray:
    """Flip until every interior edge is locally Delaunay under the tie-break."""
    tri_list = [list(map(int, t)) for t in tris]
    emap: dict[tuple[int, int], list[int]] = {}
    for ti, (a, b, c) in enumerate(tri_list):
        for x, y in ((a, b), (b, c), (c, a)):
            emap.setdefault((min(x, y), max(x, y)), []).append(ti)
    stack = [e for e, ts in emap.items() if len(ts) == 2]

    def opposite(ti, x, y):
        a, b, c = tri_list[ti]
        for p, q, r in ((a, b, c), (b, c, a), (c, a, b)):
            if (p, q) == (x, y):
                return r, True
            if (p, q) == (y, x):
                return r, False
        raise AssertionError("edge not in triangle")

    guard = 0
    while stack:
        guard += 1
        if guard > 50 * len(tri_list) + 1000:
            raise RuntimeError("Lawson flipping did not terminate")
        e = stack.pop()
        ts = emap.get(e)
        if ts is None or len(ts) != 2:
            continue
        x, y = e
        t1, t2 = ts
        c, fwd = opposite(t1, x, y)
        a, b = (x, y) if fwd else (y, x)  # t1 = (a, b, c) counterclockwise
        d, _ = opposite(t2, a, b)
        if incircle_sos(P[a], P[b], P[c], P[d], [keys[a], keys[b], keys[c], keys[d]]) <= 0:
            continue
        if orient2d(P[c], P[a], P[d]) <= 0 or orient2d(P[d], P[b], P[c]) <= 0:
            continue
        del emap[e]
        tri_list[t1] = [a, d, c]
        tri_list[t2] = [d, b, c]
        for (p, q), old, new in (((a, d), t2, t1), ((b, c), t1, t2)):
            lst = emap[(min(p, q), max(p, q))]
            lst[lst.index(old)] = new
        emap[(min(c, d), max(c, d))] = [t1, t2]
        for p, q in ((a, d), (d, b), (b, c), (c, a)):
            stack.append((min(p, q), max(p, q)))
    return np.asarray(tri_list, dtype=np.int64)


def _planar_delaunay(P: np.ndarray, keys: np.ndarray) -> np.ndarray:
    try:
        dt = _Qhull(P)
    except QhullError as exc:
        raise DegenerateError("points are collinear or otherwise degenerate") from exc
    tris = _ccw(P, dt.simplices.astype(np.int64))
    if len(tris) == 0:
        raise DegenerateError("points are collinear")
    if _non_delaunay_edges(P, tris, keys):
        tris = _lawson(P, tris, keys)
    return tris


def _assemble(points, topology, triangles, tri_offsets) -> Mosaic:
    """Derive edges, offsets and incidences from anchored triangles."""
    T = len(triangles)
    coords = points[triangles] + tri_offsets  # (T, 3, 2)
    hu = np.array([0, 1, 2])
    hv = np.array([1, 2, 0])
    hw = np.array([2, 0, 1])
    U = triangles[:, hu].ravel()
    V = triangles[:, hv].ravel()
    Xu = coords[:, hu].reshape(-1, 2)
    Xv = coords[:, hv].reshape(-1, 2)
    Xw = coords[:, hw].reshape(-1, 2)
    tid = np.repeat(np.arange(T), 3)
    local_w = np.tile(hw, T)
    swap = U > V
    first = np.where(swap, V, U)
    second = np.where(swap, U, V)
    X1 = np.where(swap[:, None], Xv, Xu)
    X2 = np.where(swap[:, None], Xu, Xv)
    shift = -np.rint(X1 - points[first])
    off2 = np.rint(X2 + shift - points[second]).astype(np.int64)
    opp = Xw + shift
    key = np.stack([first, second, off2[:, 0], off2[:, 1]], axis=1)
    uniq, inv = np.unique(key, axis=0, return_inverse=True)
    inv = inv.ravel()
    E = len(uniq)
    edges = uniq[:, :2].copy()
    edge_offsets = uniq[:, 2:].copy()
    edge_tris = np.full((E, 2), -1, dtype=np.int64)
    edge_opp = np.full((E, 2, 2), np.nan)
    order = np.argsort(inv, kind="stable")
    inv_s = inv[order]
    slot = np.zeros(len(inv_s), dtype=np.int64)
    slot[1:] = (inv_s[1:] == inv_s[:-1]).astype(np.int64)
    if np.any(np.bincount(inv, minlength=E) > 2):
        raise DegenerateError("non-manifold edge in triangulation")
    edge_tris[inv_s, slot] = tid[order]
    edge_opp[inv_s, slot] = opp[order]
    tri_edges = np.empty((T, 3), dtype=np.int64)
    tri_edges[tid, local_w] = inv
    return Mosaic(
        points=points,
        topology=topology,
        triangles=triangles,
        tri_offsets=tri_offsets,
        edges=edges,
        edge_offsets=edge_offsets,
        edge_tris=edge_tris,
        edge_opp=edge_opp,
        tri_edges=tri_edges,
    )


def _degenerate_mosaic(P: np.ndarray, topology: Topology) -> Mosaic:
    """Path graph along a line (or fewer than three points): no triangles."""
    n = len(P)
    order = np.lexsort((P[:, 1], P[:, 0])) if n else np.zeros(0, dtype=np.int64)
    edges = np.sort(np.stack([order[:-1], order[1:]], axis=1), axis=1) if n > 1 else np.zeros((0, 2), np.int64)
    E = len(edges)
    return Mosaic(
        points=P,
        topology=topology,
        triangles=np.zeros((0, 3), dtype=np.int64),
        tri_offsets=np.zeros((0, 3, 2), dtype=np.int64),
        edges=edges.astype(np.int64),
        edge_offsets=np.zeros((E, 2), dtype=np.int64),
        edge_tris=np.full((E, 2), -1, dtype=np.int64),
        edge_opp=np.full((E, 2, 2), np.nan),
        tri_edges=np.zeros((0, 3), dtype=np.int64),
    )


def _square(P: np.ndarray) -> Mosaic:
    keys = np.arange(len(P))
    tris = _planar_delaunay(P, keys)
    return _assemble(P, Topology.SQUARE, tris, np.zeros((len(tris), 3, 2), dtype=np.int64))


def _pad(P: np.ndarray, margin: float):
    """Copies of points within ``margin`` of the boundary, translated across it."""
    idx, cid = [np.arange(len(P))], [np.full(len(P), _CENTRAL)]
    for c, (ox, oy) in enumerate(_OFFSETS):
        if c == _CENTRAL:
            continue
        mx = np.ones(len(P), bool) if ox == 0 else (P[:, 0] < margin if ox == 1 else P[:, 0] >= 1 - margin)
        my = np.ones(len(P), bool) if oy == 0 else (P[:, 1] < margin if oy == 1 else P[:, 1] >= 1 - margin)
        sel = np.flatnonzero(mx & my)
        idx.append(sel)
        cid.append(np.full(len(sel), c))
    base = np.concatenate(idx)
    copy = np.concatenate(cid)
    offs = np.asarray(_OFFSETS, dtype=np.int64)[copy]
    return P[base] + offs, base, offs, copy


def _torus(P: np.ndarray, margin: float | None = None, max_edge: float | None = None) -> Mosaic:
    n = len(P)
    if n < 3:
        raise DegenerateError("torus triangulation needs at least 3 points")
    margin = min(1.0, 6.0 / math.sqrt(n)) if margin is None else margin
    while True:
        Q, base, offs, copy = _pad(P, margin)
        keys = base * 9 + copy
        tris = _planar_delaunay(Q, keys)
        tb = base[tris]
        anchor_local = np.argmin(tb, axis=1)
        T = len(tris)
        rows = np.arange(T)
        keep = offs[tris[rows, anchor_local]]
        keep = np.all(keep == 0, axis=1)
        # each base appears once per kept triangle, otherwise the cell wraps on itself
        distinct = (tb[:, 0] != tb[:, 1]) & (tb[:, 1] != tb[:, 2]) & (tb[:, 0] != tb[:, 2])
        sel = np.flatnonzero(keep & distinct)
        kt = tris[sel]
        # rotate so the anchor comes first, preserving orientation
        al = anchor_local[sel]
        rot = np.stack([al, (al + 1) % 3, (al + 2) % 3], axis=1)
        kt = np.take_along_axis(kt, rot, axis=1)
        coords = Q[kt]
        sound = len(kt) == 2 * n
        if sound:
            cc, rr = _circumcircles(coords)
            lo, hi = -margin, 1.0 + margin
            inside = (cc[:, 0] - rr >= lo) & (cc[:, 0] + rr <= hi) & (cc[:, 1] - rr >= lo) & (cc[:, 1] + rr <= hi)
            sound = bool(np.all(inside))
        if sound or margin >= 1.0:
            break
        margin = min(1.0, 2.0 * margin)
    if not sound:
        raise TorusGuardError("periodic Delaunay construction could not be certified")
    triangles = base[kt]
    tri_offsets = offs[kt]
    m = _assemble(P, Topology.TORUS, triangles, tri_offsets)
    if max_edge is not None:
        ec = m.edge_coords()
        longest = float(np.max(np.hypot(*(ec[:, 1] - ec[:, 0]).T)))
        if longest >= max_edge:
            raise TorusGuardError(f"Delaunay edge of length {longest:.3f} >= {max_edge:.3f}")
    if len(m.edges) != 3 * n or np.any(m.edge_tris < 0):
        raise TorusGuardError("periodic triangulation is not a closed surface")
    return m


def _circumcircles(coords: np.ndarray):
    a = coords[:, 0]
    b = coords[:, 1] - a
    c = coords[:, 2] - a
    d = 2.0 * (b[:, 0] * c[:, 1] - b[:, 1] * c[:, 0])
    b2 = (b * b).sum(1)
    c2 = (c * c).sum(1)
    ux = (c[:, 1] * b2 - b[:, 1] * c2) / d
    uy = (b[:, 0] * c2 - c[:, 0] * b2) / d
    return a + np.stack([ux, uy], axis=1), np.hypot(ux, uy)


def triangulate(
    points,
    topology: Topology | str = Topology.SQUARE,
    *,
    allow_degenerate: bool = False,
    max_torus_edge: float | None = None,
) -> Mosaic:
    """Delaunay mosaic of ``points``.

    With ``allow_degenerate`` fewer than three points or a collinear set give
    a path mosaic without triangles instead of raising.  On the torus the
    result is certified by checking that every kept circumdisk lies inside
    the padded cover and that the cells close up into a surface;
    ``max_torus_edge`` adds a length guard on top (e.g. STRICT_TORUS_EDGE).
    """
    topology = Topology.parse(topology)
    P = _as_points(points)
    if topology is Topology.TORUS:
        P = P - np.floor(P)
    if len(np.unique(P, axis=0)) != len(P):
        raise DegenerateError("duplicate points")
    if topology is Topology.SQUARE:
        if len(P) < 3 or _collinear(P):
            if allow_degenerate:
                return _degenerate_mosaic(P, topology)
            raise DegenerateError("need at least 3 non-collinear points")
        return _square(P)
    return _torus(P, max_edge=max_torus_edge)


def _collinear(P: np.ndarray) -> bool:
    a, b = P[0], P[1]
    rest = P[2:]
    o = orient2d_array(np.repeat(a[None], len(rest), 0), np.repeat(b[None], len(rest), 0), rest)
    return bool(np.all(o == 0))


def validate(mosaic: Mosaic) -> bool:
    """Brute-force empty-circle check of every triangle against every vertex."""
    T = len(mosaic.triangles)
    if T == 0:
        return True
    P = mosaic.points
    n = len(P)
    torus = mosaic.topology is Topology.TORUS
    if torus:
        cand = np.concatenate([P + np.asarray(o) for o in _OFFSETS])
        cbase = np.tile(np.arange(n), 9)
        ccode = np.repeat(np.arange(9), n)
    else:
        cand, cbase, ccode = P, np.arange(n), np.full(n, _CENTRAL)
    ckey = cbase * 9 + ccode
    coords = mosaic.tri_coords()
    if np.any(orient2d_array(coords[:, 0], coords[:, 1], coords[:, 2]) <= 0):
        return False
    tkeys = mosaic.triangles * 9 + _offset_code(mosaic.tri_offsets)
    cc, rr = _circumcircles(coords)
    ab = coords[:, 1] - coords[:, 0]
    ac = coords[:, 2] - coords[:, 0]
    area2 = np.abs(ab[:, 0] * ac[:, 1] - ab[:, 1] * ac[:, 0])
    lens = np.hypot(*ab.T) * np.hypot(*ac.T) * np.hypot(*(coords[:, 2] - coords[:, 1]).T)
    skinny = area2 < 1e-6 * lens / np.maximum(rr, 1e-300)
    chunk = max(1, 2_000_000 // max(len(cand), 1))
    for s in range(0, T, chunk):
        sl = slice(s, s + chunk)
        d2 = ((cand[None, :, :] - cc[sl, None, :]) ** 2).sum(-1)
        near = d2 <= (rr[sl, None] * (1 + 1e-6) + 1e-12) ** 2
        near |= skinny[sl, None]
        for ti, ci in zip(*np.nonzero(near)):
            t = s + ti
            if ckey[ci] in tkeys[t]:
                continue
            a, b, c = coords[t]
            if incircle_sos(a, b, c, cand[ci], [tkeys[t, 0], tkeys[t, 1], tkeys[t, 2], ckey[ci]]) > 0:
                return False
    if torus:
        return len(mosaic.triangles) == 2 * n and len(mosaic.edges) == 3 * n
    return True


def _offset_code(offs: np.ndarray) -> np.ndarray:
    return (offs[..., 0] + 1) * 3 + (offs[..., 1] + 1)


def dumps(mosaic: Mosaic) -> str:
    """Line-based text form: one cell per line (dimension, vertex indices, wrap offsets)."""
    out = io.StringIO()
    out.write(f"# mosaic {mosaic.topology.value} {mosaic.n}\n")
    for i, (x, y) in enumerate(mosaic.points):
        out.write(f"0 {i} {float(x)!r} {float(y)!r}\n")
    for (u, v), (ox, oy) in zip(mosaic.edges, mosaic.edge_offsets):
        out.write(f"1 {u} {v} {ox} {oy}\n")
    for t, o in zip(mosaic.triangles, mosaic.tri_offsets):
        out.write("2 {} {} {} {} {} {} {}\n".format(*t, o[1, 0], o[1, 1], o[2, 0], o[2, 1]))
    return out.getvalue()


def loads(text: str) -> Mosaic:
    pts, tris, toffs = [], [], []
    topology = Topology.SQUARE
    for line in text.splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            topology = Topology.parse(line.split()[2])
            continue
        f = line.split()
        dim = int(f[0])
        if dim == 0:
            pts.append((float(f[2]), float(f[3])))
        elif dim == 2:
            v = list(map(int, f[1:4]))
            o = list(map(int, f[4:8]))
            tris.append(v)
            toffs.append([(0, 0), (o[0], o[1]), (o[2], o[3])])
    P = np.asarray(pts, dtype=float).reshape(-1, 2)
    if not tris:
        return _degenerate_mosaic(P, topology)
    return _assemble(P, topology, np.asarray(tris, dtype=np.int64), np.asarray(toffs, dtype=np.int64))
