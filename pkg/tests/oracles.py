"""Independent brute-force references used by the tests.

Everything here works from first principles on tiny inputs: exact rational
arithmetic for the Delaunay complex and its radius function, ranks of
boundary matrices over GF(2) for persistence, a grid search for enclosing
circles and a dense all-pairs construction for the lunar merge tree.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np

# ---------------------------------------------------------------------------
# exact Delaunay complex and radius function (unit square only)


def _F(p):
    return (Fraction(p[0]), Fraction(p[1]))


def _orient(a, b, c) -> Fraction:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _circumcenter(a, b, c):
    bx, by = b[0] - a[0], b[1] - a[1]
    cx, cy = c[0] - a[0], c[1] - a[1]
    d = 2 * (bx * cy - by * cx)
    b2, c2 = bx * bx + by * by, cx * cx + cy * cy
    ux = (cy * b2 - by * c2) / d
    uy = (bx * c2 - cx * b2) / d
    return (a[0] + ux, a[1] + uy), ux * ux + uy * uy


def _d2(p, q) -> Fraction:
    return (p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2


def brute_delaunay(points):
    """Triangles whose circumcircle has no other point inside or on it."""
    P = [_F(p) for p in points]
    n = len(P)
    tris = []
    for i, j, k in itertools.combinations(range(n), 3):
        if _orient(P[i], P[j], P[k]) == 0:
            continue
        c, r2 = _circumcenter(P[i], P[j], P[k])
        if all(_d2(c, P[m]) > r2 for m in range(n) if m not in (i, j, k)):
            tris.append((i, j, k))
    return tris


def _edge_value2(P, a, b) -> Fraction:
    """Squared radius of the smallest circle through a and b with no point inside.

    The center moves along the bisector, m + t * w; every other point cuts
    the admissible t to a half-line, and the answer is the admissible t of
    least absolute value.
    """
    m = ((P[a][0] + P[b][0]) / 2, (P[a][1] + P[b][1]) / 2)
    w = (P[a][1] - P[b][1], P[b][0] - P[a][0])
    base = _d2(m, P[a])
    lo, hi = None, None
    for k, p in enumerate(P):
        if k in (a, b):
            continue
        g = 2 * ((m[0] - p[0]) * w[0] + (m[1] - p[1]) * w[1])
        h = base - _d2(m, p)
        if g == 0:
            assert h < 0, "edge is not Delaunay"
            continue
        bound = h / g
        if g > 0:
            lo = bound if lo is None else max(lo, bound)
        else:
            hi = bound if hi is None else min(hi, bound)
    # an obstructing point on the diametric circle counts as inside
    if (lo is None or lo < 0) and (hi is None or hi > 0):
        t = Fraction(0)
    elif lo is not None and lo >= 0:
        t = lo
    else:
        t = hi
    return base + t * t * (w[0] ** 2 + w[1] ** 2)


def brute_filtration(points):
    """Cells with exact squared values, sorted by (value, dim, vertices).

    Each cell is (value2, dim, vertex tuple).
    """
    P = [_F(p) for p in points]
    n = len(P)
    tris = brute_delaunay(points)
    if tris:
        edges = sorted({tuple(sorted(e)) for t in tris for e in itertools.combinations(t, 2)})
    else:
        # collinear or tiny: the path through the sorted points
        order = sorted(range(n), key=lambda i: (P[i][0], P[i][1]))
        edges = [tuple(sorted(e)) for e in zip(order, order[1:])]
    cells = [(Fraction(0), 0, (i,)) for i in range(n)]
    if tris:
        cells += [(_edge_value2(P, a, b), 1, (a, b)) for a, b in edges]
    else:
        cells += [(_d2(P[a], P[b]) / 4, 1, (a, b)) for a, b in edges]
    for t in tris:
        _, r2 = _circumcenter(P[t[0]], P[t[1]], P[t[2]])
        cells.append((r2, 2, tuple(sorted(t))))
    cells.sort()
    return cells


# ---------------------------------------------------------------------------
# persistence from ranks of boundary matrices


def _rank_gf2(rows) -> int:
    """Rank over GF(2) of vectors given as int bitmasks."""
    basis: dict[int, int] = {}
    r = 0
    for v in rows:
        while v:
            top = v.bit_length() - 1
            if top in basis:
                v ^= basis[top]
            else:
                basis[top] = v
                r += 1
                break
    return r


def rank_persistence(cells):
    """Pairs of filtration positions (birth, death) and essential births, per degree.

    Uses the persistent Betti numbers beta^{i,j} = dim Z_p(K_i) - dim(Z_p(K_i) & B_p(K_j))
    and the inclusion-exclusion formula for pair multiplicities.
    """
    N = len(cells)
    pos = {c[2]: i for i, c in enumerate(cells)}
    bnd = []
    for _, dim, verts in cells:
        mask = 0
        if dim:
            for face in itertools.combinations(verts, dim):
                mask |= 1 << pos[face]
        bnd.append(mask)

    def betti(p: int, i: int, j: int) -> int:
        # K_i is the prefix of length i + 1
        if i < 0:
            return 0
        cols_p = [bnd[k] for k in range(i + 1) if cells[k][1] == p]
        z = len(cols_p) - _rank_gf2(cols_p)
        cols = [bnd[k] for k in range(j + 1) if cells[k][1] == p + 1]
        outside = ~((1 << (i + 1)) - 1)
        inter = _rank_gf2(cols) - _rank_gf2([c & outside for c in cols])
        return z - inter

    out = {}
    for p in (0, 1):
        births = [i for i in range(N) if cells[i][1] == p]
        deaths = [j for j in range(N) if cells[j][1] == p + 1]
        pairs, ess = [], []
        for i in births:
            for j in deaths:
                if j <= i:
                    continue
                mu = betti(p, i, j - 1) - betti(p, i, j) - betti(p, i - 1, j - 1) + betti(p, i - 1, j)
                pairs += [(i, j)] * mu
            mu = betti(p, i, N - 1) - betti(p, i - 1, N - 1)
            ess += [i] * mu
        out[p] = (pairs, ess)
    return out


# ---------------------------------------------------------------------------
# enclosing circles and spanning trees


def grid_sec_radius(points, half_width: float = 3.0, steps: int = 601) -> float:
    """Minimax radius by searching candidate centers on a grid around the centroid."""
    P = np.asarray(points, dtype=float)
    c0 = P.mean(axis=0)
    best = math.inf
    center = c0
    span = half_width
    for _ in range(4):
        g = np.linspace(-span, span, steps)
        X, Y = np.meshgrid(center[0] + g, center[1] + g)
        C = np.stack([X.ravel(), Y.ravel()], axis=1)
        r = np.sqrt(((C[:, None, :] - P[None, :, :]) ** 2).sum(-1)).max(axis=1)
        k = int(np.argmin(r))
        best, center = min(best, float(r[k])), C[k]
        span = 4 * span / (steps - 1)
    return best


def brute_sec_radius(points) -> float:
    """Smallest radius among circles on 2 or 3 points that enclose all points."""
    P = [tuple(map(float, p)) for p in points]
    if len(P) == 1:
        return 0.0
    best = math.inf
    cands = []
    for a, b in itertools.combinations(P, 2):
        cands.append((((a[0] + b[0]) / 2, (a[1] + b[1]) / 2), math.dist(a, b) / 2))
    for a, b, c in itertools.combinations(P, 3):
        d = 2 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
        if abs(d) < 1e-15:
            continue
        (cx, cy), r2 = _circumcenter(_F(a), _F(b), _F(c))
        cands.append(((float(cx), float(cy)), math.sqrt(float(r2))))
    for c, r in cands:
        if r < best and all(math.dist(c, p) <= r * (1 + 1e-12) + 1e-15 for p in P):
            best = r
    return best


def spanning_tree_total(points, metric=None) -> float:
    """Total length of a minimum spanning tree by Prim on the complete graph."""
    P = np.asarray(points, dtype=float)
    n = len(P)
    if n < 2:
        return 0.0
    if metric is None:
        D = np.sqrt(((P[:, None] - P[None]) ** 2).sum(-1))
    else:
        D = metric(P)
    inside = np.zeros(n, bool)
    inside[0] = True
    best = D[0].copy()
    total = []
    for _ in range(n - 1):
        best[inside] = np.inf
        k = int(np.argmin(best))
        total.append(best[k])
        inside[k] = True
        best = np.minimum(best, D[k])
    return math.fsum(total)


def torus_metric(P):
    d = P[:, None] - P[None]
    d -= np.floor(d + 0.5)
    return np.sqrt((d**2).sum(-1))


def brute_lunar_cost(P0, P1) -> float:
    """Lunar cost on the square from all lunes and all lune pairs.

    Every bichromatic pair is a lune born at half its length; two lunes meet
    at the radius of the smallest circle enclosing their four endpoints.
    The elder rule pairs each merge with the younger component's birth.
    """
    lunes = [(a, b) for a in range(len(P0)) for b in range(len(P1))]
    pts = [(P0[a], P1[b]) for a, b in lunes]
    wake = [math.dist(p, q) / 2 for p, q in pts]
    events = []
    for i, j in itertools.combinations(range(len(lunes)), 2):
        events.append((brute_sec_radius([*pts[i], *pts[j]]), i, j))
    events.sort()
    parent = list(range(len(lunes)))
    key = [(wake[i], i) for i in range(len(lunes))]

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    total = []
    for r, i, j in events:
        ri, rj = find(i), find(j)
        if ri == rj:
            continue
        young, old = (ri, rj) if key[ri] > key[rj] else (rj, ri)
        parent[young] = old
        total += [2 * r, -2 * key[young][0]]
    return math.fsum(total)
