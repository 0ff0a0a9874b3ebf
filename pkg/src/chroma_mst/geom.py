"""Planar primitives with exact decisions.

Predicates are evaluated in floating point first and fall back to rational
arithmetic when the certified error bound does not separate the result from
zero.  Constructions (circumcenters, radii) are plain floating point.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

__all__ = [
    "Point2",
    "Circle",
    "Topology",
    "DegenerateError",
    "orient2d",
    "incircle",
    "incircle_sos",
    "circumcircle",
    "smallest_enclosing_circle",
    "torus_displacement",
    "torus_distance",
    "orient2d_array",
    "incircle_array",
]

_EPS = np.finfo(float).eps / 2.0  # unit roundoff
_CCW_BOUND = (3.0 + 16.0 * _EPS) * _EPS
_ICC_BOUND = (10.0 + 96.0 * _EPS) * _EPS


class DegenerateError(ValueError):
    """Raised when an operation needs non-collinear input and does not get it."""


class Point2(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class Circle:
    center: Point2
    radius: float

    def contains(self, p: Sequence[float], tol: float = 1e-12) -> bool:
        return math.hypot(p[0] - self.center[0], p[1] - self.center[1]) <= self.radius + tol


class Topology(str, enum.Enum):
    SQUARE = "square"
    TORUS = "torus"

    @classmethod
    def parse(cls, value: "Topology | str") -> "Topology":
        if isinstance(value, Topology):
            return value
        v = str(value).lower()
        if v in ("square", "unitsquare", "unit_square"):
            return cls.SQUARE
        if v == "torus":
            return cls.TORUS
        raise ValueError(f"unknown topology {value!r}")


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def _orient_exact(a, b, c) -> int:
    ax, ay = Fraction(a[0]), Fraction(a[1])
    det = (Fraction(b[0]) - ax) * (Fraction(c[1]) - ay) - (Fraction(b[1]) - ay) * (Fraction(c[0]) - ax)
    return _sign(det)


def orient2d(a, b, c) -> int:
    """Sign of the signed area of triangle abc (+1 counterclockwise)."""
    detleft = (b[0] - a[0]) * (c[1] - a[1])
    detright = (b[1] - a[1]) * (c[0] - a[0])
    det = detleft - detright
    bound = _CCW_BOUND * (abs(detleft) + abs(detright))
    if det > bound:
        return 1
    if -det > bound:
        return -1
    return _orient_exact(a, b, c)


def _incircle_exact(a, b, c, d) -> int:
    dx, dy = Fraction(d[0]), Fraction(d[1])
    rows = []
    for p in (a, b, c):
        px, py = Fraction(p[0]) - dx, Fraction(p[1]) - dy
        rows.append((px, py, px * px + py * py))
    (a0, a1, a2), (b0, b1, b2), (c0, c1, c2) = rows
    det = a2 * (b0 * c1 - b1 * c0) - b2 * (a0 * c1 - a1 * c0) + c2 * (a0 * b1 - a1 * b0)
    return _sign(det)


def _incircle_filtered(a, b, c, d) -> int:
    adx, ady = a[0] - d[0], a[1] - d[1]
    bdx, bdy = b[0] - d[0], b[1] - d[1]
    cdx, cdy = c[0] - d[0], c[1] - d[1]
    bdxcdy, cdxbdy = bdx * cdy, cdx * bdy
    cdxady, adxcdy = cdx * ady, adx * cdy
    adxbdy, bdxady = adx * bdy, bdx * ady
    alift = adx * adx + ady * ady
    blift = bdx * bdx + bdy * bdy
    clift = cdx * cdx + cdy * cdy
    det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady)
    permanent = (
        (abs(bdxcdy) + abs(cdxbdy)) * alift
        + (abs(cdxady) + abs(adxcdy)) * blift
        + (abs(adxbdy) + abs(bdxady)) * clift
    )
    bound = _ICC_BOUND * permanent
    if det > bound:
        return 1
    if -det > bound:
        return -1
    return _incircle_exact(a, b, c, d)


def incircle(a, b, c, d) -> int:
    """+1 if d lies strictly inside the circle through a, b, c (abc counterclockwise).

    The sign flips when abc is clockwise.  Raises DegenerateError if abc is
    collinear.
    """
    if orient2d(a, b, c) == 0:
        raise DegenerateError("incircle: a, b, c are collinear")
    return _incircle_filtered(a, b, c, d)


def incircle_sos(a, b, c, d, keys: Sequence) -> int:
    """incircle with a symbolic tie-break; never returns 0 for distinct points.

    The lifted coordinate x^2 + y^2 of each point is raised by an
    infinitesimal that shrinks with the point's key, so the smallest key
    dominates.  This is a genuine perturbation, so the induced triangulation
    is well defined.
    """
    s = _incircle_filtered(a, b, c, d)
    if s != 0:
        return s
    order = sorted(range(4), key=lambda i: keys[i])
    for i in order:
        if i == 0:
            t = orient2d(d, b, c)
        elif i == 1:
            t = orient2d(a, d, c)
        elif i == 2:
            t = orient2d(a, b, d)
        else:
            t = -orient2d(a, b, c)
        if t != 0:
            # t is the derivative of the determinant in the lift of point i
            return t
    return 0


def orient2d_array(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Vectorised orient2d over rows of (m, 2) arrays."""
    detleft = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1])
    detright = (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])
    det = detleft - detright
    bound = _CCW_BOUND * (np.abs(detleft) + np.abs(detright))
    out = np.where(det > bound, 1, np.where(-det > bound, -1, 0)).astype(np.int8)
    for i in np.flatnonzero(out == 0):
        out[i] = _orient_exact(a[i], b[i], c[i])
    return out


def incircle_array(a: np.ndarray, b: np.ndarray, c: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Vectorised filtered incircle; exact fallback per uncertain row, no tie-break."""
    adx, ady = a[:, 0] - d[:, 0], a[:, 1] - d[:, 1]
    bdx, bdy = b[:, 0] - d[:, 0], b[:, 1] - d[:, 1]
    cdx, cdy = c[:, 0] - d[:, 0], c[:, 1] - d[:, 1]
    bdxcdy, cdxbdy = bdx * cdy, cdx * bdy
    cdxady, adxcdy = cdx * ady, adx * cdy
    adxbdy, bdxady = adx * bdy, bdx * ady
    alift = adx * adx + ady * ady
    blift = bdx * bdx + bdy * bdy
    clift = cdx * cdx + cdy * cdy
    det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady)
    permanent = (
        (np.abs(bdxcdy) + np.abs(cdxbdy)) * alift
        + (np.abs(cdxady) + np.abs(adxcdy)) * blift
        + (np.abs(adxbdy) + np.abs(bdxady)) * clift
    )
    bound = _ICC_BOUND * permanent
    out = np.where(det > bound, 1, np.where(-det > bound, -1, 0)).astype(np.int8)
    for i in np.flatnonzero(out == 0):
        out[i] = _incircle_exact(a[i], b[i], c[i], d[i])
    return out


def circumcircle(a, b, c) -> Circle:
    """The unique circle through three non-collinear points."""
    if orient2d(a, b, c) == 0:
        raise DegenerateError("circumcircle of collinear points")
    bx, by = b[0] - a[0], b[1] - a[1]
    cx, cy = c[0] - a[0], c[1] - a[1]
    d = 2.0 * (bx * cy - by * cx)
    b2 = bx * bx + by * by
    c2 = cx * cx + cy * cy
    ux = (cy * b2 - by * c2) / d
    uy = (bx * c2 - cx * b2) / d
    center = Point2(a[0] + ux, a[1] + uy)
    return Circle(center, math.hypot(ux, uy))


def _diametric(p, q) -> Circle:
    return Circle(Point2((p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0), math.hypot(p[0] - q[0], p[1] - q[1]) / 2.0)


def _circle_from(support: list) -> Circle:
    if len(support) == 1:
        return Circle(Point2(*support[0]), 0.0)
    if len(support) == 2:
        return _diametric(*support)
    a, b, c = support
    # an obtuse support triangle is enclosed by the diametric circle of its long side
    for p, q, r in ((a, b, c), (b, c, a), (c, a, b)):
        circ = _diametric(p, q)
        if circ.contains(r, tol=0.0):
            return circ
    return circumcircle(a, b, c)


def smallest_enclosing_circle(points: Sequence, seed: int = 0) -> Circle:
    """Minimum-radius circle containing every point (Welzl, iterative form).

    Closed containment is checked with a 1e-12 slack.
    """
    pts = [tuple(map(float, p)) for p in points]
    if not pts:
        raise ValueError("smallest_enclosing_circle of an empty set")
    random.Random(seed).shuffle(pts)
    tol = 1e-12
    circ = Circle(Point2(*pts[0]), 0.0)
    for i, p in enumerate(pts):
        if circ.contains(p, tol):
            continue
        circ = Circle(Point2(*p), 0.0)
        for j in range(i):
            q = pts[j]
            if circ.contains(q, tol):
                continue
            circ = _diametric(p, q)
            for k in range(j):
                r = pts[k]
                if circ.contains(r, tol):
                    continue
                if orient2d(p, q, r) == 0:
                    # collinear: the extreme pair spans the circle
                    far = max(((p, q), (p, r), (q, r)), key=lambda s: math.dist(*s))
                    circ = _diametric(*far)
                else:
                    circ = _circle_from([p, q, r])
    return circ


def torus_displacement(a, b) -> tuple[float, float]:
    """Representative of b - a on the unit torus with each coordinate in [-1/2, 1/2)."""
    dx = b[0] - a[0]
    dy = b[1] - a[1]
    dx -= math.floor(dx + 0.5)
    dy -= math.floor(dy + 0.5)
    return dx, dy


def torus_distance(a, b) -> float:
    return math.hypot(*torus_displacement(a, b))


def torus_displacement_array(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
    return d - np.floor(d + 0.5)
