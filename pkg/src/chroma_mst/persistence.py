"""Degree-0 and degree-1 persistence of the radius filtration."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .filtration import FilteredMosaic, edge_order, triangle_order

__all__ = [
    "Diagram",
    "SpanningTree",
    "UnionFind",
    "emst",
    "h0_diagram",
    "h1_diagram",
    "one_norm",
    "gabriel_graph",
    "write_diagrams_csv",
]


class UnionFind:
    """Disjoint sets over 0..n-1 with path halving and union by size."""

    def __init__(self, n: int) -> None:
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, x: int, y: int) -> int:
        """Merge the sets of x and y; returns the surviving root."""
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return rx
        if self.size[rx] < self.size[ry]:
            rx, ry = ry, rx
        self.parent[ry] = rx
        self.size[rx] += self.size[ry]
        return rx


@dataclass
class Diagram:
    degree: int
    pairs: np.ndarray  # (k, 2) birth, death
    essential: int = 0
    essential_births: list[float] = field(default_factory=list)
    cells: np.ndarray | None = None  # (k, 2) indices of the birth and death cells

    def __len__(self) -> int:
        return len(self.pairs)

    def positive(self) -> np.ndarray:
        """Pairs with death strictly after birth."""
        p = self.pairs
        return p[p[:, 1] > p[:, 0]] if len(p) else p


@dataclass
class SpanningTree:
    edges: np.ndarray
    total_length: float


def _edge_lengths(fm: FilteredMosaic, idx: np.ndarray) -> np.ndarray:
    ec = fm.mosaic.edge_coords()[idx]
    d = ec[:, 1] - ec[:, 0]
    return np.hypot(d[:, 0], d[:, 1])


def _kruskal(fm: FilteredMosaic) -> list[int]:
    m = fm.mosaic
    uf = UnionFind(m.n)
    tree: list[int] = []
    edges = m.edges
    for e in edge_order(fm).tolist():
        u, v = int(edges[e, 0]), int(edges[e, 1])
        if uf.find(u) != uf.find(v):
            uf.union(u, v)
            tree.append(e)
            if len(tree) == m.n - 1:
                break
    return tree


def emst(fm: FilteredMosaic) -> SpanningTree:
    """Euclidean minimum spanning tree: the death-giving edges of the filtration."""
    tree = np.asarray(_kruskal(fm), dtype=np.int64)
    return SpanningTree(edges=tree, total_length=math.fsum(_edge_lengths(fm, tree)))


def h0_diagram(fm: FilteredMosaic, tree: SpanningTree | None = None) -> Diagram:
    tree = emst(fm) if tree is None else tree
    deaths = fm.edge_value[tree.edges]
    pairs = np.stack([np.zeros(len(deaths)), deaths], axis=1) if len(deaths) else np.zeros((0, 2))
    return Diagram(
        degree=0,
        pairs=pairs,
        essential=1 if fm.mosaic.n else 0,
        essential_births=[0.0] if fm.mosaic.n else [],
        cells=np.stack([np.full(len(deaths), -1), tree.edges], axis=1) if len(deaths) else np.zeros((0, 2), np.int64),
    )


def _h1_dual(fm: FilteredMosaic):
    """Pairs (edge, triangle) from union-find on the dual graph in reverse order."""
    m = fm.mosaic
    T = len(m.triangles)
    outer = T  # the unbounded face, present only in the square
    trank = np.empty(T + 1, dtype=np.int64)
    trank[triangle_order(fm)] = np.arange(T)
    trank[outer] = T  # older than everything in reverse order
    uf = UnionFind(T + 1)
    eldest = list(range(T + 1))
    pairs = []
    edge_tris = m.edge_tris
    for e in edge_order(fm)[::-1].tolist():
        t1, t2 = int(edge_tris[e, 0]), int(edge_tris[e, 1])
        t1 = outer if t1 < 0 else t1
        t2 = outer if t2 < 0 else t2
        r1, r2 = uf.find(t1), uf.find(t2)
        if r1 == r2:
            continue
        o1, o2 = eldest[r1], eldest[r2]
        young, old = (o1, o2) if trank[o1] < trank[o2] else (o2, o1)
        pairs.append((e, young))
        eldest[uf.union(r1, r2)] = old
    return pairs


def _h1_reduction(fm: FilteredMosaic):
    """Pairs (edge, triangle) by column reduction over the 2-element field."""
    m = fm.mosaic
    eo = edge_order(fm)
    erank = np.empty(len(eo), dtype=np.int64)
    erank[eo] = np.arange(len(eo))
    tri_edges = erank[m.tri_edges]
    low_owner: dict[int, set[int]] = {}
    pairs = []
    for t in triangle_order(fm).tolist():
        col = set(tri_edges[t].tolist())
        while col:
            low = max(col)
            other = low_owner.get(low)
            if other is None:
                low_owner[low] = col
                pairs.append((int(eo[low]), t))
                break
            col ^= other
    return pairs


def h1_diagram(fm: FilteredMosaic, method: str = "auto") -> Diagram:
    """Loops born by critical edges and killed by triangles.

    ``method`` is ``"reduction"`` (boundary-matrix column reduction),
    ``"dual"`` (union-find on the dual graph) or ``"auto"`` (dual).
    """
    if method == "auto":
        method = "dual"
    if method == "dual":
        cell_pairs = _h1_dual(fm)
    elif method == "reduction":
        cell_pairs = _h1_reduction(fm)
    else:
        raise ValueError(f"unknown method {method!r}")
    m = fm.mosaic
    if cell_pairs:
        cells = np.asarray(cell_pairs, dtype=np.int64)
        cells = cells[np.lexsort((cells[:, 1], cells[:, 0]))]
        pairs = np.stack([fm.edge_value[cells[:, 0]], fm.tri_value[cells[:, 1]]], axis=1)
    else:
        cells, pairs = np.zeros((0, 2), np.int64), np.zeros((0, 2))
    positive_edges = len(m.edges) - (m.n - 1) if m.n else 0
    essential = positive_edges - len(cells)
    paired = set(cells[:, 0].tolist())
    ess_births = []
    if essential:
        tree = set(_kruskal(fm))
        ess_births = sorted(
            float(fm.edge_value[e]) for e in range(len(m.edges)) if e not in tree and e not in paired
        )
    return Diagram(degree=1, pairs=pairs, essential=essential, essential_births=ess_births, cells=cells)


def one_norm(d: Diagram) -> float:
    """Sum of persistence over finite pairs; essential classes contribute nothing."""
    if len(d.pairs) == 0:
        return 0.0
    return math.fsum(d.pairs[:, 1]) - math.fsum(d.pairs[:, 0]) if d.degree else math.fsum(d.pairs[:, 1])


def gabriel_graph(fm: FilteredMosaic) -> np.ndarray:
    """Indices of all critical edges."""
    return np.flatnonzero(fm.edge_critical)


def write_diagrams_csv(diagrams, path_or_file) -> None:
    """Rows ``degree,birth,death``; essential classes as ``degree,birth,inf``."""
    own = isinstance(path_or_file, str) or hasattr(path_or_file, "__fspath__")
    f = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        w = csv.writer(f)
        w.writerow(["degree", "birth", "death"])
        for d in diagrams:
            for b, dd in d.pairs.tolist():
                w.writerow([d.degree, repr(b), repr(dd)])
            for b in d.essential_births:
                w.writerow([d.degree, repr(b), "inf"])
    finally:
        if own:
            f.close()
