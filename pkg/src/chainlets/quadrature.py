"""Quadrature nodes for cells: tensor Gauss on boxes, Duffy-mapped Gauss on simplices.

Base rules are polynomial-exact well past degree 3 (tensor GL4 on cubes; the
Duffy transform keeps simplex integrands polynomial, with GL4 for k <= 2 and
GL6 for k = 3).  Adaptive bisection refines whatever the base rule misses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product as iter_product

import numpy as np

from .chains import Cube, Simplex

MAX_DEPTH = 20


class QuadratureError(RuntimeError):
    """Raised when adaptive subdivision fails to converge; carries the partial value."""

    def __init__(self, message: str, partial: float):
        super().__init__(message)
        self.partial = partial


@lru_cache(maxsize=None)
def _gauss01(q: int) -> tuple[tuple, tuple]:
    x, w = np.polynomial.legendre.leggauss(q)
    return tuple((x + 1.0) / 2.0), tuple(w / 2.0)


@lru_cache(maxsize=None)
def _tensor01(k: int, q: int) -> tuple[tuple, tuple]:
    """Nodes/weights on [0,1]^k, weights summing to 1; k = 0 is a single point."""
    if k == 0:
        return ((),), (1.0,)
    x, w = _gauss01(q)
    pts = []
    wts = []
    for combo in iter_product(range(q), repeat=k):
        pts.append(tuple(x[i] for i in combo))
        wts.append(math.prod(w[i] for i in combo))
    return tuple(pts), tuple(wts)


@lru_cache(maxsize=None)
def _duffy_simplex(k: int) -> tuple[tuple, tuple]:
    """Barycentric-free nodes on the reference simplex {t_i >= 0, sum <= 1}.

    Returns reference coordinates (m, k) and weights summing to 1/k!.
    """
    q = 4 if k <= 2 else 6
    upts, uwts = _tensor01(k, q)
    pts = []
    wts = []
    for u, w in zip(upts, uwts):
        t = []
        jac = 1.0
        rem = 1.0
        for i in range(k):
            t.append(u[i] * rem)
            jac *= rem
            rem *= 1.0 - u[i]
        pts.append(tuple(t))
        wts.append(w * jac)
    return tuple(pts), tuple(wts)


@dataclass(frozen=True)
class QuadCell:
    """Internal integration domain: a flat cell with per-axis extents.

    kind 's': simplex with vertices; kind 'b': box with center, an
    orthonormal frame (rows) and per-axis side lengths.  Orientation stays in
    the chain coefficient / direction, not here; weights are positive.
    """

    kind: str
    data: tuple

    @staticmethod
    def from_cell(cell) -> "QuadCell":
        if isinstance(cell, Simplex):
            return QuadCell("s", cell.vertices)
        if isinstance(cell, Cube):
            F = tuple(tuple(r) for r in cell.frame_matrix())
            sides = (cell.edge,) * cell.k
            return QuadCell("b", (cell.center, F, sides))
        raise TypeError(f"cannot integrate over {type(cell).__name__}")

    @property
    def k(self) -> int:
        return len(self.data) - 1 if self.kind == "s" else len(self.data[2])

    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        """(points (m, n), weights (m,)) with weights summing to the measure."""
        if self.kind == "s":
            verts = np.array(self.data)
            k = len(verts) - 1
            v0 = verts[0]
            E = verts[1:] - v0
            g = float(np.linalg.det(E @ E.T))
            measure = math.sqrt(max(g, 0.0)) / math.factorial(k)
            ref, rw = _duffy_simplex(k)
            ref = np.array(ref)
            pts = v0 + ref @ E
            wts = np.array(rw) * (measure * math.factorial(k))
            return pts, wts
        center, frame, sides = self.data
        c = np.array(center)
        k = len(sides)
        if k == 0:
            return c[None, :], np.array([1.0])
        F = np.array(frame)
        upts, uwts = _tensor01(k, 4)
        U = np.array(upts) - 0.5
        pts = c + (U * np.array(sides)) @ F
        wts = np.array(uwts) * math.prod(sides)
        return pts, wts

    def split(self) -> tuple["QuadCell", "QuadCell"]:
        if self.kind == "s":
            verts = np.array(self.data)
            m = len(verts)
            best, bi, bj = -1.0, 0, 1
            for i in range(m):
                for j in range(i + 1, m):
                    d = float(np.linalg.norm(verts[i] - verts[j]))
                    if d > best:
                        best, bi, bj = d, i, j
            mid = (verts[bi] + verts[bj]) / 2.0
            va = verts.copy()
            va[bj] = mid
            vb = verts.copy()
            vb[bi] = mid
            to_t = lambda V: tuple(tuple(row) for row in V)
            return QuadCell("s", to_t(va)), QuadCell("s", to_t(vb))
        center, frame, sides = self.data
        j = int(np.argmax(sides))
        c = np.array(center)
        F = np.array(frame)
        half = sides[j] / 2.0
        new_sides = tuple(s if i != j else half for i, s in enumerate(sides))
        ca = c - (half / 2.0) * F[j]
        cb = c + (half / 2.0) * F[j]
        return (
            QuadCell("b", (tuple(ca), frame, new_sides)),
            QuadCell("b", (tuple(cb), frame, new_sides)),
        )


def adaptive_integrate(fn, cell: QuadCell, tol: float) -> float:
    """Integrate a vectorized point function over the cell to absolute tol.

    fn maps an (m, n) array to (m,) values.  Compares the base rule against
    the two-piece refinement and bisects the worst cells recursively.
    """

    def rule(qc: QuadCell) -> float:
        pts, wts = qc.nodes()
        return float(np.dot(fn(pts), wts))

    def recurse(qc: QuadCell, budget: float, depth: int) -> float:
        coarse = rule(qc)
        a, b = qc.split()
        fine = rule(a) + rule(b)
        err = abs(fine - coarse)
        if err <= max(budget, 1e-15 * (1.0 + abs(fine))):
            return fine
        if depth >= MAX_DEPTH:
            raise QuadratureError(
                f"quadrature did not converge within depth {MAX_DEPTH}", fine
            )
        return recurse(a, budget / 2.0, depth + 1) + recurse(b, budget / 2.0, depth + 1)

    if cell.k == 0:
        pts, wts = cell.nodes()
        return float(np.dot(fn(pts), wts))
    return recurse(cell, tol, 0)
