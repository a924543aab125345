"""Oriented k-cells (simplices and cubes), polyhedral chains, and chain operators.

Dyadic axis-aligned cubes are the exact backbone: float64 coordinates of a
dyadic cube (edge 2^-l, any center) are themselves integer-mantissa dyadic
rationals, so equality, cancellation and grid refinement are exact without a
separate rational type.  Everything else lives in plain float64 with stated
tolerances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product as iter_product
from typing import Iterable, Sequence, Union

import numpy as np

from .exterior import (
    KDirection,
    KVector,
    frame_to_kvector,
    mass_kvector,
)


def dyadic_level(edge: float) -> int | None:
    """l with edge = 2**-l (l may be negative), or None."""
    if edge <= 0.0 or not math.isfinite(edge):
        return None
    m, e = math.frexp(edge)
    return (1 - e) if m == 0.5 else None


@dataclass(frozen=True)
class Simplex:
    """Oriented k-simplex (k >= 1) given by its ordered vertex tuple."""

    vertices: tuple

    def __post_init__(self):
        verts = tuple(tuple(float(x) for x in v) for v in self.vertices)
        object.__setattr__(self, "vertices", verts)
        if len(verts) < 2:
            raise ValueError("a simplex needs at least 2 vertices; points are 0-cubes")
        n = len(verts[0])
        if any(len(v) != n for v in verts):
            raise ValueError("vertices must share the ambient dimension")
        if len(verts) - 1 > n:
            raise ValueError("simplex dimension exceeds ambient dimension")
        if len(verts) == 2:
            # hot path for segments: plain edge-length degeneracy check
            d2 = math.fsum((b - a) * (b - a) for a, b in zip(verts[0], verts[1]))
            scale = max(max(abs(x) for v in verts for x in v), 1e-300)
            if d2 <= (1e-12 * scale) ** 2:
                raise ValueError("degenerate simplex (zero-length edge)")
            return
        E = self.edge_matrix()
        scale = max(float(np.max(np.abs(E))), 1e-300)
        gram = E @ E.T
        vol2 = float(np.linalg.det(gram))
        if vol2 <= (1e-12 * scale ** self.k) ** 2:
            raise ValueError("degenerate simplex (Gram determinant too small)")

    @property
    def n(self) -> int:
        return len(self.vertices[0])

    @property
    def k(self) -> int:
        return len(self.vertices) - 1

    def edge_matrix(self) -> np.ndarray:
        V = np.array(self.vertices)
        return V[1:] - V[0]

    @property
    def measure(self) -> float:
        E = self.edge_matrix()
        g = float(np.linalg.det(E @ E.T))
        return math.sqrt(max(g, 0.0)) / math.factorial(self.k)

    def vec(self) -> KVector:
        """Vec(sigma) = (1/k!) (p_1-p_0) ^ ... ^ (p_k-p_0)."""
        return (1.0 / math.factorial(self.k)) * frame_to_kvector(self.edge_matrix(), self.n)

    def unit_direction(self) -> KVector:
        v = self.vec()
        m = mass_kvector(v)
        return (1.0 / m) * v

    def boundary_terms(self) -> list[tuple[float, "Cell"]]:
        out: list[tuple[float, Cell]] = []
        for i in range(len(self.vertices)):
            rest = self.vertices[:i] + self.vertices[i + 1 :]
            sign = -1.0 if i % 2 else 1.0
            if len(rest) == 1:
                out.append((sign, Cube.point(rest[0])))
            else:
                out.append((sign, Simplex(rest)))
        return out

    def translate(self, v: Sequence[float]) -> "Simplex":
        v = np.asarray(v, dtype=float)
        return Simplex(tuple(tuple(np.asarray(p) + v) for p in self.vertices))

    def bbox(self) -> np.ndarray:
        V = np.array(self.vertices)
        return np.stack([V.min(axis=0), V.max(axis=0)], axis=1)

    def contains(self, p: Sequence[float], tol: float = 1e-9) -> bool:
        lam = self.barycentric(np.asarray(p, dtype=float)[None, :], tol)
        return bool(lam[0])

    def barycentric(self, pts: np.ndarray, tol: float = 1e-9) -> np.ndarray:
        """Vectorized membership test for an (m, n) array of points."""
        E = self.edge_matrix()
        v0 = np.array(self.vertices[0])
        rhs = pts - v0
        lam, *_ = np.linalg.lstsq(E.T, rhs.T, rcond=None)
        lam = lam.T
        resid = rhs - lam @ E
        ok = (
            (lam >= -tol).all(axis=1)
            & (lam.sum(axis=1) <= 1.0 + tol)
            & (np.linalg.norm(resid, axis=1) <= max(tol, 1e-9))
        )
        return ok


@dataclass(frozen=True)
class Cube:
    """Oriented k-cube: axis-aligned (axes given) or frame-based; k=0 is a point.

    axes are strictly increasing 1-based axis indices; frame rows are
    orthonormal vectors.  sign flips the orientation of e_{axes} (resp. the
    frame wedge).
    """

    center: tuple
    edge: float
    axes: tuple | None = None
    frame: tuple | None = None
    sign: int = 1

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(x) for x in self.center))
        object.__setattr__(self, "edge", float(self.edge))
        if self.sign not in (1, -1):
            raise ValueError("orientation sign must be +1 or -1")
        if self.axes is not None and self.frame is not None:
            raise ValueError("give axes or frame, not both")
        if self.axes is not None:
            axes = tuple(int(a) for a in self.axes)
            if any(not 1 <= a <= self.n for a in axes) or any(
                axes[i] >= axes[i + 1] for i in range(len(axes) - 1)
            ):
                raise ValueError("axes must be strictly increasing within 1..n")
            object.__setattr__(self, "axes", axes)
        elif self.frame is not None:
            fr = tuple(tuple(float(x) for x in row) for row in self.frame)
            F = np.array(fr)
            if F.shape[1] != self.n:
                raise ValueError("frame vectors must share the ambient dimension")
            if not np.allclose(F @ F.T, np.eye(len(fr)), atol=1e-12):
                raise ValueError("cube frame is not orthonormal within 1e-12")
            object.__setattr__(self, "frame", fr)
        else:
            object.__setattr__(self, "axes", ())
        if self.k > 0 and self.edge <= 0.0:
            raise ValueError("positive edge required")

    # -- constructors ------------------------------------------------------
    @staticmethod
    def axis_cube(center: Sequence[float], axes: Iterable[int], edge: float, sign: int = 1) -> "Cube":
        return Cube(tuple(center), edge, axes=tuple(axes), sign=sign)

    @staticmethod
    def point(p: Sequence[float]) -> "Cube":
        return Cube(tuple(p), 0.0, axes=())

    @staticmethod
    def from_frame(center: Sequence[float], frame: Sequence[Sequence[float]], edge: float, sign: int = 1) -> "Cube":
        return Cube(tuple(center), edge, frame=tuple(tuple(r) for r in frame), sign=sign)

    # -- geometry ----------------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.center)

    @property
    def k(self) -> int:
        return len(self.axes) if self.axes is not None else len(self.frame)

    @property
    def measure(self) -> float:
        return self.edge ** self.k if self.k else 1.0

    @property
    def is_axis_aligned(self) -> bool:
        return self.axes is not None

    @property
    def is_dyadic(self) -> bool:
        if not self.is_axis_aligned:
            return False
        return self.k == 0 or dyadic_level(self.edge) is not None

    @property
    def level(self) -> int | None:
        return dyadic_level(self.edge) if self.is_axis_aligned else None

    def frame_matrix(self) -> np.ndarray:
        if self.frame is not None:
            return np.array(self.frame)
        F = np.zeros((len(self.axes), self.n))
        for i, a in enumerate(self.axes):
            F[i, a - 1] = 1.0
        return F

    def direction(self) -> KVector:
        """Unit k-vector carrying the orientation (includes sign)."""
        if self.k == 0:
            return KVector.scalar(self.n, float(self.sign))
        if self.is_axis_aligned:
            return KVector.basis(self.n, self.axes, float(self.sign))
        return float(self.sign) * frame_to_kvector(self.frame, self.n)

    def vec(self) -> KVector:
        return self.measure * self.direction() if self.k else self.direction()

    def boundary_terms(self) -> list[tuple[float, "Cube"]]:
        if self.k == 0:
            return []
        out = []
        h = self.edge / 2.0
        c = np.array(self.center)
        if self.is_axis_aligned:
            for j, a in enumerate(self.axes):
                sub = self.axes[:j] + self.axes[j + 1 :]
                coeff = float(self.sign) * (-1.0 if j % 2 else 1.0)
                shift = np.zeros(self.n)
                shift[a - 1] = h
                plus = Cube(tuple(c + shift), self.edge, axes=sub)
                minus = Cube(tuple(c - shift), self.edge, axes=sub)
                out.append((coeff, plus))
                out.append((-coeff, minus))
            return out
        F = self.frame_matrix()
        for j in range(self.k):
            subframe = tuple(self.frame[:j] + self.frame[j + 1 :])
            coeff = float(self.sign) * (-1.0 if j % 2 else 1.0)
            shift = h * F[j]
            if subframe:
                plus = Cube.from_frame(tuple(c + shift), subframe, self.edge)
                minus = Cube.from_frame(tuple(c - shift), subframe, self.edge)
            else:
                plus = Cube.point(tuple(c + shift))
                minus = Cube.point(tuple(c - shift))
            out.append((coeff, plus))
            out.append((-coeff, minus))
        return out

    def translate(self, v: Sequence[float]) -> "Cube":
        c = tuple(np.array(self.center) + np.asarray(v, dtype=float))
        return Cube(c, self.edge, axes=self.axes, frame=self.frame, sign=self.sign)

    def bbox(self) -> np.ndarray:
        c = np.array(self.center)
        if self.k == 0:
            return np.stack([c, c], axis=1)
        if self.is_axis_aligned:
            half = np.zeros(self.n)
            for a in self.axes:
                half[a - 1] = self.edge / 2.0
        else:
            half = (self.edge / 2.0) * np.abs(self.frame_matrix()).sum(axis=0)
        return np.stack([c - half, c + half], axis=1)

    def contains(self, p: Sequence[float], tol: float = 1e-9) -> bool:
        d = np.asarray(p, dtype=float) - np.array(self.center)
        if self.k == 0:
            return bool(np.linalg.norm(d) <= tol)
        F = self.frame_matrix()
        loc = F @ d
        resid = d - F.T @ loc
        return bool(
            (np.abs(loc) <= self.edge / 2.0 + tol).all()
            and np.linalg.norm(resid) <= tol
        )


Cell = Union[Simplex, Cube]


@dataclass(frozen=True)
class PolyChain:
    """Real-weighted formal sum of oriented k-cells in R^n."""

    n: int
    k: int
    terms: tuple

    def __post_init__(self):
        terms = []
        for coeff, cell in self.terms:
            if cell.n != self.n or cell.k != self.k:
                raise ValueError("all cells must share the chain's (n, k)")
            terms.append((float(coeff), cell))
        object.__setattr__(self, "terms", tuple(terms))

    @staticmethod
    def empty(n: int, k: int) -> "PolyChain":
        return PolyChain(n, k, ())

    @staticmethod
    def from_cell(cell: Cell, coeff: float = 1.0) -> "PolyChain":
        return PolyChain(cell.n, cell.k, ((coeff, cell),))

    @property
    def is_empty(self) -> bool:
        return not self.terms

    def __add__(self, other: "PolyChain") -> "PolyChain":
        if (self.n, self.k) != (other.n, other.k):
            raise ValueError("mismatched chains")
        return PolyChain(self.n, self.k, self.terms + other.terms)

    def __neg__(self) -> "PolyChain":
        return PolyChain(self.n, self.k, tuple((-a, c) for a, c in self.terms))

    def __sub__(self, other: "PolyChain") -> "PolyChain":
        return self + (-other)

    def __rmul__(self, scalar: float) -> "PolyChain":
        return PolyChain(self.n, self.k, tuple((scalar * a, c) for a, c in self.terms))

    __mul__ = __rmul__


def mass_chain(P: PolyChain) -> float:
    """M(P) = sum |a_i| M(sigma_i); 0-cells have unit mass."""
    return math.fsum(abs(a) * cell.measure for a, cell in P.terms)


def boundary(P: PolyChain) -> PolyChain:
    """Boundary chain; the zero chain for k = 0.  Not canonicalized."""
    if P.k == 0:
        return PolyChain.empty(P.n, 0)
    out = []
    for a, cell in P.terms:
        for s, face in cell.boundary_terms():
            out.append((a * s, face))
    return PolyChain(P.n, P.k - 1, tuple(out))


def vec_chain(P: PolyChain) -> KVector:
    """Vec(P) = sum a_i Vec(sigma_i); for k = 0 the coefficient sum."""
    out = KVector.zero(P.n, P.k)
    for a, cell in P.terms:
        out = out + a * cell.vec()
    return out


def _sort_key(x) -> tuple:
    if isinstance(x, tuple):
        return tuple(_sort_key(y) for y in x)
    if isinstance(x, (bytes, str)):
        return (x,)
    return (x,)


def _canonical_cell(cell: Cell) -> tuple[tuple, float, Cell]:
    """(merge key, orientation factor, canonical representative)."""
    if isinstance(cell, Simplex):
        order = sorted(range(len(cell.vertices)), key=lambda i: cell.vertices[i])
        inversions = sum(
            1
            for i in range(len(order))
            for j in range(i + 1, len(order))
            if order[i] > order[j]
        )
        parity = -1.0 if inversions % 2 else 1.0
        verts = tuple(cell.vertices[i] for i in order)
        return ("s", verts), parity, Simplex(verts)
    if cell.is_axis_aligned:
        if cell.k == 0:
            return ("p", cell.center), float(cell.sign), Cube.point(cell.center)
        key = ("c", cell.axes, cell.edge, cell.center)
        canon = Cube(cell.center, cell.edge, axes=cell.axes)
        return key, float(cell.sign), canon
    F = np.round(cell.frame_matrix(), 12)
    key = ("g", F.tobytes(), round(cell.edge, 12), tuple(np.round(cell.center, 12)))
    canon = Cube(cell.center, cell.edge, frame=cell.frame)
    return key, float(cell.sign), canon


def canonicalize(P: PolyChain) -> PolyChain:
    """Merge equal cells (orientation-aware) and drop exact-zero coefficients.

    Equal-up-to-permutation simplices merge with the permutation parity;
    axis-aligned (in particular dyadic) cubes merge by exact float equality of
    (axes, edge, center), which realizes exact cancellation on a common grid.
    """
    acc: dict = {}
    for a, cell in P.terms:
        if a == 0.0:
            continue
        key, factor, canon = _canonical_cell(cell)
        if key in acc:
            acc[key][0].append(a * factor)
        else:
            acc[key] = [[a * factor], canon]
    terms = []
    for key in sorted(acc.keys(), key=_sort_key):
        coeffs, canon = acc[key]
        total = math.fsum(coeffs)
        if total != 0.0:
            terms.append((total, canon))
    return PolyChain(P.n, P.k, tuple(terms))


def refine_to_level(P: PolyChain, level: int) -> PolyChain:
    """Split every dyadic cube into the 2^-level grid; mass and Vec preserved."""
    out = []
    for a, cell in P.terms:
        if not (isinstance(cell, Cube) and cell.is_dyadic):
            raise ValueError("refinement requires dyadic cells")
        if cell.k == 0:
            out.append((a, cell))
            continue
        lv = cell.level
        if lv > level:
            raise ValueError("cell is finer than the target level")
        splits = 2 ** (level - lv)
        sub = cell.edge / splits
        c = np.array(cell.center)
        corner = c.copy()
        for ax in cell.axes:
            corner[ax - 1] -= cell.edge / 2.0
        for offs in iter_product(range(splits), repeat=cell.k):
            cc = corner.copy()
            for (i, ax) in zip(offs, cell.axes):
                cc[ax - 1] += (2 * i + 1) * (sub / 2.0)
            out.append((a, Cube(tuple(cc), sub, axes=cell.axes, sign=cell.sign)))
    return PolyChain(P.n, P.k, tuple(out))


def whitney_cubes(sigma: Simplex, level: int) -> PolyChain:
    """Dyadic cubes of edge exactly 2^-level inside a coordinate-plane simplex.

    The cell must lie in a coordinate k-plane (axis-aligned span); callers
    rotate into position beforehand for general position.
    """
    E = sigma.edge_matrix()
    spanned = tuple(int(a) + 1 for a in np.nonzero(np.abs(E).max(axis=0) > 0.0)[0])
    if len(spanned) != sigma.k:
        raise ValueError("whitney decomposition requires a simplex in a coordinate k-plane")
    h = 2.0 ** (-level)
    v0 = np.array(sigma.vertices[0])
    box = sigma.bbox()
    los = [math.floor(box[a - 1, 0] / h) for a in spanned]
    his = [math.ceil(box[a - 1, 1] / h) for a in spanned]
    ranges = [range(lo, hi) for lo, hi in zip(los, his)]
    idx_grid = np.array(list(iter_product(*ranges)), dtype=float)
    if idx_grid.size == 0:
        return PolyChain.empty(sigma.n, sigma.k)
    centers = np.tile(v0, (len(idx_grid), 1))
    for col, a in enumerate(spanned):
        centers[:, a - 1] = (idx_grid[:, col] + 0.5) * h
    corner_offsets = np.array(list(iter_product((-0.5, 0.5), repeat=sigma.k))) * h
    ok = np.ones(len(centers), dtype=bool)
    for off in corner_offsets:
        pts = centers.copy()
        for col, a in enumerate(spanned):
            pts[:, a - 1] += off[col]
        ok &= sigma.barycentric(pts, tol=1e-12)
    dir_coeff = sigma.vec().coeff(spanned)
    orient = 1.0 if dir_coeff >= 0 else -1.0
    terms = tuple(
        (orient, Cube(tuple(c), h, axes=spanned)) for c in centers[ok]
    )
    return PolyChain(sigma.n, sigma.k, terms)


@dataclass(frozen=True)
class Support:
    """Union-of-hulls region descriptor: bounding box plus membership test."""

    cells: tuple

    @property
    def is_empty(self) -> bool:
        return not self.cells

    def bbox(self) -> np.ndarray | None:
        if not self.cells:
            return None
        boxes = [c.bbox() for c in self.cells]
        lo = np.min([b[:, 0] for b in boxes], axis=0)
        hi = np.max([b[:, 1] for b in boxes], axis=0)
        return np.stack([lo, hi], axis=1)

    def contains(self, p: Sequence[float], tol: float = 1e-9) -> bool:
        return any(c.contains(p, tol) for c in self.cells)


def support_points(P: PolyChain) -> Support:
    """spt(P) as the union of the cells of the canonicalized chain."""
    Q = canonicalize(P)
    return Support(tuple(cell for _, cell in Q.terms))
