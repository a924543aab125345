"""Differential k-elements, elementary chains, and chainlet approximation sequences.

Elements are Dirac-like limits of weighted shrinking cubes; every operator
that needs geometry (star, coboundary, Laplace, pushforward) acts through
them.  A chainlet is represented operationally as a level-indexed sequence of
polyhedral approximations, never as a completed limit object.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product as iter_product
from typing import Callable, Sequence

import numpy as np

from .chains import (
    Cube,
    PolyChain,
    Simplex,
    boundary,
    canonicalize,
    mass_chain,
    refine_to_level,
)
from .exterior import KDirection, KVector, kvector_map, mass_kvector, star_kvector
from .forms import FormField, SmoothMap, eval_form
from .norms import natural_upper


@dataclass(frozen=True)
class ElementTerm:
    """b * (alpha_p): weight, location, unit direction and the direction's mass."""

    coeff: float
    point: tuple
    direction: KDirection
    size: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "point", tuple(float(x) for x in self.point))
        object.__setattr__(self, "coeff", float(self.coeff))
        if self.size <= 0.0:
            raise ValueError("direction mass must be positive")


@dataclass(frozen=True)
class ElementaryChain:
    """Finite weighted sum of differential k-elements."""

    n: int
    k: int
    terms: tuple

    def __post_init__(self):
        for t in self.terms:
            if t.direction.n != self.n or t.direction.k != self.k:
                raise ValueError("element directions must share (n, k)")

    @property
    def mass(self) -> float:
        return math.fsum(abs(t.coeff) * t.size for t in self.terms)

    def sorted_terms(self) -> tuple:
        return tuple(
            sorted(
                self.terms,
                key=lambda t: (t.point, sorted(t.direction.kvector.coeffs.items())),
            )
        )

    def __add__(self, other: "ElementaryChain") -> "ElementaryChain":
        if (self.n, self.k) != (other.n, other.k):
            raise ValueError("mismatched elementary chains")
        return ElementaryChain(self.n, self.k, self.terms + other.terms)

    def __rmul__(self, s: float) -> "ElementaryChain":
        return ElementaryChain(
            self.n, self.k, tuple(
                ElementTerm(s * t.coeff, t.point, t.direction, t.size) for t in self.terms
            )
        )

    __mul__ = __rmul__


def qcube(p: Sequence[float], alpha: KDirection, level: int) -> PolyChain:
    """Weighted unit-mass cube: edge 2^-level, coefficient 2^(k*level), direction alpha."""
    n, k = alpha.n, alpha.k
    coeff = 2.0 ** (k * level)
    edge = 2.0 ** (-level)
    axes = alpha.axis_indices
    if k == 0:
        cell = Cube.point(tuple(p))
        return PolyChain(n, 0, ((1.0, cell),))
    if axes is not None:
        sign = alpha.kvector.coeff(axes)
        cell = Cube.axis_cube(tuple(p), axes, edge, sign=int(round(sign)))
    else:
        cell = Cube.from_frame(tuple(p), alpha.frame, edge)
    return PolyChain(n, k, ((coeff, cell),))


def _cube_direction(cell: Cube) -> tuple[KDirection, float]:
    """(unit direction, orientation sign) of a cube cell."""
    if cell.k == 0:
        return KDirection.scalar_direction(cell.n), float(cell.sign)
    if cell.is_axis_aligned:
        return KDirection.from_axes(cell.n, cell.axes), float(cell.sign)
    return KDirection.from_frame(cell.frame, cell.n), float(cell.sign)


def _simplex_direction(cell: Simplex) -> tuple[KDirection, float]:
    """Orthonormalized frame direction matching Vec(sigma)/|Vec(sigma)|."""
    E = cell.edge_matrix()
    q, _ = np.linalg.qr(E.T)
    F = q[:, : cell.k].T.copy()
    d = KDirection.from_frame(tuple(tuple(r) for r in F), cell.n)
    target = cell.unit_direction()
    dot = math.fsum(
        c * target.coeff(i) for i, c in d.kvector.coeffs.items()
    )
    if dot < 0:
        F[-1] = -F[-1]
        d = KDirection.from_frame(tuple(tuple(r) for r in F), cell.n)
    return d, 1.0


def elementize(P: PolyChain, level: int) -> ElementaryChain:
    """Midpoint elements of the 2^-level grid refinement of a dyadic cubical chain."""
    for _, cell in P.terms:
        if not (isinstance(cell, Cube) and cell.is_dyadic):
            raise ValueError("elementize requires dyadic cells")
        if cell.k > 0 and cell.level > level:
            raise ValueError("elementize requires cells at level <= the target level")
    refined = refine_to_level(P, level)
    terms = []
    for a, cell in refined.terms:
        direction, sign = _cube_direction(cell)
        terms.append(ElementTerm(a * sign * cell.measure, cell.center, direction))
    return ElementaryChain(P.n, P.k, tuple(terms))


def _subdivide_simplex(cell: Simplex, h: float) -> list[Simplex]:
    """Longest-edge bisection until the diameter drops below h."""
    def diam(s: Simplex) -> float:
        V = np.array(s.vertices)
        return max(
            float(np.linalg.norm(V[i] - V[j]))
            for i in range(len(V))
            for j in range(i + 1, len(V))
        )

    out = []
    stack = [cell]
    while stack:
        s = stack.pop()
        if diam(s) <= h:
            out.append(s)
            continue
        V = np.array(s.vertices)
        best, bi, bj = -1.0, 0, 1
        for i in range(len(V)):
            for j in range(i + 1, len(V)):
                dij = float(np.linalg.norm(V[i] - V[j]))
                if dij > best:
                    best, bi, bj = dij, i, j
        mid = tuple((V[bi] + V[bj]) / 2.0)
        va = list(s.vertices)
        va[bj] = mid
        vb = list(s.vertices)
        vb[bi] = mid
        stack.append(Simplex(tuple(va)))
        stack.append(Simplex(tuple(vb)))
    return out


def elementize_any(P: PolyChain, level: int) -> ElementaryChain:
    """Element conversion for arbitrary cells at scale 2^-level.

    Dyadic cubes take the exact grid path; general cubes split uniformly per
    axis; simplices are bisected until their diameter is below 2^-level.
    """
    h = 2.0 ** (-level)
    terms = []
    for a, cell in P.terms:
        if isinstance(cell, Cube):
            if cell.k == 0:
                direction, sign = _cube_direction(cell)
                terms.append(ElementTerm(a * sign, cell.center, direction))
                continue
            if cell.is_dyadic and cell.level <= level:
                sub = refine_to_level(PolyChain.from_cell(cell, a), level)
                for aa, cc in sub.terms:
                    direction, sign = _cube_direction(cc)
                    terms.append(ElementTerm(aa * sign * cc.measure, cc.center, direction))
                continue
            direction, sign = _cube_direction(cell)
            splits = max(1, math.ceil(cell.edge / h - 1e-12))
            sub_edge = cell.edge / splits
            F = cell.frame_matrix()
            c = np.array(cell.center)
            corner = c - (cell.edge / 2.0) * F.sum(axis=0)
            for offs in iter_product(range(splits), repeat=cell.k):
                cc = corner.copy()
                for i, o in enumerate(offs):
                    cc = cc + (o + 0.5) * sub_edge * F[i]
                terms.append(
                    ElementTerm(a * sign * sub_edge ** cell.k, tuple(cc), direction)
                )
            continue
        direction, _ = _simplex_direction(cell)
        for s in _subdivide_simplex(cell, h):
            centroid = tuple(np.array(s.vertices).mean(axis=0))
            terms.append(ElementTerm(a * s.measure, centroid, direction))
    return ElementaryChain(P.n, P.k, tuple(terms))


def cubeize(E: ElementaryChain, level: int) -> PolyChain:
    """Replace each element with its weighted shrinking cube at the given level."""
    terms = []
    for t in E.terms:
        q = qcube(t.point, t.direction, level)
        terms.extend((t.coeff * t.size * a, cell) for a, cell in q.terms)
    return PolyChain(E.n, E.k, tuple(terms))


def integrate_elementary(omega: FormField, E: ElementaryChain) -> float:
    """Exact pairing sum b_i omega(p_i; alpha_i); no quadrature."""
    if omega.n != E.n or omega.k != E.k:
        raise ValueError("form does not match the elementary chain")
    return math.fsum(
        t.coeff * t.size * eval_form(omega, t.point, t.direction.kvector)
        for t in E.terms
    )


def star_elementary(E: ElementaryChain) -> ElementaryChain:
    """Termwise geometric star; the starred k-vector is exact (coefficient permutation)."""
    from .exterior import star_direction

    terms = []
    for t in E.terms:
        d, sign = star_direction(t.direction)
        terms.append(ElementTerm(t.coeff * sign, t.point, d, t.size))
    return ElementaryChain(E.n, E.n - E.k, tuple(terms))


def pushforward(f: SmoothMap, E: ElementaryChain) -> ElementaryChain:
    """f_* termwise: (b, p, alpha) -> (b, f(p), Lambda^k Df_p alpha)."""
    terms = []
    for t in E.terms:
        pts = np.asarray(t.point, dtype=float)[None, :]
        fp = tuple(f.func(pts)[0])
        if E.k == 0:
            terms.append(ElementTerm(t.coeff, fp, t.direction, t.size))
            continue
        Df = f.jacobian(pts)[0]
        image = kvector_map(Df, t.direction.kvector)
        m = mass_kvector(image)
        if m == 0.0:
            continue
        F = Df @ np.array(t.direction.frame).T
        q, _ = np.linalg.qr(F)
        newF = q[:, : E.k].T.copy()
        d = KDirection.from_frame(tuple(tuple(r) for r in newF), f.n_out)
        dot = math.fsum(c * image.coeffs.get(i, 0.0) for i, c in d.kvector.coeffs.items())
        if dot < 0:
            newF[-1] = -newF[-1]
            d = KDirection.from_frame(tuple(tuple(r) for r in newF), f.n_out)
        # keep the exact image k-vector as the direction data
        d = KDirection(f.n_out, E.k, d.frame, (1.0 / m) * image)
        terms.append(ElementTerm(t.coeff, fp, d, t.size * m))
    return ElementaryChain(f.n_out, E.k, tuple(terms))


@dataclass
class ChainletSeq:
    """Level-indexed polyhedral approximation sequence standing in for a chainlet.

    level_fn(l) returns the approximation at scale 2^-l; computed levels are
    cached.  cauchy_log records certified natural-norm uppers of consecutive
    differences (the operational Cauchy certificate).
    """

    n: int
    k: int
    r: int
    level_fn: Callable[[int], PolyChain]
    name: str = ""
    cauchy_log: list = field(default_factory=list)
    _cache: dict = field(default_factory=dict, repr=False)

    def level(self, l: int) -> PolyChain:
        if l not in self._cache:
            P = self.level_fn(l)
            if (P.n, P.k) != (self.n, self.k):
                raise ValueError("level function produced a mismatched chain")
            self._cache[l] = P
        return self._cache[l]

    @staticmethod
    def from_chain(P: PolyChain, r: int = 1, name: str = "") -> "ChainletSeq":
        dyadic = all(isinstance(c, Cube) and c.is_dyadic for _, c in P.terms)
        if dyadic and P.terms and P.k > 0:
            top = max(c.level for _, c in P.terms)

            def fn(l: int) -> PolyChain:
                return refine_to_level(P, max(l, top))

        else:

            def fn(l: int) -> PolyChain:
                return P

        return ChainletSeq(P.n, P.k, r, fn, name=name or "chain")

    def record_cauchy(self, levels: Sequence[int], r: int | None = None) -> list[float]:
        rr = self.r if r is None else r
        out = []
        for l in levels:
            diff = self.level(l + 1) - self.level(l)
            upper, _ = natural_upper(diff, rr)
            out.append(upper)
        self.cauchy_log.extend(zip(levels, out))
        return out


def star_chainlet(A: ChainletSeq) -> ChainletSeq:
    """Level-wise elementize / star / cubeize bridge."""

    def fn(l: int) -> PolyChain:
        return canonicalize(cubeize(star_elementary(elementize_any(A.level(l), l)), l))

    return ChainletSeq(A.n, A.n - A.k, A.r, fn, name=f"star({A.name})")


def boundary_chainlet(A: ChainletSeq) -> ChainletSeq:
    def fn(l: int) -> PolyChain:
        return canonicalize(boundary(A.level(l)))

    return ChainletSeq(A.n, A.k - 1, A.r + 1, fn, name=f"boundary({A.name})")


def coboundary(A: ChainletSeq) -> ChainletSeq:
    """Geometric coboundary star-boundary-star, level-wise at matching scale."""
    inner = star_chainlet(A)
    mid = boundary_chainlet(inner)
    out = star_chainlet(mid)
    return ChainletSeq(A.n, A.k + 1, A.r + 1, out.level, name=f"cob({A.name})")


def laplace(A: ChainletSeq) -> ChainletSeq:
    """(boundary + coboundary)^2 = boundary coboundary + coboundary boundary."""
    bc = boundary_chainlet(coboundary(A))
    cb = coboundary(boundary_chainlet(A))

    def fn(l: int) -> PolyChain:
        return canonicalize(bc.level(l) + cb.level(l))

    return ChainletSeq(A.n, A.k, A.r + 2, fn, name=f"laplace({A.name})")
