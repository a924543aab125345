"""Differential k-forms: evaluation, d, wedge, star, pullback, integration, norms.

Components map increasing index tuples to vectorized point functions
((m, n) array -> (m,) values); polynomial components keep a symbolic
representation so the exterior derivative stays analytic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .chains import Cube, PolyChain, Simplex, boundary
from .exterior import (
    KVector,
    all_index_sets,
    complement_index,
    interleave_sign,
)
from .quadrature import QuadCell, QuadratureError, adaptive_integrate

DEFAULT_TOL = 1e-9
FD_STEP = 1e-5


@dataclass(frozen=True)
class Polynomial:
    """Multivariate polynomial as exponent-tuple -> coefficient."""

    nvars: int
    terms: dict

    def __post_init__(self):
        clean = {}
        for exps, c in self.terms.items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.nvars or any(e < 0 for e in exps):
                raise ValueError(f"bad exponent tuple {exps}")
            c = float(c)
            if c != 0.0:
                clean[exps] = clean.get(exps, 0.0) + c
        object.__setattr__(self, "terms", clean)

    @staticmethod
    def constant(nvars: int, value: float) -> "Polynomial":
        return Polynomial(nvars, {(0,) * nvars: value})

    @staticmethod
    def coordinate(nvars: int, j: int, power: int = 1, coeff: float = 1.0) -> "Polynomial":
        """coeff * x_j^power with 1-based j."""
        exps = [0] * nvars
        exps[j - 1] = power
        return Polynomial(nvars, {tuple(exps): coeff})

    @staticmethod
    def monomial(nvars: int, exps: Sequence[int], coeff: float = 1.0) -> "Polynomial":
        return Polynomial(nvars, {tuple(exps): coeff})

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        out = np.zeros(pts.shape[0])
        for exps, c in self.terms.items():
            term = np.full(pts.shape[0], c)
            for j, e in enumerate(exps):
                if e:
                    term = term * pts[:, j] ** e
            out += term
        return out

    def partial(self, j: int) -> "Polynomial":
        """d/dx_j with 1-based j."""
        out = {}
        for exps, c in self.terms.items():
            e = exps[j - 1]
            if e:
                ne = list(exps)
                ne[j - 1] = e - 1
                out[tuple(ne)] = out.get(tuple(ne), 0.0) + c * e
        return Polynomial(self.nvars, out)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        out = dict(self.terms)
        for exps, c in other.terms.items():
            out[exps] = out.get(exps, 0.0) + c
        return Polynomial(self.nvars, out)

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            out: dict = {}
            for e1, c1 in self.terms.items():
                for e2, c2 in other.terms.items():
                    key = tuple(a + b for a, b in zip(e1, e2))
                    out[key] = out.get(key, 0.0) + c1 * c2
            return Polynomial(self.nvars, out)
        return Polynomial(self.nvars, {e: other * c for e, c in self.terms.items()})

    __rmul__ = __mul__

    @property
    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self.terms)

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)


Component = Callable[[np.ndarray], np.ndarray]


def _as_component(nvars: int, comp) -> Component:
    if isinstance(comp, Polynomial):
        return comp
    if isinstance(comp, (int, float)):
        return Polynomial.constant(nvars, float(comp))
    if callable(comp):
        return comp
    raise TypeError(f"component must be callable or numeric, got {type(comp)!r}")


def _scale_component(c: Component, s: float) -> Component:
    if isinstance(c, Polynomial):
        return s * c
    return lambda pts, _c=c, _s=s: _s * _c(pts)


def _sum_components(parts: Sequence[tuple[float, Component]], nvars: int) -> Component:
    polys = [(s, c) for s, c in parts if isinstance(c, Polynomial)]
    if len(polys) == len(parts):
        out = Polynomial.constant(nvars, 0.0)
        for s, c in parts:
            out = out + s * c
        return out

    def fn(pts, _parts=tuple(parts)):
        return sum(s * c(pts) for s, c in _parts)

    return fn


def _mul_components(a: Component, b: Component) -> Component:
    if isinstance(a, Polynomial) and isinstance(b, Polynomial):
        return a * b
    return lambda pts, _a=a, _b=b: _a(pts) * _b(pts)


@dataclass(frozen=True)
class FormField:
    """Differential k-form of class B^r with optional analytic d and norm table.

    exact_norms maps r to a hand-certified |omega|_r over support_region; it
    must be nondecreasing in r.  When analytic_d is given, a construction-time
    spot check verifies Stokes on two small cells.
    """

    n: int
    k: int
    components: dict
    analytic_d: "FormField | None" = None
    exact_norms: dict | None = None
    support_region: tuple | None = None
    name: str | None = None
    unchecked: bool = field(default=False, compare=False)

    def __post_init__(self):
        if not 0 <= self.k <= self.n:
            raise ValueError("form degree out of range")
        comps = {}
        for idx, c in self.components.items():
            idx = tuple(int(i) for i in idx)
            if len(idx) != self.k or any(not 1 <= i <= self.n for i in idx) or any(
                idx[j] >= idx[j + 1] for j in range(len(idx) - 1)
            ):
                raise ValueError(f"bad component index {idx}")
            comps[idx] = _as_component(self.n, c)
        object.__setattr__(self, "components", comps)
        if self.exact_norms is not None:
            norms = {int(r): float(v) for r, v in self.exact_norms.items()}
            rs = sorted(norms)
            if any(norms[rs[i]] > norms[rs[i + 1]] + 1e-12 for i in range(len(rs) - 1)):
                raise ValueError("exact norms must be nondecreasing in r")
            object.__setattr__(self, "exact_norms", norms)
        if self.support_region is not None:
            box = tuple((float(lo), float(hi)) for lo, hi in self.support_region)
            if len(box) != self.n:
                raise ValueError("support region must have one interval per axis")
            object.__setattr__(self, "support_region", box)
        if self.analytic_d is not None and not self.unchecked:
            _spot_check_stokes(self)

    def component(self, idx: Iterable[int]) -> Component | None:
        return self.components.get(tuple(idx))

    @property
    def is_polynomial(self) -> bool:
        return all(isinstance(c, Polynomial) for c in self.components.values())


def eval_form(omega: FormField, p: Sequence[float], alpha: KVector) -> float:
    """Pointwise pairing omega(p; alpha) = sum_I omega_I(p) alpha_I."""
    if alpha.n != omega.n or alpha.k != omega.k:
        raise ValueError("k-vector does not match the form")
    pts = np.asarray(p, dtype=float)[None, :]
    total = 0.0
    for idx, a in alpha.coeffs.items():
        comp = omega.components.get(idx)
        if comp is not None:
            total += a * float(comp(pts)[0])
    return total


def _fd_partial(comp: Component, j: int, h: float = FD_STEP) -> Component:
    def fn(pts, _c=comp, _j=j - 1, _h=h):
        up = np.array(pts, dtype=float)
        dn = np.array(pts, dtype=float)
        up[:, _j] += _h
        dn[:, _j] -= _h
        return (_c(up) - _c(dn)) / (2.0 * _h)

    return fn


def exterior_derivative(omega: FormField) -> FormField:
    """d(omega): analytic when available, symbolic for polynomials, else central FD."""
    if omega.analytic_d is not None:
        return omega.analytic_d
    if omega.k == omega.n:
        raise ValueError("no forms of degree n+1; d of a top-degree form vanishes")
    parts: dict = {}
    for idx, comp in omega.components.items():
        for j in range(1, omega.n + 1):
            if j in idx:
                continue
            sign, merged = interleave_sign((j,), idx)
            dcomp = comp.partial(j) if isinstance(comp, Polynomial) else _fd_partial(comp, j)
            parts.setdefault(merged, []).append((float(sign), dcomp))
    comps = {idx: _sum_components(ps, omega.n) for idx, ps in parts.items()}
    return FormField(omega.n, omega.k + 1, comps, unchecked=True)


d = exterior_derivative


def wedge_forms(omega: FormField, eta: FormField) -> FormField:
    """Pointwise exterior product of component functions."""
    if omega.n != eta.n:
        raise ValueError("mismatched ambient dimension")
    if omega.k + eta.k > omega.n:
        raise ValueError("grade exceeds ambient dimension")
    parts: dict = {}
    for i1, c1 in omega.components.items():
        for i2, c2 in eta.components.items():
            sign, merged = interleave_sign(i1, i2)
            if sign:
                parts.setdefault(merged, []).append((float(sign), _mul_components(c1, c2)))
    comps = {idx: _sum_components(ps, omega.n) for idx, ps in parts.items()}
    return FormField(omega.n, omega.k + eta.k, comps, unchecked=True)


def star_form(omega: FormField) -> FormField:
    """Hodge star on forms, dual-basis version of the k-vector convention."""
    comps: dict = {}
    for idx, comp in omega.components.items():
        cidx = complement_index(idx, omega.n)
        sign, _ = interleave_sign(idx, cidx)
        acc = comps.setdefault(cidx, [])
        acc.append((float(sign), comp))
    out = {idx: _sum_components(ps, omega.n) for idx, ps in comps.items()}
    return FormField(omega.n, omega.n - omega.k, out, unchecked=True)


def delta_form(omega: FormField) -> FormField:
    """Coboundary on forms: star d star (zero on 0-forms)."""
    if omega.k == 0:
        return FormField(omega.n, 0, {}, unchecked=True)
    return star_form(exterior_derivative(star_form(omega)))


def box_form(omega: FormField) -> FormField:
    """Form Laplacian d delta + delta d (with delta = star d star).

    The d-delta term drops for 0-forms and the delta-d term for top forms.
    """
    pieces = []
    if omega.k > 0:
        pieces.append(exterior_derivative(delta_form(omega)))
    if omega.k < omega.n:
        pieces.append(delta_form(exterior_derivative(omega)))
    comps: dict = {}
    for piece in pieces:
        for idx, comp in piece.components.items():
            comps.setdefault(idx, []).append((1.0, comp))
    out = {idx: _sum_components(ps, omega.n) for idx, ps in comps.items()}
    return FormField(omega.n, omega.k, out, unchecked=True)


@dataclass(frozen=True)
class SmoothMap:
    """Map record {f, Df} with vectorized callables."""

    n_in: int
    n_out: int
    func: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]

    @staticmethod
    def affine(A: Sequence[Sequence[float]], b: Sequence[float] | None = None) -> "SmoothMap":
        A = np.asarray(A, dtype=float)
        n_out, n_in = A.shape
        bb = np.zeros(n_out) if b is None else np.asarray(b, dtype=float)

        def f(pts, _A=A, _b=bb):
            return pts @ _A.T + _b

        def jac(pts, _A=A):
            return np.broadcast_to(_A, (pts.shape[0],) + _A.shape).copy()

        return SmoothMap(n_in, n_out, f, jac)

    @staticmethod
    def identity(n: int) -> "SmoothMap":
        return SmoothMap.affine(np.eye(n))


def pullback(f: SmoothMap, omega: FormField) -> FormField:
    """(f* omega)(p; alpha) = omega(f(p); Lambda^k Df_p alpha)."""
    if omega.n != f.n_out:
        raise ValueError("form lives on the map's target space")
    k = omega.k
    src_sets = all_index_sets(f.n_in, k) if k else [()]
    comps: dict = {}
    for I in src_sets:
        def comp(pts, _I=I):
            fp = f.func(pts)
            if k == 0:
                total = np.zeros(pts.shape[0])
                for J, cJ in omega.components.items():
                    total += cJ(fp)
                return total
            Df = f.jacobian(pts)
            cols = [i - 1 for i in _I]
            total = np.zeros(pts.shape[0])
            for J, cJ in omega.components.items():
                rows = [j - 1 for j in J]
                minors = np.linalg.det(Df[:, rows, :][:, :, cols])
                total += cJ(fp) * minors
            return total

        comps[I] = comp
    ad = None
    if omega.analytic_d is not None and omega.k < omega.n:
        ad = pullback(f, omega.analytic_d)
    return FormField(f.n_in, k, comps, analytic_d=ad, unchecked=True)


# -- integration -----------------------------------------------------------


def _direction_fn(omega: FormField, direction: KVector) -> Callable[[np.ndarray], np.ndarray]:
    pairs = [
        (a, omega.components[idx])
        for idx, a in direction.coeffs.items()
        if idx in omega.components
    ]

    def fn(pts, _pairs=tuple(pairs)):
        out = np.zeros(pts.shape[0])
        for a, comp in _pairs:
            out += a * comp(pts)
        return out

    return fn


def integrate_cell(omega: FormField, cell, tol: float = DEFAULT_TOL) -> float:
    """Riemann integral of the form over one flat cell via adaptive quadrature."""
    if isinstance(cell, Cube) and cell.k == 0:
        return eval_form(omega, cell.center, KVector.scalar(omega.n, float(cell.sign)))
    direction = cell.unit_direction() if isinstance(cell, Simplex) else cell.direction()
    fn = _direction_fn(omega, direction)
    return adaptive_integrate(fn, QuadCell.from_cell(cell), tol)


def integrate_chain(omega: FormField, P: PolyChain, tol: float = DEFAULT_TOL) -> float:
    """Sum of weighted cell integrals with a batched base-rule fast path."""
    if omega.n != P.n or omega.k != P.k:
        raise ValueError("form degree/dimension does not match the chain")
    if not P.terms:
        return 0.0
    m = len(P.terms)
    contributions: list[float] = []
    slow: list[tuple[float, object]] = []

    groups: dict = {}
    for a, cell in P.terms:
        if isinstance(cell, Cube) and cell.k == 0:
            contributions.append(
                a * eval_form(omega, cell.center, KVector.scalar(omega.n, float(cell.sign)))
            )
            continue
        qc = QuadCell.from_cell(cell)
        direction = cell.unit_direction() if isinstance(cell, Simplex) else cell.direction()
        key = tuple(sorted(direction.coeffs.items()))
        groups.setdefault(key, []).append((a, cell, qc, direction))

    per_cell_tol = tol / max(m, 1)
    for _, items in groups.items():
        direction = items[0][3]
        fn = _direction_fn(omega, direction)
        all_pts = []
        all_wts = []
        offsets = [0]
        for _, _, qc, _ in items:
            pts, wts = qc.nodes()
            all_pts.append(pts)
            all_wts.append(wts)
            offsets.append(offsets[-1] + len(wts))
        vals = fn(np.vstack(all_pts))
        coarse = [
            float(np.dot(vals[offsets[i] : offsets[i + 1]], all_wts[i]))
            for i in range(len(items))
        ]
        # refined estimates, batched the same way
        halves = [qc.split() for _, _, qc, _ in items]
        r_pts = []
        r_wts = []
        r_offsets = [0]
        for a_half, b_half in halves:
            for h in (a_half, b_half):
                pts, wts = h.nodes()
                r_pts.append(pts)
                r_wts.append(wts)
                r_offsets.append(r_offsets[-1] + len(wts))
        rvals = fn(np.vstack(r_pts))
        for i, (a, cell, qc, _) in enumerate(items):
            fine = float(
                np.dot(rvals[r_offsets[2 * i] : r_offsets[2 * i + 1]], r_wts[2 * i])
            ) + float(
                np.dot(rvals[r_offsets[2 * i + 1] : r_offsets[2 * i + 2]], r_wts[2 * i + 1])
            )
            err = abs(fine - coarse[i])
            if err <= max(per_cell_tol, 1e-15 * (1.0 + abs(fine))):
                contributions.append(a * fine)
            else:
                slow.append((a, cell))
    for a, cell in slow:
        contributions.append(a * integrate_cell(omega, cell, per_cell_tol))
    return math.fsum(contributions)


# -- form norms -------------------------------------------------------------


@dataclass(frozen=True)
class FormNormEstimate:
    value: float
    exact: bool
    detail: str = ""


def form_norm(
    omega: FormField,
    r: int,
    region: Sequence[tuple[float, float]] | None = None,
    budget: int = 64,
    seed: int = 0,
) -> FormNormEstimate:
    """|omega|_r: exact when certified, otherwise a sampled lower estimate.

    Sampling draws random cells inside the region, random translation chains
    (iterated differences divided by the translation lengths) for the
    translation seminorms, and random (k+1)-cells for the primed seminorms.
    """
    if omega.exact_norms is not None and r in omega.exact_norms:
        return FormNormEstimate(omega.exact_norms[r], True, "certified table")
    box = region or omega.support_region
    if box is None:
        box = ((-1.0, 1.0),) * omega.n
    rng = np.random.default_rng(seed)
    best = 0.0

    def rand_cell(kk: int):
        lo = np.array([b[0] for b in box])
        hi = np.array([b[1] for b in box])
        for _ in range(100):
            p0 = rng.uniform(lo, hi)
            scale = rng.uniform(1e-3, 1.0)
            verts = [p0]
            for _ in range(kk):
                verts.append(p0 + rng.uniform(-scale, scale, size=omega.n))
            try:
                return Simplex(tuple(tuple(v) for v in verts)) if kk else Cube.point(p0)
            except ValueError:
                continue
        raise RuntimeError("could not sample a nondegenerate cell")

    def diff_quotient(chain: PolyChain, denom: float, order: int) -> float:
        for _ in range(order):
            v = rng.uniform(-0.5, 0.5, size=omega.n)
            vn = float(np.linalg.norm(v))
            if vn < 1e-9:
                v = np.full(omega.n, 0.1)
                vn = float(np.linalg.norm(v))
            shifted = PolyChain(
                chain.n, chain.k, tuple((a, c.translate(v)) for a, c in chain.terms)
            )
            chain = chain - shifted
            denom *= vn
        val = integrate_chain(omega, chain, tol=1e-10)
        return abs(val) / denom

    for _ in range(budget):
        order = int(rng.integers(0, r + 1))
        cell = rand_cell(omega.k)
        best = max(best, diff_quotient(PolyChain.from_cell(cell), cell.measure, order))
    if r >= 1 and omega.k + 1 <= omega.n:
        for _ in range(budget // 2):
            order = int(rng.integers(0, r))
            tau = rand_cell(omega.k + 1)
            best = max(
                best,
                diff_quotient(boundary(PolyChain.from_cell(tau)), tau.measure, order),
            )
    return FormNormEstimate(best, False, "sampled lower estimate")


def _spot_check_stokes(omega: FormField) -> None:
    """Integration self-check that analytic_d is consistent on two small cells."""
    rng = np.random.default_rng(2024)
    if omega.support_region is not None:
        lo = np.array([b[0] for b in omega.support_region])
        hi = np.array([b[1] for b in omega.support_region])
        center = (lo + hi) / 2.0
    else:
        center = np.zeros(omega.n)
    kk = omega.k + 1
    if kk > omega.n:
        return
    for _ in range(2):
        while True:
            verts = [center + rng.uniform(-0.2, 0.2, size=omega.n)]
            for _ in range(kk):
                verts.append(verts[0] + rng.uniform(-0.3, 0.3, size=omega.n))
            try:
                cell = Simplex(tuple(tuple(v) for v in verts))
                break
            except ValueError:
                continue
        P = PolyChain.from_cell(cell)
        lhs = integrate_chain(omega, boundary(P), tol=1e-10)
        rhs = integrate_chain(omega.analytic_d, P, tol=1e-10)
        scale = 1.0 + abs(lhs) + abs(rhs)
        if abs(lhs - rhs) > 1e-5 * scale:
            raise ValueError(
                f"analytic derivative fails Stokes on a test cell: {lhs} vs {rhs}"
            )
