"""Theorem-verification experiments, domain generators, convergence reporting.

Each verify_* op compares the two sides of an identity level by level,
records absolute errors, fits a geometric rate, and stamps a pass flag
against the stated tolerance.  Generators supply the classical and fractal
domains used by the experiments.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
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
from .dictionary import named_form
from .elements import (
    ChainletSeq,
    ElementaryChain,
    boundary_chainlet,
    elementize_any,
    integrate_elementary,
    laplace,
    pushforward,
    star_chainlet,
    star_elementary,
)
from .exterior import KDirection
from .forms import (
    FormField,
    SmoothMap,
    box_form,
    exterior_derivative,
    integrate_chain,
    pullback,
    star_form,
)

#: Errors at or below this floor count as exact when fitting rates.
EXACT_FLOOR = 1e-13


@dataclass
class ExperimentReport:
    """Per-level comparison record for one identity."""

    name: str
    levels: list
    lhs: list
    rhs: list
    abs_err: list = field(default_factory=list)
    rel_err: list = field(default_factory=list)
    rate: float | None = None
    rate_r2: float | None = None
    rate_verdict: str = ""
    tolerance: float = 0.0
    passed: bool = False
    runtime_s: float = 0.0
    extra: dict = field(default_factory=dict)

    def finish(self, tolerance: float, t0: float) -> "ExperimentReport":
        self.tolerance = tolerance
        self.abs_err = [abs(a - b) for a, b in zip(self.lhs, self.rhs)]
        self.rel_err = [
            e / max(1.0, abs(b)) for e, b in zip(self.abs_err, self.rhs)
        ]
        if len(self.levels) >= 3:
            self.rate, self.rate_r2, self.rate_verdict = convergence_rate(
                list(zip(self.levels, self.abs_err))
            )
        self.passed = bool(self.abs_err and self.abs_err[-1] <= tolerance)
        self.runtime_s = time.perf_counter() - t0
        return self

    def rows(self) -> list[tuple]:
        rate = self.rate if self.rate is not None else float("nan")
        return [
            (l, a, b, e, rate)
            for l, a, b, e in zip(self.levels, self.lhs, self.rhs, self.abs_err)
        ]


def convergence_rate(values: Sequence[tuple[int, float]]) -> tuple[float, float, str]:
    """Least-squares geometric rate of (level, error) pairs.

    Returns (rate, R^2, verdict); rate is the slope of -log2(error) per level.
    All-exact errors report an infinite rate with verdict "exact".
    """
    if len(values) < 3:
        raise ValueError("rate fitting needs at least 3 levels")
    levels = np.array([float(l) for l, _ in values])
    errs = np.array([max(abs(e), 1e-16) for _, e in values])
    if np.all(errs <= EXACT_FLOOR):
        return math.inf, 1.0, "exact"
    logs = np.log2(errs)
    slope, intercept = np.polyfit(levels, logs, 1)
    fit = slope * levels + intercept
    ss_res = float(np.sum((logs - fit) ** 2))
    ss_tot = float(np.sum((logs - logs.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    rate = -float(slope)
    verdict = f"geometric({rate:.3f})" if (r2 >= 0.9 and rate > 0.05) else "non-convergent"
    return rate, r2, verdict


# -- verification experiments ------------------------------------------------


def verify_stokes(
    P,
    omega: FormField,
    tol: float = 1e-8,
    levels: Sequence[int] | None = None,
) -> ExperimentReport:
    """integral over boundary(P) of omega  vs  integral over P of d(omega)."""
    t0 = time.perf_counter()
    domega = exterior_derivative(omega)
    rep = ExperimentReport("stokes", [], [], [])
    if isinstance(P, ChainletSeq):
        for l in levels or range(1, 5):
            Pl = P.level(l)
            rep.levels.append(l)
            rep.lhs.append(integrate_chain(omega, canonicalize(boundary(Pl)), tol))
            rep.rhs.append(integrate_chain(domega, Pl, tol))
    else:
        rep.levels = [0]
        rep.lhs = [integrate_chain(omega, canonicalize(boundary(P)), tol)]
        rep.rhs = [integrate_chain(domega, P, tol)]
    return rep.finish(2.0 * tol, t0)


def verify_star(
    A: ChainletSeq,
    omega: FormField,
    levels: Sequence[int],
    tol: float = 0.02,
    quad_tol: float = 1e-9,
) -> ExperimentReport:
    """Star theorem: integral over star(A) of omega vs (-1)^{k(n-k)} of star(omega) over A."""
    t0 = time.perf_counter()
    if omega.k != A.n - A.k:
        raise ValueError("the form degree must be n - k")
    sign = -1.0 if (A.k * (A.n - A.k)) % 2 else 1.0
    starA = star_chainlet(A)
    somega = star_form(omega)
    rep = ExperimentReport("star", [], [], [])
    for l in levels:
        rep.levels.append(l)
        rep.lhs.append(integrate_chain(omega, starA.level(l), quad_tol))
        rep.rhs.append(sign * integrate_chain(somega, A.level(l), quad_tol))
    rep.extra["sign"] = sign
    return rep.finish(tol, t0)


def verify_gauss(
    A: ChainletSeq,
    omega: FormField,
    levels: Sequence[int],
    tol: float = 0.05,
    quad_tol: float = 1e-9,
) -> ExperimentReport:
    """Divergence theorem: star-boundary pairing vs the signed d-star integral.

    The sign is derived compositionally (Stokes then Star at grade k-1):
    (-1)^{(k-1)(n-k+1)}; the report also records that the alternative printed
    exponent (k-1)(n-k-1) has the same parity, hence the same sign.
    """
    t0 = time.perf_counter()
    n, k = A.n, A.k
    if omega.k != n - k + 1:
        raise ValueError("the form degree must be n - k + 1")
    e_abstract = (k - 1) * (n - k + 1)
    e_body = (k - 1) * (n - k - 1)
    sign = -1.0 if e_abstract % 2 else 1.0
    dstar = exterior_derivative(star_form(omega))
    rep = ExperimentReport("gauss", [], [], [])
    for l in levels:
        Bl = canonicalize(boundary(A.level(l)))
        lhs = integrate_elementary(omega, star_elementary(elementize_any(Bl, l)))
        rhs = sign * integrate_chain(dstar, A.level(l), quad_tol)
        rep.levels.append(l)
        rep.lhs.append(lhs)
        rep.rhs.append(rhs)
    rep.extra.update(
        sign=sign,
        exponent_abstract=e_abstract,
        exponent_body=e_body,
        exponents_agree=(e_abstract - e_body) % 2 == 0,
    )
    return rep.finish(tol, t0)


def verify_green(
    A: ChainletSeq,
    omega: FormField,
    levels: Sequence[int],
    tol: float = 0.02,
    quad_tol: float = 1e-9,
) -> ExperimentReport:
    """Curl theorem: integral over boundary(A) of omega vs star(d omega) over star(A)."""
    t0 = time.perf_counter()
    if omega.k != A.k - 1:
        raise ValueError("the form degree must be k - 1")
    sd = star_form(exterior_derivative(omega))
    rep = ExperimentReport("green", [], [], [])
    for l in levels:
        Al = A.level(l)
        lhs = integrate_chain(omega, canonicalize(boundary(Al)), quad_tol)
        rhs = integrate_elementary(sd, star_elementary(elementize_any(Al, l)))
        rep.levels.append(l)
        rep.lhs.append(lhs)
        rep.rhs.append(rhs)
    return rep.finish(tol, t0)


def verify_laplace(
    A: ChainletSeq,
    omega: FormField,
    levels: Sequence[int],
    rel_tol: float = 0.05,
    quad_tol: float = 1e-9,
) -> ExperimentReport:
    """Laplace identity (trend-based): Delta A against (-1)^{n-1} box(omega)."""
    t0 = time.perf_counter()
    sign = -1.0 if (A.n - 1) % 2 else 1.0
    box = box_form(omega)
    lap = laplace(A)
    rep = ExperimentReport("laplace", [], [], [])
    for l in levels:
        rep.levels.append(l)
        rep.lhs.append(integrate_chain(omega, lap.level(l), quad_tol))
        rep.rhs.append(sign * integrate_chain(box, A.level(l), quad_tol))
    scale = max(1.0, abs(rep.rhs[-1]))
    rep.extra["scale"] = scale
    return rep.finish(rel_tol * scale, t0)


def verify_distribution(A, f: FormField, tol: float = 1e-6) -> ExperimentReport:
    """theta(star boundary A)(f) = integral of f' over A, in one dimension."""
    t0 = time.perf_counter()
    if isinstance(A, ChainletSeq):
        P = A.level(0)
    else:
        P = A
    if P.n != 1 or P.k != 1:
        raise ValueError("distribution check needs a 1-chain in R^1")
    if f.k != 0:
        raise ValueError("f must be a 0-form")
    fdx = FormField(1, 1, {(1,): f.components[()]}, unchecked=True)
    B = canonicalize(boundary(P))
    lhs = integrate_elementary(fdx, star_elementary(elementize_any(B, 0)))
    rhs = integrate_chain(exterior_derivative(f), P, tol=min(tol / 10.0, 1e-9))
    rep = ExperimentReport("distribution", [0], [lhs], [rhs])
    return rep.finish(tol, t0)


# -- generators ---------------------------------------------------------------


def _koch_points(level: int, side: float = 1.0) -> list[np.ndarray]:
    """Snowflake vertex loop at the given level, counterclockwise."""
    if level > 10:
        raise ValueError("koch level capped at 10")
    h = side * math.sqrt(3.0) / 2.0
    pts = [
        np.array([0.0, 0.0]),
        np.array([side, 0.0]),
        np.array([side / 2.0, h]),
    ]
    rot = np.array(
        [
            [math.cos(-math.pi / 3.0), -math.sin(-math.pi / 3.0)],
            [math.sin(-math.pi / 3.0), math.cos(-math.pi / 3.0)],
        ]
    )
    for _ in range(level):
        nxt = []
        m = len(pts)
        for i in range(m):
            a, b = pts[i], pts[(i + 1) % m]
            x = a + (b - a) / 3.0
            y = a + 2.0 * (b - a) / 3.0
            z = x + rot @ (y - x)
            nxt.extend([a, x, z, y])
        pts = nxt
    return pts


def gen_koch(level: int, side: float = 1.0) -> PolyChain:
    """Closed snowflake polygon boundary as a 1-chain of segments."""
    pts = _koch_points(level, side)
    m = len(pts)
    terms = tuple(
        (1.0, Simplex((tuple(pts[i]), tuple(pts[(i + 1) % m])))) for i in range(m)
    )
    return PolyChain(2, 1, terms)


def koch_step_region(level: int, side: float = 1.0) -> PolyChain:
    """2-chain of the bump triangles with boundary(C) ~ P_{level+1} - P_level."""
    pts = _koch_points(level, side)
    rot = np.array(
        [
            [math.cos(-math.pi / 3.0), -math.sin(-math.pi / 3.0)],
            [math.sin(-math.pi / 3.0), math.cos(-math.pi / 3.0)],
        ]
    )
    m = len(pts)
    tris = []
    for i in range(m):
        a, b = pts[i], pts[(i + 1) % m]
        x = a + (b - a) / 3.0
        y = a + 2.0 * (b - a) / 3.0
        z = x + rot @ (y - x)
        tris.append((1.0, Simplex((tuple(x), tuple(z), tuple(y)))))
    return PolyChain(2, 2, tuple(tris))


def koch_seq(r: int = 1, side: float = 1.0) -> ChainletSeq:
    return ChainletSeq(2, 1, r, lambda l: gen_koch(l, side), name="koch")


def weierstrass_profile(a: float, b: float, n_terms: int) -> Callable[[np.ndarray], np.ndarray]:
    """Truncated rough cosine series shifted to be strictly positive on [0, 1]."""
    if not (0.0 < a < 1.0):
        raise ValueError("need 0 < a < 1")
    if a * b < 1.0:
        raise ValueError("need a*b >= 1 for the rough regime")
    if n_terms > 30:
        raise ValueError("truncation capped at 30 terms")

    def raw(x: np.ndarray) -> np.ndarray:
        out = np.zeros_like(x, dtype=float)
        for i in range(n_terms + 1):
            out += a**i * np.cos(b**i * math.pi * x)
        return out

    grid = np.linspace(0.0, 1.0, 4097)
    shift = max(0.0, -float(raw(grid).min())) + 0.01

    def g(x: np.ndarray) -> np.ndarray:
        return raw(np.asarray(x, dtype=float)) + shift

    return g


def gen_weierstrass_subgraph(a: float, b: float, n_terms: int, level: int) -> PolyChain:
    """Subgraph step region as stacked dyadic unit squares at the given level.

    Column heights are snapped to the nearest grid multiple, so the mass
    converges to the integral of the profile at rate 2^-level.
    """
    g = weierstrass_profile(a, b, n_terms)
    h = 2.0 ** (-level)
    cols = 2**level
    mids = (np.arange(cols) + 0.5) * h
    heights = np.rint(g(mids) * 2**level).astype(int)
    terms = []
    for i in range(cols):
        xc = (i + 0.5) * h
        for j in range(int(heights[i])):
            yc = (j + 0.5) * h
            terms.append((1.0, Cube((xc, yc), h, axes=(1, 2))))
    return PolyChain(2, 2, tuple(terms))


def gen_cube_sequence(level: int) -> PolyChain:
    """Concentrated square sequence 2^{2l} sigma_l at the origin of the plane."""
    return PolyChain(
        2, 2, ((2.0 ** (2 * level), Cube((0.0, 0.0), 2.0 ** (-level), axes=(1, 2))),)
    )


def gen_disk(level: int) -> PolyChain:
    """Inscribed regular 3*2^level-gon triangulated to the centroid, ccw."""
    m = 3 * 2**level
    angles = 2.0 * math.pi * np.arange(m) / m
    verts = [
        (float(math.cos(t)), float(math.sin(t))) for t in angles
    ]
    center = (0.0, 0.0)
    tris = tuple(
        (1.0, Simplex((center, verts[i], verts[(i + 1) % m]))) for i in range(m)
    )
    return PolyChain(2, 2, tris)


def disk_seq(r: int = 1) -> ChainletSeq:
    return ChainletSeq(2, 2, r, gen_disk, name="disk")


# -- standard small domains ----------------------------------------------------


def unit_square_chain(n: int = 2) -> PolyChain:
    """[0,1]^2, axis-aligned, in R^2 or flat at height 0 in R^3."""
    if n == 2:
        return PolyChain(2, 2, ((1.0, Cube((0.5, 0.5), 1.0, axes=(1, 2))),))
    if n == 3:
        return PolyChain(3, 2, ((1.0, Cube((0.5, 0.5, 0.0), 1.0, axes=(1, 2))),))
    raise ValueError("unit square lives in n = 2 or 3")


def unit_segment_chain(n: int = 1) -> PolyChain:
    """[0,1] on the first axis."""
    center = (0.5,) + (0.0,) * (n - 1)
    return PolyChain(n, 1, ((1.0, Cube(center, 1.0, axes=(1,))),))


def segments_pair_chain() -> PolyChain:
    """[0,1] + [2,3] in R^1 (the distribution-derivative test domain)."""
    return PolyChain(
        1,
        1,
        (
            (1.0, Cube((0.5,), 1.0, axes=(1,))),
            (1.0, Cube((2.5,), 1.0, axes=(1,))),
        ),
    )


NAMED_CHAINS: dict[str, Callable[[], object]] = {
    "unit_square2": lambda: unit_square_chain(2),
    "unit_square3": lambda: unit_square_chain(3),
    "unit_segment1": lambda: unit_segment_chain(1),
    "unit_segment2": lambda: unit_segment_chain(2),
    "segments13": segments_pair_chain,
    "koch": lambda: gen_koch(4),
    "disk": lambda: gen_disk(4),
}


def named_chainlet(name: str, r: int = 1) -> ChainletSeq:
    """Chainlet sequences for the CLI's named domains."""
    if name == "disk":
        return disk_seq(r)
    if name == "koch":
        return koch_seq(r)
    if name in NAMED_CHAINS:
        return ChainletSeq.from_chain(NAMED_CHAINS[name](), r, name=name)
    raise KeyError(f"unknown chain name {name!r}")
