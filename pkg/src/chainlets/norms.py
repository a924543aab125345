"""Diffcells, diffchains, and certified flat / r-natural norm brackets.

The r-natural norm is an infimum over an infinite decomposition space, so the
artifact never computes "the" norm: natural_upper returns a valid upper bound
with a recomposition certificate, natural_lower a valid lower bound from the
duality with certified forms, and NormBracket carries both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .chains import (
    Cell,
    Cube,
    PolyChain,
    Simplex,
    boundary,
    canonicalize,
    mass_chain,
    refine_to_level,
    vec_chain,
)
from .dictionary import calibration_form, oracle_forms, standard_dictionary
from .forms import FormField, integrate_chain

#: Maximum diffcell order the artifact handles; experiments need r <= 2.
R_MAX = 4

ORACLE_TOL = 1e-9


@dataclass(frozen=True)
class DiffCell:
    """(k, j)-diffcell: iterated translation difference of a base cell."""

    base: Cell
    vectors: tuple

    def __post_init__(self):
        vecs = tuple(tuple(float(x) for x in v) for v in self.vectors)
        if len(vecs) > R_MAX:
            raise ValueError(f"diffcell order exceeds r_max = {R_MAX}")
        if any(math.fsum(x * x for x in v) == 0.0 for v in vecs):
            raise ValueError("translation vectors must be nonzero")
        object.__setattr__(self, "vectors", vecs)

    @property
    def order(self) -> int:
        return len(self.vectors)

    @property
    def mass(self) -> float:
        """M(base) * |v_1| ... |v_j|."""
        out = self.base.measure
        for v in self.vectors:
            out *= math.sqrt(math.fsum(x * x for x in v))
        return out

    def expand(self) -> list[tuple[float, Cell]]:
        """Inclusion-exclusion expansion into 2^j signed translated copies."""
        terms = [(1.0, self.base)]
        for v in self.vectors:
            terms = [t for t in terms] + [(-a, c.translate(v)) for a, c in terms]
        return terms


@dataclass(frozen=True)
class DiffChain:
    """Homogeneous-order formal sum of diffcells."""

    order: int
    terms: tuple

    def __post_init__(self):
        terms = tuple((float(a), dc) for a, dc in self.terms)
        if any(dc.order != self.order for _, dc in terms):
            raise ValueError("diffchain terms must share the order")
        object.__setattr__(self, "terms", terms)

    @staticmethod
    def empty(order: int) -> "DiffChain":
        return DiffChain(order, ())


def diffchain_mass(D: DiffChain) -> float:
    """sum |a_i| M(sigma_i^0) |v_1| ... |v_j|; order 0 reduces to chain mass."""
    return math.fsum(abs(a) * dc.mass for a, dc in D.terms)


def expand_diffchain(D: DiffChain, n: int, k: int) -> PolyChain:
    out = []
    for a, dc in D.terms:
        for s, cell in dc.expand():
            out.append((a * s, cell))
    return PolyChain(n, k, tuple(out))


@dataclass(frozen=True)
class Decomposition:
    """Certificate P = sum_j D^j + boundary(C)."""

    diffchains: tuple
    cochain: PolyChain | None = None

    @staticmethod
    def trivial(P: PolyChain) -> "Decomposition":
        d0 = DiffChain(0, tuple((a, DiffCell(cell, ())) for a, cell in P.terms))
        return Decomposition((d0,))

    @staticmethod
    def from_boundary(C: PolyChain) -> "Decomposition":
        return Decomposition((), cochain=C)

    def diff_mass_total(self) -> float:
        return math.fsum(diffchain_mass(D) for D in self.diffchains)

    def max_order(self) -> int:
        return max((D.order for D in self.diffchains), default=0)

    def expand(self, n: int, k: int) -> PolyChain:
        out = PolyChain.empty(n, k)
        for D in self.diffchains:
            out = out + expand_diffchain(D, n, k)
        if self.cochain is not None:
            out = out + boundary(self.cochain)
        return out


def chains_equal(A: PolyChain, B: PolyChain, tol: float = ORACLE_TOL) -> bool:
    """Integration-oracle equality against the fixed 12-form dictionary."""
    if (A.n, A.k) != (B.n, B.k):
        return False
    scale = 1.0 + mass_chain(A) + mass_chain(B)
    qtol = tol * scale / 20.0
    for omega in oracle_forms(A.n, A.k):
        va = integrate_chain(omega, A, qtol)
        vb = integrate_chain(omega, B, qtol)
        if abs(va - vb) > tol * scale:
            return False
    return True


@dataclass(frozen=True)
class NormBracket:
    """Certified two-sided estimate lower <= |P|^(natural_r) <= upper."""

    r: int
    lower: float
    upper: float
    certificate: Decomposition
    lower_witness: str | None = None

    def __post_init__(self):
        if not (-1e-12 <= self.lower <= self.upper + 1e-9 * (1.0 + abs(self.upper))):
            raise ValueError(
                f"inconsistent bracket: lower {self.lower} exceeds upper {self.upper}"
            )


# -- upper bounds ------------------------------------------------------------


def _congruence_key(cell: Cell):
    """(translation-congruence key, anchor position) for greedy pairing."""
    if isinstance(cell, Simplex):
        v0 = np.array(cell.vertices[0])
        rel = tuple(
            tuple(round(x, 12) for x in (np.array(v) - v0)) for v in cell.vertices[1:]
        )
        return ("s", rel), np.array(cell.vertices[0])
    if cell.is_axis_aligned:
        return ("c", cell.axes, cell.edge), np.array(cell.center)
    F = np.round(cell.frame_matrix(), 12)
    return ("g", F.tobytes(), round(cell.edge, 12)), np.array(cell.center)


def _pair_items(items: list[dict]) -> tuple[list[tuple[float, dict, np.ndarray]], list[dict]]:
    """Greedy nearest-neighbor pairing of opposite-sign congruent items.

    Each item is {'coeff', 'pos', 'payload'}.  Returns (pairs, leftovers)
    where a pair is (amount, positive item, translation vector).
    """
    pos = sorted(
        (dict(it) for it in items if it["coeff"] > 0), key=lambda it: tuple(it["pos"])
    )
    neg = sorted(
        (dict(it) for it in items if it["coeff"] < 0), key=lambda it: tuple(it["pos"])
    )
    pairs = []
    for p in pos:
        while p["coeff"] > 0 and neg:
            dists = [
                (float(np.linalg.norm(q["pos"] - p["pos"])), qi)
                for qi, q in enumerate(neg)
            ]
            dists.sort(key=lambda t: (t[0], tuple(neg[t[1]]["pos"])))
            _, qi = dists[0]
            q = neg[qi]
            amount = min(p["coeff"], -q["coeff"])
            pairs.append((amount, p, q["pos"] - p["pos"]))
            p["coeff"] -= amount
            q["coeff"] += amount
            if q["coeff"] == 0:
                neg.pop(qi)
    leftovers = [p for p in pos if p["coeff"] > 0] + [q for q in neg if q["coeff"] < 0]
    return pairs, leftovers


def greedy_decomposition(P: PolyChain, r: int) -> Decomposition:
    """Built-in upper search: pair congruent cells into diffcells up to order r.

    Deterministic (cells pre-sorted); designed for dyadic cubical chains,
    where opposite-coefficient congruent cubes pair into order-1 diffcells
    with short translations; order is raised further only when it helps.
    """
    Q = canonicalize(P)
    if all(isinstance(c, Cube) and c.is_dyadic for _, c in Q.terms) and Q.terms:
        levels = [c.level for _, c in Q.terms if c.k > 0]
        if levels:
            Q = canonicalize(refine_to_level(Q, max(levels)))
    groups: dict = {}
    for a, cell in Q.terms:
        key, pos = _congruence_key(cell)
        groups.setdefault(key, []).append({"coeff": a, "pos": pos, "payload": cell})
    diff_terms: dict[int, list] = {j: [] for j in range(r + 1)}
    for key, items in sorted(groups.items(), key=lambda kv: repr(kv[0])):
        pairs, leftovers = _pair_items(items)
        # order-1 diffcells from cell pairs
        level_items = [
            {
                "coeff": amount,
                "pos": it["pos"],
                "payload": DiffCell(it["payload"], (tuple(v),)),
            }
            for amount, it, v in pairs
        ]
        for it in leftovers:
            diff_terms[0].append((it["coeff"], DiffCell(it["payload"], ())))
        order = 1
        while level_items:
            if order >= r:
                diff_terms[order].extend(
                    (it["coeff"], it["payload"]) for it in level_items
                )
                break
            # raise order only where pairing the diffcells is an improvement
            subgroups: dict = {}
            for it in level_items:
                vkey = tuple(
                    tuple(round(x, 12) for x in v) for v in it["payload"].vectors
                )
                subgroups.setdefault(vkey, []).append(it)
            next_items = []
            for _, sub in sorted(subgroups.items()):
                pairs2, left2 = _pair_items(sub)
                for amount, it, v in pairs2:
                    vn = float(np.linalg.norm(v))
                    base_dc = it["payload"]
                    if vn < 2.0:
                        next_items.append(
                            {
                                "coeff": amount,
                                "pos": it["pos"],
                                "payload": DiffCell(
                                    base_dc.base, base_dc.vectors + (tuple(v),)
                                ),
                            }
                        )
                    else:
                        diff_terms[order].append((amount, base_dc))
                        shifted = DiffCell(
                            _translate_cell(base_dc.base, v), base_dc.vectors
                        )
                        diff_terms[order].append((-amount, shifted))
                diff_terms[order].extend((it["coeff"], it["payload"]) for it in left2)
            level_items = next_items
            order += 1
    chains = tuple(
        DiffChain(j, tuple(terms)) for j, terms in sorted(diff_terms.items()) if terms
    )
    return Decomposition(chains)


def _translate_cell(cell: Cell, v) -> Cell:
    return cell.translate(v)


def _decomposition_value(P: PolyChain, dec: Decomposition, r: int) -> float:
    value = dec.diff_mass_total()
    if dec.cochain is not None and dec.cochain.terms:
        value += natural_upper(dec.cochain, r - 1)[0]
    return value


def natural_upper(
    P: PolyChain, r: int, hint: Decomposition | None = None
) -> tuple[float, Decomposition]:
    """Certified upper bound on the r-natural norm, with its decomposition.

    The infimum form: |P|` <= sum_j ||D^j||_j + |C|^(natural_{r-1}) over
    P = sum D^j + dC.  With a hint the hint is validated (integration oracle)
    and evaluated; the built-in search never exceeds the trivial bound M(P).
    """
    if r < 0:
        raise ValueError("r must be nonnegative")
    Q = canonicalize(P)
    trivial = Decomposition.trivial(Q)
    if r == 0:
        return mass_chain(Q), trivial
    candidates = [(mass_chain(Q), trivial)]
    if hint is not None:
        if hint.max_order() > r:
            raise ValueError("certificate does not recompose chain: order exceeds r")
        if not chains_equal(hint.expand(P.n, P.k), Q):
            raise ValueError("certificate does not recompose chain")
        candidates.append((_decomposition_value(P, hint, r), hint))
    searched = greedy_decomposition(Q, r)
    candidates.append((_decomposition_value(P, searched, r), searched))
    return min(candidates, key=lambda t: t[0])


def natural_lower(
    P: PolyChain, r: int, dictionary: Sequence[FormField] | None = None
) -> tuple[float, str | None]:
    """Duality lower bound: max |integral of omega over P| / |omega|_r.

    The default dictionary is the certified standard family plus the constant
    form calibrated to Vec(P), so the bound dominates M(Vec(P)).
    """
    if dictionary is None:
        forms = list(standard_dictionary(P.n, P.k))
        cal = calibration_form(vec_chain(P))
        if cal is not None:
            forms.append(cal)
    else:
        forms = list(dictionary)
    best = 0.0
    witness = None
    for omega in forms:
        if omega.exact_norms is None or r not in omega.exact_norms:
            raise ValueError(
                f"dictionary form {omega.name!r} lacks an exact norm at r = {r}"
            )
        denom = omega.exact_norms[r]
        if denom == 0.0:
            continue
        val = abs(integrate_chain(omega, P, tol=1e-11 * (1.0 + mass_chain(P)))) / denom
        if val > best:
            best = val
            witness = omega.name
    return best, witness


def natural_bracket(
    P: PolyChain,
    r: int,
    dictionary: Sequence[FormField] | None = None,
    hint: Decomposition | None = None,
) -> NormBracket:
    upper, cert = natural_upper(P, r, hint)
    lower, witness = natural_lower(P, r, dictionary)
    return NormBracket(r, lower, upper, cert, witness)


def flat_upper(
    P: PolyChain, hint: tuple[PolyChain, PolyChain] | None = None
) -> float:
    """Upper bound on the flat norm inf{M(B) + M(C): P = B + dC}."""
    best = mass_chain(canonicalize(P))
    if hint is not None:
        B, C = hint
        recomposed = B + boundary(C)
        if not chains_equal(recomposed, P):
            raise ValueError("flat-norm hint does not recompose chain")
        best = min(best, mass_chain(B) + mass_chain(C))
    return best
