"""Built-in form dictionary: named forms, certified norm tables, oracle forms.

Exact |omega|_r tables exist only for the curated entries (constant forms and
affine-coefficient forms with hand-derived suprema over the declared box);
everything else is integrated fine but reports sampled, non-certified norm
estimates.  The oracle family is the fixed 12-form dictionary used to decide
chain equality by integration.
"""

from __future__ import annotations

import math
from itertools import combinations_with_replacement

from .exterior import KVector, all_index_sets, mass_kvector
from .forms import FormField, Polynomial

#: Half-width of the default certified box [-BOX_L, BOX_L]^n.
BOX_L = 4.0


def _box(n: int, L: float = BOX_L) -> tuple:
    return ((-L, L),) * n


def _const_form(n: int, comps: dict, comass: float, name: str) -> FormField:
    k = len(next(iter(comps))) if comps else 0
    return FormField(
        n,
        k,
        {i: Polynomial.constant(n, c) for i, c in comps.items()},
        analytic_d=FormField(n, min(k + 1, n), {}, unchecked=True) if k < n else None,
        exact_norms={r: comass for r in range(5)},
        support_region=_box(n),
        name=name,
        unchecked=True,
    )


def _affine_form(
    n: int,
    comps: dict,
    sup0: float,
    slope: float,
    dsup: float,
    name: str,
    analytic_d: FormField | None,
) -> FormField:
    """Single- or comass-known affine form with |w|_0 = sup0, |w|_{r>=1} = max(sup0, slope, dsup)."""
    hi = max(sup0, slope, dsup)
    norms = {0: sup0}
    norms.update({r: hi for r in range(1, 5)})
    k = len(next(iter(comps)))
    return FormField(
        n,
        k,
        comps,
        analytic_d=analytic_d,
        exact_norms=norms,
        support_region=_box(n),
        name=name,
    )


def _zero_form_field(n: int, k: int) -> FormField:
    return FormField(n, k, {}, unchecked=True)


def _build_named(name: str, n: int) -> FormField:
    L = BOX_L
    x = lambda j, p=1, c=1.0: Polynomial.coordinate(n, j, p, c)
    const = lambda c: Polynomial.constant(n, c)

    basis_1forms = {"dx": 1, "dy": 2, "dz": 3}
    if name in basis_1forms:
        j = basis_1forms[name]
        if j > n:
            raise KeyError(f"{name} needs ambient dimension >= {j}")
        return _const_form(n, {(j,): 1.0}, 1.0, name)
    if name == "one0":
        return _const_form(n, {(): 1.0}, 1.0, name)
    if name == "area2":
        if n < 2:
            raise KeyError("area2 needs n >= 2")
        return _const_form(n, {(1, 2): 1.0}, 1.0, name)
    if name in ("dxdy", "dxdz", "dydz"):
        pairs = {"dxdy": (1, 2), "dxdz": (1, 3), "dydz": (2, 3)}
        if n < 3:
            raise KeyError(f"{name} needs n >= 3")
        return _const_form(n, {pairs[name]: 1.0}, 1.0, name)
    if name == "vol3":
        if n != 3:
            raise KeyError("vol3 needs n = 3")
        return _const_form(n, {(1, 2, 3): 1.0}, 1.0, name)

    if name == "x_dy":
        if n < 2:
            raise KeyError("x_dy needs n >= 2")
        ad = _const_form(n, {(1, 2): 1.0}, 1.0, "d(x_dy)")
        return _affine_form(n, {(2,): x(1)}, L, 1.0, 1.0, name, ad)
    if name == "y_dx":
        if n < 2:
            raise KeyError("y_dx needs n >= 2")
        ad = _const_form(n, {(1, 2): -1.0}, 1.0, "d(y_dx)")
        return _affine_form(n, {(1,): x(2)}, L, 1.0, 1.0, name, ad)
    if name == "minus_y_dx":
        if n < 2:
            raise KeyError("minus_y_dx needs n >= 2")
        ad = _const_form(n, {(1, 2): 1.0}, 1.0, "d(minus_y_dx)")
        return _affine_form(n, {(1,): x(2, 1, -1.0)}, L, 1.0, 1.0, name, ad)
    if name == "x_dx":
        ad = _zero_form_field(n, 2) if n >= 2 else None
        return _affine_form(n, {(1,): x(1)}, L, 1.0, 0.0, name, ad)
    if name == "radial1":
        if n < 2:
            raise KeyError("radial1 needs n >= 2")
        comps = {(j,): x(j) for j in range(1, n + 1)}
        ad = _zero_form_field(n, 2)
        return _affine_form(n, comps, L * math.sqrt(n), 1.0, 0.0, name, ad)
    if name == "perp1":
        if n != 2:
            raise KeyError("perp1 needs n = 2")
        ad = _const_form(n, {(1, 2): 2.0}, 2.0, "d(perp1)")
        return _affine_form(n, {(1,): x(2, 1, -1.0), (2,): x(1)}, L * math.sqrt(2), 1.0, 2.0, name, ad)

    # polynomial entries without certified norms
    if name == "x2":
        ad = FormField(n, 1, {(1,): x(1, 1, 2.0)}, support_region=_box(n), unchecked=True)
        return FormField(n, 0, {(): x(1, 2)}, analytic_d=ad, support_region=_box(n), name=name)
    if name == "x3":
        ad = FormField(n, 1, {(1,): x(1, 2, 3.0)}, support_region=_box(n), unchecked=True)
        return FormField(n, 0, {(): x(1, 3)}, analytic_d=ad, support_region=_box(n), name=name)
    if name == "x2_dx":
        ad = _zero_form_field(n, min(2, n)) if n >= 2 else None
        return FormField(n, 1, {(1,): x(1, 2)}, analytic_d=ad, support_region=_box(n), name=name)
    if name == "x2_dy":
        if n < 2:
            raise KeyError("x2_dy needs n >= 2")
        ad = FormField(n, 2, {(1, 2): x(1, 1, 2.0)}, unchecked=True)
        return FormField(n, 1, {(2,): x(1, 2)}, analytic_d=ad, support_region=_box(n), name=name)
    if name == "x3_dy":
        if n < 2:
            raise KeyError("x3_dy needs n >= 2")
        ad = FormField(n, 2, {(1, 2): x(1, 2, 3.0)}, unchecked=True)
        return FormField(n, 1, {(2,): x(1, 3)}, analytic_d=ad, support_region=_box(n), name=name)
    if name == "xy_dx":
        if n < 2:
            raise KeyError("xy_dx needs n >= 2")
        xy = Polynomial.monomial(n, (1, 1) + (0,) * (n - 2))
        ad = FormField(n, 2, {(1, 2): x(1, 1, -1.0)}, unchecked=True)
        return FormField(n, 1, {(1,): xy}, analytic_d=ad, support_region=_box(n), name=name)
    if name == "harmonic0":
        if n < 2:
            raise KeyError("harmonic0 needs n >= 2")
        # x^2 - y^2 is harmonic, so its form Laplacian vanishes
        p = Polynomial(n, {(2,) + (0,) * (n - 1): 1.0, (0, 2) + (0,) * (n - 2): -1.0})
        ad = FormField(
            n, 1, {(1,): x(1, 1, 2.0), (2,): x(2, 1, -2.0)}, unchecked=True
        )
        return FormField(n, 0, {(): p}, analytic_d=ad, support_region=_box(n), name=name)
    raise KeyError(f"unknown form name {name!r}")


#: Names accepted by named_form / the CLI --form flag.
NAMED_FORMS = (
    "dx", "dy", "dz", "one0", "area2", "dxdy", "dxdz", "dydz", "vol3",
    "x_dy", "y_dx", "minus_y_dx", "x_dx", "radial1", "perp1",
    "x2", "x3", "x2_dx", "x2_dy", "x3_dy", "xy_dx", "harmonic0",
)


def named_form(name: str, n: int) -> FormField:
    """Look up a built-in form by name for ambient dimension n."""
    if name not in NAMED_FORMS:
        raise KeyError(f"unknown form name {name!r}")
    return _build_named(name, n)


def calibration_form(u: KVector, name: str = "calibration") -> FormField | None:
    """Constant form dual to u/|u| with comass exactly 1.

    Needs u simple, which is automatic for k in {0, 1, n-1, n} and hence for
    every grade when n <= 3; returns None outside that guarantee or for u = 0.
    """
    m = mass_kvector(u)
    if m == 0.0:
        return None
    if not (u.n <= 3 or u.k in (0, 1, u.n - 1, u.n)):
        return None
    comps = {idx: c / m for idx, c in u.coeffs.items()}
    return _const_form(u.n, comps, 1.0, name)


def standard_dictionary(n: int, k: int) -> list[FormField]:
    """Certified dictionary entries of degree k in R^n (for norm lower bounds)."""
    out = []
    for name in NAMED_FORMS:
        try:
            f = named_form(name, n)
        except KeyError:
            continue
        if f.k == k and f.exact_norms is not None:
            out.append(f)
    return out


def _poly_bank(n: int) -> list[Polynomial]:
    max_deg = 7 if n == 1 else 3
    bank = [Polynomial.constant(n, 1.0)]
    for deg in range(1, max_deg + 1):
        for combo in combinations_with_replacement(range(n), deg):
            exps = [0] * n
            for j in combo:
                exps[j] += 1
            bank.append(Polynomial.monomial(n, tuple(exps)))
    if n >= 2:
        bank.append(Polynomial(n, {(1, 0) + (0,) * (n - 2): 1.0, (0, 1) + (0,) * (n - 2): 1.0}))
        bank.append(Polynomial(n, {(1, 0) + (0,) * (n - 2): 1.0, (0, 1) + (0,) * (n - 2): -1.0}))
    return bank


_ORACLE_CACHE: dict = {}


def oracle_forms(n: int, k: int, count: int = 12) -> list[FormField]:
    """The fixed polynomial dictionary used for integration-oracle chain equality."""
    cached = _ORACLE_CACHE.get((n, k, count))
    if cached is not None:
        return cached
    sets = all_index_sets(n, k) if k else [()]
    bank = _poly_bank(n)
    out = []
    for i in range(min(count, len(sets) * len(bank))):
        idx = sets[i % len(sets)]
        poly = bank[i // len(sets)]
        out.append(FormField(n, k, {idx: poly}, name=f"oracle{i}", unchecked=True))
    _ORACLE_CACHE[(n, k, count)] = out
    return out
