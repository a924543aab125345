"""JSON / CSV input-output for chains, elements, forms, certificates, reports.

Chain JSON:     {"n":, "k":, "terms": [{"coeff":, "cell": {...}}]}
  simplex cell: {"type": "simplex", "vertices": [[...], ...]}
  cube cell:    {"type": "cube", "center": [...], "axes": [[...], ...],
                 "edge":, "sign":} with axes = frame rows (one-hot for
                 axis-aligned cubes, which the loader detects exactly)
Element JSON:   {"n":, "k":, "terms": [{"b":, "p": [...],
                 "alpha_frame": [[...], ...], "alpha_mass":}]}
Form JSON:      {"n":, "degree":, "components": {"1,2": [[coeff, [exps]], ...]}}

Floats round-trip bit-exactly through json (repr-based), so dyadic cubes stay
exact across save / load.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .chains import Cube, PolyChain, Simplex
from .elements import ElementaryChain, ElementTerm
from .exterior import KDirection
from .forms import FormField, Polynomial
from .harness import ExperimentReport
from .norms import Decomposition, DiffCell, DiffChain


def _cell_to_dict(cell) -> dict:
    if isinstance(cell, Simplex):
        return {"type": "simplex", "vertices": [list(v) for v in cell.vertices]}
    rows = [list(r) for r in cell.frame_matrix()] if cell.k else []
    return {
        "type": "cube",
        "center": list(cell.center),
        "axes": rows,
        "edge": cell.edge,
        "sign": cell.sign,
    }


def _axis_indices_from_rows(rows: list[list[float]]) -> tuple | None:
    axes = []
    for row in rows:
        nz = [i for i, x in enumerate(row) if x != 0.0]
        if len(nz) != 1 or row[nz[0]] != 1.0:
            return None
        axes.append(nz[0] + 1)
    if sorted(axes) != axes or len(set(axes)) != len(axes):
        return None
    return tuple(axes)


def _cell_from_dict(d: dict):
    if d["type"] == "simplex":
        verts = [tuple(v) for v in d["vertices"]]
        if len(verts) == 1:
            return Cube.point(verts[0])
        return Simplex(tuple(verts))
    if d["type"] == "cube":
        rows = d.get("axes", [])
        if not rows:
            return Cube.point(tuple(d["center"]))
        axes = _axis_indices_from_rows(rows)
        if axes is not None:
            return Cube(tuple(d["center"]), d["edge"], axes=axes, sign=d.get("sign", 1))
        return Cube(
            tuple(d["center"]),
            d["edge"],
            frame=tuple(tuple(r) for r in rows),
            sign=d.get("sign", 1),
        )
    raise ValueError(f"unknown cell type {d.get('type')!r}")


def chain_to_dict(P: PolyChain) -> dict:
    return {
        "n": P.n,
        "k": P.k,
        "terms": [{"coeff": a, "cell": _cell_to_dict(c)} for a, c in P.terms],
    }


def chain_from_dict(d: dict) -> PolyChain:
    terms = tuple((t["coeff"], _cell_from_dict(t["cell"])) for t in d["terms"])
    return PolyChain(int(d["n"]), int(d["k"]), terms)


def elementary_to_dict(E: ElementaryChain) -> dict:
    return {
        "n": E.n,
        "k": E.k,
        "terms": [
            {
                "b": t.coeff,
                "p": list(t.point),
                "alpha_frame": [list(r) for r in t.direction.frame],
                "alpha_mass": t.size,
            }
            for t in E.terms
        ],
    }


def elementary_from_dict(d: dict) -> ElementaryChain:
    n = int(d["n"])
    terms = []
    for t in d["terms"]:
        frame = tuple(tuple(r) for r in t["alpha_frame"])
        direction = (
            KDirection.from_frame(frame, n) if frame else KDirection.scalar_direction(n)
        )
        terms.append(ElementTerm(t["b"], tuple(t["p"]), direction, t.get("alpha_mass", 1.0)))
    return ElementaryChain(n, int(d["k"]), tuple(terms))


def form_from_dict(d: dict) -> FormField:
    n = int(d["n"])
    comps = {}
    for key, table in d["components"].items():
        idx = tuple(int(s) for s in str(key).split(",")) if str(key) else ()
        poly = Polynomial(
            n, {tuple(exps): float(c) for c, exps in table}
        )
        comps[idx] = poly
    k = int(d.get("degree", len(next(iter(comps.keys()), ()))))
    f = FormField(n, k, comps, name=d.get("name"), unchecked=True)
    from .forms import exterior_derivative

    if k < n:
        f = FormField(
            n, k, comps, analytic_d=exterior_derivative(f), name=d.get("name"), unchecked=True
        )
    return f


def decomposition_to_dict(dec: Decomposition) -> dict:
    return {
        "diffchains": [
            {
                "order": D.order,
                "terms": [
                    {
                        "coeff": a,
                        "base": _cell_to_dict(dc.base),
                        "vectors": [list(v) for v in dc.vectors],
                    }
                    for a, dc in D.terms
                ],
            }
            for D in dec.diffchains
        ],
        "cochain": chain_to_dict(dec.cochain) if dec.cochain is not None else None,
    }


def decomposition_from_dict(d: dict) -> Decomposition:
    chains = []
    for dd in d["diffchains"]:
        terms = tuple(
            (
                t["coeff"],
                DiffCell(_cell_from_dict(t["base"]), tuple(tuple(v) for v in t["vectors"])),
            )
            for t in dd["terms"]
        )
        chains.append(DiffChain(int(dd["order"]), terms))
    co = chain_from_dict(d["cochain"]) if d.get("cochain") else None
    return Decomposition(tuple(chains), co)


def report_to_dict(rep: ExperimentReport) -> dict:
    return {
        "name": rep.name,
        "levels": list(rep.levels),
        "lhs": list(rep.lhs),
        "rhs": list(rep.rhs),
        "abs_err": list(rep.abs_err),
        "rel_err": list(rep.rel_err),
        "rate": rep.rate,
        "rate_r2": rep.rate_r2,
        "rate_verdict": rep.rate_verdict,
        "tolerance": rep.tolerance,
        "passed": rep.passed,
        "runtime_s": rep.runtime_s,
        "extra": {k: _jsonable(v) for k, v in rep.extra.items()},
    }


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, (bool, int, float, str)) or v is None:
        return v
    return repr(v)


def write_report_csv(rep: ExperimentReport, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["level", "lhs", "rhs", "abs_err", "rate"])
        for row in rep.rows():
            w.writerow(row)


def save_json(obj: dict, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2))


def load_json(path) -> dict:
    return json.loads(Path(path).read_text())
