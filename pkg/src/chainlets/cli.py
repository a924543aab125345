"""Command-line front end: generate domains, integrate, estimate norms, verify theorems.

Exit codes: 0 all pass flags true, 1 a verification failed, 2 unknown
form/chain name or path, 3 numerical failure (partial report written).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import harness
from .dictionary import NAMED_FORMS, named_form
from .forms import FormField, QuadratureError, integrate_chain
from .harness import NAMED_CHAINS, ExperimentReport, named_chainlet
from .norms import natural_bracket, flat_upper
from .serialization import (
    chain_from_dict,
    chain_to_dict,
    form_from_dict,
    load_json,
    report_to_dict,
    save_json,
    write_report_csv,
)

ENV_JOBS = "CHAINLETS_JOBS"


class UnknownNameError(KeyError):
    pass


def _default_jobs() -> int:
    env = os.environ.get(ENV_JOBS)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _load_chain(spec: str):
    if spec in NAMED_CHAINS:
        return NAMED_CHAINS[spec]()
    path = Path(spec)
    if not path.exists():
        raise UnknownNameError(f"unknown chain name or missing path: {spec}")
    return chain_from_dict(load_json(path))


def _load_chainlet(spec: str, r: int = 1):
    if spec in NAMED_CHAINS:
        return named_chainlet(spec, r)
    path = Path(spec)
    if not path.exists():
        raise UnknownNameError(f"unknown chain name or missing path: {spec}")
    from .elements import ChainletSeq

    return ChainletSeq.from_chain(chain_from_dict(load_json(path)), r, name=path.stem)


def _load_form(spec: str, n: int) -> FormField:
    if spec in NAMED_FORMS:
        try:
            return named_form(spec, n)
        except KeyError as e:
            raise UnknownNameError(str(e))
    path = Path(spec)
    if not path.exists():
        raise UnknownNameError(f"unknown form name or missing path: {spec}")
    return form_from_dict(load_json(path))


def _emit_report(rep: ExperimentReport, out: str | None) -> None:
    for level, lhs, rhs, err, rate in rep.rows():
        print(f"  level {level}: lhs={lhs:.9g} rhs={rhs:.9g} abs_err={err:.3g}")
    print(
        f"{rep.name}: {'PASS' if rep.passed else 'FAIL'}"
        f" (final err {rep.abs_err[-1]:.3g} vs tol {rep.tolerance:.3g},"
        f" rate {rep.rate if rep.rate is not None else 'n/a'})"
    )
    if out:
        save_json(report_to_dict(rep), Path(out).with_suffix(".json"))
        write_report_csv(rep, Path(out).with_suffix(".csv"))


def _parse_args(argv):
    p = argparse.ArgumentParser(prog="chainlets", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a domain chain to JSON")
    gen.add_argument("domain", choices=["koch", "weierstrass", "qcube", "disk"])
    gen.add_argument("--level", type=int, default=0)
    gen.add_argument("--diff", type=int, default=None,
                     help="for qcube: emit the difference with this second level")
    gen.add_argument("--a", type=float, default=0.4)
    gen.add_argument("--b", type=float, default=3.0)
    gen.add_argument("--terms", type=int, default=2)
    gen.add_argument("--out", required=True)

    integ = sub.add_parser("integrate", help="integrate a form over a chain")
    integ.add_argument("--chain", required=True)
    integ.add_argument("--form", required=True)
    integ.add_argument("--tol", type=float, default=1e-9)
    integ.add_argument("--out", default=None)

    norm = sub.add_parser("norm", help="certified norm brackets")
    norm.add_argument("kind", choices=["natural", "flat"])
    norm.add_argument("--chain", required=True)
    norm.add_argument("--r", type=int, default=1)
    norm.add_argument("--out", default=None)

    ver = sub.add_parser("verify", help="run a theorem verification experiment")
    ver.add_argument(
        "theorem",
        choices=["stokes", "star", "gauss", "green", "laplace", "distribution"],
    )
    ver.add_argument("--chain", required=True)
    ver.add_argument("--form", required=True)
    ver.add_argument("--levels", type=int, default=5)
    ver.add_argument("--r", type=int, default=1)
    ver.add_argument("--tol", type=float, default=None)
    ver.add_argument("--out", default=None)
    ver.add_argument("--jobs", type=int, default=None)
    return p.parse_args(argv)


def _cmd_generate(args) -> int:
    if args.domain == "koch":
        chain = harness.gen_koch(args.level)
    elif args.domain == "disk":
        chain = harness.gen_disk(args.level)
    elif args.domain == "weierstrass":
        chain = harness.gen_weierstrass_subgraph(args.a, args.b, args.terms, args.level)
    else:
        chain = harness.gen_cube_sequence(args.level)
        if args.diff is not None:
            chain = chain - harness.gen_cube_sequence(args.diff)
    save_json(chain_to_dict(chain), args.out)
    print(f"wrote {args.out} ({len(chain.terms)} cells)")
    return 0


def _cmd_integrate(args) -> int:
    chain = _load_chain(args.chain)
    omega = _load_form(args.form, chain.n)
    value = integrate_chain(omega, chain, args.tol)
    print(f"integral = {value!r}")
    if args.out:
        save_json({"chain": args.chain, "form": args.form, "value": value}, args.out)
    return 0


def _cmd_norm(args) -> int:
    chain = _load_chain(args.chain)
    if args.kind == "flat":
        value = flat_upper(chain)
        print(f"flat norm upper bound = {value!r}")
        payload = {"kind": "flat", "upper": value}
    else:
        bracket = natural_bracket(chain, args.r)
        print(
            f"natural norm bracket (r={args.r}): lower={bracket.lower!r}"
            f" upper={bracket.upper!r} witness={bracket.lower_witness}"
        )
        payload = {
            "kind": "natural",
            "r": args.r,
            "lower": bracket.lower,
            "upper": bracket.upper,
            "witness": bracket.lower_witness,
        }
    if args.out:
        save_json(payload, args.out)
    return 0


def _cmd_verify(args) -> int:
    jobs = args.jobs if args.jobs else _default_jobs()
    levels = list(range(1, args.levels + 1))
    if args.theorem == "stokes":
        chain = _load_chain(args.chain)
        omega = _load_form(args.form, chain.n)
        rep = harness.verify_stokes(chain, omega, tol=args.tol or 1e-8)
        _emit_report(rep, args.out)
        return 0 if rep.passed else 1
    if args.theorem == "distribution":
        chain = _load_chain(args.chain)
        f = _load_form(args.form, chain.n)
        rep = harness.verify_distribution(chain, f, tol=args.tol or 1e-6)
        _emit_report(rep, args.out)
        return 0 if rep.passed else 1

    seq = _load_chainlet(args.chain, args.r)
    omega = _load_form(args.form, seq.n)
    if jobs > 1:
        # warm the level cache concurrently; the experiments then reuse it
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            list(ex.map(seq.level, levels))
    if args.theorem == "star":
        rep = harness.verify_star(seq, omega, levels, tol=args.tol or 0.02)
    elif args.theorem == "gauss":
        rep = harness.verify_gauss(seq, omega, levels, tol=args.tol or 0.05)
    elif args.theorem == "green":
        rep = harness.verify_green(seq, omega, levels, tol=args.tol or 0.02)
    else:
        rep = harness.verify_laplace(seq, omega, levels, rel_tol=args.tol or 0.05)
    _emit_report(rep, args.out)
    return 0 if rep.passed else 1


def main(argv=None) -> int:
    args = _parse_args(sys.argv[1:] if argv is None else argv)
    try:
        if args.command == "generate":
            return _cmd_generate(args)
        if args.command == "integrate":
            return _cmd_integrate(args)
        if args.command == "norm":
            return _cmd_norm(args)
        return _cmd_verify(args)
    except UnknownNameError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (KeyError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except QuadratureError as e:
        print(f"numerical failure: {e} (partial value {e.partial!r})", file=sys.stderr)
        if getattr(args, "out", None):
            save_json({"error": str(e), "partial": e.partial}, args.out)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
