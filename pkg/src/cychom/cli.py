"""Command-line front end.

Commands
--------
``validate PATH``
    Load an algebra file and check every dg algebra axiom.
``identities --suite core|kunneth|connection|appendix|all --algebra A [--algebra2 B]``
    Run an identity suite and report each identity with witnesses.
``homology --algebra A --mode hochschild|negative|periodic --trunc N --u-order K``
    Homology of the truncated complexes of A (or of A_f via ``--f``).
``ts --f EXPR --weights W --g EXPR --weights W --trunc T --chain-trunc N``
    Thom-Sebastiani diagram check plus the connection matrix comparison.

Algebras are given as a file path, a bundled name (``kdual`` or ``kdual.alg``)
or ``random`` / ``random:SEED`` for a seeded random validated algebra.  Every
command prints a report (JSON lines by default, ``--format text`` for a
readable rendering).  Exit codes: 0 pass, 1 mathematical failure with a
witness, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from contextlib import ExitStack
from pathlib import Path

from . import dgalg
from .dgalg import DgAlgebra, InvalidAlgebra, algebra_from_json
from .exactnum import global_window
from .report import RunReport

__all__ = ["main", "build_parser", "load_algebra_arg", "SUITES"]

SUITES = ("core", "kunneth", "connection", "appendix", "all")
KUNNETH_IDS = ("i", "ii", "iii", "iv", "v", "vi", "vii", "viii", "xv")
APPENDIX_IDS = ("ix", "x", "xi", "xii", "xiii", "xiv")


class UsageError(ValueError):
    """Invalid combination of command-line inputs."""


def _read_algebra_json(path: Path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _resolve_path(spec: str) -> Path:
    path = Path(spec)
    if path.exists():
        return path
    bundled = Path(dgalg.__file__).with_name("data") / (spec if spec.endswith(".alg")
                                                         else f"{spec}.alg")
    if not bundled.exists():
        raise UsageError(f"no algebra file or bundled algebra named {spec!r}")
    return bundled


def load_algebra_arg(spec: str, seed: int | None = None, check: bool = True
                     ) -> tuple[DgAlgebra, dict]:
    """Resolve an algebra argument; returns the algebra and its input record."""
    if spec == "random" or spec.startswith("random:"):
        s = int(spec.split(":", 1)[1]) if ":" in spec else (seed if seed is not None else 0)
        a = dgalg.random_algebra(s)
        return a, {"source": f"random:{s}", "hash": a.content_hash()}
    path = _resolve_path(spec)
    a = algebra_from_json(_read_algebra_json(path), check=check)
    return a, {"source": path.name, "hash": a.content_hash()}


def _poly_arg(expr: str, weights: str | None):
    from .singularity import WeightedPoly
    w = None
    if weights:
        w = [int(t) for t in weights.replace(" ", "").split(",") if t]
    return WeightedPoly.parse(expr, weights=w)


# ---------------------------------------------------------------------------
# commands


def cmd_validate(args, rep: RunReport) -> None:
    a, rec = load_algebra_arg(args.path, check=False)
    rep.inputs["algebra"] = rec
    res = dgalg.validate(a)
    rep.add("validate", a.name, res.ok, dim=a.dim, failures=res.failures)


def _add_verification(rep: RunReport, kind: str, r) -> None:
    js = r.to_json()
    name = js.pop("identity")
    passed = js.pop("passed")
    rep.add(kind, name, passed, **js)


def _suite_core(rep, algebras, args):
    from .fastcheck import check_mixed_complex
    from .hochschild import NORMALIZED, UNNORMALIZED
    for a in algebras:
        for flavor in (NORMALIZED, UNNORMALIZED):
            res = check_mixed_complex(a, args.max_degree or 5, flavor)
            for ident, entry in res.items():
                rep.add("mixed complex", f"{ident} [{a.name}, {flavor}]", entry["ok"],
                        degrees_checked=entry["degrees"], witness=entry["witness"])


def _suite_identities(rep, a1, a2, names, args):
    from .kunneth import verify_identity
    for nm in names:
        r = verify_identity(nm, a1, a2, max_degree=args.max_degree, seed=args.seed)
        _add_verification(rep, "identity", r)


def _suite_connection(rep, algebras, a2, args):
    from .connection import check_nabla, theorem_main_pipeline
    for a in algebras:
        r = check_nabla(a, N=args.max_degree or 5)
        _add_verification(rep, "u-connection", r)
    if a2 is not None:
        pr = theorem_main_pipeline(algebras[0], a2, max_degree=1)
        for step in pr.steps:
            step = dict(step)
            rep.add("pipeline", step.pop("step"), step.pop("passed"), **step)


def cmd_identities(args, rep: RunReport) -> None:
    from .kunneth import mutated_sign_rule
    a1, rec1 = load_algebra_arg(args.algebra, args.seed)
    rep.inputs["algebra"] = rec1
    a2 = None
    if args.algebra2:
        a2, rec2 = load_algebra_arg(args.algebra2, args.seed)
        rep.inputs["algebra2"] = rec2
    suites = ("core", "connection", "kunneth", "appendix") if args.suite == "all" else (args.suite,)
    if a2 is None and any(s in ("kunneth", "appendix") for s in suites) and args.suite != "all":
        raise UsageError(f"suite {args.suite!r} needs --algebra2")
    rep.inputs["suite"] = args.suite
    rep.inputs["max_degree"] = args.max_degree
    if args.mutate:
        rep.inputs["mutation"] = args.mutate
    algebras = [a1] + ([a2] if a2 is not None and a2.content_hash() != a1.content_hash() else [])
    with ExitStack() as stack:
        if args.mutate:
            stack.enter_context(mutated_sign_rule(args.mutate))
        for s in suites:
            t0 = time.perf_counter()
            if s == "core":
                _suite_core(rep, algebras, args)
            elif s == "connection":
                _suite_connection(rep, algebras, a2, args)
            elif s == "kunneth" and a2 is not None:
                _suite_identities(rep, a1, a2, KUNNETH_IDS, args)
            elif s == "appendix" and a2 is not None:
                _suite_identities(rep, a1, a2, APPENDIX_IDS, args)
            rep.timings[s] = time.perf_counter() - t0


def cmd_homology(args, rep: RunReport) -> None:
    from .homology import compute_homology
    if args.f:
        from .singularity import build_Af
        f = _poly_arg(args.f, args.weights)
        T = args.ring_trunc if args.ring_trunc is not None else f.degree()
        a = build_Af(f, T).algebra
        rep.inputs["algebra"] = {"source": f"A_f[{f}; T={T}]", "hash": a.content_hash()}
    elif args.algebra:
        a, rec = load_algebra_arg(args.algebra, args.seed)
        rep.inputs["algebra"] = rec
    else:
        raise UsageError("homology needs --algebra or --f")
    rep.inputs.update(mode=args.mode, trunc=args.trunc, u_order=args.u_order, flavor=args.flavor)
    res = compute_homology(a, args.mode, args.trunc, args.u_order, args.flavor, args.max_dim)
    js = res.to_json()
    rep.add("homology", f"{args.mode} [{a.name}]", None, **js)


def cmd_ts(args, rep: RunReport) -> None:
    from .singularity import direct_sum, ts_diagram_check
    weights = args.weights or []
    if len(weights) > 2:
        raise UsageError("at most two --weights flags (for f and for g)")
    weights = weights + [None] * (2 - len(weights))
    f = _poly_arg(args.f, weights[0])
    g = _poly_arg(args.g, weights[1])
    direct_sum(f, g)  # raises VariableClash before any heavy work
    rep.inputs.update(f={"expr": str(f), "weights": list(f.weights)},
                      g={"expr": str(g), "weights": list(g.weights)},
                      trunc=args.trunc, chain_trunc=args.chain_trunc, u_order=args.u_order,
                      rule=args.rule, steps=args.steps)
    sr = ts_diagram_check(f, g, T=args.trunc, N=args.chain_trunc, rule=args.rule,
                          K_u=args.u_order, steps=args.steps)
    for step in sr.steps:
        step = dict(step)
        rep.add("ts", step.pop("step"), step.pop("passed"), **step)
    rep.add("ts parameters", "parameters", None, **sr.certificates.get("parameters", {}))


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cychom", description=__doc__.split("\n\n")[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--output", help="write the report to this file as well")
    common.add_argument("--seed", type=int, default=0,
                        help="seed for randomized algebras (embedded in the report)")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", parents=[common], help="validate an algebra file")
    v.add_argument("path")
    v.set_defaults(func=cmd_validate)

    i = sub.add_parser("identities", parents=[common], help="run an identity suite")
    i.add_argument("--suite", choices=SUITES, default="all")
    i.add_argument("--algebra", required=True)
    i.add_argument("--algebra2")
    i.add_argument("--max-degree", type=int, default=None)
    i.add_argument("--mutate", choices=("koszul_shift", "star", "star_star"),
                   help="flip one sign-rule constant (mutation testing)")
    i.set_defaults(func=cmd_identities)

    h = sub.add_parser("homology", parents=[common], help="truncated (cyclic) homology")
    h.add_argument("--algebra")
    h.add_argument("--f", help="use A_f for this polynomial instead of --algebra")
    h.add_argument("--weights")
    h.add_argument("--ring-trunc", type=int, help="truncation T of the ring for A_f")
    h.add_argument("--mode", choices=("hochschild", "negative", "periodic"), default="hochschild")
    h.add_argument("--trunc", type=int, default=3, help="chain truncation N")
    h.add_argument("--u-order", type=int, default=3, help="u-adic order K (negative mode)")
    h.add_argument("--flavor", choices=("normalized", "unnormalized"), default="normalized")
    h.add_argument("--max-dim", type=int, default=20000,
                   help="refuse complexes with more basis chains than this")
    h.set_defaults(func=cmd_homology)

    t = sub.add_parser("ts", parents=[common], help="Thom-Sebastiani diagram check")
    t.add_argument("--f", required=True)
    t.add_argument("--g", required=True)
    t.add_argument("--weights", action="append",
                   help="comma-separated weights; give once for f, then once for g")
    t.add_argument("--trunc", type=int, default=None, help="ring truncation T")
    t.add_argument("--chain-trunc", type=int, default=3, help="chain truncation N")
    t.add_argument("--u-order", type=int, default=3)
    t.add_argument("--rule", choices=("lowest", "highest"), default="lowest")
    t.add_argument("--steps", default="abcde")
    t.set_defaults(func=cmd_ts)
    return p


def _input_error(exc: BaseException) -> str:
    return f"{type(exc).__name__}: {exc}"


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    rep = RunReport(args.command, seed=args.seed)
    rep.inputs["u_window"] = list(global_window())
    t0 = time.perf_counter()
    try:
        args.func(args, rep)
    except InvalidAlgebra as exc:
        rep.error = f"InvalidAlgebra: {exc}"
        rep.add("input", "algebra validation", False, failures=exc.report.failures)
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        rep.error = _input_error(exc)
    rep.timings["total"] = time.perf_counter() - t0
    out = rep.render(args.format)
    sys.stdout.write(out)
    if args.output:
        Path(args.output).write_text(out)
    return rep.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
