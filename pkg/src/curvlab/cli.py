"""Command-line entry point.

Exit codes: 0 success, 1 usage or input errors, 2 when a measured quantity
breaks one of the checked inequalities beyond the quantization slack.
"""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .balls import ecc_report, parse_policy, scan_ball_pairs
from .bounds import BoundPreconditionError, constants_bounds, delta_linear, delta_of_eps, meat_bound, thinbigons_bound
from .catmodel import cat_ecc_test, cat_test, ecc_kappa
from .divergence import divergence_constants, estimate_e, estimate_f_D
from .generators import GenSpec, edgelist_text
from .metric import CurvlabError, load_space, parse_rational, subdivide
from .report import dumps, run_analyze


class _Usage(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _Usage(f"{self.prog}: {message}")


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except Exception:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--input", help="edge list or distance matrix file")
    p.add_argument("--format", choices=("edgelist", "matrix"), default="edgelist")
    p.add_argument("--subdivide", type=int, default=0, metavar="K", help="insert K points on every edge")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1, help="worker cap; results do not depend on it")
    p.add_argument("--out", help="write output here instead of stdout")
    p.add_argument("--json", action="store_true", help="emit JSON")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    ap = _Parser(prog="curvlab", description="Coarse curvature of finite metric spaces.")
    ap.add_argument("--version", action="version", version=f"curvlab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", parents=[common], help="write a generated test space as an edge list")
    g.add_argument("--kind", required=True)
    for name in ("n", "m", "depth", "radius"):
        g.add_argument(f"--{name}", type=int, default=0)

    a = sub.add_parser("analyze", parents=[common], help="full measurement report")
    a.add_argument("--radius-policy", default="all", help="all | aligned[:step] | sampled:N")
    a.add_argument("--diverge", type=_rational, metavar="D", help="also profile divergence at threshold D")
    a.add_argument("--r-max", type=int, default=8)
    a.add_argument("--timestamps", action="store_true", help="add wall-clock times (breaks byte-identical output)")

    e = sub.add_parser("ecc", parents=[common], help="eccentricity of a set or of all ball intersections")
    e.add_argument("--points", help="comma-separated point ids; default scans ball pairs")
    e.add_argument("--radius-policy", default="all")
    e.add_argument("--no-hausdorff", action="store_true")

    b = sub.add_parser("bounds", parents=[common], help="evaluate the explicit bound formulas")
    b.add_argument("--eps", type=_rational, default=Fraction(0))
    b.add_argument("--which", default="delta,meat,constants,linear")
    b.add_argument("--q", type=int, default=3)
    b.add_argument("--k0", type=int, default=1)
    b.add_argument("--k1", type=int, default=2)
    b.add_argument("--T", type=_rational)
    b.add_argument("--D", type=_rational)
    b.add_argument("--log2-only", action="store_true")

    d = sub.add_parser("diverge", parents=[common], help="divergence profiles f_D and e")
    d.add_argument("--D", type=_rational, required=True)
    d.add_argument("--r-max", type=int, default=8)
    d.add_argument("--mode", default="f,e")
    d.add_argument("--base-budget", type=int)
    d.add_argument("--distinct", action="store_true", help="ignore geodesic pairs that meet again")

    c = sub.add_parser("cat", parents=[common], help="CAT(kappa) comparison tests")
    c.add_argument("--kappa", type=float, required=True)
    c.add_argument("--samples", type=int, help="random triangles; default is exhaustive")
    c.add_argument("--ecc", action="store_true", help="also test ball-pair eccentricity against Ecc_kappa")
    c.add_argument("--override", action="store_true", help="skip the extension-property precondition")

    k = sub.add_parser("ecckappa", parents=[common], help="print Ecc_kappa(s, t, d)")
    k.add_argument("--kappa", type=float, required=True)
    k.add_argument("-s", type=float, required=True)
    k.add_argument("-t", type=float, required=True)
    k.add_argument("-d", type=float, required=True)
    return ap


def _load(args):
    if not args.input:
        raise _Usage("--input is required for this command")
    space = load_space(args.input, args.format)
    if args.subdivide:
        space = subdivide(space, args.subdivide)
    return space


def _common_echo(args) -> dict:
    return {
        "input": args.input,
        "format": args.format,
        "subdivide": args.subdivide,
        "seed": args.seed,
    }


def _text(obj, indent: int = 0) -> str:
    """Plain rendering of a JSON-ready mapping for terminal use."""
    from .report import jsonable

    obj = jsonable(obj)
    lines = []
    pad = "  " * indent
    if isinstance(obj, dict):
        for key in sorted(obj):
            v = obj[key]
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{key}:")
                lines.append(_text(v, indent + 1))
            else:
                lines.append(f"{pad}{key}: {v}")
    elif isinstance(obj, list):
        for v in obj:
            if isinstance(v, dict):
                lines.append(f"{pad}-")
                lines.append(_text(v, indent + 1))
            else:
                lines.append(f"{pad}- {v}")
    else:
        lines.append(f"{pad}{obj}")
    return "\n".join(lines)


def _emit(args, obj):
    text = dumps(obj) if args.json else _text(obj) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _cmd_gen(args) -> int:
    spec = GenSpec(args.kind, args.n, args.m, args.depth, args.radius, args.seed)
    text = edgelist_text(spec)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    if args.json:
        sys.stdout.write(dumps({"spec": spec.echo(), "edges": text.count("\n") - 1, "out": args.out}))
    elif not args.out:
        sys.stdout.write(text)
    return 0


def _cmd_analyze(args) -> int:
    space = _load(args)
    policy = parse_policy(args.radius_policy, args.seed)
    params = dict(_common_echo(args), radius_policy=args.radius_policy, diverge=args.diverge, r_max=args.r_max)
    report = run_analyze(space, params, policy, args.diverge, args.r_max, args.timestamps)
    _emit(args, report)
    return 0 if report["pass"] else 2


def _cmd_ecc(args) -> int:
    space = _load(args)
    if args.points:
        ids = [int(p) if p.strip().lstrip("-").isdigit() else p.strip() for p in args.points.split(",")]
        missing = [p for p in ids if p not in space.index]
        if missing:
            raise _Usage(f"unknown points: {missing}")
        _emit(args, ecc_report(space, ids).to_json())
        return 0
    scan = scan_ball_pairs(space, parse_policy(args.radius_policy, args.seed), hausdorff=not args.no_hausdorff)
    _emit(args, dict(scan.to_json(), params=_common_echo(args)))
    return 0


def _cmd_bounds(args) -> int:
    which = [w.strip() for w in args.which.split(",") if w.strip()]
    known = {"delta", "meat", "constants", "linear", "thinbigons"}
    if set(which) - known:
        raise _Usage(f"unknown bound(s): {sorted(set(which) - known)}")
    out = {"eps": args.eps}
    lo = args.log2_only
    if "meat" in which:
        out["meat"] = meat_bound(args.q, args.k0, args.k1).to_json(lo)
    if "thinbigons" in which or args.T is not None:
        if args.T is None or args.D is None:
            raise _Usage("thinbigons needs --T and --D")
        out["thinbigons"] = thinbigons_bound(args.T, args.eps, args.D).to_json(lo)
    if "constants" in which:
        N, u = constants_bounds(args.eps)
        out["constants"] = {"N": N.to_json(lo), "u": u.to_json(lo)}
    if "delta" in which:
        out["delta"] = delta_of_eps(args.eps).to_json(lo)
    if "linear" in which:
        if args.eps > 0:
            out["linear"] = delta_linear(args.eps).to_json(lo)
        else:
            out["linear"] = {"error": "needs eps > 0"}
    _emit(args, out)
    return 0


def _cmd_diverge(args) -> int:
    space = _load(args)
    modes = [m.strip() for m in args.mode.split(",")]
    out = {"params": dict(_common_echo(args), D=args.D, r_max=args.r_max, base_budget=args.base_budget, distinct=args.distinct)}
    for m in modes:
        if m not in ("f", "e"):
            raise _Usage(f"unknown mode {m!r}")
        est = estimate_f_D if m == "f" else estimate_e
        prof = est(space, args.D, args.r_max, args.base_budget, args.seed, args.distinct)
        out[m] = prof.to_json()
        if m == "f" and len(prof.samples) > 1:
            out["constants"] = divergence_constants(prof).to_json()
    _emit(args, out)
    return 0


def _cmd_cat(args) -> int:
    space = _load(args)
    if args.kappa > 0:
        raise _Usage("--kappa must be <= 0")
    rep = cat_test(space, args.kappa, args.samples, args.seed)
    out = {"triangles": rep.to_json(), "params": _common_echo(args)}
    if args.ecc:
        out["ecc"] = cat_ecc_test(space, args.kappa, override=args.override).to_json()
    _emit(args, out)
    return 0


def _cmd_ecckappa(args) -> int:
    value = ecc_kappa(args.kappa, args.s, args.t, args.d)
    if args.json:
        _emit(args, {"kappa": args.kappa, "s": args.s, "t": args.t, "d": args.d, "ecc_kappa": float(f"{value:.15g}")})
    else:
        text = f"{value:.15g}\n"
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
    return 0


COMMANDS = {
    "gen": _cmd_gen,
    "analyze": _cmd_analyze,
    "ecc": _cmd_ecc,
    "bounds": _cmd_bounds,
    "diverge": _cmd_diverge,
    "cat": _cmd_cat,
    "ecckappa": _cmd_ecckappa,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except _Usage as exc:
        print(exc, file=sys.stderr)
        return 1
    except (CurvlabError, BoundPreconditionError, ValueError, OSError) as exc:
        print(f"curvlab: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
