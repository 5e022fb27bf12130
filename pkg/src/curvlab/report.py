"""Assembly of the analysis report: measurements plus the inequality checks they feed."""
from __future__ import annotations

import datetime as _dt
import json
from fractions import Fraction

import mpmath

from . import __version__
from .balls import AllRealized, scan_ball_pairs
from .divergence import divergence_constants, estimate_e, estimate_f_D
from .hyperbolicity import delta_four_point, delta_slim, unit_lattice
from .metric import CurvlabError, MetricSpace, fmt_rational


def jsonable(obj):
    """Recursively turn rationals, tuples and mpf values into JSON-ready data."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (str, float)):
        return obj
    if isinstance(obj, int):
        return obj
    if isinstance(obj, Fraction):
        return fmt_rational(obj)
    if isinstance(obj, mpmath.mpf):
        return mpmath.nstr(obj, 40)
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if hasattr(obj, "to_json"):
        return jsonable(obj.to_json())
    if hasattr(obj, "item"):  # numpy scalars
        return jsonable(obj.item())
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _check(name: str, lhs_name: str, lhs: Fraction, rhs_name: str, rhs: Fraction, slack: Fraction) -> dict:
    return {
        "check": name,
        "lhs": {"name": lhs_name, "value": lhs},
        "rhs": {"name": rhs_name, "value": rhs},
        "slack": slack,
        "pass": lhs <= rhs + slack,
    }


def run_analyze(
    space: MetricSpace,
    params: dict,
    policy=AllRealized(),
    diverge_D=None,
    r_max: int = 8,
    timestamps: bool = False,
) -> dict:
    """Run the measurement pipeline on an already loaded (and subdivided) space."""
    started = _dt.datetime.now(_dt.timezone.utc).isoformat() if timestamps else None
    d4, d4_wit = delta_four_point(space)
    slim = delta_slim(space)
    scan = scan_ball_pairs(space, policy, hausdorff=True)
    slack2 = 2 * space.slack
    checks = [
        _check("ecc<=2*delta_slim", "ecc_max", scan.max_ecc, "2*delta_slim", 2 * slim.value, slack2),
        _check("hausdorff<=2*delta_slim", "hausdorff_max", scan.max_hausdorff, "2*delta_slim", 2 * slim.value, slack2),
    ]
    report = {
        "tool": {"name": "curvlab", "version": __version__},
        "params": params,
        "space": space.describe(),
        "delta4": d4,
        "delta4_witness": d4_wit,
        "delta_slim": slim.to_json(),
        "delta_slim_witness": {"triangle": slim.triple, "side_point": slim.side_point},
        "ball_pairs": scan.to_json(),
        "nearest_ball": scan.nearest_ball,
        "checks": checks,
    }
    if diverge_D is not None:
        try:
            unit_lattice(space)
        except CurvlabError as exc:
            report["divergence"] = {"error": str(exc)}
        else:
            f = estimate_f_D(space, diverge_D, r_max)
            e = estimate_e(space, diverge_D, r_max)
            div = {"f": f.to_json(), "e": e.to_json()}
            if len(f.samples) > 1:
                div["constants"] = divergence_constants(f).to_json()
            # e(r) >= f_D(r) wherever both are finite
            bad = [r for (r, fv), (_, ev) in zip(f.samples, e.samples) if fv is not None and ev is not None and ev < fv]
            checks.append({"check": "e>=f_D", "violations": bad, "pass": not bad})
            report["divergence"] = div
    report["pass"] = all(c["pass"] for c in checks)
    if timestamps:
        report["timestamps"] = {"started": started, "finished": _dt.datetime.now(_dt.timezone.utc).isoformat()}
    return report
