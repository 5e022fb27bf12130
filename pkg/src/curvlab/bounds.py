"""Exact and log-domain evaluation of the explicit hyperbolicity bounds.

Every formula here has the shape ``A * (2**E - 1) * B + C``. When ``E`` is an
integer the value is computed exactly; the base-2 logarithm is always
computed with mpmath at ``PREC`` bits or more. Some exponents are themselves
around ``2**1200``, so those values exist only as logarithms.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath

from .metric import fmt_rational

PREC = 256  # minimum working precision in bits


def _prec_for(eps: Fraction) -> int:
    """Bits needed to keep ``k(eps)`` exact: it is about as long as ``N``'s exponent."""
    return max(PREC, int(108 * (11 + 48 * eps) + 24 * eps) + 512)


class BoundPreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class BoundValue:
    expression: str
    log2: mpmath.mpf
    exact: Fraction | None = None
    # value = scale * (value of `base`) when set; used for the linear rescaling
    scale: Fraction = Fraction(1)
    base: str | None = None
    notes: dict = field(default_factory=dict, compare=False)

    def to_json(self, log2_only: bool = False) -> dict:
        exact = None
        if self.exact is not None and not log2_only:
            exact = str(self.exact.numerator) if self.exact.denominator == 1 else fmt_rational(self.exact)
        out = {"expression": self.expression, "exact": exact, "log2": mpmath.nstr(self.log2, 40, strip_zeros=False)}
        if self.notes:
            out.update({k: (str(v) if not isinstance(v, (int, str, bool)) else v) for k, v in self.notes.items()})
        return out


def _mp(x) -> mpmath.mpf:
    x = Fraction(x)
    return mpmath.mpf(x.numerator) / x.denominator


def _log2(x) -> mpmath.mpf:
    return mpmath.log(x, 2)


def _log2_sum(*terms) -> mpmath.mpf:
    """``log2(sum 2**t)`` without leaving the log domain."""
    top = max(terms)
    return top + _log2(mpmath.fsum(mpmath.power(2, t - top) for t in terms))


def _log2_pow2_minus_one(E) -> mpmath.mpf:
    if E > 8 * mpmath.mp.prec:
        return E  # 2**-E is far below the working precision
    return E + _log2(1 - mpmath.power(2, -E))


def _formula(A, E, B, C, expression: str) -> BoundValue:
    """``A (2^E - 1) B + C`` for positive ``A, B`` and ``C >= 0``; ``E`` may be an mpf."""
    with mpmath.workprec(max(PREC, mpmath.mp.prec)):
        E_mp = E if isinstance(E, mpmath.mpf) else _mp(E)
        main = _log2(_mp(A)) + _log2_pow2_minus_one(E_mp) + _log2(_mp(B))
        C = Fraction(C)
        log2 = main if C == 0 else _log2_sum(main, _log2(_mp(C)))
        exact = None
        if not isinstance(E, mpmath.mpf) and Fraction(E).denominator == 1:
            exact = Fraction(A) * (2 ** int(E) - 1) * Fraction(B) + C
        return BoundValue(expression, +log2, exact)


def _fr(x) -> str:
    return fmt_rational(Fraction(x))


def meat_bound(q: int, K0: int, K1: int) -> BoundValue:
    """``(q(K1-K0)+1)(2^(qK1+1)-1) qK1 + 1`` for fellow-travelling (1,q)-quasigeodesics."""
    for name, v in (("q", q), ("K0", K0), ("K1", K1)):
        if Fraction(v).denominator != 1:
            raise BoundPreconditionError(f"{name} must be an integer")
    q, K0, K1 = int(q), int(K0), int(K1)
    if q < 3:
        raise BoundPreconditionError("need q >= 3")
    if not 1 <= K0 < K1:
        raise BoundPreconditionError("need 1 <= K0 < K1")
    return _formula(q * (K1 - K0) + 1, q * K1 + 1, q * K1, 1, f"({q}*({K1}-{K0})+1)*(2^({q}*{K1}+1)-1)*{q}*{K1}+1")


def thinbigons_bound(T, eps, D) -> BoundValue:
    """``(12T+26ε-3D/4+1)(2^(12T+24ε+1)-1)(12T+24ε)+1``."""
    T, eps, D = Fraction(T), Fraction(eps), Fraction(D)
    problems = []
    if eps < 0:
        problems.append("eps >= 0")
    if not D > Fraction(32, 3) + 48 * eps:
        problems.append("D > 32/3 + 48*eps")
    if not T > D / 4 - 8 * eps:
        problems.append("T > D/4 - 8*eps")
    if problems:
        raise BoundPreconditionError("precondition violated: need " + " and ".join(problems))
    A = 12 * T + 26 * eps - 3 * D / 4 + 1
    E = 12 * T + 24 * eps + 1
    B = 12 * T + 24 * eps
    expr = f"(12*{_fr(T)}+26*{_fr(eps)}-3*{_fr(D)}/4+1)*(2^(12*{_fr(T)}+24*{_fr(eps)}+1)-1)*(12*{_fr(T)}+24*{_fr(eps)})+1"
    return _formula(A, E, B, 1, expr)


@lru_cache(maxsize=None)
def _constants(eps: Fraction) -> tuple[BoundValue, BoundValue]:
    D = 11 + 48 * eps
    prec = _prec_for(eps)
    with mpmath.workprec(prec):
        N = _formula(
            106 * D + 26 * eps + 1,
            108 * D + 24 * eps + 1,
            108 * D + 24 * eps,
            2 + 3 * D,
            f"(106*D+26*eps+1)*(2^(108*D+24*eps+1)-1)*(108*D+24*eps)+2+3*D with eps={_fr(eps)}, D=11+48*eps={_fr(D)}",
        )
        n_mp = _mp(N.exact) if N.exact is not None else mpmath.power(2, N.log2)
        # u: the exponent 48N + 25*eps + 13 has about 1200 bits, so only log2 exists
        lA = _log2(48 * n_mp + _mp(26 * eps - 3 * D / 4 + 25))
        lB = _log2(48 * n_mp + _mp(24 * eps + 24))
        E = 48 * n_mp + _mp(25 * eps + 13)
        main = lA + _log2_pow2_minus_one(E) + lB
        log2_u = _log2_sum(main, mpmath.mpf(0))
    u = BoundValue(
        f"(48*N+26*eps-3*D/4+25)*(2^(48*N+25*eps+13)-1)*(48*N+24*eps+24)+1 with N = N_bound(eps={_fr(eps)})",
        log2_u,
        None,
    )
    return N, u


def constants_bounds(eps) -> tuple[BoundValue, BoundValue]:
    """Bounds on the divergence constants ``N`` and ``u`` with ``D = 11 + 48ε``.

    The second formula is used with ``25ε`` in its exponent, as printed, and
    with ``N`` set to the first bound.
    """
    eps = Fraction(eps)
    if eps < 0:
        raise BoundPreconditionError("need eps >= 0")
    return _constants(eps)


def _k_of_eps(log2_N, log2_u, D) -> int:
    """Least ``k >= 0`` with ``(3/2)^k (4N+2) > 2D + 2(u + (k+1)N)``."""
    c = _log2(mpmath.mpf(3) / 2)
    lhs0 = _log2_sum(log2_N + 2, mpmath.mpf(1))

    def rhs(k):
        return _log2_sum(_log2(_mp(2 * D)), log2_u + 1, log2_N + 1 + _log2(mpmath.mpf(k + 1)))

    # g(k) = lhs - rhs grows with slope below c, so these jumps never overshoot
    k = 0
    while True:
        gap = rhs(k) - lhs0 - k * c
        if gap < 0:
            return k
        k += max(1, int(mpmath.floor(gap / c)))


@lru_cache(maxsize=None)
def _delta(eps: Fraction) -> BoundValue:
    D = 11 + 48 * eps
    N, u = _constants(eps)
    with mpmath.workprec(_prec_for(eps)):
        k = _k_of_eps(N.log2, u.log2, D)
        branches = {
            "110+484*eps": _log2(_mp(110 + 484 * eps)),
            "u+N": _log2_sum(u.log2, N.log2),
            "11+48*eps+2*(u+(k+1)*N)": _log2_sum(
                _log2(_mp(D)), u.log2 + 1, N.log2 + 1 + _log2(mpmath.mpf(k + 1))
            ),
        }
        name = max(branches, key=lambda b: branches[b])
        log2 = branches[name]
    exact = 110 + 484 * eps if name == "110+484*eps" else None
    expr = f"max{{110+484*eps, u+N, 11+48*eps+2*(u+(k+1)*N)}} with eps={_fr(eps)}, k(eps)=least k with (3/2)^k(4N+2) > 2D+2(u+(k+1)N)"
    return BoundValue(expr, log2, exact, notes={"branch": name, "k": k})


def delta_of_eps(eps) -> BoundValue:
    """Hyperbolicity constant bound ``δ(ε)``; the note ``branch`` names the winning term."""
    eps = Fraction(eps)
    if eps < 0:
        raise BoundPreconditionError("need eps >= 0")
    return _delta(eps)


def delta_linear(eps) -> BoundValue:
    """``ε · δ(1)``, the rescaled bound; ``δ(1)`` is computed once."""
    eps = Fraction(eps)
    if eps <= 0:
        raise BoundPreconditionError("need eps > 0")
    unit = _delta(Fraction(1))
    with mpmath.workprec(_prec_for(Fraction(1))):
        log2 = unit.log2 + _log2(_mp(eps))
    exact = None if unit.exact is None else eps * unit.exact
    return BoundValue(f"{_fr(eps)}*delta(1)", log2, exact, scale=eps, base=unit.expression)
