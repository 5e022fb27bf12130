from fractions import Fraction

import mpmath
import pytest

from curvlab.bounds import (
    BoundPreconditionError,
    constants_bounds,
    delta_linear,
    delta_of_eps,
    meat_bound,
    thinbigons_bound,
)


def test_meat_example():
    b = meat_bound(3, 1, 2)
    assert b.exact == 3049
    with mpmath.workprec(256):
        assert abs(b.log2 - mpmath.log(3049, 2)) < 1e-60


def test_thinbigons_example_exact_and_log():
    b = thinbigons_bound(3, 0, 11)
    assert b.exact == Fraction(142249316842486)
    assert b.exact == Fraction(115, 4) * (2**37 - 1) * 36 + 1
    with mpmath.workprec(256):
        assert abs(b.log2 - mpmath.log(mpmath.mpf(142249316842486), 2)) < mpmath.mpf(2) ** -200


def test_fractional_exponent_has_no_exact_value():
    b = thinbigons_bound(3, Fraction(1, 48), 12)
    assert b.exact is None and b.log2 > 40


@pytest.mark.parametrize(
    "args",
    [
        (2, 0, 11),  # T too small
        (3, 0, 10),  # D too small
        (3, -1, 11),
    ],
)
def test_thinbigons_preconditions(args):
    with pytest.raises(BoundPreconditionError):
        thinbigons_bound(*args)


@pytest.mark.parametrize("args", [(2, 1, 2), (3, 2, 2), (3, 0, 2), (Fraction(7, 2), 1, 2)])
def test_meat_preconditions(args):
    with pytest.raises(BoundPreconditionError):
        meat_bound(*args)


def test_meat_monotone():
    assert meat_bound(3, 1, 3).log2 > meat_bound(3, 1, 2).log2
    assert meat_bound(4, 1, 2).log2 > meat_bound(3, 1, 2).log2


def test_constants_at_zero():
    N, u = constants_bounds(0)
    assert N.exact == 1167 * (2**1189 - 1) * 1188 + 35
    assert 1189 < N.log2 < 1211
    assert mpmath.mpf("5e365") < u.log2 < mpmath.mpf("6e365")
    assert u.exact is None


def test_delta_nondecreasing_and_branch():
    values = [delta_of_eps(e) for e in (0, Fraction(1, 2), 1)]
    assert all(a.log2 <= b.log2 for a, b in zip(values, values[1:]))
    for v in values:
        assert v.notes["branch"] == "11+48*eps+2*(u+(k+1)*N)"
        assert v.exact is None and v.notes["k"] > 0
    assert mpmath.mpf("9e1934") < values[2].log2 < mpmath.mpf("1e1935")


def test_delta_k_is_least():
    # (3/2)^k (4N+2) > 2D + 2(u + (k+1)N) holds at k and fails at k - 1
    N, u = constants_bounds(0)
    k = delta_of_eps(0).notes["k"]
    with mpmath.workprec(2048):
        c = mpmath.log(mpmath.mpf(3) / 2, 2)
        lhs = lambda j: j * c + N.log2 + 2  # noqa: E731  (4N+2 ~ 4N at this size)
        rhs = lambda j: u.log2 + 1  # noqa: E731  the other terms are negligible
        assert lhs(k) > rhs(k) and lhs(k - 1) <= rhs(k - 1)


def test_delta_linear_identities():
    base = delta_of_eps(1)
    for eps in (Fraction(1, 4), Fraction(3), Fraction(10)):
        v = delta_linear(eps)
        assert v.scale == eps and v.base == base.expression
        with mpmath.workprec(4096):
            assert abs(v.log2 - base.log2 - mpmath.log(mpmath.mpf(eps.numerator) / eps.denominator, 2)) < 1e-6
    with pytest.raises(BoundPreconditionError):
        delta_linear(0)


def test_negative_eps_rejected():
    with pytest.raises(BoundPreconditionError):
        delta_of_eps(-1)
    with pytest.raises(BoundPreconditionError):
        constants_bounds(Fraction(-1, 2))


def test_json_shape():
    js = meat_bound(3, 1, 2).to_json()
    assert js["exact"] == "3049" and js["log2"].startswith("11.574")
    assert meat_bound(3, 1, 2).to_json(log2_only=True)["exact"] is None
    assert delta_of_eps(0).to_json()["branch"] == "11+48*eps+2*(u+(k+1)*N)"
