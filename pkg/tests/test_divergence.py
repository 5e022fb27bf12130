from fractions import Fraction

import pytest

from curvlab.divergence import (
    DivergenceProfile,
    corridor_bounds_check,
    divergence_constants,
    estimate_e,
    estimate_f_D,
    exponential_growth_check,
    profile_rows,
    small_lemma_check,
)
from curvlab.generators import GenSpec, generate
from curvlab.metric import CurvlabError
from suite import weighted_graph


@pytest.fixture(scope="module")
def bt():
    return generate(GenSpec("binary-tree", depth=5))


def test_tree_profile(bt):
    f = estimate_f_D(bt, 2, 3)
    assert [f.value(r) for r in range(4)] == [2 + 2 * r for r in range(4)]
    e = estimate_e(bt, 2, 3)
    assert all(v is None for _, v in e.samples[1:])


def test_e_dominates_f():
    space = generate(GenSpec("torus", n=6))
    f = estimate_f_D(space, 2, 3)
    e = estimate_e(space, 2, 3)
    for (r, fv), (_, ev) in zip(f.samples, e.samples):
        if fv is not None and ev is not None:
            assert ev >= fv, r


def test_grid_literal_and_distinct():
    grid = generate(GenSpec("grid", n=7))
    literal = estimate_f_D(grid, 2, 2)
    assert literal.value(1) == 0
    distinct = estimate_f_D(grid, 2, 2, distinct=True)
    assert distinct.value(1) == 2 and "distinct-endpoints" in distinct.flags


def test_base_budget_is_flagged_and_seeded(bt):
    a = estimate_f_D(bt, 2, 2, base_budget=5, seed=1)
    assert any(fl.startswith("sampled-bases") for fl in a.flags)
    assert a.to_json() == estimate_f_D(bt, 2, 2, base_budget=5, seed=1).to_json()


def test_needs_unit_lattice():
    with pytest.raises(CurvlabError):
        estimate_f_D(weighted_graph(10, 2), 1, 2)


def synthetic(values, D=2):
    return DivergenceProfile(Fraction(D), "f", [(r, None if v is None else Fraction(v)) for r, v in enumerate(values)])


def test_constants_on_linear_profile():
    prof = synthetic([2 + 2 * r for r in range(31)])
    c = divergence_constants(prof)
    # f < 18 up to r = 7, so N = 1 + 6 + 7; f < 4N + 2 = 58 up to r = 27
    assert (c.N, c.u) == (14, 27)
    assert c.flags == ["empirical"]


def test_constants_window_flags():
    c = divergence_constants(synthetic([2] * 6))
    assert "N-window-limited" in c.flags and "u-window-limited" in c.flags
    c = divergence_constants(synthetic([100] * 4))
    assert c.N == 7 and "N-sup-empty" in c.flags
    assert c.u is None and "u-undetermined" in c.flags
    with pytest.raises(CurvlabError):
        divergence_constants(synthetic([2]))
    with pytest.raises(ValueError):
        divergence_constants(DivergenceProfile(Fraction(2), "e", [(0, None), (1, None)]))


def test_corridor_check_on_tree(bt):
    res = corridor_bounds_check(bt, 4, 0, 2, 4)
    assert res.configurations > 0 and not res.violations
    assert corridor_bounds_check(bt, 1, 0, 50, 60).vacuous
    capped = corridor_bounds_check(bt, 4, 0, 2, 4, max_configs=3)
    assert capped.truncated and capped.configurations == 3


def test_corridor_preconditions(bt):
    with pytest.raises(ValueError):
        corridor_bounds_check(bt, Fraction(1, 2), 0, 2, 4)
    with pytest.raises(ValueError):
        corridor_bounds_check(bt, 1, 2, 2, 4)


def test_small_lemma_and_growth():
    prof = synthetic([2 + 2 * r for r in range(20)])
    assert small_lemma_check(prof, 3, 0) is True
    assert small_lemma_check(prof, 0, 0) is False
    assert small_lemma_check(prof, 50, 0) is None
    e = DivergenceProfile(Fraction(2), "e", [(r, Fraction(4) ** r) for r in range(20)])
    checks = exponential_growth_check(e, 2, 3)
    assert [c.r for c in checks] == [6, 8, 10, 12, 14, 16, 18]
    assert all(c.ok for c in checks)


def test_json_round_trip(bt):
    prof = estimate_e(bt, 2, 2)
    back = DivergenceProfile.from_json(prof.to_json())
    assert back.samples == prof.samples and back.D == prof.D and back.flags == prof.flags
    assert list(profile_rows(prof))[-1].endswith("inf")
