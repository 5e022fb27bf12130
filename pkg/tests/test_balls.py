import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from curvlab.balls import (
    Aligned,
    AllRealized,
    Sampled,
    ball,
    ball_intersection,
    ecc_report,
    hausdorff,
    inscribed_formula_check,
    lemma_general_scan,
    nearest_ball_hausdorff,
    pair_grid,
    parse_policy,
    scan_ball_pairs,
)
from curvlab.generators import GenSpec, generate
from curvlab.metric import from_edges, subdivide


# ------------------------------------------------------------ brute oracles


def radii(space, c):
    return sorted({space.dist(c, p) for p in space.points})


def brute_ecc(space, S):
    S = set(S)
    if not S:
        return Fraction(0)
    circ = min(max(space.dist(c, p) for p in S) for c in space.points)
    inr = None
    for c in S:
        best = max(r for r in radii(space, c) if set(ball(space, c, r)) <= S)
        inr = best if inr is None else max(inr, best)
    return max(Fraction(0), circ - inr)


def brute_hausdorff(space, A, B):
    one = max(min(space.dist(a, b) for b in B) for a in A)
    two = max(min(space.dist(a, b) for a in A) for b in B)
    return max(one, two)


def brute_nearest(space, S):
    return min(
        (brute_hausdorff(space, S, ball(space, c, r)), space.index[c], r) for c in space.points for r in radii(space, c)
    )


def random_graph(seed, n_max=9):
    rng = random.Random(seed)
    n = rng.randrange(2, n_max)
    edges = [(rng.randrange(i), i, rng.randint(1, 4)) for i in range(1, n)]
    for _ in range(rng.randrange(4)):
        a, b = rng.sample(range(n), 2)
        edges.append((a, b, rng.randint(1, 4)))
    return from_edges(edges)


# ------------------------------------------------------------------- basics


def test_ball_and_intersection_on_path():
    p5 = generate(GenSpec("grid", n=5, m=1))
    assert ball(p5, 2, 1) == (1, 2, 3)
    assert ball(p5, 0, Fraction(3, 2)) == (0, 1)
    assert ball_intersection(p5, 0, 2, 4, 3) == (1, 2)
    assert ball_intersection(p5, 0, 1, 4, 1) == ()


def test_negative_radius_rejected():
    with pytest.raises(ValueError):
        ball(generate(GenSpec("cycle", n=4)), 0, -1)


def test_ecc_of_ball_is_zero_and_empty_set_convention():
    g = generate(GenSpec("grid", n=4))
    for c in (0, 5, 15):
        for r in range(4):
            rep = ecc_report(g, ball(g, c, r))
            assert rep.eccentricity == 0
            assert nearest_ball_hausdorff(g, ball(g, c, r))[1] == 0
    empty = ecc_report(g, [])
    assert empty.eccentricity == 0 and empty.incenter is None
    assert set(empty.to_json()) == {"inradius", "incenter", "circumradius", "circumcenter", "eccentricity", "slack"}


@pytest.mark.parametrize("seed", range(25))
def test_ecc_report_matches_brute_force(seed):
    space = random_graph(seed)
    rng = random.Random(seed)
    for _ in range(10):
        S = [p for p in space.points if rng.random() < 0.5]
        assert ecc_report(space, S).eccentricity == brute_ecc(space, S)


@pytest.mark.parametrize("seed", range(15))
def test_nearest_ball_matches_brute_force_with_tie_break(seed):
    space = random_graph(seed)
    rng = random.Random(100 + seed)
    for _ in range(6):
        S = [p for p in space.points if rng.random() < 0.5] or [space.points[0]]
        b, v = nearest_ball_hausdorff(space, S)
        val, c, r = brute_nearest(space, S)
        assert v == val
        assert (space.index[b.center], b.radius) == (c, r)


def test_hausdorff_oracle():
    space = random_graph(3)
    A, B = space.points[:2], space.points[-2:]
    assert hausdorff(space, A, B).value == brute_hausdorff(space, A, B)


# ------------------------------------------------------------- scan vs brute


def brute_scan(space):
    best_e = best_h = Fraction(0)
    for x, y in itertools.product(space.points, repeat=2):
        for s in radii(space, x):
            for t in radii(space, y):
                S = ball_intersection(space, x, s, y, t)
                if S:
                    best_e = max(best_e, brute_ecc(space, S))
                    best_h = max(best_h, brute_nearest(space, S)[0])
    return best_e, best_h


@pytest.mark.parametrize("seed", range(12))
def test_scan_matches_brute_force(seed):
    space = random_graph(seed, n_max=8)
    scan = scan_ball_pairs(space, AllRealized())
    assert (scan.max_ecc, scan.max_hausdorff) == brute_scan(space)
    if scan.ecc_witness:
        x, s, y, t = scan.ecc_witness
        assert brute_ecc(space, ball_intersection(space, x, s, y, t)) == scan.max_ecc


def test_pair_grid_cells_agree_with_ecc_report():
    g = generate(GenSpec("torus", n=3, m=4))
    grid = pair_grid(g, 0, 5)
    for a, b in itertools.product(range(len(grid.sx)), range(len(grid.ty))):
        S = ball_intersection(g, 0, g.to_fraction(grid.sx[a]), 5, g.to_fraction(grid.ty[b]))
        assert g.to_fraction(grid.eccentricity[a, b]) == ecc_report(g, S).eccentricity


def test_p5_all_realized_scan_is_one():
    assert scan_ball_pairs(generate(GenSpec("grid", n=5, m=1)), AllRealized()).max_ecc == 1


def test_grid_scan_has_witness():
    scan = scan_ball_pairs(generate(GenSpec("grid", n=4)), AllRealized())
    assert scan.max_ecc >= 1 and scan.ecc_witness is not None
    js = scan.to_json()
    assert js["radius_policy"] == {"policy": "all-realized"} and js["lower_bound"] is False


def test_subdivided_tree_within_slack_for_every_radius():
    tree = subdivide(generate(GenSpec("tree", n=16, seed=2)), 1)
    full = scan_ball_pairs(tree, AllRealized())
    assert 0 < full.max_ecc <= tree.slack
    assert scan_ball_pairs(tree, Aligned()).max_ecc == 0


def test_sampled_scan_is_a_lower_bound():
    g = generate(GenSpec("grid", n=4))
    full = scan_ball_pairs(g, AllRealized())
    part = scan_ball_pairs(g, Sampled(50, seed=1))
    assert part.lower_bound and part.max_ecc <= full.max_ecc
    assert part.to_json() == scan_ball_pairs(g, Sampled(50, seed=1)).to_json()


def test_parse_policy():
    assert parse_policy("all") == AllRealized()
    assert parse_policy("aligned:1/4") == Aligned(Fraction(1, 4))
    assert parse_policy("sampled:7", seed=3) == Sampled(7, 3)
    with pytest.raises(ValueError):
        parse_policy("bogus")


# --------------------------------------------------------- inscribed lemmas


def test_inscribed_example_on_subdivided_path():
    p5 = subdivide(generate(GenSpec("grid", n=5, m=1)), 1)
    chk = inscribed_formula_check(p5, 0, 2, 4, 3)
    assert chk.center == (1, 2, 1) and chk.offset == 0
    assert chk.radius == Fraction(1, 2) and chk.contained
    assert ball(p5, chk.center, chk.radius) == (1, 2, (1, 2, 1))


def test_inscribed_zero_radius_case():
    p5 = generate(GenSpec("grid", n=5, m=1))
    chk = inscribed_formula_check(p5, 0, 1, 4, 3)
    assert chk.radius == 0 and chk.center == 1 and chk.contained


def test_cycle_upper_bound_example():
    c8 = generate(GenSpec("cycle", n=8))
    chk = inscribed_formula_check(c8, 0, 3, 4, 3, extension=True)
    assert chk.max_inscribed <= 2 and chk.upper_bound_ok
    assert chk.extension_ok


def test_disjoint_balls_are_vacuous():
    c8 = generate(GenSpec("cycle", n=8))
    assert inscribed_formula_check(c8, 0, 1, 4, 1).vacuous


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_lemma_general_on_unit_graphs(seed):
    rng = random.Random(seed)
    n = rng.randrange(3, 12)
    space = generate(GenSpec("random-graph", n=n, m=rng.randrange(0, n), seed=seed))
    res = lemma_general_scan(space)
    assert res.ok and res.upper_strict == 0 and res.upper_allowance == 0
