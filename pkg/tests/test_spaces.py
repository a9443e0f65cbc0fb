import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linfdc.algebra import GroupElement, RatFunc
from linfdc.norms import MetricProfile, NormSpec, pseudometric
from linfdc.spaces import (
    BallCapExceeded,
    FinSpace,
    GroupAction,
    MetricFamily,
    PreconditionError,
    ball_space,
    conjugation_isometry_check,
    disjointness_violation,
    dump_family,
    is_r_disjoint,
    load_family,
    quotient,
    quotient_map,
    r_components,
    saturate,
    semi_bounded,
    uniform_bound,
)
from oracles import bfs_components, orbit_min_distance, random_graph_metric

INF = math.inf
TADIC = MetricProfile.of(NormSpec.t_adic())


def Z(points):
    return FinSpace.lattice([(x,) for x in points])


def test_finspace_validation():
    with pytest.raises(ValueError):
        FinSpace(range(2), [[0, 1], [2, 0]])
    with pytest.raises(ValueError):
        FinSpace(range(2), [[0, 1.5], [1.5, 0]])
    with pytest.raises(ValueError):
        FinSpace(range(3), [[0, 1, 5], [1, 0, 1], [5, 1, 0]])
    s = FinSpace(range(3), [[0, 0, INF], [0, 0, INF], [INF, INF, 0]])
    assert s.is_pseudometric()


def test_ball_space_examples():
    g = GroupElement([[1, 1], [0, 1]], 2)
    space, elems = ball_space([g], 3, TADIC)
    assert len(space) == 2
    t = RatFunc.t(2)
    d = GroupElement.diagonal([t, t.inverse()])
    space, elems = ball_space([d], 3, TADIC)
    assert len(space) == 7
    k = {e: next(j for j in range(-3, 4) if e == d**j) for e in elems}
    for a in range(7):
        for b in range(7):
            assert space.d(a, b) == abs(k[elems[a]] - k[elems[b]])
    space, elems = ball_space([d], 0, TADIC)
    assert len(space) == 1 and elems[0].is_identity()
    with pytest.raises(BallCapExceeded):
        ball_space([d], 5, TADIC, cap=5)


def test_quotient_examples():
    s = Z(range(-2, 3))
    trivial = GroupAction.generated(s, [])
    assert quotient(s, trivial) == s
    flip = GroupAction.generated(s, [tuple(4 - i for i in range(5))])
    q, labels = quotient_map(s, flip)
    assert len(q) == 3
    lab = {s.points[i][0]: int(labels[i]) for i in range(5)}
    assert q.d(lab[1], lab[2]) == 1 and q.d(lab[-1], lab[1]) == 0
    assert q.is_pseudometric()


def test_quotient_of_group_window_is_orbit_minimum():
    t = RatFunc.t(2)
    prof = MetricProfile.of(NormSpec.t_adic(), NormSpec.degree())
    gens = [GroupElement([[1, t], [0, 1]], 2), GroupElement([[t, 0], [0, 1]], 2)]
    F = [GroupElement.identity(2, 2), GroupElement([[0, 1], [1, 0]], 2)]
    _, elems = ball_space(gens, 2, prof)
    W = saturate(elems, F)
    from linfdc.spaces import distance_matrix

    space = FinSpace(range(len(W)), distance_matrix(W, prof))
    act = GroupAction.left_multiplication(space, W, F)
    assert act.verify() is None
    q, labels = quotient_map(space, act)
    reps = {}
    for i, l in enumerate(labels):
        reps.setdefault(int(l), i)
    for a in range(len(q)):
        for b in range(len(q)):
            x, y = reps[a], reps[b]
            brute = min(pseudometric(W[x], f * W[y], prof) for f in F)
            assert q.d(a, b) == brute == orbit_min_distance(space.dist, act.perms, x, y)
    # projection is 1-Lipschitz
    assert np.all(q.dist[np.ix_(labels, labels)] <= space.dist)


def test_left_multiplication_needs_saturated_window():
    t = RatFunc.t(2)
    _, elems = ball_space([GroupElement([[1, t], [0, 1]], 2)], 1, TADIC)
    F = [GroupElement.identity(2, 2), GroupElement([[0, 1], [1, 0]], 2)]
    space = FinSpace(range(len(elems)), np.zeros((len(elems), len(elems))))
    with pytest.raises(ValueError):
        GroupAction.left_multiplication(space, elems, F)


def test_non_isometric_action_detected():
    s = Z([0, 1, 5])
    act = GroupAction(s, [(0, 1, 2), (1, 0, 2)])
    assert "isometry" in act.verify()


def test_r_components_examples():
    s = Z([0, 1, 5, 6])
    part = r_components(s, 2)
    assert sorted(part.blocks) == [(0, 1), (2, 3)] or sorted(map(tuple, part.blocks)) == [(0, 1), (2, 3)]
    assert part.max_diameter == 1
    assert len(r_components(s, 6).blocks) == 1


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(1, 12), R=st.integers(0, 8))
def test_r_components_match_bfs(seed, n, R):
    d = random_graph_metric(random.Random(seed), n)
    s = FinSpace(range(n), d)
    ours = sorted(sorted(b) for b in r_components(s, R).blocks)
    assert ours == bfs_components(d, R)


def test_disjointness_examples():
    s = Z(range(0, 7))
    pieces = [[0, 1], [5, 6]]
    assert is_r_disjoint(pieces, s, 3)
    assert not is_r_disjoint(pieces, s, 4)
    bad = disjointness_violation([[0, 1], [1, 2]], s, 0)
    assert bad["distance"] == 0 and "overlap" in bad["reason"]
    inf = FinSpace(range(3), np.where(np.eye(3) == 1, 0, INF))
    assert is_r_disjoint([[0], [1], [2]], inf, 10**6)


def test_bounds():
    single = MetricFamily([Z([0]), Z([3])])
    assert uniform_bound(single) == 0
    fam = MetricFamily([Z(range(6)), Z(range(10))])
    assert uniform_bound(fam) == 9
    assert semi_bounded(MetricFamily([Z(range(6))])) == 6
    blocks = np.full((8, 8), INF)
    for b in (range(0, 4), range(4, 8)):
        for i in b:
            for j in b:
                blocks[i, j] = abs(i - j)
    glued = MetricFamily([FinSpace(range(8), blocks)])
    assert uniform_bound(glued) == INF
    assert semi_bounded(glued) == 4
    pow2 = [0, 1, 3, 7, 15]
    assert semi_bounded(MetricFamily([Z(pow2)])) == 16


def test_conjugation_isometry():
    t = RatFunc.t(2)
    prof = MetricProfile.of(NormSpec.t_adic(), NormSpec.degree())
    _, elems = ball_space([GroupElement([[1, t], [0, 1]], 2), GroupElement([[t, 0], [0, 1]], 2)], 1, prof)
    F = [GroupElement.identity(2, 2), GroupElement([[1, 1], [0, 1]], 2)]
    assert conjugation_isometry_check(elems, GroupElement.identity(2, 2), F, prof).ok
    perm = GroupElement([[0, 1], [1, 0]], 2)
    assert conjugation_isometry_check(elems, perm, F, prof).ok
    with pytest.raises(PreconditionError):
        conjugation_isometry_check(elems, GroupElement([[t, 0], [0, 1]], 2), F, prof)


def test_text_format_round_trip():
    s = FinSpace(range(3), [[0, 2, INF], [2, 0, INF], [INF, INF, 0]])
    fam = MetricFamily([s, Z([0, 4])], "demo")
    text = dump_family(fam)
    assert "INF" in text
    back = load_family(text)
    assert back.label == "demo"
    assert all(np.array_equal(a.dist, b.dist) for a, b in zip(fam, back))
