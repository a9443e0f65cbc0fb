import copy

import numpy as np
import pytest

from linfdc.algebra import GroupElement, RatFunc
from linfdc.decomp import (
    LiftError,
    equivariant_lift,
    quotient_base_tree,
    quotient_family,
    verify_equivariant,
)
from linfdc.norms import MetricProfile, NormSpec
from linfdc.spaces import FinSpace, GroupAction, MetricFamily, ball_space, distance_matrix, saturate
from oracles import orbit_min_distance


def line(n=11):
    return FinSpace.lattice([(i - n // 2,) for i in range(n)])


def flip_setup(n=11):
    space = line(n)
    act = GroupAction.generated(space, [tuple(range(n - 1, -1, -1))])
    return MetricFamily([space]), [act]


def lift(fam, acts, r, mode):
    qfam, _ = quotient_family(fam, acts)
    return equivariant_lift(quotient_base_tree(qfam, r, mode), fam, acts, r)


def test_trivial_action_recovers_base_pieces():
    space = line()
    fam = MetricFamily([space])
    act = GroupAction(space, [tuple(range(len(space)))])
    dec = lift(fam, [act], 2, "components")
    assert dec.meta["k"] == 1 and dec.depth() == 2
    assert verify_equivariant(dec).ok


def test_quotient_distances_match_orbit_minimum():
    fam, acts = flip_setup()
    qfam, labels = quotient_family(fam, acts)
    q = qfam[0]
    reps = {}
    for x, l in enumerate(labels[0]):
        reps.setdefault(int(l), x)
    for a in range(len(q)):
        for b in range(len(q)):
            assert q.dist[a, b] == orbit_min_distance(fam[0].dist, acts[0].perms, reps[a], reps[b])


@pytest.mark.parametrize("r", [0, 1, 3])
def test_flip_with_single_orbit_leaves_stays_within_k_r(r):
    fam, acts = flip_setup()
    dec = lift(fam, acts, r, "points")
    assert verify_equivariant(dec).ok
    assert dec.meta["max_diam_Y"] == 0
    assert dec.meta["max_coset_diameter"] <= dec.meta["k_times_r"]


def test_bounded_base_leaf_can_exceed_k_r():
    # one bounded leaf over the whole orbit space: Y is a half-line of
    # diameter 5 and the coset piece is the full line
    fam, acts = flip_setup()
    dec = lift(fam, acts, 1, "bounded")
    m = dec.meta
    assert m["k"] == 2 and m["max_diam_Y"] == 5
    assert m["max_coset_diameter"] == 10 > m["k_times_r"]
    assert m["max_coset_diameter"] <= m["diameter_bound"]


def test_non_invariant_split_is_rejected():
    fam, acts = flip_setup()
    dec = lift(fam, acts, 1, "components")
    bad = copy.deepcopy(dec)
    node = bad.root
    s = node.splits[0]
    moved = s.u_pieces[0][0]
    s.u_pieces[0] = s.u_pieces[0][1:]
    s.v_pieces.append((moved,))
    rep = verify_equivariant(bad)
    assert not rep.ok and rep.failure.kind in ("equivariance", "disjointness")


def test_non_isometric_action_is_rejected():
    space = FinSpace.lattice([(0,), (1,), (5,), (6,)])
    act = GroupAction.generated(space, [(3, 2, 1, 0)])
    act2 = GroupAction.generated(space, [(1, 0, 2, 3)])
    assert act.verify() is None
    assert "isometry" in act2.verify()
    qfam, _ = quotient_family(MetricFamily([space]), [act])
    with pytest.raises(LiftError):
        equivariant_lift(quotient_base_tree(qfam, 1), MetricFamily([space]), [act2], 1)


def test_finite_unipotent_subgroup_on_window():
    p = 2
    t = RatFunc.t(p)
    gens = [GroupElement.diagonal([t, RatFunc.one(p)]), GroupElement([[1, 1], [0, 1]], p)]
    prof = MetricProfile.of(NormSpec.t_adic(), NormSpec.degree())
    _, elems = ball_space(gens, 2, prof)
    F = [GroupElement([[1, a], [0, 1]], p) for a in (RatFunc.zero(p), RatFunc.one(p), t, t + 1)]
    W = saturate(elems, F)
    space = FinSpace(range(len(W)), distance_matrix(W, prof))
    act = GroupAction.left_multiplication(space, W, F)
    assert act.verify() is None
    fam = MetricFamily([space])
    for mode in ("components", "points"):
        dec = lift(fam, [act], 2, mode)
        assert verify_equivariant(dec).ok
        assert dec.meta["max_coset_diameter"] <= dec.meta["diameter_bound"]
        # every coset piece is a union of translates g·Y, so it is invariant
        # under H and permuted by F
        leaf = dec.root
        while not leaf.is_leaf and leaf.note != "cosets":
            leaf = leaf.u_child
        for piece in leaf.splits[0].u_pieces:
            for g in range(act.order):
                img = act.apply(g, piece)
                assert any(img == frozenset(q) for q in leaf.splits[0].u_pieces)
    assert np.isfinite(space.dist).any()
