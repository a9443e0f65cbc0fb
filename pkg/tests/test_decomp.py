import copy
import itertools
import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linfdc.algebra import GroupElement, RatFunc
from linfdc.decomp import (
    AsdimCertificate,
    ColoredPiece,
    DecompNode,
    DecompTree,
    ExpansivenessError,
    Leaf,
    MalformedCertificate,
    UnverifiedInput,
    asdim_strategy,
    asdim_to_fdc,
    bounded_leaf_strategy,
    brick_certificate,
    brick_params,
    certificate_from_json,
    certificate_to_json,
    components_strategy,
    exact_asdim,
    export_dot,
    fibering_decompose,
    finite_subgroup_family_asdim0,
    greedy_asdim,
    root_node,
    tree_from_json,
    tree_to_json,
    union_decompose,
    verify_asdim,
    verify_fdc,
)
from linfdc.norms import MetricProfile, NormSpec, pseudometric
from linfdc.spaces import FinSpace, MetricFamily, ball_space, r_components
from oracles import random_graph_metric

INF = math.inf


def interval(n=21):
    return MetricFamily([FinSpace.lattice([(i,) for i in range(n)])], "interval")


def interval_certificate(r=3):
    pcs = [ColoredPiece.of(0, range(a, a + 4)) for a in (0, 8, 16)]
    pcs += [ColoredPiece.of(1, range(a, min(a + 4, 21))) for a in (4, 12, 20)]
    return AsdimCertificate(1, r, 3, [pcs])


def plane(n=25):
    return MetricFamily([FinSpace.lattice([(i, j) for i in range(n) for j in range(n)])], "plane")


# ---------------------------------------------------------------------------
# asdim certificates


def test_singleton_certificate():
    fam = MetricFamily([FinSpace.lattice([(0,)])])
    assert verify_asdim(AsdimCertificate(0, 7, 0, [[ColoredPiece.of(0, [0])]]), fam).ok


def test_interval_certificate_scale_three_and_five():
    fam = interval()
    assert verify_asdim(interval_certificate(3), fam).ok
    rep = verify_asdim(interval_certificate(5), fam)
    assert rep.failure.kind == "disjointness"
    assert rep.failure.location == "member 0 color 0"
    assert rep.failure.detail["distance"] == 5


def test_brick_cover_matches_interval_example():
    cert = brick_certificate(interval(), 3)
    assert cert.n == 1 and cert.bound == 3
    assert [p.points for p in cert.pieces[0] if p.color == 0] == [(0, 1, 2, 3), (8, 9, 10, 11), (16, 17, 18, 19)]


def test_malformed_certificate():
    cert = AsdimCertificate(0, 1, 0, [[ColoredPiece.of(0, [0, 99])]])
    with pytest.raises(MalformedCertificate):
        verify_asdim(cert, interval())


def test_located_failures():
    fam = interval()
    c = interval_certificate()
    c.pieces[0] = c.pieces[0][1:]
    rep = verify_asdim(c, fam)
    assert rep.failure.kind == "coverage" and rep.failure.detail["point"] == 0
    c = interval_certificate()
    c.bound = 2
    assert verify_asdim(c, fam).failure.kind == "bound"
    c = interval_certificate()
    c.pieces[0][0] = ColoredPiece.of(3, c.pieces[0][0].points)
    assert verify_asdim(c, fam).failure.kind == "color"


@pytest.mark.parametrize("r", [1, 2, 4, 6])
def test_plane_bricks(r):
    fam = plane(3 * brick_params(r)["side"] // 2)
    cert = greedy_asdim(fam, r, 2, bound=10**6)
    assert cert.n == 2 and cert.meta["strategy"] == "bricks"
    assert verify_asdim(cert, fam).ok


def test_infinitely_separated_points_have_dimension_zero():
    d = np.where(np.eye(5) == 1, 0, INF)
    fam = MetricFamily([FinSpace(range(5), d)])
    cert = greedy_asdim(fam, 100, 0)
    assert cert.n == 0 and len(cert.pieces[0]) == 5 and cert.bound == 0


def test_unipotent_window_components():
    t = RatFunc.t(2)
    gens = [
        GroupElement([[1, a, 0], [0, 1, 0], [0, 0, 1]], 2) for a in (1, t)
    ] + [GroupElement([[1, 0, 0], [0, 1, a], [0, 0, 1]], 2) for a in (1, t)]
    space, _ = ball_space(gens, 4, MetricProfile.of(NormSpec.t_adic()))
    cert = greedy_asdim(MetricFamily([space]), 1, 0)
    assert cert.n == 0 and cert.meta["strategy"] == "components"
    assert cert.bound == r_components(space, 1).max_diameter


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(1, 9), r=st.integers(0, 4), bound=st.integers(0, 8))
def test_greedy_never_beats_exhaustive_search(seed, n, r, bound):
    d = random_graph_metric(random.Random(seed), n)
    space = FinSpace(range(n), d)
    exact = exact_asdim(space, r, bound)
    cert = greedy_asdim(MetricFamily([space]), r, n, bound=bound, strategy="greedy")
    if cert is not None:
        assert verify_asdim(cert, MetricFamily([space])).ok
        assert exact is not None and exact <= cert.n
    if exact is None:
        assert cert is None


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6), r=st.integers(0, 3), bound=st.integers(0, 6))
def test_union_of_far_parts_has_max_dimension(seed, r, bound):
    rng = random.Random(seed)
    a, b = rng.randint(1, 5), rng.randint(1, 5)
    da, db = random_graph_metric(rng, a), random_graph_metric(rng, b)
    d = np.full((a + b, a + b), INF)
    d[:a, :a] = da
    d[a:, a:] = db
    union = FinSpace(range(a + b), d)
    parts = [exact_asdim(FinSpace(range(a), da), r, bound), exact_asdim(FinSpace(range(b), db), r, bound)]
    got = exact_asdim(union, r, bound)
    if None in parts:
        assert got is None
    else:
        assert got == max(parts)


# ---------------------------------------------------------------------------
# trees


def test_depth_zero_tree():
    fam = interval(5)
    tree = DecompTree(fam, DecompNode(root_node(fam), leaf=Leaf("bounded", 4)))
    assert verify_fdc(tree).ok and tree.depth() == 0
    tree.root.leaf = Leaf("bounded", 3)
    assert verify_fdc(tree).failure.kind == "leaf_bound"


def test_interval_tree_and_tampering():
    fam = interval()
    tree = asdim_to_fdc(interval_certificate(), fam)
    assert tree.depth() == 1 and tree.scales() == [3]
    assert all(n.leaf.bound == 3 for _, n in tree.leaves())
    bad = copy.deepcopy(tree)
    split = bad.root.splits[0]
    split.v_pieces.append(split.u_pieces.pop())
    rep = verify_fdc(bad)
    assert not rep.ok and rep.failure.location.startswith("root")


def test_asdim_to_fdc_requires_verified_input():
    with pytest.raises(UnverifiedInput):
        asdim_to_fdc(interval_certificate(5), interval())


def test_asdim_to_fdc_depths():
    fam = interval()
    zero = greedy_asdim(fam, 2, 0)
    assert asdim_to_fdc(zero, fam).depth() == 1
    pl = plane(30)
    cert = brick_certificate(pl, 3)
    tree = asdim_to_fdc(cert, pl)
    assert tree.depth() == 2 and tree.scales() == [3]
    assert verify_fdc(tree, min_scale=3).ok
    assert not verify_fdc(tree, min_scale=4).ok


def test_identity_fibering_keeps_splits():
    fam = interval()
    base = asdim_to_fdc(interval_certificate(), fam)
    ident = [(0, list(range(21)))]
    tree = fibering_decompose(fam, ident, base, bounded_leaf_strategy, 3)
    assert [(p, n.splits) for p, n in tree.walk() if not n.is_leaf] == [
        (p, n.splits) for p, n in base.walk() if not n.is_leaf
    ]


def _torus_window(r):
    # F\T for T = upper triangular 2x2 with t-power diagonal, F = {I, [[1,1],[0,1]]}
    p = 2
    t = RatFunc.t(p)
    gens = [
        GroupElement.diagonal([t, RatFunc.one(p)]),
        GroupElement.diagonal([RatFunc.one(p), t]),
        GroupElement([[1, 1], [0, 1]], p),
        GroupElement([[1, t.inverse()], [0, 1]], p),
    ]
    prof = MetricProfile.of(NormSpec.t_adic())
    space, elems = ball_space(gens, 3, prof)
    return space, elems, prof


def test_torus_fibering_over_diagonal_lattice():
    from linfdc.spaces import GroupAction, quotient_map, saturate, distance_matrix
    from linfdc.norms import valuation

    r = 1
    _, elems, prof = _torus_window(r)
    F = [GroupElement.identity(2, 2), GroupElement([[1, 1], [0, 1]], 2)]
    W = saturate(elems, F)
    space = FinSpace(range(len(W)), distance_matrix(W, prof))
    q, labels = quotient_map(space, GroupAction.left_multiplication(space, W, F))
    reps = {}
    for i, l in enumerate(labels):
        reps.setdefault(int(l), i)
    spec = NormSpec.t_adic()
    exps = [tuple(valuation(W[reps[k]].mat[i][i], spec) for i in range(2)) for k in range(len(q))]
    lattice_pts = sorted(set(exps))
    D = MetricFamily([FinSpace.lattice(lattice_pts)], "diagonal")
    pmap = [lattice_pts.index(e) for e in exps]
    X = MetricFamily([q], "F\\T")
    from linfdc.decomp import expansion_modulus

    table = expansion_modulus(X, [(0, pmap)], D)
    rho = max(v for s, v in table.items() if s <= r)
    base = asdim_to_fdc(brick_certificate(D, max(rho, 1)), D)
    tree = fibering_decompose(X, [(0, pmap)], base, components_strategy, r)
    assert verify_fdc(tree, min_scale=r).ok
    assert tree.meta["rho_r"] == rho
    with pytest.raises(ExpansivenessError):
        fibering_decompose(X, [(0, pmap)], base, components_strategy, r, modulus=lambda s: 0)


def test_product_projection_fibering():
    pts = [(a, b) for a in range(12) for b in range(6)]
    d = np.array([[abs(x[0] - y[0]) + abs(x[1] - y[1]) for y in pts] for x in pts])
    X = MetricFamily([FinSpace(pts, d)], "H1 x H2")
    Y = MetricFamily([FinSpace.lattice([(a,) for a in range(12)])], "H1")
    pmap = [a for a, _ in pts]
    r = 2
    base = asdim_to_fdc(brick_certificate(Y, r), Y)
    tree = fibering_decompose(X, [(0, pmap)], base, asdim_strategy(2, bound=40), r)
    assert verify_fdc(tree, min_scale=r).ok


def test_union_examples():
    fam = interval(8)
    tree = union_decompose(fam, [[range(8)]], bounded_leaf_strategy, 2)
    assert tree.depth() == 0 and tree.meta["parts"] == 1
    two = MetricFamily([FinSpace.lattice([(0,), (1,), (50,), (51,)])])
    tree = union_decompose(two, [[[0, 1], [2, 3]]], bounded_leaf_strategy, 5)
    assert tree.depth() == 1 and verify_fdc(tree).ok
    with pytest.raises(ValueError):
        union_decompose(two, [[[0, 1], [2]]], bounded_leaf_strategy, 5)


def test_union_into_point_fibers():
    fam = interval(6)
    tree = union_decompose(fam, [[[i] for i in range(6)]], bounded_leaf_strategy, 1)
    assert tree.meta["parts"] == 6 and verify_fdc(tree).ok
    assert all(n.leaf.bound == 0 for _, n in tree.leaves())


def _gl2_order4():
    t = RatFunc.t(2)
    vals = [RatFunc.zero(2), RatFunc.one(2), t.inverse(), t.inverse() + 1]
    return [GroupElement([[1, a], [0, 1]], 2) for a in vals]


def test_finite_subgroup_certificates():
    prof = MetricProfile.of(NormSpec.t_adic())
    e = GroupElement.identity(2, 2)
    cert = finite_subgroup_family_asdim0([[e]], 1, prof)
    assert cert.pieces[0] == [ColoredPiece.of(0, [0])]
    s = GroupElement([[0, 1], [1, 0]], 2)
    cert = finite_subgroup_family_asdim0([[e, s]], 1, prof)
    assert len(cert.pieces[0]) == 1 and cert.bound == 0
    F = _gl2_order4()
    cert = finite_subgroup_family_asdim0([F], 0, prof)
    cosets = sorted(p.points for p in cert.pieces[0])
    assert cosets == [(0, 1), (2, 3)]
    # exhaustive distances: cosets are more than R apart and bounded
    for a, b in itertools.product(*cosets):
        assert pseudometric(F[a], F[b], prof) > 0
    assert cert.meta["k"] == 2 and cert.meta["chain_bound"] == 0
    with pytest.raises(ValueError):
        finite_subgroup_family_asdim0([F[:3]], 0, prof)


# ---------------------------------------------------------------------------
# serialization


def test_certificate_round_trip():
    fam = interval()
    text = certificate_to_json(interval_certificate(), fam)
    cert, fam2 = certificate_from_json(text)
    assert verify_asdim(cert, fam2).ok
    assert certificate_to_json(cert, fam2) == text


def test_tree_round_trip_and_dot():
    pl = plane(20)
    tree = asdim_to_fdc(brick_certificate(pl, 2), pl)
    text = tree_to_json(tree)
    back = tree_from_json(text)
    assert verify_fdc(back).ok and tree_to_json(back) == text
    dot = export_dot(back)
    assert dot.startswith("digraph") and dot.count("->") == 4
