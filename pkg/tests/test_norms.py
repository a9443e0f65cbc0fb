import itertools
import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from linfdc.algebra import GroupElement, Poly, RatFunc
from linfdc.norms import (
    MetricProfile,
    NormSpec,
    ball_finiteness_probe,
    length,
    metricize,
    metricize_value,
    norm_axiom_check,
    pseudometric,
    valuation,
)
from linfdc.spaces import word_ball
from oracles import T, degree_valuation, place_valuation, sym_ratfunc, t_adic_valuation
from test_algebra import ratfuncs

INF = math.inf


def test_valuation_examples():
    t = RatFunc.t(2)
    assert valuation(t**3 + t**5, NormSpec.t_adic()) == 3
    assert valuation(t**2 + 1, NormSpec.degree()) == -2
    assert valuation(RatFunc.zero(2), NormSpec.t_adic()) == INF


@settings(max_examples=80, deadline=None)
@given(data=st.data(), p=st.sampled_from([2, 3, 5]))
def test_valuations_match_sympy(data, p):
    x = data.draw(ratfuncs(p, 4))
    sx = sym_ratfunc(x)
    assert valuation(x, NormSpec.t_adic()) == t_adic_valuation(sx)
    assert valuation(x, NormSpec.degree()) == degree_valuation(sx)
    pi = Poly([1, 1], p)  # t + 1
    assert valuation(x, NormSpec.place(pi)) == place_valuation(sx, sympy.Poly(T + 1, T, modulus=p))


def test_place_requires_irreducible():
    with pytest.raises(ValueError):
        NormSpec.place(Poly([1, 0, 1], 2))
    spec = NormSpec.place(Poly([2, 0, 2], 3))  # 2t^2 + 2 -> monic t^2 + 1
    assert spec.pi == Poly([1, 0, 1], 3)


def test_norm_axiom_examples():
    t = RatFunc.t(3)
    assert norm_axiom_check(NormSpec.t_adic(), [(t, t * t)]).ok
    assert norm_axiom_check(NormSpec.t_adic(), [(t, -t)]).ok


def test_degree_norm_random_pairs():
    import random

    rng = random.Random(5)
    p = 3
    pairs = []
    for _ in range(100):
        a = RatFunc(Poly([rng.randrange(p) for _ in range(4)], p), Poly([rng.randrange(1, p)] + [rng.randrange(p) for _ in range(3)], p))
        b = RatFunc(Poly([rng.randrange(p) for _ in range(4)], p), Poly([1, rng.randrange(p)], p))
        pairs.append((a, b))
    rep = norm_axiom_check(NormSpec.degree(), pairs)
    assert rep.ok and rep.checked == 100


def test_length_examples():
    t = RatFunc.t(2)
    prof = MetricProfile.of(NormSpec.t_adic())
    d = GroupElement.diagonal([t**-2, t])
    assert length(d, prof).scalar == 2
    assert length(GroupElement.identity(2, 2), prof).scalar == 0
    assert length(GroupElement([[0, 1], [1, 0]], 2), prof).scalar == 0
    assert pseudometric(GroupElement.identity(2, 2), d, prof) == 2


def test_profile_rejects_duplicates():
    with pytest.raises(ValueError):
        MetricProfile.of(NormSpec.t_adic(), NormSpec.t_adic())


def test_multi_norm_length_is_sum():
    t = RatFunc.t(3)
    g = GroupElement([[t, 1], [0, 1]], 3)
    prof = MetricProfile.of(NormSpec.t_adic(), NormSpec.degree())
    lv = length(g, prof)
    assert lv.units == (length(g, NormSpec.t_adic()).scalar, length(g, NormSpec.degree()).scalar)
    assert lv.scalar == sum(lv.units)


def _window():
    t = RatFunc.t(2)
    gens = [
        GroupElement([[1, t], [0, 1]], 2),
        GroupElement([[t, 0], [0, 1]], 2),
        GroupElement([[0, 1], [1, 0]], 2),
    ]
    return word_ball(gens, 2)


def test_length_axioms_on_window():
    elems = _window()
    prof = MetricProfile.of(NormSpec.t_adic(), NormSpec.degree(), NormSpec.place(Poly([1, 1], 2)))
    lens = {g: length(g, prof) for g in elems}
    for g in elems:
        assert lens[g] == length(g.inverse(), prof)
        assert all(u >= 0 for u in lens[g].units)
    for g, h in itertools.product(elems[:25], repeat=2):
        lgh = length(g * h, prof).units
        assert all(a <= b + c for a, b, c in zip(lgh, lens[g].units, lens[h].units))
    for k, g, h in itertools.islice(itertools.product(elems[:6], elems[:10], elems[:10]), 200):
        assert pseudometric(k * g, k * h, prof) == pseudometric(g, h, prof)


def test_integral_elements_have_length_zero():
    t = RatFunc.t(3)
    h = GroupElement([[1, t], [t + 1, t * t + t + 1]], 3)
    assert length(h, NormSpec.t_adic()).scalar == 0


def test_metricize():
    assert metricize_value(0, same_point=False) == 1
    assert metricize_value(0, same_point=True) == 0
    assert metricize_value(7, same_point=False) == 7
    m = metricize(np.array([[0, 0, 3], [0, 0, INF], [3, INF, 0]]))
    assert m.tolist() == [[0, 1, 3], [1, 0, INF], [3, INF, 0]]


def test_ball_probe_examples():
    t = RatFunc.t(2)
    both = MetricProfile.of(NormSpec.t_adic(), NormSpec.degree())
    res = ball_finiteness_probe(both, [t], 1, budget=1000)
    assert res.status == "finite"
    # -1 <= v_t and degree <= 1 on polynomials: {0, 1, t, t + 1}
    assert {str(x) for x in res.elements} == {"0", "1", "t", "t + 1"}
    only_t = MetricProfile.of(NormSpec.t_adic())
    assert ball_finiteness_probe(only_t, [t], 0, budget=50).status == "budget_exceeded"
    neg = ball_finiteness_probe(both, [t], -1, budget=50)
    assert RatFunc.one(2) not in neg.elements
