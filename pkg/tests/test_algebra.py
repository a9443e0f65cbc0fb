import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linfdc.algebra import (
    AlgebraError,
    Fp,
    GroupElement,
    Poly,
    RatFunc,
    SingularMatrixError,
    check_prime,
    is_unipotent,
    mat_inverse,
    mat_is_identity,
    _matmul,
)
from oracles import frac_add, frac_mul, same_fraction, sym_ratfunc

PRIMES = [2, 3, 5]


def ratfuncs(p, deg=3):
    coeffs = st.lists(st.integers(0, p - 1), min_size=0, max_size=deg + 1)
    dens = st.lists(st.integers(0, p - 1), min_size=1, max_size=deg + 1).filter(any)
    return st.builds(lambda n, d: RatFunc(Poly(n, p), Poly(d, p)), coeffs, dens)


def test_prime_field_examples():
    assert Fp(3, 5) + Fp(4, 5) == Fp(2, 5)
    assert Fp(2, 5).inverse() == Fp(3, 5)
    assert Fp(1, 2) + Fp(1, 2) == Fp(0, 2)
    with pytest.raises(ZeroDivisionError):
        Fp(0, 5).inverse()
    with pytest.raises(AlgebraError):
        Fp(1, 5) + Fp(1, 3)


def test_nonprime_modulus_rejected():
    with pytest.raises(AlgebraError):
        check_prime(9)


def test_ratfunc_examples():
    t = RatFunc.t(2)
    assert (t + 1) * (t + 1) == t * t + 1
    x = t / (t + 1)
    assert x.inverse() == (t + 1) / t
    assert str(x.inverse()) == "(t + 1)/t"
    y = t / (t * t)
    assert y.num == Poly([1], 2) and y.den == Poly([0, 1], 2)
    with pytest.raises(ZeroDivisionError):
        RatFunc.zero(3).inverse()


def test_canonical_form_is_unique():
    t = RatFunc.t(3)
    a = (2 * t + 2) / (t * t - 1)
    b = RatFunc.const(2, 3) / (t - 1)
    assert a == b and hash(a) == hash(b)
    assert a.den.is_monic()
    assert RatFunc.zero(3).den == Poly([1], 3)


@pytest.mark.parametrize("p", PRIMES)
@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_field_axioms_against_sympy(p, data):
    a, b, c = (data.draw(ratfuncs(p)) for _ in range(3))
    sa, sb, sc = map(sym_ratfunc, (a, b, c))
    assert same_fraction(sym_ratfunc(a * b), frac_mul(sa, sb))
    assert same_fraction(sym_ratfunc(a + b), frac_add(sa, sb))
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + b == b + a
    if not a.is_zero():
        assert (a * a.inverse()).is_one()


def test_unipotent_square_and_inverse_examples():
    t = RatFunc.t(3)
    u = GroupElement([[1, t], [0, 1]], 3)
    assert (u * u).mat[0][1] == 2 * t
    t2 = RatFunc.t(2)
    u2 = GroupElement([[1, t2], [0, 1]], 2)
    assert (u2 * u2).is_identity()
    assert u.inverse().mat == ((RatFunc.one(3), -t), (RatFunc.zero(3), RatFunc.one(3)))
    d = GroupElement([[t, 0], [0, t.inverse()]], 3)
    assert d.inverse().mat[0][0] == t.inverse() and d.inverse().mat[1][1] == t


def test_singular_matrix_rejected():
    with pytest.raises(SingularMatrixError):
        GroupElement([[1, 1], [1, 1]], 2)
    with pytest.raises(SingularMatrixError):
        mat_inverse(((RatFunc.one(5), RatFunc.t(5)), (RatFunc.t(5), RatFunc.t(5) ** 2)))


@settings(max_examples=25, deadline=None)
@given(data=st.data())
def test_product_inverse_reassembles(data):
    p = 3
    rows = [[data.draw(ratfuncs(p, 2)) for _ in range(3)] for _ in range(3)]
    rows2 = [[data.draw(ratfuncs(p, 2)) for _ in range(3)] for _ in range(3)]
    try:
        a, b = GroupElement(rows, p), GroupElement(rows2, p)
    except SingularMatrixError:
        return
    ab = a * b
    assert mat_is_identity(_matmul(ab.inv, ab.mat))
    assert mat_is_identity(_matmul(ab.mat, ab.inv))


def test_is_unipotent_examples():
    assert is_unipotent(GroupElement([[1, 1], [0, 1]], 5))
    t = RatFunc.t(5)
    assert not is_unipotent(GroupElement([[t, 0], [0, t.inverse()]], 5))
    assert is_unipotent(GroupElement([[0, 1], [1, 0]], 2))
    assert not is_unipotent(GroupElement([[0, 1], [1, 0]], 3))


def test_irreducibility_by_trial_division():
    assert Poly([1, 1, 1], 2).is_irreducible()
    assert not Poly([1, 0, 1], 2).is_irreducible()
    assert Poly([1, 0, 1], 3).is_irreducible()


def test_string_form_round_trips_through_parser():
    from linfdc.config import parse_expr

    t = RatFunc.t(5)
    for x in [4 * t / (t * t + 1), (t + 3) / (t**3 + 2), RatFunc.const(3, 5), t**-2]:
        assert parse_expr(str(x), 5) == x
