"""Exact arithmetic over F_p, F_p[t], F_p(t) and invertible matrices over F_p(t).

Polynomials are stored as tuples of ints in ``range(p)``, lowest degree
first, with the zero polynomial represented by the empty tuple.  Rational
functions are kept in canonical form (coprime numerator and denominator,
monic denominator), so ``==`` and ``hash`` are exact.

Everything here is immutable.  No floating point is used anywhere.
"""

from __future__ import annotations

import os
from functools import lru_cache
from typing import Iterable, Sequence

__all__ = [
    "AlgebraError",
    "SingularMatrixError",
    "Fp",
    "Poly",
    "RatFunc",
    "GroupElement",
    "check_prime",
    "mat_mul",
    "mat_inverse",
    "mat_identity",
    "mat_is_identity",
    "nullspace",
    "is_unipotent",
]

# Re-verify mat·inv = I on every GroupElement construction.
DEBUG_CHECKS = os.environ.get("LINFDC_DEBUG", "") not in ("", "0")


class AlgebraError(ValueError):
    pass


class SingularMatrixError(AlgebraError):
    pass


@lru_cache(maxsize=None)
def check_prime(p: int) -> int:
    if not isinstance(p, int) or p < 2:
        raise AlgebraError(f"modulus must be a prime integer, got {p!r}")
    if p > 2**31:
        raise AlgebraError(f"modulus {p} exceeds the machine-word range")
    i = 2
    while i * i <= p:
        if p % i == 0:
            raise AlgebraError(f"modulus {p} is not prime")
        i += 1
    return p


def _inv_mod(a: int, p: int) -> int:
    a %= p
    if a == 0:
        raise ZeroDivisionError("inverse of zero in F_%d" % p)
    return pow(a, p - 2, p)


class Fp:
    """Element of the prime field F_p."""

    __slots__ = ("p", "value")

    def __init__(self, value: int, p: int):
        check_prime(p)
        self.p = p
        self.value = value % p

    def _check(self, other):
        if isinstance(other, int):
            return Fp(other, self.p)
        if not isinstance(other, Fp):
            return NotImplemented
        if other.p != self.p:
            raise AlgebraError(f"mismatched moduli {self.p} and {other.p}")
        return other

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return Fp(self.value + other.value, self.p)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return Fp(self.value - other.value, self.p)

    def __neg__(self):
        return Fp(-self.value, self.p)

    def __mul__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return Fp(self.value * other.value, self.p)

    __rmul__ = __mul__

    def inverse(self) -> Fp:
        return Fp(_inv_mod(self.value, self.p), self.p)

    def __truediv__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __eq__(self, other):
        if isinstance(other, int):
            return self.value == other % self.p
        return isinstance(other, Fp) and other.p == self.p and other.value == self.value

    def __hash__(self):
        return hash((self.p, self.value))

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"Fp({self.value}, {self.p})"


# ---------------------------------------------------------------------------
# raw coefficient-tuple arithmetic (hot paths, no object overhead)


def _trim(c: list) -> tuple:
    while c and not c[-1]:
        c.pop()
    return tuple(c)


def _padd(a: tuple, b: tuple, p: int) -> tuple:
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return a
    c = list(a)
    for i, x in enumerate(b):
        c[i] = (c[i] + x) % p
    return _trim(c)


def _psub(a: tuple, b: tuple, p: int) -> tuple:
    n = max(len(a), len(b))
    c = list(a) + [0] * (n - len(a))
    for i, x in enumerate(b):
        c[i] = (c[i] - x) % p
    return _trim(c)


def _pscale(a: tuple, s: int, p: int) -> tuple:
    s %= p
    if s == 0:
        return ()
    if s == 1:
        return a
    return tuple(x * s % p for x in a)


def _pmul(a: tuple, b: tuple, p: int) -> tuple:
    if not a or not b:
        return ()
    if len(a) == 1:
        return _pscale(b, a[0], p)
    if len(b) == 1:
        return _pscale(a, b[0], p)
    c = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                c[i + j] += x * y
    return tuple(x % p for x in c)  # leading coefficient of a product over a field is nonzero


def _pdivmod(a: tuple, b: tuple, p: int) -> tuple[tuple, tuple]:
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    db = len(b) - 1
    if len(a) - 1 < db:
        return (), a
    inv_lead = _inv_mod(b[-1], p)
    r = list(a)
    q = [0] * (len(a) - db)
    for k in range(len(a) - 1, db - 1, -1):
        coef = r[k] * inv_lead % p
        if coef:
            q[k - db] = coef
            for j in range(db + 1):
                r[k - db + j] = (r[k - db + j] - coef * b[j]) % p
    return _trim(q), _trim(r[:db])


def _tz(a: tuple) -> int:
    """Multiplicity of t (number of trailing zero coefficients)."""
    k = 0
    while k < len(a) and not a[k]:
        k += 1
    return k


def _monic(a: tuple, p: int) -> tuple:
    if not a or a[-1] == 1:
        return a
    return _pscale(a, _inv_mod(a[-1], p), p)


def _pgcd(a: tuple, b: tuple, p: int) -> tuple:
    """Monic gcd; fast path when either argument is a monomial."""
    if not a:
        return _monic(b, p)
    if not b:
        return _monic(a, p)
    if len(a) == 1 or len(b) == 1:
        return (1,)
    ta, tb = _tz(a), _tz(b)
    if ta == len(a) - 1 or tb == len(b) - 1:
        k = min(ta, tb)
        return (0,) * k + (1,)
    while b:
        a, b = b, _pdivmod(a, b, p)[1]
    return _monic(a, p)


def _pdiv_exact(a: tuple, b: tuple, p: int) -> tuple:
    if len(b) == 1 and b[0] == 1:
        return a
    k = _tz(b)
    if k == len(b) - 1:
        # division by (unit)·t^k
        return _pscale(a[k:], _inv_mod(b[-1], p), p)
    return _pdivmod(a, b, p)[0]


# ---------------------------------------------------------------------------


class Poly:
    """Polynomial over F_p, coefficients lowest degree first."""

    __slots__ = ("p", "c")

    def __init__(self, coeffs: Iterable[int] = (), p: int = 2, *, _raw: bool = False):
        if _raw:
            self.c = coeffs
        else:
            check_prime(p)
            self.c = _trim([int(x) % p for x in coeffs])
        self.p = p

    @classmethod
    def _make(cls, c: tuple, p: int) -> Poly:
        obj = cls.__new__(cls)
        obj.c = c
        obj.p = p
        return obj

    @classmethod
    def t(cls, p: int) -> Poly:
        check_prime(p)
        return cls._make((0, 1), p)

    @classmethod
    def const(cls, a: int, p: int) -> Poly:
        check_prime(p)
        a %= p
        return cls._make((a,) if a else (), p)

    @property
    def coeffs(self) -> tuple[Fp, ...]:
        return tuple(Fp(x, self.p) for x in self.c)

    @property
    def degree(self) -> int:
        """Degree, with -1 for the zero polynomial."""
        return len(self.c) - 1

    def is_zero(self) -> bool:
        return not self.c

    def is_one(self) -> bool:
        return self.c == (1,)

    def is_monic(self) -> bool:
        return bool(self.c) and self.c[-1] == 1

    def lead(self) -> int:
        return self.c[-1] if self.c else 0

    def _other(self, other) -> Poly:
        if isinstance(other, int):
            return Poly.const(other, self.p)
        if isinstance(other, Poly):
            if other.p != self.p:
                raise AlgebraError(f"mismatched characteristics {self.p} and {other.p}")
            return other
        return NotImplemented

    def __add__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return Poly._make(_padd(self.c, o.c, self.p), self.p)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return Poly._make(_psub(self.c, o.c, self.p), self.p)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return Poly._make(_pscale(self.c, -1, self.p), self.p)

    def __mul__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return Poly._make(_pmul(self.c, o.c, self.p), self.p)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power of a polynomial")
        result, base = (1,), self.c
        while k:
            if k & 1:
                result = _pmul(result, base, self.p)
            base = _pmul(base, base, self.p)
            k >>= 1
        return Poly._make(result, self.p)

    def __divmod__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        q, r = _pdivmod(self.c, o.c, self.p)
        return Poly._make(q, self.p), Poly._make(r, self.p)

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def gcd(self, other: Poly) -> Poly:
        o = self._other(other)
        return Poly._make(_pgcd(self.c, o.c, self.p), self.p)

    def monic(self) -> Poly:
        return Poly._make(_monic(self.c, self.p), self.p)

    def multiplicity(self, factor: Poly) -> int:
        """Largest k with factor**k dividing self (self nonzero, deg factor >= 1)."""
        if not self.c:
            raise ValueError("multiplicity in the zero polynomial is infinite")
        if factor.degree < 1:
            raise ValueError("factor must have positive degree")
        if factor.c == (0, 1):
            return _tz(self.c)
        k, a = 0, self.c
        while True:
            q, r = _pdivmod(a, factor.c, self.p)
            if r:
                return k
            a, k = q, k + 1

    def __call__(self, x: int) -> int:
        acc = 0
        for a in reversed(self.c):
            acc = (acc * x + a) % self.p
        return acc

    def is_irreducible(self) -> bool:
        """Trial division by every monic polynomial of degree <= deg/2."""
        d = self.degree
        if d < 1:
            return False
        if d == 1:
            return True
        p = self.p
        for k in range(1, d // 2 + 1):
            for idx in range(p**k):
                low = []
                x = idx
                for _ in range(k):
                    low.append(x % p)
                    x //= p
                if _pdivmod(self.c, tuple(low) + (1,), p)[1] == ():
                    return False
        return True

    def __eq__(self, other):
        if isinstance(other, int):
            return self.c == Poly.const(other, self.p).c
        return isinstance(other, Poly) and self.p == other.p and self.c == other.c

    def __hash__(self):
        return hash((self.p, self.c))

    def __repr__(self):
        return f"Poly({list(self.c)}, p={self.p})"

    def __str__(self):
        return _poly_str(self.c)


def _poly_str(c: tuple) -> str:
    if not c:
        return "0"
    terms = []
    for k in range(len(c) - 1, -1, -1):
        a = c[k]
        if not a:
            continue
        if k == 0:
            terms.append(str(a))
            continue
        mono = "t" if k == 1 else f"t^{k}"
        terms.append(mono if a == 1 else f"{a}*{mono}")
    return " + ".join(terms)


class RatFunc:
    """Element of F_p(t) in canonical form num/den, gcd 1, den monic."""

    __slots__ = ("p", "n", "d", "_hash")

    def __init__(self, num, den=None, p: int | None = None):
        if isinstance(num, Poly):
            p = num.p
            n = num.c
        else:
            if p is None:
                raise AlgebraError("characteristic required for integer numerator")
            check_prime(p)
            n = Poly.const(num, p).c
        if den is None:
            d = (1,)
        elif isinstance(den, Poly):
            if den.p != p:
                raise AlgebraError("mismatched characteristics")
            d = den.c
        else:
            d = Poly.const(den, p).c
        if not d:
            raise ZeroDivisionError("rational function with zero denominator")
        self.p = p
        self.n, self.d = _canon(n, d, p)
        self._hash = None

    @classmethod
    def _make(cls, n: tuple, d: tuple, p: int) -> RatFunc:
        obj = cls.__new__(cls)
        obj.p = p
        obj.n = n
        obj.d = d
        obj._hash = None
        return obj

    @classmethod
    def t(cls, p: int) -> RatFunc:
        return cls._make((0, 1), (1,), check_prime(p))

    @classmethod
    def const(cls, a: int, p: int) -> RatFunc:
        return cls._make(Poly.const(a, p).c, (1,), p)

    @classmethod
    def zero(cls, p: int) -> RatFunc:
        return cls._make((), (1,), p)

    @classmethod
    def one(cls, p: int) -> RatFunc:
        return cls._make((1,), (1,), p)

    @property
    def num(self) -> Poly:
        return Poly._make(self.n, self.p)

    @property
    def den(self) -> Poly:
        return Poly._make(self.d, self.p)

    def is_zero(self) -> bool:
        return not self.n

    def is_one(self) -> bool:
        return self.n == (1,) and self.d == (1,)

    def is_polynomial(self) -> bool:
        return self.d == (1,)

    def _other(self, other) -> RatFunc:
        if isinstance(other, RatFunc):
            if other.p != self.p:
                raise AlgebraError(f"mismatched characteristics {self.p} and {other.p}")
            return other
        if isinstance(other, int):
            return RatFunc.const(other, self.p)
        if isinstance(other, Poly):
            return RatFunc(other)
        return NotImplemented

    def __add__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        p = self.p
        if not self.n:
            return o
        if not o.n:
            return self
        if self.d == o.d:
            n = _padd(self.n, o.n, p)
            if self.d == (1,):
                return RatFunc._make(n, (1,), p)
            return RatFunc._make(*_canon(n, self.d, p), p)
        n = _padd(_pmul(self.n, o.d, p), _pmul(o.n, self.d, p), p)
        return RatFunc._make(*_canon(n, _pmul(self.d, o.d, p), p), p)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc._make(_pscale(self.n, -1, self.p), self.d, self.p)

    def __sub__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        p = self.p
        if not self.n or not o.n:
            return RatFunc._make((), (1,), p)
        if self.d == (1,) and o.d == (1,):
            return RatFunc._make(_pmul(self.n, o.n, p), (1,), p)
        # cross-cancel before multiplying keeps the result reduced
        g1 = _pgcd(self.n, o.d, p)
        g2 = _pgcd(o.n, self.d, p)
        n1 = _pdiv_exact(self.n, g1, p)
        d2 = _pdiv_exact(o.d, g1, p)
        n2 = _pdiv_exact(o.n, g2, p)
        d1 = _pdiv_exact(self.d, g2, p)
        n = _pmul(n1, n2, p)
        d = _pmul(d1, d2, p)
        inv = _inv_mod(d[-1], p)
        return RatFunc._make(_pscale(n, inv, p), _pscale(d, inv, p), p)

    __rmul__ = __mul__

    def inverse(self) -> RatFunc:
        if not self.n:
            raise ZeroDivisionError("inverse of zero in F_p(t)")
        inv = _inv_mod(self.n[-1], self.p)
        return RatFunc._make(_pscale(self.d, inv, self.p), _pscale(self.n, inv, self.p), self.p)

    def __truediv__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        n = Poly._make(self.n, self.p) ** k
        d = Poly._make(self.d, self.p) ** k
        return RatFunc._make(n.c, d.c, self.p)

    def __eq__(self, other):
        if isinstance(other, RatFunc):
            return self.p == other.p and self.n == other.n and self.d == other.d
        if isinstance(other, int):
            return self.d == (1,) and self.n == Poly.const(other, self.p).c
        if isinstance(other, Poly):
            return self.d == (1,) and self.n == other.c and self.p == other.p
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.p, self.n, self.d))
        return self._hash

    def __repr__(self):
        return f"RatFunc({self}, p={self.p})"

    def __str__(self):
        num = _poly_str(self.n)
        if self.d == (1,):
            return num
        if len([x for x in self.n if x]) > 1:
            num = f"({num})"
        den = _poly_str(self.d)
        if len([x for x in self.d if x]) > 1 or (self.d[-1] != 1):
            den = f"({den})"
        return f"{num}/{den}"

    def sort_key(self) -> tuple:
        return (len(self.d), self.d, len(self.n), self.n)


def _canon(n: tuple, d: tuple, p: int) -> tuple[tuple, tuple]:
    if not d:
        raise ZeroDivisionError("zero denominator")
    if not n:
        return (), (1,)
    if d != (1,):
        g = _pgcd(n, d, p)
        if g != (1,):
            n = _pdiv_exact(n, g, p)
            d = _pdiv_exact(d, g, p)
    lead = d[-1]
    if lead != 1:
        inv = _inv_mod(lead, p)
        n = _pscale(n, inv, p)
        d = _pscale(d, inv, p)
    return n, d


# ---------------------------------------------------------------------------
# matrices: tuples of row tuples of RatFunc

Matrix = tuple  # tuple[tuple[RatFunc, ...], ...]


def _as_matrix(rows: Sequence[Sequence], p: int) -> Matrix:
    out = []
    for row in rows:
        r = []
        for x in row:
            if isinstance(x, RatFunc):
                if x.p != p:
                    raise AlgebraError("mismatched characteristics in matrix")
                r.append(x)
            elif isinstance(x, Poly):
                r.append(RatFunc(x))
            else:
                r.append(RatFunc.const(int(x), p))
        out.append(tuple(r))
    if any(len(r) != len(out[0]) for r in out):
        raise AlgebraError("ragged matrix")
    return tuple(out)


def mat_identity(n: int, p: int) -> Matrix:
    one, zero = RatFunc.one(p), RatFunc.zero(p)
    return tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n))


def mat_is_identity(m: Matrix) -> bool:
    return all(
        (x.is_one() if i == j else x.is_zero()) for i, row in enumerate(m) for j, x in enumerate(row)
    )


def _matmul(a: Matrix, b: Matrix) -> Matrix:
    if len(a[0]) != len(b):
        raise AlgebraError(f"dimension mismatch {len(a)}x{len(a[0])} times {len(b)}x{len(b[0])}")
    cols = list(zip(*b))
    out = []
    for row in a:
        r = []
        for col in cols:
            acc = None
            for x, y in zip(row, col):
                if x.n and y.n:
                    term = x * y
                    acc = term if acc is None else acc + term
            r.append(acc if acc is not None else RatFunc.zero(row[0].p))
        out.append(tuple(r))
    return tuple(out)


def mat_inverse(m: Sequence[Sequence[RatFunc]]) -> Matrix:
    """Exact inverse by Gauss-Jordan elimination over F_p(t).

    Raises SingularMatrixError when the determinant vanishes.
    """
    n = len(m)
    if n == 0 or any(len(r) != n for r in m):
        raise AlgebraError("matrix must be square and nonempty")
    p = m[0][0].p
    aug = [list(m[i]) + list(row) for i, row in enumerate(mat_identity(n, p))]
    for col in range(n):
        piv = None
        for r in range(col, n):
            if aug[r][col].n:
                # prefer the simplest pivot; keeps intermediate degrees down
                if piv is None or aug[r][col].sort_key() < aug[piv][col].sort_key():
                    piv = r
        if piv is None:
            raise SingularMatrixError("matrix is singular over F_%d(t)" % p)
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = aug[col][col].inverse()
        aug[col] = [x * inv if x.n else x for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col].n:
                f = aug[r][col]
                aug[r] = [x - f * y if y.n else x for x, y in zip(aug[r], aug[col])]
    return tuple(tuple(row[n:]) for row in aug)


def nullspace(rows: Sequence[Sequence[RatFunc]], ncols: int, p: int) -> list[tuple[RatFunc, ...]]:
    """Basis of {x : A x = 0} by reduced row echelon form."""
    a = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(a)) if a[i][c].n), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = a[r][c].inverse()
        a[r] = [x * inv for x in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c].n:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == len(a):
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    zero, one = RatFunc.zero(p), RatFunc.one(p)
    for fc in free:
        v = [zero] * ncols
        v[fc] = one
        for i, pc in enumerate(pivots):
            v[pc] = -a[i][fc]
        basis.append(tuple(v))
    return basis


def mat_mul(a: GroupElement, b: GroupElement) -> GroupElement:
    return a * b


class GroupElement:
    """Invertible n x n matrix over F_p(t) that carries its inverse."""

    __slots__ = ("n", "p", "mat", "inv", "_hash")

    def __init__(self, rows, p: int | None = None, *, inv=None):
        if p is None:
            p = _infer_p(rows)
        mat = _as_matrix(rows, p)
        if len(mat) != len(mat[0]):
            raise AlgebraError("group elements must be square matrices")
        self.n = len(mat)
        self.p = p
        self.mat = mat
        self.inv = mat_inverse(mat) if inv is None else _as_matrix(inv, p)
        self._hash = None
        if inv is not None or DEBUG_CHECKS:
            self._verify()

    @classmethod
    def _make(cls, mat: Matrix, inv: Matrix, p: int) -> GroupElement:
        obj = cls.__new__(cls)
        obj.n = len(mat)
        obj.p = p
        obj.mat = mat
        obj.inv = inv
        obj._hash = None
        if DEBUG_CHECKS:
            obj._verify()
        return obj

    def _verify(self):
        if not (mat_is_identity(_matmul(self.mat, self.inv)) and mat_is_identity(_matmul(self.inv, self.mat))):
            raise AlgebraError("stored inverse does not invert the matrix")

    @classmethod
    def identity(cls, n: int, p: int) -> GroupElement:
        eye = mat_identity(n, p)
        return cls._make(eye, eye, p)

    @classmethod
    def diagonal(cls, entries: Sequence[RatFunc]) -> GroupElement:
        p = entries[0].p
        zero = RatFunc.zero(p)
        n = len(entries)
        mat = tuple(tuple(entries[i] if i == j else zero for j in range(n)) for i in range(n))
        inv = tuple(tuple(entries[i].inverse() if i == j else zero for j in range(n)) for i in range(n))
        return cls._make(mat, inv, p)

    def __mul__(self, other: GroupElement) -> GroupElement:
        if not isinstance(other, GroupElement):
            return NotImplemented
        if other.n != self.n:
            raise AlgebraError(f"dimension mismatch: {self.n} vs {other.n}")
        if other.p != self.p:
            raise AlgebraError("mismatched characteristics")
        return GroupElement._make(_matmul(self.mat, other.mat), _matmul(other.inv, self.inv), self.p)

    def inverse(self) -> GroupElement:
        return GroupElement._make(self.inv, self.mat, self.p)

    def __pow__(self, k: int) -> GroupElement:
        base = self if k >= 0 else self.inverse()
        k = abs(k)
        result = GroupElement.identity(self.n, self.p)
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def conjugate(self, g: GroupElement) -> GroupElement:
        """g^-1 · self · g."""
        return g.inverse() * self * g

    def is_identity(self) -> bool:
        return mat_is_identity(self.mat)

    def entries(self) -> Iterable[RatFunc]:
        for row in self.mat:
            yield from row

    def inverse_entries(self) -> Iterable[RatFunc]:
        for row in self.inv:
            yield from row

    def __eq__(self, other):
        return isinstance(other, GroupElement) and self.mat == other.mat

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.mat)
        return self._hash

    def sort_key(self) -> tuple:
        return tuple(x.sort_key() for x in self.entries())

    def __repr__(self):
        rows = ", ".join("[" + ", ".join(str(x) for x in row) + "]" for row in self.mat)
        return f"GroupElement([{rows}], p={self.p})"


def _infer_p(rows) -> int:
    for row in rows:
        for x in row:
            if isinstance(x, (RatFunc, Poly)):
                return x.p
    raise AlgebraError("characteristic required for integer matrices")


def is_unipotent(g: GroupElement) -> bool:
    """True iff (g - I)^n = 0 exactly."""
    n, p = g.n, g.p
    eye = mat_identity(n, p)
    nil = tuple(tuple(x - e for x, e in zip(row, erow)) for row, erow in zip(g.mat, eye))
    acc = nil
    for _ in range(n - 1):
        acc = _matmul(acc, nil)
    return all(x.is_zero() for row in acc for x in row)
