"""Group-structural algorithms: T·H factorization, triangularization of
finite unipotent subgroups, and Hirsch rank of a supplied normal series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .algebra import AlgebraError, GroupElement, RatFunc, is_unipotent, mat_identity, nullspace
from .norms import NormSpec, length, pseudometric, valuation
from .spaces import is_closed

__all__ = [
    "THFactorization",
    "th_factorize",
    "is_integral",
    "TriangularizeResult",
    "triangularize_unipotent",
    "Factor",
    "NormalSeries",
    "integer_rank",
    "hirsch_rank",
    "Candidate",
    "solvable_bound_probe",
]


def is_integral(g: GroupElement, spec: NormSpec) -> bool:
    """All entries of g and g^-1 lie in the ring of integers of spec."""
    return all(valuation(x, spec) >= 0 for x in g.entries()) and all(
        valuation(x, spec) >= 0 for x in g.inverse_entries()
    )


@dataclass
class THFactorization:
    g: GroupElement
    t: GroupElement
    h: GroupElement
    d: GroupElement
    u: GroupElement
    spec: NormSpec
    exponents: tuple[int, ...]

    def verify(self) -> str | None:
        """None when every invariant holds exactly, else the first failure."""
        n, p = self.g.n, self.g.p
        if self.t * self.h != self.g:
            return "g != t·h"
        if self.d * self.u != self.t:
            return "t != d·u"
        if not is_integral(self.h, self.spec):
            return "h or h^-1 is not integral"
        pi = self.spec.uniformizer(p)
        for i in range(n):
            if self.t.mat[i][i] != pi ** self.exponents[i]:
                return f"diagonal entry {i} is not a power of the uniformizer"
            for j in range(i):
                if not self.t.mat[i][j].is_zero():
                    return f"t has a nonzero entry below the diagonal at ({i}, {j})"
        if length(self.h, self.spec).scalar != 0:
            return "h has positive length"
        if pseudometric(self.g, self.t, self.spec) != 0:
            return "d(g, t) != 0"
        return None


def th_factorize(g: GroupElement, spec: NormSpec) -> THFactorization:
    """Write g = t·h with t upper triangular over π-powers and h integral.

    Column reduction: rows are processed bottom-up; in row i the pivot is
    the column among 0..i of least valuation (lowest index on ties), moved
    to position i.  The other columns are cleared with integral multipliers
    and the pivot column is scaled by a unit to make the pivot π^v.  All
    column operations lie in H, so t = g·k with k ∈ H and h = k^-1.
    """
    n, p = g.n, g.p
    pi = spec.uniformizer(p)
    cols = [list(c) for c in zip(*g.mat)]
    exps = [0] * n
    for i in range(n - 1, -1, -1):
        best, best_v = None, math.inf
        for c in range(i + 1):
            v = valuation(cols[c][i], spec)
            if v < best_v:
                best, best_v = c, v
        if best is None:
            raise AlgebraError("matrix is singular")
        cols[i], cols[best] = cols[best], cols[i]
        piv = cols[i][i]
        for c in range(i):
            a = cols[c][i]
            if a.n:
                f = a / piv
                cols[c] = [x - f * y for x, y in zip(cols[c], cols[i])]
        unit = (pi ** best_v) / piv
        cols[i] = [x * unit for x in cols[i]]
        exps[i] = best_v
    rows = tuple(zip(*cols))
    t = GroupElement(rows, p)
    h = t.inverse() * g
    zero = RatFunc.zero(p)
    diag = [rows[i][i] for i in range(n)]
    d = GroupElement.diagonal(diag)
    u = d.inverse() * t
    # u is exactly unitriangular; rebuild zeros below the diagonal for clarity
    umat = tuple(tuple(u.mat[i][j] if j >= i else zero for j in range(n)) for i in range(n))
    u = GroupElement._make(umat, u.inv, p)
    fac = THFactorization(g, t, h, d, u, spec, tuple(exps))
    problem = fac.verify()
    if problem:
        raise AlgebraError(f"factorization check failed: {problem}")
    return fac


# ---------------------------------------------------------------------------


@dataclass
class TriangularizeResult:
    P: GroupElement | None
    offending: GroupElement | None = None

    @property
    def ok(self) -> bool:
        return self.P is not None


def _lower_block(g: GroupElement, k: int) -> GroupElement:
    return GroupElement._make(
        tuple(row[k:] for row in g.mat[k:]), tuple(row[k:] for row in g.inv[k:]), g.p
    )


def _embed(P: GroupElement, n: int) -> GroupElement:
    """diag(I_{n-m}, P)."""
    m, p = P.n, P.p
    eye = mat_identity(n, p)
    s = n - m
    mat = tuple(eye[i] if i < s else eye[i][:s] + P.mat[i - s] for i in range(n))
    inv = tuple(eye[i] if i < s else eye[i][:s] + P.inv[i - s] for i in range(n))
    return GroupElement._make(mat, inv, p)


def triangularize_unipotent(F: Sequence[GroupElement]) -> TriangularizeResult:
    """Conjugator P with P^-1·f·P upper unitriangular for every f in F.

    A set of unipotent matrices generating a unipotent group has a common
    fixed vector v; P sends e_0 to v and the recursion continues on the
    induced action on the quotient by v.
    """
    F = list(F)
    if not F:
        raise ValueError("empty subgroup")
    if not is_closed(F):
        raise ValueError("F is not closed under products and inverses")
    for f in F:
        if not is_unipotent(f):
            return TriangularizeResult(None, f)
    n, p = F[0].n, F[0].p
    P = GroupElement.identity(n, p)
    current = F
    for k in range(n - 1):
        blocks = [_lower_block(f, k) for f in current]
        m = n - k
        rows = []
        for b in blocks:
            for i in range(m):
                rows.append(tuple(b.mat[i][j] - (1 if i == j else 0) for j in range(m)))
        basis = nullspace(rows, m, p)
        if not basis:
            return TriangularizeResult(None, None)
        v = basis[0]
        piv = next(i for i, x in enumerate(v) if not x.is_zero())
        v = tuple(x / v[piv] for x in v)
        zero, one = RatFunc.zero(p), RatFunc.one(p)
        others = [j for j in range(m) if j != piv]
        cols = [v] + [tuple(one if i == j else zero for i in range(m)) for j in others]
        Q = _embed(GroupElement(tuple(zip(*cols)), p), n)
        P = P * Q
        current = [f.conjugate(Q) for f in current]
    result = TriangularizeResult(P)
    for f in F:
        c = f.conjugate(P)
        for i in range(n):
            for j in range(i + 1):
                x = c.mat[i][j]
                if (i == j and not x.is_one()) or (i != j and not x.is_zero()):
                    raise AlgebraError("triangularization check failed")
    return result


# ---------------------------------------------------------------------------
# Hirsch rank


@dataclass
class Factor:
    gens: int
    relations: list[list[int]] = field(default_factory=list)

    def __post_init__(self):
        if self.gens < 0:
            raise ValueError("generator count must be nonnegative")
        for row in self.relations:
            if len(row) != self.gens:
                raise ValueError(f"relation row {row} does not have {self.gens} entries")

    @property
    def rank(self) -> int:
        return self.gens - integer_rank(self.relations)


@dataclass
class NormalSeries:
    factors: list[Factor]
    name: str = ""

    def __add__(self, other: NormalSeries) -> NormalSeries:
        return NormalSeries(self.factors + other.factors, self.name)


def integer_rank(rows: Sequence[Sequence[int]]) -> int:
    """Rank of an integer matrix by gcd row reduction (no fractions)."""
    a = [list(map(int, r)) for r in rows if any(r)]
    if not a:
        return 0
    ncols = len(a[0])
    rank = 0
    for c in range(ncols):
        # Euclid on column c among rows rank..end until one nonzero remains
        while True:
            nz = [i for i in range(rank, len(a)) if a[i][c]]
            if len(nz) <= 1:
                break
            piv = min(nz, key=lambda i: abs(a[i][c]))
            for i in nz:
                if i != piv:
                    q = a[i][c] // a[piv][c]
                    a[i] = [x - q * y for x, y in zip(a[i], a[piv])]
        nz = [i for i in range(rank, len(a)) if a[i][c]]
        if nz:
            a[rank], a[nz[0]] = a[nz[0]], a[rank]
            rank += 1
            if rank == len(a):
                break
    return rank


def hirsch_rank(series: NormalSeries) -> int:
    return sum(f.rank for f in series.factors)


@dataclass
class Candidate:
    name: str
    series: NormalSeries
    generators: list[GroupElement] = field(default_factory=list)


def solvable_bound_probe(candidates: Sequence[Candidate], N: int) -> dict:
    """Hirsch rank of each declared candidate series against the bound N."""
    rows = []
    for c in candidates:
        total = sum(f.gens for f in c.series.factors)
        if c.generators and total < 1:
            raise ValueError(f"candidate {c.name}: series has no generators")
        rank = hirsch_rank(c.series)
        rows.append({"name": c.name, "hirsch_rank": rank, "bound": N, "pass": rank <= N})
    return {"bound": N, "candidates": rows, "pass": all(r["pass"] for r in rows)}
