"""Discrete norms on F_p(t), matrix length functions and the induced pseudometric.

Every norm is written as gamma(x) = e^{-v(x)} for an integer valuation v, so
log-lengths are exact nonnegative integers ("valuation units").  A length
with several norms is an integer vector whose scalar value is the sum of
its coordinates.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .algebra import AlgebraError, GroupElement, Poly, RatFunc

__all__ = [
    "INF",
    "NormSpec",
    "MetricProfile",
    "LengthValue",
    "NormAxiomReport",
    "ProbeResult",
    "valuation",
    "norm_axiom_check",
    "length",
    "pseudometric",
    "metricize",
    "ball_finiteness_probe",
]

INF = math.inf

KINDS = ("t_adic", "degree", "finite_place")


@dataclass(frozen=True)
class NormSpec:
    """Discrete norm descriptor: ``t_adic``, ``degree`` or ``finite_place`` with pi."""

    kind: str
    pi: Poly | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown norm kind {self.kind!r}")
        if self.kind == "finite_place":
            if self.pi is None:
                raise ValueError("finite_place norm needs an irreducible pi(t)")
            if not self.pi.is_irreducible():
                raise ValueError(f"pi = {self.pi} is not irreducible over F_{self.pi.p}")
            if not self.pi.is_monic():
                object.__setattr__(self, "pi", self.pi.monic())
        elif self.pi is not None:
            raise ValueError(f"{self.kind} norm takes no pi")

    @classmethod
    def t_adic(cls) -> NormSpec:
        return cls("t_adic")

    @classmethod
    def degree(cls) -> NormSpec:
        return cls("degree")

    @classmethod
    def place(cls, pi: Poly) -> NormSpec:
        return cls("finite_place", pi)

    def uniformizer(self, p: int) -> RatFunc:
        """A generator of the maximal ideal of the ring of integers."""
        if self.kind == "t_adic":
            return RatFunc.t(p)
        if self.kind == "degree":
            return RatFunc.t(p).inverse()
        return RatFunc(self.pi)

    def label(self) -> str:
        if self.kind == "finite_place":
            return f"place({self.pi})"
        return self.kind

    def __str__(self):
        return self.label()


def valuation(x: RatFunc, spec: NormSpec) -> int | float:
    """Integer valuation of x, with v(0) = +inf."""
    if x.is_zero():
        return INF
    if spec.kind == "t_adic":
        return _lowest(x.n) - _lowest(x.d)
    if spec.kind == "degree":
        return (len(x.d) - 1) - (len(x.n) - 1)
    if spec.pi.p != x.p:
        raise AlgebraError("norm and element live over different prime fields")
    return x.num.multiplicity(spec.pi) - x.den.multiplicity(spec.pi)


def _lowest(c: tuple) -> int:
    k = 0
    while not c[k]:
        k += 1
    return k


@dataclass(frozen=True)
class MetricProfile:
    norms: tuple[NormSpec, ...]
    proper: bool = False

    def __post_init__(self):
        norms = tuple(self.norms)
        if not norms:
            raise ValueError("a metric profile needs at least one norm")
        if len(set(norms)) != len(norms):
            raise ValueError("duplicate norms in profile")
        object.__setattr__(self, "norms", norms)

    @classmethod
    def of(cls, *norms: NormSpec, proper: bool = False) -> MetricProfile:
        return cls(tuple(norms), proper)

    def labels(self) -> list[str]:
        return [n.label() for n in self.norms]


@dataclass(frozen=True)
class LengthValue:
    units: tuple[int, ...]

    @property
    def scalar(self) -> int:
        return sum(self.units)

    def __add__(self, other: LengthValue) -> LengthValue:
        return LengthValue(tuple(a + b for a, b in zip(self.units, other.units)))

    def __le__(self, other: LengthValue) -> bool:
        return all(a <= b for a, b in zip(self.units, other.units))


def _coordinate(g: GroupElement, spec: NormSpec) -> int:
    worst = 0  # max(-v) over entries of g and g^-1 is >= 0 since g·g^-1 = I
    if spec.kind == "degree":
        for x in itertools.chain(g.entries(), g.inverse_entries()):
            if x.n:
                e = len(x.n) - len(x.d)
                if e > worst:
                    worst = e
        return worst
    if spec.kind == "t_adic":
        for x in itertools.chain(g.entries(), g.inverse_entries()):
            if x.n:
                e = _lowest(x.d) - _lowest(x.n)
                if e > worst:
                    worst = e
        return worst
    for x in itertools.chain(g.entries(), g.inverse_entries()):
        if x.n and x.d != (1,):
            e = -valuation(x, spec)
            if e > worst:
                worst = e
    return worst


def length(g: GroupElement, profile: MetricProfile | NormSpec) -> LengthValue:
    """Length vector: per norm, max over entries of g and g^-1 of -v."""
    if isinstance(profile, NormSpec):
        profile = MetricProfile.of(profile)
    return LengthValue(tuple(_coordinate(g, spec) for spec in profile.norms))


def pseudometric(g: GroupElement, h: GroupElement, profile: MetricProfile | NormSpec) -> int:
    """d(g, h) = l(g^-1 h), summed over the profile's norms."""
    if g.n != h.n:
        raise AlgebraError(f"dimension mismatch: {g.n} vs {h.n}")
    if g == h:
        return 0
    return length(g.inverse() * h, profile).scalar


def metricize(d):
    """Turn a pseudometric into a metric: max(1, d) off the diagonal.

    Accepts a square matrix (nested sequence or ndarray) and returns the same
    shape as a numpy array.
    """
    import numpy as np

    arr = np.array(d, dtype=float)
    out = np.maximum(arr, 1.0)
    np.fill_diagonal(out, np.diag(arr))
    return out


def metricize_value(d: int | float, same_point: bool) -> int | float:
    return d if same_point else max(1, d)


@dataclass
class NormAxiomReport:
    spec: NormSpec
    checked: int
    violation: tuple | None = None

    @property
    def ok(self) -> bool:
        return self.violation is None


def norm_axiom_check(spec: NormSpec, samples: Iterable[tuple[RatFunc, RatFunc]]) -> NormAxiomReport:
    """Check v(xy) = v(x)+v(y) and v(x+y) >= min(v(x), v(y)) on every pair."""
    checked = 0
    for x, y in samples:
        vx, vy = valuation(x, spec), valuation(y, spec)
        vxy = valuation(x * y, spec)
        if vxy != vx + vy:
            return NormAxiomReport(spec, checked, ("multiplicativity", str(x), str(y), vxy, vx + vy))
        vs = valuation(x + y, spec)
        if vs < min(vx, vy):
            return NormAxiomReport(spec, checked, ("ultrametric", str(x), str(y), vs, min(vx, vy)))
        checked += 1
    return NormAxiomReport(spec, checked)


@dataclass
class ProbeResult:
    saturated: bool
    size: int | None
    explored: int
    elements: list[RatFunc] = field(default_factory=list, repr=False)

    @property
    def status(self) -> str:
        return "finite" if self.saturated else "budget_exceeded"


def ball_finiteness_probe(
    profile: MetricProfile, gens: Sequence[RatFunc], k: int, budget: int
) -> ProbeResult:
    """Close {0, 1} ∪ gens under + and ·, keeping only elements with gamma <= e^k.

    Every kept element a satisfies v(a) >= -k for every norm in the profile.
    The result is ``finite`` if the filtered closure saturates within
    ``budget`` kept elements, otherwise ``budget_exceeded``.  Saturation is
    an empirical statement about the filtered closure, not a proof.
    """
    if budget <= 0:
        raise ValueError("budget must be positive")
    if not gens:
        raise ValueError("at least one generator is required")
    p = gens[0].p

    def inside(a: RatFunc) -> bool:
        return all(valuation(a, spec) >= -k for spec in profile.norms)

    seeds = [RatFunc.zero(p), RatFunc.one(p), *gens]
    kept: list[RatFunc] = []
    seen: set[RatFunc] = set()
    for a in seeds:
        if a not in seen and inside(a):
            seen.add(a)
            kept.append(a)
    frontier_start = 0
    explored = 0
    while frontier_start < len(kept):
        end = len(kept)
        for i in range(frontier_start, end):
            for j in range(0, end):
                if j >= frontier_start and j > i:
                    continue
                for c in (kept[i] + kept[j], kept[i] * kept[j]):
                    explored += 1
                    if c in seen or not inside(c):
                        continue
                    seen.add(c)
                    kept.append(c)
                    if len(kept) > budget:
                        return ProbeResult(False, None, explored)
        frontier_start = end
    kept.sort(key=RatFunc.sort_key)
    return ProbeResult(True, len(kept), explored, kept)
