"""Finite pseudometric spaces, metric families, isometric actions and quotients.

Distances are extended nonnegative integers.  They are held in a float64
matrix so that ``inf`` is available; every finite entry is an exact integer
(checked on construction), so no rounding ever takes place.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np

from .algebra import GroupElement
from .norms import INF, MetricProfile, length, pseudometric

__all__ = [
    "FinSpace",
    "MetricFamily",
    "GroupAction",
    "Partition",
    "BallCapExceeded",
    "PreconditionError",
    "ConjugationReport",
    "ball_space",
    "saturate",
    "quotient",
    "quotient_map",
    "r_components",
    "is_r_disjoint",
    "disjointness_violation",
    "uniform_bound",
    "semi_bounded",
    "conjugation_isometry_check",
    "dump_space",
    "load_space",
    "dump_family",
    "load_family",
]

DEFAULT_CAP = 20_000


class BallCapExceeded(RuntimeError):
    pass


class PreconditionError(ValueError):
    pass


def _ext(x: float) -> int | float:
    return INF if x == INF else int(x)


class FinSpace:
    """Finite pseudometric space: ordered point ids plus a distance matrix."""

    __slots__ = ("points", "dist")

    def __init__(self, points: Sequence[Hashable], dist, *, check: bool = True):
        self.points = tuple(points)
        d = np.array(dist, dtype=float)
        if d.ndim != 2 or d.shape != (len(self.points), len(self.points)):
            raise ValueError(f"distance matrix shape {d.shape} does not match {len(self.points)} points")
        if check:
            if np.isnan(d).any() or (d < 0).any():
                raise ValueError("distances must be nonnegative")
            fin = d[np.isfinite(d)]
            if not np.array_equal(fin, np.round(fin)):
                raise ValueError("finite distances must be integers")
            if not np.array_equal(d, d.T):
                raise ValueError("distance matrix is not symmetric")
            if np.diag(d).any():
                raise ValueError("d(x, x) must be 0")
        d.setflags(write=False)
        self.dist = d
        if check and (bad := self.triangle_violation()):
            raise ValueError(f"triangle inequality fails at points {bad}")

    @classmethod
    def from_function(cls, points: Sequence, fn: Callable) -> FinSpace:
        n = len(points)
        d = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                d[i, j] = d[j, i] = fn(points[i], points[j])
        return cls(points, d)

    @classmethod
    def lattice(cls, coords: Sequence[Sequence[int]], metric: str = "linf") -> FinSpace:
        """Points of Z^n with the l-infinity (default) or l1 metric."""
        x = np.asarray(coords, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        diff = np.abs(x[:, None, :] - x[None, :, :])
        d = diff.max(axis=2) if metric == "linf" else diff.sum(axis=2)
        return cls([tuple(int(c) for c in row) for row in x], d)

    def __len__(self):
        return len(self.points)

    def d(self, i: int, j: int) -> int | float:
        return _ext(self.dist[i, j])

    def diameter(self, subset: Iterable[int] | None = None) -> int | float:
        if subset is None:
            if len(self) == 0:
                return 0
            return _ext(self.dist.max())
        idx = np.fromiter(subset, dtype=int)
        if idx.size == 0:
            return 0
        return _ext(self.dist[np.ix_(idx, idx)].max())

    def subspace(self, subset: Iterable[int]) -> FinSpace:
        idx = sorted(subset)
        return FinSpace([self.points[i] for i in idx], self.dist[np.ix_(idx, idx)], check=False)

    def triangle_violation(self) -> tuple[int, int, int] | None:
        """First (i, k, j) with d(i,j) > d(i,k) + d(k,j), or None."""
        d = self.dist
        for k in range(len(self)):
            via = d[:, k][:, None] + d[k, :][None, :]
            bad = d > via
            if bad.any():
                i, j = map(int, np.argwhere(bad)[0])
                return i, k, j
        return None

    def is_pseudometric(self) -> bool:
        return self.triangle_violation() is None

    def set_distance(self, a: Iterable[int], b: Iterable[int]) -> int | float:
        ia, ib = list(a), list(b)
        if not ia or not ib:
            return INF
        return _ext(self.dist[np.ix_(ia, ib)].min())

    def __eq__(self, other):
        return isinstance(other, FinSpace) and self.points == other.points and np.array_equal(self.dist, other.dist)

    def __repr__(self):
        return f"FinSpace({len(self)} points, diameter {self.diameter()})"


@dataclass
class MetricFamily:
    members: list[FinSpace]
    label: str = ""

    def __post_init__(self):
        self.members = list(self.members)
        if not self.members:
            raise ValueError("a metric family must be nonempty")

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, i):
        return self.members[i]


# ---------------------------------------------------------------------------
# group windows


def _with_inverses(gens: Sequence[GroupElement]) -> list[GroupElement]:
    out = list(gens)
    seen = set(out)
    for g in gens:
        gi = g.inverse()
        if gi not in seen:
            seen.add(gi)
            out.append(gi)
    return out


def distance_matrix(elements: Sequence[GroupElement], profile: MetricProfile) -> np.ndarray:
    n = len(elements)
    d = np.zeros((n, n))
    invs = [g.inverse() for g in elements]
    for i in range(n):
        gi = invs[i]
        for j in range(i + 1, n):
            d[i, j] = d[j, i] = length(gi * elements[j], profile).scalar
    return d


def ball_space(
    gens: Sequence[GroupElement],
    radius: int,
    profile: MetricProfile,
    cap: int = DEFAULT_CAP,
) -> tuple[FinSpace, list[GroupElement]]:
    """Word-metric ball of the given radius, with the profile pseudometric.

    Points are listed in breadth-first discovery order; point i is
    ``elements[i]``.  Inverses of the generators are added automatically.
    """
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    if not gens:
        raise ValueError("need at least one generator")
    elements = word_ball(gens, radius, cap)
    return FinSpace(range(len(elements)), distance_matrix(elements, profile), check=False), elements


def word_ball(gens: Sequence[GroupElement], radius: int, cap: int = DEFAULT_CAP) -> list[GroupElement]:
    gens = _with_inverses(gens)
    e = GroupElement.identity(gens[0].n, gens[0].p)
    elements = [e]
    seen = {e}
    frontier = [e]
    for _ in range(radius):
        nxt = []
        for g in frontier:
            for s in gens:
                h = g * s
                if h not in seen:
                    seen.add(h)
                    elements.append(h)
                    nxt.append(h)
                    if len(elements) > cap:
                        raise BallCapExceeded(f"ball exceeds cap of {cap} points")
        frontier = nxt
        if not frontier:
            break
    return elements


def closure(gens: Sequence[GroupElement], cap: int = DEFAULT_CAP) -> list[GroupElement]:
    """All elements of the (finite) subgroup generated by gens."""
    if not gens:
        raise ValueError("need at least one generator")
    return word_ball(gens, cap, cap)


def is_closed(elements: Sequence[GroupElement]) -> bool:
    s = set(elements)
    return all(a * b in s for a in elements for b in elements) and all(a.inverse() in s for a in elements)


def saturate(elements: Sequence[GroupElement], F: Sequence[GroupElement]) -> list[GroupElement]:
    """F·elements, keeping the given order and appending new points after."""
    out = list(elements)
    seen = set(out)
    for x in elements:
        for f in F:
            y = f * x
            if y not in seen:
                seen.add(y)
                out.append(y)
    return out


@dataclass
class GroupAction:
    """A finite group acting on the points of a space by permutations."""

    space: FinSpace
    perms: list[tuple[int, ...]]
    labels: list = field(default_factory=list)

    def __post_init__(self):
        self.perms = [tuple(int(i) for i in p) for p in self.perms]
        n = len(self.space)
        for p in self.perms:
            if sorted(p) != list(range(n)):
                raise ValueError("group element does not act by a permutation of the points")

    @classmethod
    def generated(cls, space: FinSpace, generators: Sequence[Sequence[int]]) -> GroupAction:
        n = len(space)
        ident = tuple(range(n))
        perms = [ident]
        seen = {ident}
        queue = deque([ident])
        gens = [tuple(g) for g in generators]
        while queue:
            a = queue.popleft()
            for g in gens:
                c = tuple(g[a[i]] for i in range(n))
                if c not in seen:
                    seen.add(c)
                    perms.append(c)
                    queue.append(c)
        return cls(space, perms)

    @classmethod
    def left_multiplication(
        cls, space: FinSpace, elements: Sequence[GroupElement], F: Sequence[GroupElement]
    ) -> GroupAction:
        index = {g: i for i, g in enumerate(elements)}
        perms = []
        for f in F:
            try:
                perms.append(tuple(index[f * x] for x in elements))
            except KeyError:
                raise ValueError("window is not invariant under the subgroup; saturate it first") from None
        return cls(space, perms, labels=list(F))

    @property
    def order(self) -> int:
        return len(self.perms)

    def is_trivial(self) -> bool:
        return all(p == tuple(range(len(p))) for p in self.perms)

    def verify(self) -> str | None:
        """None if the action is an isometric group action, else a reason."""
        d = self.space.dist
        for k, p in enumerate(self.perms):
            idx = np.array(p)
            if not np.array_equal(d[np.ix_(idx, idx)], d):
                return f"element {k} is not an isometry"
        s = set(self.perms)
        n = len(self.space)
        if tuple(range(n)) not in s:
            return "identity missing"
        for a in self.perms:
            inv = [0] * n
            for i, ai in enumerate(a):
                inv[ai] = i
            if tuple(inv) not in s:
                return "not closed under inverses"
            for b in self.perms:
                if tuple(a[b[i]] for i in range(n)) not in s:
                    return "not closed under composition"
        return None

    def orbit_labels(self) -> np.ndarray:
        """Orbit index of each point, orbits numbered by their smallest point."""
        n = len(self.space)
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for p in self.perms:
            for i, j in enumerate(p):
                a, b = find(i), find(j)
                if a != b:
                    parent[max(a, b)] = min(a, b)
        roots = [find(i) for i in range(n)]
        order = {r: k for k, r in enumerate(sorted(set(roots)))}
        return np.array([order[r] for r in roots], dtype=int)

    def orbits(self) -> list[list[int]]:
        lab = self.orbit_labels()
        out = [[] for _ in range(int(lab.max()) + 1 if len(lab) else 0)]
        for i, k in enumerate(lab):
            out[k].append(i)
        return out

    def apply(self, k: int, subset: Iterable[int]) -> frozenset[int]:
        p = self.perms[k]
        return frozenset(p[i] for i in subset)


def quotient_map(space: FinSpace, action: GroupAction) -> tuple[FinSpace, np.ndarray]:
    """Orbit space with d([x],[y]) = min over orbit pairs, plus the projection."""
    labels = action.orbit_labels()
    k = int(labels.max()) + 1 if len(labels) else 0
    order = np.argsort(labels, kind="stable")
    starts = np.searchsorted(labels[order], np.arange(k))
    rows = np.minimum.reduceat(space.dist[order], starts, axis=0)
    q = np.minimum.reduceat(rows[:, order], starts, axis=1)
    np.fill_diagonal(q, 0)
    reps = [space.points[int(order[s])] for s in starts]
    return FinSpace(reps, q, check=False), labels


def quotient(space: FinSpace, action: GroupAction) -> FinSpace:
    return quotient_map(space, action)[0]


# ---------------------------------------------------------------------------
# components and disjointness


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True


@dataclass
class Partition:
    blocks: list[tuple[int, ...]]
    diameters: list[int | float]

    @property
    def max_diameter(self) -> int | float:
        return max(self.diameters, default=0)

    def __len__(self):
        return len(self.blocks)


def r_components(space: FinSpace, R: int | float, subset: Iterable[int] | None = None) -> Partition:
    """Blocks of the graph with edges d <= R (union-find), sorted by smallest point."""
    if R < 0:
        raise ValueError("R must be nonnegative")
    idx = list(range(len(space))) if subset is None else sorted(subset)
    sub = space.dist[np.ix_(idx, idx)]
    uf = UnionFind(len(idx))
    for a, b in np.argwhere(np.triu(sub <= R, 1)):
        uf.union(int(a), int(b))
    groups: dict[int, list[int]] = {}
    for k in range(len(idx)):
        groups.setdefault(uf.find(k), []).append(k)
    blocks = sorted((tuple(g) for g in groups.values()), key=lambda b: b[0])
    diams = [_ext(sub[np.ix_(b, b)].max()) for b in blocks]
    return Partition([tuple(idx[k] for k in b) for b in blocks], diams)


def disjointness_violation(pieces: Sequence[Iterable[int]], space: FinSpace, r: int | float) -> dict | None:
    """First pair of pieces at distance <= r (overlap counts as distance 0)."""
    pieces = [sorted(set(p)) for p in pieces]
    owner: dict[int, int] = {}
    for k, piece in enumerate(pieces):
        for x in piece:
            if x in owner:
                return {"reason": "overlap", "pieces": (owner[x], k), "points": (x, x), "distance": 0}
            owner[x] = k
    d = space.dist
    for a, b in itertools.combinations(range(len(pieces)), 2):
        if not pieces[a] or not pieces[b]:
            continue
        block = d[np.ix_(pieces[a], pieces[b])]
        m = block.min()
        if m <= r:
            i, j = np.unravel_index(int(block.argmin()), block.shape)
            return {
                "reason": "too close",
                "pieces": (a, b),
                "points": (pieces[a][i], pieces[b][j]),
                "distance": _ext(m),
            }
    return None


def is_r_disjoint(pieces: Sequence[Iterable[int]], space: FinSpace, r: int | float) -> bool:
    return disjointness_violation(pieces, space, r) is None


def uniform_bound(family: MetricFamily) -> int | float:
    """Supremum of member diameters (inf if any member has an infinite distance)."""
    return max(m.diameter() for m in family)


def semi_bounded(family: MetricFamily) -> int:
    """Least R with d(x,y) < R or d(x,y) = inf on every member.

    On finite data such an R always exists; it says nothing about larger
    windows of the same space.
    """
    worst = 0
    for m in family:
        fin = m.dist[np.isfinite(m.dist)]
        if fin.size:
            worst = max(worst, int(fin.max()))
    return worst + 1


# ---------------------------------------------------------------------------


@dataclass
class ConjugationReport:
    window: int
    subgroup_order: int
    pairs_checked: int
    mismatches: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches


def _coset_distance(x, y, F, profile):
    return min(pseudometric(x, f * y, profile) for f in F)


def conjugation_isometry_check(
    elements: Sequence[GroupElement],
    g: GroupElement,
    F: Sequence[GroupElement],
    profile: MetricProfile,
) -> ConjugationReport:
    """Check that conjugation by a length-zero g is an isometry on the window.

    With F' = g F g^-1, the induced map F'x -> F(g^-1 x g) must preserve
    quotient distances; both sides are computed by minimising over the
    finite subgroup.
    """
    if length(g, profile).scalar != 0:
        raise PreconditionError(f"conjugator has length {length(g, profile).units}, expected 0")
    gi = g.inverse()
    conj = [gi * x * g for x in elements]
    F_prime = [g * f * gi for f in F]
    report = ConjugationReport(len(elements), len(F), 0)
    for i, j in itertools.combinations(range(len(elements)), 2):
        x, y = elements[i], elements[j]
        a = pseudometric(x, y, profile)
        b = pseudometric(conj[i], conj[j], profile)
        qa = _coset_distance(x, y, F_prime, profile)
        qb = _coset_distance(conj[i], conj[j], F, profile)
        report.pairs_checked += 1
        if a != b or qa != qb:
            report.mismatches.append((i, j, a, b, qa, qb))
    return report


# ---------------------------------------------------------------------------
# plain-text serialization


def _tok(x: float) -> str:
    return "INF" if x == INF else str(int(x))


def dump_space(space: FinSpace) -> str:
    n = len(space)
    lines = [f"finspace {n}"]
    if space.points != tuple(range(n)):
        labels = [str(p).replace(" ", "") for p in space.points]
        lines.append("labels " + " ".join(labels))
    for i in range(1, n):
        lines.append(" ".join(_tok(space.dist[i, j]) for j in range(i)))
    return "\n".join(lines) + "\n"


def _read_space(lines: list[str], pos: int) -> tuple[FinSpace, int]:
    head = lines[pos].split()
    if len(head) != 2 or head[0] != "finspace":
        raise ValueError(f"line {pos + 1}: expected 'finspace <n>'")
    n = int(head[1])
    pos += 1
    points: list = list(range(n))
    if pos < len(lines) and lines[pos].startswith("labels"):
        points = lines[pos].split()[1:]
        if len(points) != n:
            raise ValueError(f"line {pos + 1}: expected {n} labels")
        pos += 1
    d = np.zeros((n, n))
    for i in range(1, n):
        toks = lines[pos].split()
        if len(toks) != i:
            raise ValueError(f"line {pos + 1}: expected {i} distances, found {len(toks)}")
        for j, t in enumerate(toks):
            d[i, j] = d[j, i] = INF if t == "INF" else int(t)
        pos += 1
    return FinSpace(points, d), pos


def load_space(text: str) -> FinSpace:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    space, _ = _read_space(lines, 0)
    return space


def dump_family(family: MetricFamily) -> str:
    label = family.label.replace(" ", "_") or "-"
    out = [f"family {label} {len(family)}"]
    return "\n".join(out) + "\n" + "".join(dump_space(m) for m in family)


def load_family(text: str) -> MetricFamily:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    head = lines[0].split()
    if len(head) != 3 or head[0] != "family":
        raise ValueError("line 1: expected 'family <label> <count>'")
    pos = 1
    members = []
    for _ in range(int(head[2])):
        m, pos = _read_space(lines, pos)
        members.append(m)
    label = "" if head[1] == "-" else head[1]
    return MetricFamily(members, label)
