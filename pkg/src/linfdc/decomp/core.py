"""Certificate and decomposition-tree types with their verifiers.

An ``AsdimCertificate`` witnesses "asymptotic dimension <= n at scale r with
diameter bound B" on every member of a finite family.  A ``DecompTree``
witnesses one finite-depth branch of the decomposition hierarchy: each
internal node r-decomposes its family into a U-part and a V-part, and the
children are the flattened piece families.  Leaves carry a bounded or
semi-bounded certificate.

Verifiers never trust the constructors; they recompute everything from the
distance matrices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from ..spaces import MetricFamily, disjointness_violation

__all__ = [
    "MalformedCertificate",
    "UnverifiedInput",
    "Failure",
    "Report",
    "ColoredPiece",
    "AsdimCertificate",
    "Subspace",
    "Split",
    "Leaf",
    "DecompNode",
    "DecompTree",
    "verify_asdim",
    "verify_fdc",
    "root_node",
]


class MalformedCertificate(ValueError):
    pass


class UnverifiedInput(ValueError):
    pass


@dataclass
class Failure:
    kind: str
    location: str
    detail: dict = field(default_factory=dict)

    def __str__(self):
        return f"{self.kind} at {self.location}: {self.detail}"


@dataclass
class Report:
    checks: int = 0
    failure: Failure | None = None

    @property
    def ok(self) -> bool:
        return self.failure is None

    def fail(self, kind: str, location: str, **detail) -> Report:
        if self.failure is None:
            self.failure = Failure(kind, location, detail)
        return self

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class ColoredPiece:
    color: int
    points: tuple[int, ...]

    @classmethod
    def of(cls, color: int, points) -> ColoredPiece:
        return cls(int(color), tuple(sorted(int(x) for x in points)))


@dataclass
class AsdimCertificate:
    n: int
    r: int
    bound: int
    pieces: list[list[ColoredPiece]]
    meta: dict = field(default_factory=dict)

    def colors(self, member: int, color: int) -> list[tuple[int, ...]]:
        return [p.points for p in self.pieces[member] if p.color == color]

    def max_piece_diameter(self, family: MetricFamily):
        return max(
            (family[a].diameter(p.points) for a, ps in enumerate(self.pieces) for p in ps),
            default=0,
        )


def verify_asdim(cert: AsdimCertificate, family: MetricFamily) -> Report:
    """Coverage, per-color r-disjointness and the uniform diameter bound."""
    if len(cert.pieces) != len(family):
        raise MalformedCertificate(
            f"certificate has {len(cert.pieces)} members, family has {len(family)}"
        )
    rep = Report()
    for a, (space, pieces) in enumerate(zip(family, cert.pieces)):
        n = len(space)
        for k, piece in enumerate(pieces):
            bad = [x for x in piece.points if not 0 <= x < n]
            if bad:
                raise MalformedCertificate(f"member {a} piece {k} references unknown point {bad[0]}")
        for k, piece in enumerate(pieces):
            rep.checks += 1
            if not 0 <= piece.color <= cert.n:
                return rep.fail("color", f"member {a} piece {k}", color=piece.color, n=cert.n)
        covered = set().union(*(p.points for p in pieces)) if pieces else set()
        rep.checks += 1
        missing = sorted(set(range(n)) - covered)
        if missing:
            return rep.fail("coverage", f"member {a}", point=missing[0], uncovered=len(missing))
        for c in range(cert.n + 1):
            idx = [k for k, p in enumerate(pieces) if p.color == c]
            rep.checks += 1
            bad = disjointness_violation([pieces[k].points for k in idx], space, cert.r)
            if bad:
                i, j = bad["pieces"]
                return rep.fail(
                    "disjointness",
                    f"member {a} color {c}",
                    pieces=(idx[i], idx[j]),
                    points=bad["points"],
                    distance=bad["distance"],
                    r=cert.r,
                )
        for k, piece in enumerate(pieces):
            rep.checks += 1
            diam = space.diameter(piece.points)
            if diam > cert.bound:
                return rep.fail("bound", f"member {a} piece {k}", diameter=diam, bound=cert.bound)
    return rep


# ---------------------------------------------------------------------------
# decomposition trees


@dataclass(frozen=True)
class Subspace:
    member: int
    points: tuple[int, ...]

    @classmethod
    def of(cls, member: int, points) -> Subspace:
        return cls(int(member), tuple(sorted(int(x) for x in points)))


@dataclass
class Split:
    u_pieces: list[tuple[int, ...]]
    v_pieces: list[tuple[int, ...]]


@dataclass
class Leaf:
    kind: str  # "bounded" or "semi_bounded"
    bound: int | float

    def __post_init__(self):
        if self.kind not in ("bounded", "semi_bounded"):
            raise ValueError(f"unknown leaf kind {self.kind!r}")


@dataclass
class DecompNode:
    family: list[Subspace]
    r: int | None = None
    splits: list[Split] | None = None
    u_child: DecompNode | None = None
    v_child: DecompNode | None = None
    leaf: Leaf | None = None
    note: str = ""

    @property
    def is_leaf(self) -> bool:
        return self.leaf is not None

    def children(self) -> list[tuple[str, DecompNode]]:
        if self.is_leaf:
            return []
        return [("U", self.u_child), ("V", self.v_child)]


def root_node(family: MetricFamily) -> list[Subspace]:
    return [Subspace(a, tuple(range(len(m)))) for a, m in enumerate(family)]


@dataclass
class DecompTree:
    family: MetricFamily
    root: DecompNode
    meta: dict = field(default_factory=dict)

    def walk(self) -> Iterator[tuple[str, DecompNode]]:
        stack = [("root", self.root)]
        while stack:
            path, node = stack.pop()
            yield path, node
            for tag, child in reversed(node.children()):
                stack.append((f"{path}.{tag}", child))

    def depth(self) -> int:
        def rec(node):
            if node.is_leaf:
                return 0
            return 1 + max(rec(node.u_child), rec(node.v_child))

        return rec(self.root)

    def scales(self) -> list[int]:
        return sorted({node.r for _, node in self.walk() if not node.is_leaf})

    def leaves(self) -> list[tuple[str, DecompNode]]:
        return [(p, n) for p, n in self.walk() if n.is_leaf]


def _flatten(family: list[Subspace], splits: list[Split], part: str) -> list[Subspace]:
    out = []
    for sub, split in zip(family, splits):
        for piece in getattr(split, f"{part}_pieces"):
            out.append(Subspace.of(sub.member, piece))
    return out


def _leaf_violation(node: DecompNode, family: MetricFamily):
    for k, sub in enumerate(node.family):
        space = family[sub.member]
        idx = list(sub.points)
        if not idx:
            continue
        block = space.dist[np.ix_(idx, idx)]
        if node.leaf.kind == "bounded":
            diam = block.max()
            if diam > node.leaf.bound:
                return k, float(diam)
        else:
            fin = block[np.isfinite(block)]
            if fin.size and fin.max() >= node.leaf.bound:
                return k, float(fin.max())
    return None


def verify_fdc(tree: DecompTree, *, min_scale: int | None = None) -> Report:
    """Recursive check of every split, every disjointness claim and every leaf.

    With ``min_scale`` set, each internal node must also work at a scale at
    least that large.
    """
    rep = Report()
    family = tree.family
    for k, sub in enumerate(tree.root.family):
        if not 0 <= sub.member < len(family):
            raise MalformedCertificate(f"root subspace {k} references member {sub.member}")
        if sub.points and not 0 <= max(sub.points) < len(family[sub.member]):
            raise MalformedCertificate(f"root subspace {k} references an unknown point")
    for path, node in tree.walk():
        if node.is_leaf:
            rep.checks += 1
            bad = _leaf_violation(node, family)
            if bad:
                k, diam = bad
                return rep.fail(
                    "leaf_bound", f"{path} member {k}", leaf_kind=node.leaf.kind, found=diam, bound=node.leaf.bound
                )
            continue
        if node.splits is None or node.u_child is None or node.v_child is None or node.r is None:
            return rep.fail("structure", path, reason="internal node without split data")
        if min_scale is not None and node.r < min_scale:
            return rep.fail("scale", path, r=node.r, required=min_scale)
        if len(node.splits) != len(node.family):
            return rep.fail("structure", path, reason="one split per member required")
        for k, (sub, split) in enumerate(zip(node.family, node.splits)):
            space = family[sub.member]
            X = set(sub.points)
            U = set(itertools.chain.from_iterable(split.u_pieces))
            V = set(itertools.chain.from_iterable(split.v_pieces))
            rep.checks += 1
            if not (U | V) <= X:
                extra = sorted((U | V) - X)[0]
                return rep.fail("split", f"{path} member {k}", reason="piece leaves the member", point=extra)
            if U | V != X:
                missing = sorted(X - (U | V))[0]
                return rep.fail("split", f"{path} member {k}", reason="U and V do not cover", point=missing)
            if any(not p for p in split.u_pieces + split.v_pieces):
                return rep.fail("split", f"{path} member {k}", reason="empty piece")
            for part, pieces in (("U", split.u_pieces), ("V", split.v_pieces)):
                rep.checks += 1
                bad = disjointness_violation(pieces, space, node.r)
                if bad:
                    return rep.fail(
                        "disjointness",
                        f"{path} member {k} {part}",
                        pieces=bad["pieces"],
                        points=bad["points"],
                        distance=bad["distance"],
                        r=node.r,
                    )
        for part, child in (("u", node.u_child), ("v", node.v_child)):
            rep.checks += 1
            expected = _flatten(node.family, node.splits, part)
            if child.family != expected:
                pos = next(
                    (i for i, (a, b) in enumerate(zip(child.family, expected)) if a != b),
                    min(len(child.family), len(expected)),
                )
                return rep.fail(
                    "structure",
                    f"{path}.{part.upper()}",
                    reason="child family is not the flattened piece family",
                    position=pos,
                )
    return rep
