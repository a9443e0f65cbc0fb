"""Equivariant decompositions and the lift from quotient decompositions.

Members of an equivariant family are G-invariant subsets of a space with an
isometric finite group action, viewed as a disjoint union of blocks: points
in different blocks are at distance infinity.  A split must consist of
G-invariant parts, and G must permute the pieces compatibly with a recorded
index action, g·U_i = U_{g·i}.

The lift mirrors the inductive construction: internal nodes of a quotient
decomposition pull back along the orbit projection with trivial index
action, and every bounded quotient leaf is cut into cosets g·H·Y, where Y
holds one representative per orbit and H is generated by the group elements
moving Y within distance r of itself.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from ..norms import INF
from ..spaces import FinSpace, GroupAction, MetricFamily, quotient_map, uniform_bound
from .build import asdim_to_fdc, bounded_leaf_strategy, components_certificate, union_decompose
from .core import DecompNode, DecompTree, Leaf, Report, UnverifiedInput, root_node, verify_fdc

__all__ = [
    "EqMember",
    "EqSplit",
    "EqNode",
    "EquivariantDecomp",
    "LiftError",
    "verify_equivariant",
    "equivariant_lift",
    "quotient_family",
    "quotient_base_tree",
]


class LiftError(ValueError):
    pass


@dataclass
class EqMember:
    member: int
    blocks: list[tuple[int, ...]]

    @property
    def points(self) -> set[int]:
        return set(itertools.chain.from_iterable(self.blocks))


@dataclass
class EqSplit:
    u_pieces: list[tuple[int, ...]]
    v_pieces: list[tuple[int, ...]]
    # u_action[k][i] = index j with g_k · U_i = U_j
    u_action: list[tuple[int, ...]]
    v_action: list[tuple[int, ...]]


@dataclass
class EqNode:
    family: list[EqMember]
    r: int | None = None
    splits: list[EqSplit] | None = None
    u_child: EqNode | None = None
    v_child: EqNode | None = None
    leaf_R: int | None = None  # semi-bounded constant for leaves
    note: str = ""
    info: dict = field(default_factory=dict)

    @property
    def is_leaf(self) -> bool:
        return self.leaf_R is not None

    def children(self):
        if self.is_leaf:
            return []
        return [("U", self.u_child), ("V", self.v_child)]


@dataclass
class EquivariantDecomp:
    family: MetricFamily
    actions: list[GroupAction]
    root: EqNode
    meta: dict = field(default_factory=dict)

    def walk(self) -> Iterator[tuple[str, EqNode]]:
        stack = [("root", self.root)]
        while stack:
            path, node = stack.pop()
            yield path, node
            for tag, child in reversed(node.children()):
                stack.append((f"{path}.{tag}", child))

    def depth(self) -> int:
        def rec(n):
            return 0 if n.is_leaf else 1 + max(rec(n.u_child), rec(n.v_child))

        return rec(self.root)


def _coproduct_dist(space: FinSpace, blocks: Sequence[Sequence[int]]) -> tuple[list[int], np.ndarray]:
    pts = sorted(itertools.chain.from_iterable(blocks))
    pos = {x: i for i, x in enumerate(pts)}
    sub = space.dist[np.ix_(pts, pts)].copy()
    label = np.empty(len(pts), dtype=int)
    for b, block in enumerate(blocks):
        for x in block:
            label[pos[x]] = b
    sub[label[:, None] != label[None, :]] = INF
    return pts, sub


def _set_dist(pts_index: dict, sub: np.ndarray, a, b) -> float:
    ia = [pts_index[x] for x in a]
    ib = [pts_index[x] for x in b]
    return float(sub[np.ix_(ia, ib)].min())


def _disjoint_violation(pieces, pts_index, sub, r):
    owner = {}
    for k, piece in enumerate(pieces):
        for x in piece:
            if x in owner:
                return owner[x], k, 0.0
            owner[x] = k
    for a, b in itertools.combinations(range(len(pieces)), 2):
        m = _set_dist(pts_index, sub, pieces[a], pieces[b])
        if m <= r:
            return a, b, m
    return None


def verify_equivariant(dec: EquivariantDecomp) -> Report:
    """Invariance of U and V, r-disjointness, g·U_i = U_{g·i} and leaf bounds."""
    rep = Report()
    for k, act in enumerate(dec.actions):
        reason = act.verify()
        if reason:
            return rep.fail("action", f"member {k}", reason=reason)
    for path, node in dec.walk():
        if node.is_leaf:
            for k, m in enumerate(node.family):
                rep.checks += 1
                if not m.blocks:
                    continue
                _, sub = _coproduct_dist(dec.family[m.member], m.blocks)
                fin = sub[np.isfinite(sub)]
                if fin.size and fin.max() >= node.leaf_R:
                    return rep.fail("leaf_bound", f"{path} member {k}", found=float(fin.max()), R=node.leaf_R)
            continue
        if node.splits is None or node.u_child is None or node.v_child is None:
            return rep.fail("structure", path, reason="internal node without split data")
        if len(node.splits) != len(node.family):
            return rep.fail("structure", path, reason="one split per member required")
        for k, (m, split) in enumerate(zip(node.family, node.splits)):
            space = dec.family[m.member]
            act = dec.actions[m.member]
            X = m.points
            U = set(itertools.chain.from_iterable(split.u_pieces))
            V = set(itertools.chain.from_iterable(split.v_pieces))
            rep.checks += 1
            if U | V != X:
                return rep.fail("split", f"{path} member {k}", reason="U and V do not cover the member")
            for g in range(act.order):
                rep.checks += 1
                if act.apply(g, U) != frozenset(U) or act.apply(g, V) != frozenset(V):
                    return rep.fail("equivariance", f"{path} member {k}", element=g, reason="U or V not invariant")
            pts, sub = _coproduct_dist(space, m.blocks)
            index = {x: i for i, x in enumerate(pts)}
            for part, pieces, action in (("U", split.u_pieces, split.u_action), ("V", split.v_pieces, split.v_action)):
                rep.checks += 1
                bad = _disjoint_violation(pieces, index, sub, node.r)
                if bad:
                    a, b, dist = bad
                    return rep.fail(
                        "disjointness", f"{path} member {k} {part}", pieces=(a, b), distance=dist, r=node.r
                    )
                if len(action) != act.order:
                    return rep.fail("equivariance", f"{path} member {k} {part}", reason="index action size")
                for g in range(act.order):
                    for i, piece in enumerate(pieces):
                        rep.checks += 1
                        j = action[g][i]
                        if not 0 <= j < len(pieces) or act.apply(g, piece) != frozenset(pieces[j]):
                            return rep.fail(
                                "equivariance",
                                f"{path} member {k} {part}",
                                element=g,
                                piece=i,
                                claimed=j,
                            )
        for part, child in (("u", node.u_child), ("v", node.v_child)):
            rep.checks += 1
            expected = [
                EqMember(m.member, [tuple(p) for p in getattr(s, f"{part}_pieces")])
                for m, s in zip(node.family, node.splits)
            ]
            if child.family != expected:
                return rep.fail("structure", f"{path}.{part.upper()}", reason="child is not the piece coproduct")
    return rep


# ---------------------------------------------------------------------------


def quotient_family(family: MetricFamily, actions: Sequence[GroupAction]):
    """Orbit spaces of every member, with the projections."""
    spaces, labels = [], []
    for space, act in zip(family, actions):
        q, lab = quotient_map(space, act)
        spaces.append(q)
        labels.append(lab)
    return MetricFamily(spaces, f"quotient of {family.label}".strip()), labels


def quotient_base_tree(qfam: MetricFamily, r: int, mode: str = "components") -> DecompTree:
    """A verified decomposition of an orbit-space family to feed the lift.

    ``components``: one split into r-components.  ``points``: a chain of
    splits down to single orbits.  ``bounded``: the whole family as one
    bounded leaf.
    """
    if mode == "components":
        return asdim_to_fdc(components_certificate(qfam, r), qfam)
    if mode == "points":
        parts = [[[i] for i in range(len(m))] for m in qfam]
        return union_decompose(qfam, parts, bounded_leaf_strategy, r)
    if mode == "bounded":
        return DecompTree(qfam, DecompNode(root_node(qfam), leaf=Leaf("bounded", uniform_bound(qfam))))
    raise ValueError(f"unknown base mode {mode!r}")


def _perm_index(act: GroupAction) -> dict:
    return {p: k for k, p in enumerate(act.perms)}


def _compose(a: tuple, b: tuple) -> tuple:
    # (a∘b)(i) = a[b[i]]
    return tuple(a[i] for i in b)


def _coset_split(space: FinSpace, act: GroupAction, blocks, r: int):
    """Coset decomposition of a union of invariant blocks; returns split and stats."""
    lookup = _perm_index(act)
    pieces: list[tuple[int, ...]] = []
    stats = {"k": 1, "diam_Y": 0, "subgroup_orders": []}
    orbit_of = {}
    for o, orb in enumerate(act.orbits()):
        for x in orb:
            orbit_of[x] = o
    for block in blocks:
        block = sorted(block)
        y0 = block[0]
        reps: dict[int, int] = {}
        for x in block:
            o = orbit_of[x]
            if o not in reps or (space.dist[y0, x], x) < (space.dist[y0, reps[o]], reps[o]):
                reps[o] = x
        Y = sorted(reps.values())
        diam_Y = space.diameter(Y)
        short = [
            k
            for k, p in enumerate(act.perms)
            if space.set_distance(Y, [p[y] for y in Y]) <= r
        ]
        H = {tuple(range(len(space)))}
        frontier = list(H)
        gens = [act.perms[k] for k in short]
        while frontier:
            nxt = []
            for h in frontier:
                for s in gens:
                    c = _compose(h, s)
                    if c not in H:
                        H.add(c)
                        nxt.append(c)
            frontier = nxt
        if any(h not in lookup for h in H):
            raise LiftError("subgroup generated by short elements leaves the group")
        seen_cosets = set()
        for g in act.perms:
            coset = frozenset(_compose(g, h) for h in H)
            if coset in seen_cosets:
                continue
            seen_cosets.add(coset)
            pts = sorted({c[y] for c in coset for y in Y})
            pieces.append(tuple(pts))
        stats["k"] = max(stats["k"], len(H))
        stats["diam_Y"] = max(stats["diam_Y"], diam_Y)
        stats["subgroup_orders"].append(len(H))
    index = {frozenset(p): i for i, p in enumerate(pieces)}
    action = []
    for g in range(act.order):
        row = []
        for p in pieces:
            img = act.apply(g, p)
            if img not in index:
                raise LiftError("coset pieces are not permuted by the group")
            row.append(index[img])
        action.append(tuple(row))
    k, dY = stats["k"], stats["diam_Y"]
    stats["diameter_bound"] = dY + k * (2 * dY + r)
    stats["k_times_r"] = k * r
    stats["max_piece_diameter"] = max((space.diameter(p) for p in pieces), default=0)
    return pieces, action, stats


def equivariant_lift(
    base: DecompTree, family: MetricFamily, actions: Sequence[GroupAction], r: int
) -> EquivariantDecomp:
    """Lift a verified decomposition of the quotient family to the G-spaces.

    ``base.family`` must be the orbit-space family of ``family`` under
    ``actions`` (as produced by :func:`quotient_family`), and the base root
    must be the whole quotient family.  ``r`` is the scale of the coset
    step at the leaves.
    """
    for k, act in enumerate(actions):
        reason = act.verify()
        if reason:
            raise LiftError(f"action on member {k}: {reason}")
    if not verify_fdc(base).ok:
        raise UnverifiedInput("base tree does not verify")
    qfam, labels = quotient_family(family, actions)
    if len(qfam) != len(base.family) or any(
        not np.array_equal(a.dist, b.dist) for a, b in zip(qfam, base.family)
    ):
        raise LiftError("base tree is not over the quotient family")
    orbits = []
    for lab in labels:
        o: dict[int, list[int]] = {}
        for x, q in enumerate(lab):
            o.setdefault(int(q), []).append(x)
        orbits.append(o)
    if [s.member for s in base.root.family] != list(range(len(family))) or any(
        len(s.points) != len(base.family[s.member]) for s in base.root.family
    ):
        raise LiftError("base root must be the whole quotient family")

    def lift_points(member: int, qpoints) -> tuple[int, ...]:
        return tuple(sorted(x for q in qpoints for x in orbits[member][q]))

    def identity_action(member: int, npieces: int):
        return [tuple(range(npieces))] * actions[member].order

    coset_stats = []

    def rec(bnode: DecompNode, fam: list[EqMember], block_tags: list[list[int]]) -> EqNode:
        # block_tags[j][b] = index in bnode.family of the quotient subspace under block b
        if bnode.is_leaf:
            splits, child = [], []
            for m in fam:
                space, act = family[m.member], actions[m.member]
                if m.blocks:
                    pieces, action, stats = _coset_split(space, act, m.blocks, r)
                    coset_stats.append(stats)
                else:
                    pieces, action = [], [()] * act.order
                splits.append(EqSplit(pieces, [], action, [()] * act.order))
                child.append(EqMember(m.member, list(pieces)))
            leaf_R = 1
            for m in child:
                for p in m.blocks:
                    leaf_R = max(leaf_R, int(family[m.member].diameter(p)) + 1)
            return EqNode(
                fam,
                r=r,
                splits=splits,
                u_child=EqNode(child, leaf_R=leaf_R),
                v_child=EqNode([EqMember(m.member, []) for m in fam], leaf_R=1),
                note="cosets",
            )
        u_off = list(itertools.accumulate((len(s.u_pieces) for s in bnode.splits), initial=0))
        v_off = list(itertools.accumulate((len(s.v_pieces) for s in bnode.splits), initial=0))
        splits, u_fam, v_fam, u_tags, v_tags = [], [], [], [], []
        for m, tags in zip(fam, block_tags):
            ups, vps, ut, vt = [], [], [], []
            for b in tags:
                bs = bnode.splits[b]
                qm = bnode.family[b].member
                for i, piece in enumerate(bs.u_pieces):
                    ups.append(lift_points(qm, piece))
                    ut.append(u_off[b] + i)
                for i, piece in enumerate(bs.v_pieces):
                    vps.append(lift_points(qm, piece))
                    vt.append(v_off[b] + i)
            splits.append(EqSplit(ups, vps, identity_action(m.member, len(ups)), identity_action(m.member, len(vps))))
            u_fam.append(EqMember(m.member, ups))
            v_fam.append(EqMember(m.member, vps))
            u_tags.append(ut)
            v_tags.append(vt)
        return EqNode(
            fam,
            r=bnode.r,
            splits=splits,
            u_child=rec(bnode.u_child, u_fam, u_tags),
            v_child=rec(bnode.v_child, v_fam, v_tags),
            note="pulled back",
        )

    root_fam = [EqMember(a, [tuple(range(len(family[a])))]) for a in range(len(family))]
    root = rec(base.root, root_fam, [[a] for a in range(len(family))])
    k = max((s["k"] for s in coset_stats), default=1)
    dec = EquivariantDecomp(
        family,
        list(actions),
        root,
        {
            "source": "equivariant lift",
            "r": r,
            "k": k,
            "k_times_r": k * r,
            "max_coset_diameter": max((s["max_piece_diameter"] for s in coset_stats), default=0),
            "diameter_bound": max((s["diameter_bound"] for s in coset_stats), default=0),
            "max_diam_Y": max((s["diam_Y"] for s in coset_stats), default=0),
        },
    )
    rep = verify_equivariant(dec)
    if not rep.ok:
        raise LiftError(f"lifted decomposition failed verification: {rep.failure}")
    return dec
