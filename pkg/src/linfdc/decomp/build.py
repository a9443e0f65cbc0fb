"""Constructors for asdim certificates and decomposition trees.

Every constructor re-runs the matching verifier on its output and raises if
verification fails, so a returned object is always a valid witness.  A
constructor that cannot find a witness returns ``None``; that is a statement
about the search budget only.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..algebra import GroupElement
from ..norms import INF, MetricProfile, pseudometric
from ..spaces import FinSpace, MetricFamily, is_closed, r_components
from .core import (
    AsdimCertificate,
    ColoredPiece,
    DecompNode,
    DecompTree,
    Leaf,
    Split,
    Subspace,
    UnverifiedInput,
    root_node,
    verify_asdim,
    verify_fdc,
)

__all__ = [
    "ConstructionError",
    "ExpansivenessError",
    "FiberStrategyError",
    "components_certificate",
    "brick_certificate",
    "greedy_asdim",
    "asdim_to_fdc",
    "bounded_leaf_strategy",
    "components_strategy",
    "asdim_strategy",
    "fibering_decompose",
    "union_decompose",
    "finite_subgroup_family_asdim0",
    "subgroup_family",
    "expansion_modulus",
]


class ConstructionError(RuntimeError):
    pass


class ExpansivenessError(ValueError):
    pass


class FiberStrategyError(RuntimeError):
    pass


def _checked(cert: AsdimCertificate, family: MetricFamily) -> AsdimCertificate:
    rep = verify_asdim(cert, family)
    if not rep.ok:
        raise ConstructionError(f"constructed certificate failed verification: {rep.failure}")
    return cert


def _checked_tree(tree: DecompTree) -> DecompTree:
    rep = verify_fdc(tree)
    if not rep.ok:
        raise ConstructionError(f"constructed tree failed verification: {rep.failure}")
    return tree


# ---------------------------------------------------------------------------
# asdim certificates


def components_certificate(family: MetricFamily, r: int) -> AsdimCertificate:
    """n = 0: the pieces are the r-connected components of each member."""
    pieces = []
    bound = 0
    for space in family:
        part = r_components(space, r)
        pieces.append([ColoredPiece.of(0, b) for b in part.blocks])
        bound = max(bound, part.max_diameter)
    cert = AsdimCertificate(0, r, bound, pieces, {"strategy": "components"})
    return _checked(cert, family)


def _is_lattice(space: FinSpace) -> bool:
    return bool(space.points) and all(
        isinstance(p, tuple) and p and all(isinstance(c, int) for c in p) for p in space.points
    )


def brick_params(r: int) -> dict:
    """Cell side and neighbourhood widths of the planar skeleton cover."""
    e = max(0, math.ceil((r - 1) / 2))
    v = r + e
    side = max(3 * (r + 1), 2 * v + r + 1)
    return {"edge_width": e, "vertex_width": v, "side": side}


def _brick_pieces_1d(coords: np.ndarray, r: int) -> list[ColoredPiece]:
    blocks: dict[int, list[int]] = {}
    for i, x in enumerate(coords[:, 0]):
        blocks.setdefault(int(x) // (r + 1), []).append(i)
    return [ColoredPiece.of(b % 2, pts) for b, pts in sorted(blocks.items())]


def _brick_pieces_2d(coords: np.ndarray, r: int) -> list[ColoredPiece]:
    prm = brick_params(r)
    L, e, v = prm["side"], prm["edge_width"], prm["vertex_width"]
    keyed: dict[tuple, list[int]] = {}
    for i, (x, y) in enumerate(coords.astype(int)):
        ox, oy = x % L, y % L
        fx, fy = min(ox, L - ox), min(oy, L - oy)
        # nearest grid line index along each axis
        nx = x // L + (1 if ox > L - ox else 0)
        ny = y // L + (1 if oy > L - oy else 0)
        if fx <= v and fy <= v:
            key = (2, "vertex", nx, ny)
        elif fy <= e:
            key = (1, "h-edge", x // L, ny)
        elif fx <= e:
            key = (1, "v-edge", nx, y // L)
        else:
            key = (0, "cell", x // L, y // L)
        keyed.setdefault(key, []).append(i)
    return [ColoredPiece.of(k[0], pts) for k, pts in sorted(keyed.items(), key=lambda kv: (kv[0][0], kv[1][0]))]


def brick_certificate(family: MetricFamily, r: int) -> AsdimCertificate:
    """Lattice cover of Z or Z^2 windows with the l-infinity metric.

    In dimension 1 the pieces are blocks of r+1 consecutive integers with
    alternating colors (n = 1, bound r).  In dimension 2 the plane is cut
    into square cells; points near a grid vertex get color 2, points near
    an edge (but not a vertex) color 1, cell interiors color 0 (n = 2).
    """
    dims = set()
    pieces = []
    for space in family:
        if not _is_lattice(space):
            raise ValueError("brick certificates need lattice points as point ids")
        coords = np.array(space.points, dtype=int)
        dims.add(coords.shape[1])
        if coords.shape[1] == 1:
            pieces.append(_brick_pieces_1d(coords, r))
        elif coords.shape[1] == 2:
            pieces.append(_brick_pieces_2d(coords, r))
        else:
            raise ValueError("brick certificates are implemented for Z and Z^2 only")
    n = max(dims)
    bound = max((family[a].diameter(p.points) for a, ps in enumerate(pieces) for p in ps), default=0)
    meta = {"strategy": "bricks", "dimension": n}
    if n == 2:
        meta.update(brick_params(r))
    return _checked(AsdimCertificate(n, r, bound, pieces, meta), family)


def _greedy_member(space: FinSpace, r: int, bound: int, n_max: int) -> list[ColoredPiece] | None:
    """Color classes grown one at a time, lowest point id first.

    Within a color class, pieces are the r-components of the chosen points.
    A point joins the current color when merging it with every component
    within distance r keeps the merged diameter <= bound; otherwise it is
    left for the next color.  Points are visited in breadth-first order of
    the r-graph so that pieces grow as balls around their seed.
    """
    d = space.dist
    remaining = list(range(len(space)))
    out: list[ColoredPiece] = []
    for color in range(n_max + 1):
        if not remaining:
            break
        rem = set(remaining)
        order = []
        seen = set()
        for seed in remaining:
            if seed in seen:
                continue
            seen.add(seed)
            queue = [seed]
            while queue:
                x = queue.pop(0)
                order.append(x)
                for y in np.nonzero(d[x] <= r)[0]:
                    y = int(y)
                    if y in rem and y not in seen:
                        seen.add(y)
                        queue.append(y)
        comps: dict[int, list[int]] = {}  # representative -> members
        comp_of: dict[int, int] = {}
        chosen = []
        for x in order:
            near = {comp_of[y] for y in comp_of if d[x, y] <= r}
            merged = [x] + [z for c in near for z in comps[c]]
            if d[np.ix_(merged, merged)].max() > bound:
                continue
            rep = min(merged)
            for c in near:
                del comps[c]
            comps[rep] = sorted(merged)
            for z in merged:
                comp_of[z] = rep
            chosen.append(x)
        for members in sorted(comps.values()):
            out.append(ColoredPiece.of(color, members))
        taken = set(chosen)
        remaining = [x for x in remaining if x not in taken]
    if remaining:
        return None
    return out


def greedy_asdim(
    family: MetricFamily,
    r: int,
    n_max: int,
    bound: int | None = None,
    strategy: str = "auto",
) -> AsdimCertificate | None:
    """Try to certify asdim <= n_max at scale r.

    With ``bound=None`` the pieces are unconstrained and the r-components
    give an n = 0 certificate whose bound is recorded.  With a bound, the
    lattice brick cover is tried first for lattice windows, then the greedy
    color-class construction.  Returns ``None`` when nothing is found,
    which does not prove that the asymptotic dimension exceeds n_max.
    """
    if r < 0:
        raise ValueError("r must be nonnegative")
    if strategy not in ("auto", "components", "bricks", "greedy"):
        raise ValueError(f"unknown strategy {strategy!r}")
    if strategy == "components" or (strategy == "auto" and bound is None):
        cert = components_certificate(family, r)
        return cert if bound is None or cert.bound <= bound else None
    if strategy in ("auto", "bricks") and all(_is_lattice(m) for m in family):
        try:
            cert = brick_certificate(family, r)
        except (ValueError, ConstructionError):
            cert = None
        if cert is not None and cert.n <= n_max and (bound is None or cert.bound <= bound):
            return cert
        if strategy == "bricks":
            return None
    if bound is None:
        raise ValueError("the greedy strategy needs a diameter bound")
    pieces = []
    for space in family:
        got = _greedy_member(space, r, bound, n_max)
        if got is None:
            return None
        pieces.append(got)
    n = max((p.color for ps in pieces for p in ps), default=0)
    cert = AsdimCertificate(n, r, bound, pieces, {"strategy": "greedy", "n_max": n_max})
    return _checked(cert, family)


# ---------------------------------------------------------------------------
# asdim -> FDC


def asdim_to_fdc(cert: AsdimCertificate, family: MetricFamily) -> DecompTree:
    """Peel off one color per level.

    Level k takes U = color-k pieces (restricted to what is left) and V = the
    remainder as a single piece; the last level splits the remainder into
    its color-n pieces.  All leaves are bounded by the certificate's bound,
    and every node works at the certificate's scale.
    """
    if not verify_asdim(cert, family).ok:
        raise UnverifiedInput("certificate does not verify")
    levels = max(cert.n, 1)

    def build(level: int, fam: list[Subspace]) -> DecompNode:
        # fam[j] is the remainder of member fam[j].member at this level
        splits = []
        u_family, v_family = [], []
        for sub in fam:
            X = set(sub.points)
            u_pieces = []
            for p in cert.pieces[sub.member]:
                if p.color == level:
                    part = tuple(sorted(X & set(p.points)))
                    if part:
                        u_pieces.append(part)
            covered = set(itertools.chain.from_iterable(u_pieces))
            left = X - covered
            if level == levels - 1:
                v_pieces = []
                for p in cert.pieces[sub.member]:
                    if p.color > level:
                        part = tuple(sorted(left & set(p.points)))
                        if part:
                            v_pieces.append(part)
                            left -= set(part)
                if cert.n == 0:
                    v_pieces = []
            else:
                v_pieces = [tuple(sorted(left))] if left else []
            splits.append(Split(u_pieces, v_pieces))
            u_family += [Subspace(sub.member, p) for p in u_pieces]
            v_family += [Subspace(sub.member, p) for p in v_pieces]
        u_child = DecompNode(u_family, leaf=Leaf("bounded", cert.bound))
        if level == levels - 1:
            v_child = DecompNode(v_family, leaf=Leaf("bounded", cert.bound))
        else:
            v_child = build(level + 1, v_family)
        return DecompNode(fam, r=cert.r, splits=splits, u_child=u_child, v_child=v_child, note=f"color {level}")

    root = build(0, root_node(family))
    tree = DecompTree(family, root, {"source": "asdim", "n": cert.n, "r": cert.r, "bound": cert.bound})
    return _checked_tree(tree)


# ---------------------------------------------------------------------------
# fiber strategies: (family, subspaces, r) -> DecompNode rooted at subspaces

FiberStrategy = Callable[[MetricFamily, list, int], "DecompNode | None"]


def _sub_family(family: MetricFamily, subs: list[Subspace]) -> MetricFamily | None:
    if not subs:
        return None
    return MetricFamily([family[s.member].subspace(s.points) for s in subs])


def _relabel(node: DecompNode, subs: list[Subspace]) -> DecompNode:
    """Map a node over a sub-family back to subspaces of the ambient family."""

    def back(sub: Subspace) -> Subspace:
        base = subs[sub.member].points
        return Subspace(subs[sub.member].member, tuple(base[i] for i in sub.points))

    def rec(nd: DecompNode) -> DecompNode:
        fam = [back(s) for s in nd.family]
        if nd.is_leaf:
            return DecompNode(fam, leaf=nd.leaf, note=nd.note)
        splits = []
        for s, sp in zip(nd.family, nd.splits):
            base = subs[s.member].points
            splits.append(
                Split(
                    [tuple(base[i] for i in p) for p in sp.u_pieces],
                    [tuple(base[i] for i in p) for p in sp.v_pieces],
                )
            )
        return DecompNode(fam, nd.r, splits, rec(nd.u_child), rec(nd.v_child), note=nd.note)

    return rec(node)


def bounded_leaf_strategy(family: MetricFamily, subs: list[Subspace], r: int) -> DecompNode:
    bound = max((family[s.member].diameter(s.points) for s in subs), default=0)
    return DecompNode(list(subs), leaf=Leaf("bounded", bound))


def components_strategy(family: MetricFamily, subs: list[Subspace], r: int) -> DecompNode:
    """Depth-1 node whose U-pieces are the r-components (asdim 0 behaviour)."""
    if not subs:
        return DecompNode([], leaf=Leaf("bounded", 0))
    sub_fam = _sub_family(family, subs)
    cert = components_certificate(sub_fam, r)
    tree = asdim_to_fdc(cert, sub_fam)
    return _relabel(tree.root, subs)


def asdim_strategy(n_max: int, bound: int | None = None) -> FiberStrategy:
    def strategy(family: MetricFamily, subs: list[Subspace], r: int) -> DecompNode | None:
        if not subs:
            return DecompNode([], leaf=Leaf("bounded", 0))
        sub_fam = _sub_family(family, subs)
        cert = greedy_asdim(sub_fam, r, n_max, bound)
        if cert is None:
            return None
        return _relabel(asdim_to_fdc(cert, sub_fam).root, subs)

    return strategy


# ---------------------------------------------------------------------------
# fibering


def expansion_modulus(
    x_family: MetricFamily, maps: Sequence[tuple[int, Sequence[int]]], y_family: MetricFamily
) -> dict[int | float, int | float]:
    """Smallest non-decreasing rho with d(p x, p x') <= rho(d(x, x')) on the data.

    Returned as a table from each observed source distance s to
    max{d_Y(p x, p x') : d_X(x, x') <= s}.
    """
    pairs: dict = {}
    for a, (ym, pmap) in enumerate(maps):
        dx = x_family[a].dist
        pm = np.asarray(pmap, dtype=int)
        dy = y_family[ym].dist[np.ix_(pm, pm)]
        for s in np.unique(dx):
            m = dy[dx == s].max()
            pairs[float(s)] = max(pairs.get(float(s), 0.0), float(m))
    table = {}
    running = 0.0
    for s in sorted(pairs):
        running = max(running, pairs[s])
        table[INF if s == INF else int(s)] = INF if running == INF else int(running)
    return table


def _rho_at(table: dict, r: float) -> float:
    vals = [v for s, v in table.items() if s <= r]
    return max(vals, default=0)


def fibering_decompose(
    x_family: MetricFamily,
    maps: Sequence[tuple[int, Sequence[int]]],
    base: DecompTree,
    fiber_strategy: FiberStrategy,
    r: int,
    modulus: Callable[[float], float] | None = None,
) -> DecompTree:
    """Pull a decomposition of the target family back along point maps.

    ``maps[a] = (y_member, pmap)`` sends point i of x_family[a] to point
    pmap[i] of base.family[y_member].  The base tree must act at scales
    >= rho(r), where rho is the supplied modulus (checked against the data)
    or the modulus estimated from the data.  Each base leaf is replaced by
    the fiber strategy's decomposition of the preimage family at scale r.
    """
    if len(maps) != len(x_family):
        raise ValueError("one map per member of the source family is required")
    if not verify_fdc(base).ok:
        raise UnverifiedInput("base tree does not verify")
    table = expansion_modulus(x_family, maps, base.family)
    if modulus is not None:
        for s, v in table.items():
            if v > modulus(s):
                raise ExpansivenessError(f"observed distance {v} exceeds rho({s}) = {modulus(s)}")
        rho_r = modulus(r)
    else:
        rho_r = _rho_at(table, r)
    base_scales = base.scales()
    if base_scales and min(base_scales) < rho_r:
        raise ExpansivenessError(
            f"base tree works at scale {min(base_scales)} but rho({r}) = {rho_r}"
        )
    pmaps = [np.asarray(pm, dtype=int) for _, pm in maps]
    base_root_index = {}
    for b, sub in enumerate(base.root.family):
        base_root_index.setdefault(sub.member, []).append(b)

    def preimage(a: int, ypoints, within) -> tuple[int, ...]:
        ys = set(ypoints)
        return tuple(i for i in within if int(pmaps[a][i]) in ys)

    # tags[j] = index of the base node member that x-subspace j maps into
    x_root, tags = [], []
    for a, (ym, _) in enumerate(maps):
        for b in base_root_index.get(ym, []):
            pts = preimage(a, base.root.family[b].points, range(len(x_family[a])))
            if pts:
                x_root.append(Subspace(a, pts))
                tags.append(b)
    covered = {(s.member, i) for s in x_root for i in s.points}
    if len(covered) != sum(len(m) for m in x_family):
        raise ValueError("the base tree's root does not cover the image of every map")

    def rec(bnode: DecompNode, fam: list[Subspace], tags: list[int]) -> DecompNode:
        if bnode.is_leaf:
            node = fiber_strategy(x_family, fam, r)
            if node is None:
                raise FiberStrategyError("fiber strategy found no decomposition")
            if node.family != fam:
                raise FiberStrategyError("fiber strategy returned a node for a different family")
            return node
        u_off = list(itertools.accumulate((len(s.u_pieces) for s in bnode.splits), initial=0))
        v_off = list(itertools.accumulate((len(s.v_pieces) for s in bnode.splits), initial=0))
        splits, u_fam, u_tags, v_fam, v_tags = [], [], [], [], []
        for sub, b in zip(fam, tags):
            bs = bnode.splits[b]
            ups, vps = [], []
            for i, piece in enumerate(bs.u_pieces):
                pts = preimage(sub.member, piece, sub.points)
                if pts:
                    ups.append(pts)
                    u_fam.append(Subspace(sub.member, pts))
                    u_tags.append(u_off[b] + i)
            for i, piece in enumerate(bs.v_pieces):
                pts = preimage(sub.member, piece, sub.points)
                if pts:
                    vps.append(pts)
                    v_fam.append(Subspace(sub.member, pts))
                    v_tags.append(v_off[b] + i)
            splits.append(Split(ups, vps))
        return DecompNode(
            fam,
            r=r,
            splits=splits,
            u_child=rec(bnode.u_child, u_fam, u_tags),
            v_child=rec(bnode.v_child, v_fam, v_tags),
            note=bnode.note,
        )

    if x_root != root_node(x_family):
        raise ValueError("each source member must map into a single base root member")
    root = rec(base.root, x_root, tags)
    tree = DecompTree(
        x_family, root, {"source": "fibering", "r": r, "rho_r": rho_r, "modulus": {str(k): v for k, v in table.items()}}
    )
    return _checked_tree(tree)


# ---------------------------------------------------------------------------
# unions


def union_decompose(
    family: MetricFamily,
    parts: Sequence[Sequence[Sequence[int]]],
    part_strategy: FiberStrategy,
    r: int,
) -> DecompTree:
    """Reduce a family of finite unions to the family of its parts.

    ``parts[a]`` lists subsets covering member a.  Node i splits off part i
    (minus earlier parts) as a single U-piece and hands the rest to node
    i+1; the U-children are decomposed by ``part_strategy``.  The largest
    number of parts used by any member is recorded in the tree metadata.
    """
    if len(parts) != len(family):
        raise ValueError("one part list per member is required")
    disjoint_parts = []
    for a, (space, plist) in enumerate(zip(family, parts)):
        seen: set[int] = set()
        mine = []
        for part in plist:
            pts = tuple(sorted(set(int(x) for x in part) - seen))
            seen |= set(pts)
            mine.append(pts)
        if seen != set(range(len(space))):
            missing = sorted(set(range(len(space))) - seen)
            raise ValueError(f"parts of member {a} do not cover point {missing[0]}")
        disjoint_parts.append(mine)
    k = max(len(p) for p in disjoint_parts)

    def strategy_node(subs):
        if not subs:
            return DecompNode([], leaf=Leaf("bounded", 0))
        node = part_strategy(family, subs, r)
        if node is None:
            raise FiberStrategyError("part strategy found no decomposition")
        return node

    if k == 1:
        root = strategy_node(root_node(family))
        return _checked_tree(DecompTree(family, root, {"source": "union", "parts": 1}))

    def build(i: int, fam: list[Subspace]) -> DecompNode:
        splits, u_fam, v_fam = [], [], []
        for sub in fam:
            plist = disjoint_parts[sub.member]
            pts = set(sub.points)
            here = tuple(x for x in plist[i] if x in pts) if i < len(plist) else ()
            rest = tuple(x for x in sub.points if x not in set(here))
            splits.append(Split([here] if here else [], [rest] if rest else []))
            if here:
                u_fam.append(Subspace(sub.member, here))
            if rest:
                v_fam.append(Subspace(sub.member, rest))
        u_child = strategy_node(u_fam)
        v_child = strategy_node(v_fam) if i == k - 2 else build(i + 1, v_fam)
        return DecompNode(fam, r=r, splits=splits, u_child=u_child, v_child=v_child, note=f"part {i}")

    root = build(0, root_node(family))
    return _checked_tree(DecompTree(family, root, {"source": "union", "parts": k}))


# ---------------------------------------------------------------------------
# finite subgroups


@dataclass
class SubgroupCosetData:
    order: int
    short_subgroup_order: int
    cosets: list[tuple[int, ...]]
    diameter: int
    chain_bound: int


def _generated(gens: list[GroupElement], universe: set[GroupElement]) -> list[GroupElement]:
    e = next(iter(universe))
    e = e * e.inverse()
    out = [e]
    seen = {e}
    frontier = [e]
    while frontier:
        nxt = []
        for g in frontier:
            for s in gens:
                h = g * s
                if h not in seen:
                    seen.add(h)
                    out.append(h)
                    nxt.append(h)
        frontier = nxt
    return out


def subgroup_family(subgroups: Sequence[Sequence[GroupElement]], profile: MetricProfile) -> MetricFamily:
    """Each finite subgroup as a space, point i being the i-th listed element."""
    members = []
    for F in subgroups:
        n = len(F)
        d = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                d[i, j] = d[j, i] = pseudometric(F[i], F[j], profile)
        members.append(FinSpace(range(n), d, check=False))
    return MetricFamily(members, "finite subgroups")


def finite_subgroup_family_asdim0(
    subgroups: Sequence[Sequence[GroupElement]], R: int, profile: MetricProfile
) -> AsdimCertificate:
    """n = 0 certificate for a family of finite subgroups at scale R.

    For each F, the pieces are the left cosets f<S> with S the elements of F
    at distance <= R from the identity.  Distinct cosets are more than R
    apart: d(fh, f'h') <= R puts (fh)^-1 f'h' in S.  The metadata records
    k = max |<S>| and the chain estimate k·R for the coset diameters.
    """
    for F in subgroups:
        if not is_closed(list(F)):
            raise ValueError("subgroup is not closed under the group operation")
    family = subgroup_family(subgroups, profile)
    pieces = []
    data = []
    for F, space in zip(subgroups, family):
        F = list(F)
        index = {f: i for i, f in enumerate(F)}
        e = F[0] * F[0].inverse()
        short = [f for f in F if pseudometric(e, f, profile) <= R]
        H = _generated(short, set(F))
        cosets = []
        placed: set[int] = set()
        for f in F:
            if index[f] in placed:
                continue
            coset = tuple(sorted(index[f * h] for h in H))
            placed |= set(coset)
            cosets.append(coset)
        pieces.append([ColoredPiece.of(0, c) for c in cosets])
        diam = max(space.diameter(c) for c in cosets)
        data.append(SubgroupCosetData(len(F), len(H), cosets, diam, len(H) * R))
    k = max(dd.short_subgroup_order for dd in data)
    bound = max(dd.diameter for dd in data)
    cert = AsdimCertificate(
        0,
        R,
        bound,
        pieces,
        {
            "strategy": "short cosets",
            "k": k,
            "chain_bound": k * R,
            "subgroups": [
                {"order": dd.order, "short_subgroup_order": dd.short_subgroup_order, "diameter": dd.diameter}
                for dd in data
            ],
        },
    )
    return _checked(cert, family)
