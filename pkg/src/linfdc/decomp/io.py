"""Structured-text (JSON) serialization of certificates and trees, and DOT export.

Serialized objects are self-contained: the family is embedded in the plain
text matrix format of :mod:`linfdc.spaces`, so a file can be re-verified
without the group spec that produced it.
"""

from __future__ import annotations

import json

from ..spaces import dump_family, load_family
from .core import AsdimCertificate, ColoredPiece, DecompNode, DecompTree, Leaf, Split, Subspace
from ..spaces import GroupAction
from .equivariant import EqMember, EqNode, EqSplit, EquivariantDecomp

__all__ = [
    "certificate_to_json",
    "certificate_from_json",
    "tree_to_json",
    "tree_from_json",
    "equivariant_to_json",
    "equivariant_from_json",
    "load_tree",
    "export_dot",
]


def _num(x):
    if x == float("inf"):
        return "INF"
    return int(x) if float(x).is_integer() else x


def _unnum(x):
    return float("inf") if x == "INF" else x


def _clean(obj):
    # meta dicts may carry numpy scalars or infinities
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, str)) or obj is None:
        return obj
    if hasattr(obj, "item"):
        obj = obj.item()
    if isinstance(obj, (int, float)):
        return _num(obj)
    return str(obj)


def _dumps(doc) -> str:
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def certificate_to_json(cert: AsdimCertificate, family) -> str:
    doc = {
        "type": "asdim-certificate",
        "n": cert.n,
        "r": cert.r,
        "bound": _num(cert.bound),
        "pieces": [[[p.color, list(p.points)] for p in ps] for ps in cert.pieces],
        "meta": _clean(cert.meta),
        "family": dump_family(family),
    }
    return _dumps(doc)


def certificate_from_json(text: str):
    doc = json.loads(text)
    if doc.get("type") != "asdim-certificate":
        raise ValueError("not an asdim certificate")
    family = load_family(doc["family"])
    cert = AsdimCertificate(
        doc["n"],
        doc["r"],
        _unnum(doc["bound"]),
        [[ColoredPiece.of(c, pts) for c, pts in ps] for ps in doc["pieces"]],
        doc.get("meta", {}),
    )
    return cert, family


def _node_doc(node: DecompNode) -> dict:
    doc = {"family": [[s.member, list(s.points)] for s in node.family], "note": node.note}
    if node.is_leaf:
        doc["leaf"] = {"kind": node.leaf.kind, "bound": _num(node.leaf.bound)}
        return doc
    doc["r"] = node.r
    doc["splits"] = [{"U": [list(p) for p in s.u_pieces], "V": [list(p) for p in s.v_pieces]} for s in node.splits]
    doc["U"] = _node_doc(node.u_child)
    doc["V"] = _node_doc(node.v_child)
    return doc


def _node_from(doc: dict) -> DecompNode:
    fam = [Subspace.of(m, pts) for m, pts in doc["family"]]
    if "leaf" in doc:
        return DecompNode(fam, leaf=Leaf(doc["leaf"]["kind"], _unnum(doc["leaf"]["bound"])), note=doc.get("note", ""))
    splits = [Split([tuple(p) for p in s["U"]], [tuple(p) for p in s["V"]]) for s in doc["splits"]]
    return DecompNode(
        fam,
        r=doc["r"],
        splits=splits,
        u_child=_node_from(doc["U"]),
        v_child=_node_from(doc["V"]),
        note=doc.get("note", ""),
    )


def tree_to_json(tree: DecompTree) -> str:
    doc = {
        "type": "decomposition-tree",
        "depth": tree.depth(),
        "scales": tree.scales(),
        "meta": _clean(tree.meta),
        "root": _node_doc(tree.root),
        "family": dump_family(tree.family),
    }
    return _dumps(doc)


def tree_from_json(text: str) -> DecompTree:
    doc = json.loads(text)
    if doc.get("type") != "decomposition-tree":
        raise ValueError("not a decomposition tree")
    return DecompTree(load_family(doc["family"]), _node_from(doc["root"]), doc.get("meta", {}))


def _eq_node_doc(node: EqNode) -> dict:
    doc = {"family": [[m.member, [list(b) for b in m.blocks]] for m in node.family], "note": node.note}
    if node.is_leaf:
        doc["semi_bounded"] = node.leaf_R
        return doc
    doc["r"] = node.r
    doc["splits"] = [
        {
            "U": [list(p) for p in s.u_pieces],
            "V": [list(p) for p in s.v_pieces],
            "U_action": [list(a) for a in s.u_action],
            "V_action": [list(a) for a in s.v_action],
        }
        for s in node.splits
    ]
    doc["U"] = _eq_node_doc(node.u_child)
    doc["V"] = _eq_node_doc(node.v_child)
    return doc


def equivariant_to_json(dec: EquivariantDecomp) -> str:
    doc = {
        "type": "equivariant-decomposition",
        "depth": dec.depth(),
        "meta": _clean(dec.meta),
        "actions": [[list(p) for p in act.perms] for act in dec.actions],
        "root": _eq_node_doc(dec.root),
        "family": dump_family(dec.family),
    }
    return _dumps(doc)


def _eq_node_from(doc: dict) -> EqNode:
    fam = [EqMember(m, [tuple(b) for b in blocks]) for m, blocks in doc["family"]]
    if "semi_bounded" in doc:
        return EqNode(fam, leaf_R=doc["semi_bounded"], note=doc.get("note", ""))
    splits = [
        EqSplit(
            [tuple(p) for p in s["U"]],
            [tuple(p) for p in s["V"]],
            [tuple(a) for a in s["U_action"]],
            [tuple(a) for a in s["V_action"]],
        )
        for s in doc["splits"]
    ]
    return EqNode(
        fam,
        r=doc["r"],
        splits=splits,
        u_child=_eq_node_from(doc["U"]),
        v_child=_eq_node_from(doc["V"]),
        note=doc.get("note", ""),
    )


def equivariant_from_json(text: str) -> EquivariantDecomp:
    doc = json.loads(text)
    if doc.get("type") != "equivariant-decomposition":
        raise ValueError("not an equivariant decomposition")
    family = load_family(doc["family"])
    actions = [GroupAction(space, perms) for space, perms in zip(family, doc["actions"])]
    return EquivariantDecomp(family, actions, _eq_node_from(doc["root"]), doc.get("meta", {}))


def load_tree(text: str) -> DecompTree | EquivariantDecomp:
    """Either kind of tree file, by its ``type`` field."""
    kind = json.loads(text).get("type")
    if kind == "decomposition-tree":
        return tree_from_json(text)
    if kind == "equivariant-decomposition":
        return equivariant_from_json(text)
    raise ValueError(f"not a tree file (type {kind!r})")


def export_dot(tree: DecompTree | EquivariantDecomp, name: str = "decomposition") -> str:
    """Graphviz rendering: one box per node, edges labelled U and V."""
    lines = [f'digraph "{name}" {{', "  node [shape=box, fontname=monospace];"]
    ids: dict[str, str] = {}
    for k, (path, node) in enumerate(tree.walk()):
        ids[path] = f"n{k}"
        size = sum(len(s.points) for s in node.family)
        if node.is_leaf:
            bound = f"semi-bounded < {node.leaf_R}" if isinstance(node, EqNode) else (
                f"{node.leaf.kind} <= {_num(node.leaf.bound)}"
            )
            label = f"{path}\\n{bound}\\n{len(node.family)} spaces, {size} points"
            lines.append(f'  n{k} [label="{label}", style=rounded];')
        else:
            label = f"{path}\\nr = {node.r}\\n{len(node.family)} spaces, {size} points"
            if node.note:
                label += f"\\n{node.note}"
            lines.append(f'  n{k} [label="{label}"];')
    for path, node in tree.walk():
        for tag, _child in node.children():
            lines.append(f'  {ids[path]} -> {ids[f"{path}.{tag}"]} [label="{tag}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
