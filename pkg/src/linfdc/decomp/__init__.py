"""Asdim and FDC witnesses: types, verifiers, constructors, serialization."""

from .build import (
    ConstructionError,
    ExpansivenessError,
    FiberStrategyError,
    asdim_strategy,
    asdim_to_fdc,
    bounded_leaf_strategy,
    brick_certificate,
    brick_params,
    components_certificate,
    components_strategy,
    expansion_modulus,
    fibering_decompose,
    finite_subgroup_family_asdim0,
    greedy_asdim,
    subgroup_family,
    union_decompose,
)
from .core import (
    AsdimCertificate,
    ColoredPiece,
    DecompNode,
    DecompTree,
    Failure,
    Leaf,
    MalformedCertificate,
    Report,
    Split,
    Subspace,
    UnverifiedInput,
    root_node,
    verify_asdim,
    verify_fdc,
)
from .equivariant import (
    EqMember,
    EqNode,
    EqSplit,
    EquivariantDecomp,
    LiftError,
    equivariant_lift,
    quotient_base_tree,
    quotient_family,
    verify_equivariant,
)
from .io import (
    certificate_from_json,
    certificate_to_json,
    equivariant_from_json,
    equivariant_to_json,
    load_tree,
    export_dot,
    tree_from_json,
    tree_to_json,
)
from .oracle import class_ok, exact_asdim
