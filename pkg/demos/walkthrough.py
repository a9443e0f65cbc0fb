"""A tour of the package on the Heisenberg spec.

Run from the repository root:  python demos/walkthrough.py
"""

from pathlib import Path

from linfdc.algebra import GroupElement
from linfdc.config import load_spec
from linfdc.decomp import (
    asdim_to_fdc,
    export_dot,
    greedy_asdim,
    equivariant_lift,
    quotient_base_tree,
    quotient_family,
    verify_equivariant,
    verify_fdc,
)
from linfdc.norms import length
from linfdc.spaces import FinSpace, GroupAction, MetricFamily, ball_space, distance_matrix, saturate, word_ball
from linfdc.structure import th_factorize

HERE = Path(__file__).resolve().parent
spec = load_spec(HERE / "specs" / "heisenberg.spec")
prof = spec.profile
print(f"U_3 over F_{spec.p}[t], norms {prof.labels()}")

# 1. lengths of the generators and a window of the word metric
for name, g in spec.generators:
    print(f"  l({name}) = {length(g, prof).units}")
space, elems = ball_space(spec.gens, 3, prof)
print(f"word ball of radius 3: {len(space)} elements, diameter {space.diameter()}")

# 2. an upper triangular representative at distance zero; elements of U are
# already upper triangular, so factor the transpose of a long one
u = max(elems, key=lambda x: length(x, prof).scalar)
g = GroupElement([list(col) for col in zip(*u.mat)], spec.p)
fac = th_factorize(g, spec.norms[1])  # degree norm: entries have poles at infinity
print(f"g = t·h with t-exponents {fac.exponents}; d(g, t) = 0 checked")

# 3. quotients by the declared finite subgroups and an asdim-0 certificate
quotients = []
for name, F in spec.subgroups:
    W = saturate(elems, F)
    total = FinSpace(range(len(W)), distance_matrix(W, prof))
    act = GroupAction.left_multiplication(total, W, F)
    qfam, _ = quotient_family(MetricFamily([total]), [act])
    quotients.append(qfam[0])
    print(f"  F = {name} (order {len(F)}): {len(W)} points, {len(qfam[0])} cosets")
fam = MetricFamily(quotients, "quotients")
for r in spec.scales:
    cert = greedy_asdim(fam, r, 0)
    tree = asdim_to_fdc(cert, fam)
    print(f"  scale {r}: n = {cert.n}, bound {cert.bound}, tree depth {tree.depth()}, verified {verify_fdc(tree).ok}")

# 4. an equivariant decomposition for subgroup C acting on its saturated window
name, F = spec.subgroups[-1]
W = saturate(word_ball(spec.gens, 2), F)
total = FinSpace(range(len(W)), distance_matrix(W, prof))
act = GroupAction.left_multiplication(total, W, F)
family = MetricFamily([total])
qfam, _ = quotient_family(family, [act])
dec = equivariant_lift(quotient_base_tree(qfam, 1, "points"), family, [act], 1)
m = dec.meta
print(f"equivariant lift for {name}: depth {dec.depth()}, k = {m['k']}, max coset diameter "
      f"{m['max_coset_diameter']} (k·r = {m['k_times_r']}), verified {verify_equivariant(dec).ok}")

print()
print(export_dot(tree, "quotients")[:300] + "...")
