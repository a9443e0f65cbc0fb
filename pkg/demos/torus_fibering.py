"""Decompose F\\T over the diagonal lattice, one fiber at a time.

T is the upper triangular group in GL_2(F_2(t)) with t-power diagonal and
F = {I, [[1,1],[0,1]]}.  Sending a coset to its diagonal exponents is
uniformly expansive onto a window of Z^2; a brick decomposition of Z^2 is
pulled back and the fibers (unipotent, so asymptotic dimension zero) are
cut into their components.

Run from the repository root:  python demos/torus_fibering.py
"""

from linfdc.algebra import GroupElement, RatFunc
from linfdc.decomp import (
    asdim_to_fdc,
    brick_certificate,
    components_strategy,
    expansion_modulus,
    fibering_decompose,
    verify_fdc,
)
from linfdc.norms import MetricProfile, NormSpec, valuation
from linfdc.spaces import FinSpace, GroupAction, MetricFamily, ball_space, distance_matrix, quotient_map, saturate

p = 2
t = RatFunc.t(p)
one = RatFunc.one(p)
gens = [
    GroupElement.diagonal([t, one]),
    GroupElement.diagonal([one, t]),
    GroupElement([[1, 1], [0, 1]], p),
    GroupElement([[1, t.inverse()], [0, 1]], p),
]
spec = NormSpec.t_adic()
prof = MetricProfile.of(spec)
_, elems = ball_space(gens, 4, prof)
F = [GroupElement.identity(2, p), GroupElement([[1, 1], [0, 1]], p)]
W = saturate(elems, F)
space = FinSpace(range(len(W)), distance_matrix(W, prof))
q, labels = quotient_map(space, GroupAction.left_multiplication(space, W, F))
print(f"window of T: {len(W)} elements, {len(q)} cosets of F")

reps = {}
for i, lab in enumerate(labels):
    reps.setdefault(int(lab), i)
exps = [tuple(valuation(W[reps[k]].mat[i][i], spec) for i in range(2)) for k in range(len(q))]
lattice = sorted(set(exps))
D = MetricFamily([FinSpace.lattice(lattice)], "diagonal exponents")
pmap = [lattice.index(e) for e in exps]
X = MetricFamily([q], "F\\T")

table = expansion_modulus(X, [(0, pmap)], D)
print("expansion modulus:", table)

for r in (1, 2):
    rho = max(v for s, v in table.items() if s <= r)
    base = asdim_to_fdc(brick_certificate(D, max(rho, 1)), D)
    tree = fibering_decompose(X, [(0, pmap)], base, components_strategy, r)
    rep = verify_fdc(tree, min_scale=r)
    print(f"r = {r}: base scale {max(rho, 1)}, tree depth {tree.depth()}, {rep.checks} checks, verified {rep.ok}")
