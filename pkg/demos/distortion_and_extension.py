"""
Comparing structures and extending a tuple
==========================================

Two random structures that differ by small nudges are compared by their
minimal truncated distortion; then one extra point is added to the source
so that it mirrors a point of the target.
"""
from fractions import Fraction as F

from rforest.distortion import min_distortion, sample_structure
from rforest.extension import extend_one_point
from rforest.fixtures import large_K, perturbed, random_structure
from rforest.predicate import RFRStructure

# %%
# A structure and a copy with edge lengths and anchor values nudged by 1/8.
target = random_structure(11, n_generators=4, n_anchors=4)
source = perturbed(target, seed=11, size=F(1, 8))
K = large_K(target)

A = sample_structure(source, K, F(1, 2))
B = sample_structure(target, K, F(1, 2))
rho, O = min_distortion(A, B, K)
print(f"samples of {len(A)} and {len(B)} points, rho = {rho}, pairs used: {len(O.pairs)}")

# %%
# Drop the last tuple point from the source and add it back by extension.
short = RFRStructure(source.hull, source.pred, source.tuple[:-1])
res = extend_one_point(short, target, K, eps=F(1, 10))
print("case:", res.caseTag)
print(f"rho before = {res.rhoIn}, after = {res.achievedDis}, allowed = {res.bound}")
