"""
Tree metrics and their hulls
============================

Build the smallest tree containing a few points, walk along it, project
onto a sub-tree and glue two trees along a shared piece.
"""
from fractions import Fraction as F

from rforest.hull import V, build_hull, free_amalgam, hull_of, interp, project
from rforest.metric import FiniteExtendedMetric, is_tree_embeddable

# %%
# Four points of a tree: two cherries joined by a bridge of length 1.
labels = ["a", "b", "c", "d"]
D = [[0, 2, 3, 3],
     [2, 0, 3, 3],
     [3, 3, 0, 2],
     [3, 3, 2, 0]]
metric = FiniteExtendedMetric(labels, D)
print("tree metric:", is_tree_embeddable(metric))

# The hull has two Steiner points (the cherry joints) and one bridge.
hull = build_hull(metric)
for a, b, length in hull.edges:
    print(f"  edge {a} -- {b}  length {length}")

# %%
# A square is not a tree: the report names the offending quadruple.
square = FiniteExtendedMetric(labels, [[0, 1, 2, 1], [1, 0, 1, 2], [2, 1, 0, 1], [1, 2, 1, 0]])
print("square:", is_tree_embeddable(square))

# %%
# Walk a quarter of the way from a to c and project onto the segment [c, d].
m = interp(hull, V("a"), F(1, 4), V("c"))
print("d(a, m) =", hull.dist(V("a"), m), " d(m, c) =", hull.dist(m, V("c")))
foot = project(hull, m, hull_of(hull, [V("c"), V("d")]))
print("projection of m onto [c, d] is at distance", hull.dist(m, foot))

# %%
# Glue a new leaf e (hanging off b) to the original tree along the hull of a, b.
left = build_hull(metric)
right = build_hull(FiniteExtendedMetric(["a", "b", "e"],
                                        [[0, 2, F(5, 2)], [2, 0, F(1, 2)], [F(5, 2), F(1, 2), 0]]))
glued = free_amalgam(left, right, ["a", "b"])
for x in "acd":
    print(f"d(e, {x}) in the amalgam:", glued.dist(V("e"), V(x)))
