"""
Paths of pair types and the max-metric
======================================

Unzip a pair of points that share a stem, interpolate between two
independent pairs, and rescale a finite piece of the max-metric.
"""
from fractions import Fraction as F

from rforest.fixtures import random_interpolation_pair, random_unzip_instance
from rforest.heart import HeartStructure, orbit_check, scale_structure, validate_heart
from rforest.model_theory import interpolate_path, unzip_path

# %%
# The step-to-step distortion of both paths halves when the step count doubles.
s = random_unzip_instance(3)
for m in (4, 8, 16):
    print(f"unzip, {m:2d} steps: largest step distortion {unzip_path(s, m).max_rho}")

q0, q1 = random_interpolation_pair(0)
for m in (4, 8, 16):
    print(f"interp, {m:2d} steps: largest step distortion {interpolate_path(q0, q1, m).max_rho}")

# %%
# Points sit at the larger of their radii; equal radii can be swapped freely.
M = HeartStructure([F(1, 4), F(1, 2), F(1, 2), F(3, 4), F(1), F(1)], F(1, 8))
print("valid:", validate_heart(M).valid, " orbits:", orbit_check(M).orbits)
half = scale_structure(M, F(1, 2))
print("scaled radii:", [str(r) for r in half.radii])
print("scaled cover check:", validate_heart(half).dense)
