import itertools
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from rforest.errors import PreconditionError
from rforest.fixtures import random_heart
from rforest.heart import (STAR, HeartStructure, covering_radius, is_automorphism, orbit_check,
                           orbits, qf_fingerprint, radius_one_pairs, scale_structure,
                           validate_heart, zero_pattern)

F = Fraction


def test_uniform_radii_are_valid():
    n = 8
    M = HeartStructure([F(k, n) for k in range(1, n + 1)], F(1, n))
    rep = validate_heart(M)
    assert rep.valid and rep.coveringRadius == F(1, 2 * n)


def test_equal_radii_sit_at_that_radius():
    M = HeartStructure([F(1, 2), F(1, 2), F(1)], F(1, 4))
    assert M.dist("x1", "x2") == F(1, 2)
    assert validate_heart(M).metricValid


def test_small_radii_fail_density():
    M = HeartStructure([F(k, 10) for k in range(1, 5)], F(1, 10))
    rep = validate_heart(M)
    assert rep.metricValid and not rep.dense and not rep.valid
    assert rep.coveringRadius == F(3, 5)
    assert rep.violations[-1][0] == "density"


def test_out_of_range_radius():
    rep = validate_heart(HeartStructure([F(3, 2), F(1, 2)], 1))
    assert not rep.metricValid
    assert ("radius", "x1", "3/2") in rep.violations


def test_zero_radius_point_is_reported():
    rep = validate_heart(HeartStructure([F(0), F(1)], 1))
    assert not rep.metricValid
    assert any(v[0] == "zero" for v in rep.violations)


def test_constructor_checks():
    with pytest.raises(PreconditionError):
        HeartStructure([F(1)], 0)
    with pytest.raises(PreconditionError):
        HeartStructure([F(1)], 1, labels=("*",))
    with pytest.raises(PreconditionError):
        HeartStructure([F(1), F(1)], 1, labels=("p", "p"))


def test_covering_radius():
    assert covering_radius([]) == 1
    assert covering_radius([F(1)]) == F(1, 2)
    assert covering_radius([F(1, 2)]) == F(1, 2)


def test_unary_fingerprint():
    M = HeartStructure([F(1, 2), F(1, 2)], F(1, 2))
    assert qf_fingerprint(M, ["x1"]) == (("star", 0, F(1, 2)),)
    fp = qf_fingerprint(M, ["x1", "x2"])
    assert fp[0][2] == fp[1][2] == F(1, 2)
    assert ("pair", 0, 1, F(1, 2)) in fp


def test_fingerprint_with_parameters():
    M = HeartStructure([F(1, 4), F(3, 4)], F(1, 4))
    fp = qf_fingerprint(M, ["x1"], ["x2"])
    assert fp == (("star", 0, F(1, 4)), ("param", 0, 0, F(3, 4)))


def test_swaps():
    M = HeartStructure([F(1, 2), F(1, 2), F(1)], F(1, 4))
    assert is_automorphism(M, {"x1": "x2", "x2": "x1"})
    assert not is_automorphism(M, {"x1": "x3", "x3": "x1"})
    assert not is_automorphism(M, {STAR: "x1", "x1": STAR})


def test_orbit_check():
    M = HeartStructure([F(1, 2), F(1, 2), F(1), F(1)], F(1, 4))
    rep = orbit_check(M)
    assert rep.ok and rep.transpositions == 2
    assert rep.orbits == [["x1", "x2"], ["x3", "x4"]]
    rep = orbit_check(M, ["x1"])
    assert rep.ok and rep.transpositions == 1


def test_unique_radius_orbit_is_vacuous():
    M = HeartStructure([F(1, 4), F(1, 2), F(1)], F(1, 4))
    rep = orbit_check(M)
    assert rep.ok and rep.transpositions == 0
    with pytest.raises(PreconditionError):
        orbit_check(M, ["nope"])


def test_scaling_examples():
    M = HeartStructure([F(1, 5), F(4, 5)], F(1, 5))
    assert scale_structure(M, 1) == M
    S = scale_structure(M, F(1, 2))
    assert S.radii == (F(1, 10), F(2, 5))
    assert S.dist("x1", "x2") == F(2, 5)
    assert S.delta == M.delta
    with pytest.raises(PreconditionError):
        scale_structure(M, 0)
    with pytest.raises(PreconditionError):
        scale_structure(M, F(3, 2))


def test_radius_one_points():
    M = HeartStructure([F(1), F(1), F(1, 2), F(1)], F(1, 4))
    pairs = radius_one_pairs(M)
    assert len(pairs) == 3 and all(d == 1 for _, _, d in pairs)


radius = st.fractions(min_value=0, max_value=1, max_denominator=12)
hearts = st.builds(lambda rs: HeartStructure(tuple(rs), F(1, 2)),
                   st.lists(radius.filter(lambda r: r > 0), min_size=1, max_size=7))
scales = st.fractions(min_value=0, max_value=1, max_denominator=9).filter(lambda s: s > 0)


@given(hearts, scales, scales)
def test_scaling_composes(M, s, t):
    assert scale_structure(scale_structure(M, s), t) == scale_structure(M, s * t)


@given(hearts, scales)
def test_scaling_keeps_zero_pattern(M, s):
    tup = list(M.points) + list(M.points[:2])
    S = scale_structure(M, s)
    assert zero_pattern(S, tup) == zero_pattern(M, tup)
    assert validate_heart(S).metricValid


@given(hearts)
def test_ultrametric(M):
    for x, y, z in itertools.product(M.points, repeat=3):
        assert M.dist(x, z) <= max(M.dist(x, y), M.dist(y, z))


@pytest.mark.parametrize("seed", range(30))
def test_random_hearts(seed):
    M = random_heart(seed)
    assert validate_heart(M).valid
    assert orbit_check(M).ok
    params = list(M.labels[:2])
    rep = orbit_check(M, params)
    assert rep.ok
    for orb in orbits(M, params):
        for x, y in itertools.combinations(orb, 2):
            swap = {x: y, y: x}
            for tup in itertools.permutations(M.points, 2):
                img = [swap.get(u, u) for u in tup]
                assert qf_fingerprint(M, img, params) == qf_fingerprint(M, tup, params)
    assert all(d == 1 for _, _, d in radius_one_pairs(M))
