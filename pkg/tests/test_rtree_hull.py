import random
from fractions import Fraction

import pytest

from rforest.errors import NotTreeEmbeddable, PreconditionError, Unreachable
from rforest.hull import (E, ForestHull, SubHull, V, build_hull, free_amalgam, gromov_product,
                          hull_distance, hull_intersection, hull_of, interp, is_large, project,
                          random_forest, segment, truncated_hull)
from rforest.metric import FiniteExtendedMetric, is_tree_embeddable
from rforest.numbers import INF

import oracles

F = Fraction


def metric(labels, rows):
    return FiniteExtendedMetric(labels, rows)


STAR = metric(["g0", "g1", "g2"], [[0, 2, 2], [2, 0, 2], [2, 2, 0]])
H_SHAPE = metric("abce", [[0, 2, 4, 4], [2, 0, 4, 4], [4, 4, 0, 2], [4, 4, 2, 0]])


def test_gromov_product_examples():
    line = metric(["x0", "x1", "x3"], [[0, 1, 3], [1, 0, 2], [3, 2, 0]])
    assert gromov_product(line, "x1", "x3", "x0") == 1
    assert gromov_product(line, "x1", "x1", "x0") == 1
    assert gromov_product(STAR, "g1", "g2", "g0") == 1


def test_gromov_product_rejects_inf():
    m = metric("ab", [[0, None], [None, 0]])
    with pytest.raises(PreconditionError):
        gromov_product(m, "a", "b", "a")


def test_two_points_one_edge():
    h = build_hull(metric("ab", [[0, 2], [2, 0]]))
    assert list(h.edges) == [("a", "b", 2)]
    assert h.steiners == ()


def test_three_points_star():
    h = build_hull(STAR)
    assert len(h.steiners) == 1
    assert sorted(L for _, _, L in h.edges) == [1, 1, 1]


def test_h_shape_has_a_bridge():
    h = build_hull(H_SHAPE)
    assert len(h.steiners) == 2
    s0, s1 = h.steiners
    assert h.vdist(s0, s1) == 2
    for x in "abce":
        for y in "abce":
            assert h.dist(x, y) == H_SHAPE.d(x, y)


def test_not_tree_embeddable():
    sq = metric("ABCD", [[0, 1, 2, 1], [1, 0, 1, 2], [2, 1, 0, 1], [1, 2, 1, 0]])
    with pytest.raises(NotTreeEmbeddable) as exc:
        build_hull(sq)
    assert set(exc.value.quadruple) == set("ABCD")


def test_distance_basics():
    h = build_hull(STAR)
    assert hull_distance(h, V("g0"), V("g0")) == 0
    a, b, L = h.edges[0]
    assert hull_distance(h, V(a), V(b)) == L
    assert hull_distance(h, V("g0"), V("g2")) == 2


def test_interp_endpoints_and_midpoint():
    h = build_hull(metric("ab", [[0, 2], [2, 0]]))
    assert interp(h, V("a"), 0, V("b")) == V("a")
    assert interp(h, V("a"), 1, V("b")) == V("b")
    assert interp(h, V("a"), F(1, 2), V("b")) == E(0, 1)


def test_interp_on_star():
    h = build_hull(STAR)
    (center,) = h.steiners
    m = interp(h, V("g0"), F(3, 4), V("g1"))
    assert h.dist(V("g0"), m) == F(3, 2)
    assert h.dist(V(center), m) == F(1, 2)
    assert h.dist(m, V("g1")) == F(1, 2)


def test_interp_errors():
    h = build_hull(metric("ab", [[0, None], [None, 0]]))
    with pytest.raises(PreconditionError):
        interp(h, V("a"), F(1, 2), V("b"))
    h = build_hull(STAR)
    with pytest.raises(PreconditionError):
        interp(h, V("g0"), F(3, 2), V("g1"))


def test_project_examples():
    h = build_hull(STAR)
    (center,) = h.steiners
    sub = segment(h, V("g0"), V("g1"))
    assert project(h, V("g2"), sub) == V(center)
    assert project(h, V("g0"), sub) == V("g0")
    whole = SubHull.whole(h)
    p = interp(h, V("g2"), F(1, 3), V("g0"))
    assert project(h, p, whole) == p
    # mesh oracle
    d, _ = oracles.mesh_projection(h, V("g2"), sub, F(1, 16))
    assert d == h.dist(V("g2"), V(center))


def test_project_unreachable():
    h = build_hull(metric("ab", [[0, None], [None, 0]]))
    with pytest.raises(Unreachable):
        project(h, V("b"), hull_of(h, [V("a")]))


def test_truncated_hull_examples():
    h = build_hull(metric("ab", [[0, 3], [3, 0]]))
    sub = truncated_hull(h, [V("a"), V("b")], 2)
    assert sub.vertices == {"a", "b"} and sub.intervals == {}
    assert truncated_hull(h, [V("a"), V("b")], 4) == SubHull.whole(h)
    H = build_hull(H_SHAPE)
    sub = truncated_hull(H, [V(x) for x in "abce"], 3)
    assert sub.total_length() == 4
    assert sub == segment(H, V("a"), V("b")).union(segment(H, V("c"), V("e")))
    assert truncated_hull(H, [], 3).is_empty()


def test_is_large_examples():
    iso = metric("ab", [[0, None], [None, 0]])
    assert is_large(1, iso, ["a", "b"])
    unit = metric("ab", [[0, 1], [1, 0]])
    assert not is_large(1, unit, ["a", "b"])
    assert is_large(2, unit, ["a", "b"])
    assert not is_large(F(1, 2), iso, ["a"])


def test_free_amalgam_wedge():
    Y0 = build_hull(metric(["x", "y0"], [[0, 1], [1, 0]]))
    Y1 = build_hull(metric(["x", "y1"], [[0, 1], [1, 0]]))
    Z = free_amalgam(Y0, Y1, ["x"])
    assert Z.dist("y0", "y1") == 2


def test_free_amalgam_empty_base():
    Y0 = build_hull(metric(["y0"], [[0]]))
    Y1 = build_hull(metric(["y1"], [[0]]))
    assert free_amalgam(Y0, Y1, []).dist("y0", "y1") == INF


@pytest.mark.parametrize("legs", [(F(1, 4), F(1, 2)), (F(1), F(3, 4))])
def test_free_amalgam_hanging_leaves(legs):
    l0, l1 = legs
    Y0 = build_hull(metric(["p", "q", "y0"], [[0, 2, F(1, 2) + l0], [2, 0, F(3, 2) + l0],
                                              [F(1, 2) + l0, F(3, 2) + l0, 0]]))
    Y1 = build_hull(metric(["p", "q", "y1"], [[0, 2, F(3, 2) + l1], [2, 0, F(1, 2) + l1],
                                              [F(3, 2) + l1, F(1, 2) + l1, 0]]))
    Z = free_amalgam(Y0, Y1, ["p", "q"])
    assert Z.dist("y0", "y1") == l0 + 1 + l1
    assert oracles.amalgam_inf(Y0, Y1, ["p", "q"], V("y0"), V("y1"), F(1, 8)) == l0 + 1 + l1


def test_free_amalgam_rejects_non_isometric_base():
    Y0 = build_hull(metric(["p", "q"], [[0, 1], [1, 0]]))
    Y1 = build_hull(metric(["p", "q"], [[0, 2], [2, 0]]))
    with pytest.raises(PreconditionError):
        free_amalgam(Y0, Y1, ["p", "q"])


def test_intersection_examples():
    h = build_hull(metric("ab", [[0, 2], [2, 0]]))
    s0 = segment(h, V("a"), E(0, F(3, 2)))
    s1 = segment(h, E(0, F(1, 2)), V("b"))
    both = hull_intersection(h, s0, s1)
    assert both == segment(h, E(0, F(1, 2)), E(0, F(3, 2)))
    assert hull_intersection(h, s0, s0) == s0
    iso = build_hull(metric("ab", [[0, None], [None, 0]]))
    assert hull_intersection(iso, hull_of(iso, [V("a")]), hull_of(iso, [V("b")])).is_empty()


def test_random_forest_sizes():
    m0, h0 = random_forest(1, 0)
    assert len(m0) == 0 and h0.vertices == ()
    m1, h1 = random_forest(1, 1)
    assert len(m1) == 1
    for seed in range(5):
        m, _ = random_forest(seed, 8)
        assert is_tree_embeddable(m)[0]
    assert random_forest(3, 5)[0] == random_forest(3, 5)[0]


@pytest.mark.parametrize("seed", range(15))
def test_distances_match_graph_oracle(seed):
    _, h = random_forest(seed, 5, n_components=2)
    pts = SubHull.whole(h).mesh(F(1, 2))
    assert h.dist_matrix(pts, pts) == oracles.graph_distances(h, pts)


@pytest.mark.parametrize("seed", range(10))
def test_rebuild_is_canonical(seed):
    metric_, h = random_forest(seed, 6, n_components=2)
    assert build_hull(metric_) == h
    shuffled = list(metric_.labels)
    random.Random(seed).shuffle(shuffled)
    assert build_hull(metric_.restrict(shuffled)) == h


@pytest.mark.parametrize("seed", range(10))
def test_projection_is_nearest(seed):
    rng = random.Random(seed)
    _, h = random_forest(seed, 5)
    gens = [V(g) for g in h.generators]
    sub = hull_of(h, rng.sample(gens, 2))
    for p in SubHull.whole(h).mesh(F(1, 2)):
        q = project(h, p, sub)
        assert sub.contains(q)
        d, _ = oracles.mesh_projection(h, p, sub, F(1, 4))
        assert h.dist(p, q) <= d


def test_serialisation_round_trip():
    _, h = random_forest(4, 6, n_components=2)
    assert ForestHull.from_dict(h.as_dict()) == h
