from fractions import Fraction

import pytest

from rforest.distortion import (BRUTE_FORCE_LIMIT, Correlation, all_correlations,
                                brute_force_min, dis_K, dis_metric_K, min_distortion,
                                sample_points, sample_structure)
from rforest.errors import PreconditionError, SizeLimitError
from rforest.fixtures import large_K, perturbed, random_structure
from rforest.hull import V, build_hull
from rforest.metric import FiniteExtendedMetric
from rforest.predicate import AnchorPredicate, RFRStructure

import oracles
from instances import small_sample_pair

F = Fraction


def pair(d, anchors=(), tup=True, labels="pq"):
    h = build_hull(FiniteExtendedMetric(labels, [[0, d], [d, 0]]))
    return RFRStructure(h, AnchorPredicate(h, anchors),
                        [V(x) for x in labels] if tup else [])


def single(v, label="p"):
    h = build_hull(FiniteExtendedMetric([label], [[0]]))
    return RFRStructure(h, AnchorPredicate(h, [(V(label), V(label), v)]), [V(label)])


IDENT2 = Correlation(((0, 0), (1, 1)))


def test_identity_has_zero_metric_distortion():
    A = sample_points(pair(1), [])
    assert dis_metric_K(IDENT2, A, A, 2)[0] == 0


def test_metric_distortion_half():
    A = sample_points(pair(1), [])
    B = sample_points(pair(F(3, 2)), [])
    assert dis_metric_K(IDENT2, A, B, 2)[0] == F(1, 2)


def test_infinite_distances_clamp_to_K():
    A = sample_points(pair(None), [])
    assert dis_metric_K(IDENT2, A, A, 1)[0] == 0
    B = sample_points(pair(5), [])
    assert dis_metric_K(IDENT2, A, B, 1)[0] == 0


def test_predicate_term():
    A = sample_points(single(F(3, 10)), [])
    B = sample_points(single(F(1, 2)), [])
    rep = dis_K(Correlation(((0, 0),)), A, B, 1)
    assert rep.dis == F(1, 5) and rep.disMetric == 0


def test_metric_term_wins():
    A = sample_points(pair(1, [(V("p"), V("p"), F(3, 10))]), [])
    B = sample_points(pair(F(3, 2), [(V("p"), V("p"), F(1, 2))]), [])
    rep = dis_K(IDENT2, A, B, 2)
    assert (rep.disMetric, rep.disPredicate, rep.dis) == (F(1, 2), F(1, 5), F(1, 2))
    assert rep.witness == rep.metricWitness


def test_min_distortion_against_itself():
    s = random_structure(2, 3, n_anchors=4)
    A = sample_structure(s, large_K(s), F(1, 2))
    rho, O = min_distortion(A, A, large_K(s))
    assert rho == 0
    assert all((i, i) in O.pairs for i in range(len(A)))


def test_two_points_near_and_far():
    A = sample_points(pair(1, tup=False), [V("p"), V("q")])
    B = sample_points(pair(2, tup=False), [V("p"), V("q")])
    rho, O = min_distortion(A, B, 3)
    assert rho == 1
    assert rho == oracles.min_distortion(A, B, 3)


def test_one_anchor_changed_by_delta():
    delta = F(1, 8)
    s0 = pair(1, [(V("p"), V("q"), F(1, 4))])
    s1 = pair(1, [(V("p"), V("q"), F(1, 4) + delta)])
    A, B = sample_structure(s0, 2, F(1, 2)), sample_structure(s1, 2, F(1, 2))
    rho, _ = min_distortion(A, B, 2)
    assert rho <= delta


def test_correlation_counts():
    assert len(list(all_correlations(1, 1))) == 1
    assert len(list(all_correlations(1, 2))) == 1
    # frozen from the subset-enumeration oracle
    assert len(list(all_correlations(2, 2))) == 7
    assert len(list(oracles.relations(2, 2))) == 7
    for nA, nB in [(2, 3), (3, 3), (2, 4)]:
        ours = set(all_correlations(nA, nB, [(0, 0)]))
        ref = {frozenset(r) for r in oracles.relations(nA, nB, [(0, 0)])}
        assert ours == ref


def test_size_limits():
    with pytest.raises(SizeLimitError):
        list(all_correlations(5, 5))
    s = random_structure(1, 4)
    A = sample_structure(s, large_K(s), F(1, 8))
    with pytest.raises(SizeLimitError) as exc:
        min_distortion(A, A, large_K(s), max_product=10)
    assert exc.value.needed == len(A) ** 2


def test_tuple_length_mismatch():
    A = sample_points(pair(1), [])
    B = sample_points(single(F(1, 2)), [])
    with pytest.raises(PreconditionError):
        min_distortion(A, B, 2)


def test_correlation_validation():
    with pytest.raises(PreconditionError):
        Correlation(((0, 0),)).validate(2, 1)
    with pytest.raises(PreconditionError):
        Correlation(((0, 0), (1, 0)), ((1, 1),)).validate(2, 1)


@pytest.mark.parametrize("seed", range(60))
def test_branch_and_bound_matches_oracles(seed):
    A, B = small_sample_pair(seed)
    K = 2
    rho, O = min_distortion(A, B, K)
    assert dis_K(O, A, B, K).dis == rho
    assert brute_force_min(A, B, K)[0] == rho
    if len(A) * len(B) <= 12:
        assert oracles.min_distortion(A, B, K) == rho


@pytest.mark.parametrize("seed", range(20))
def test_symmetry(seed):
    A, B = small_sample_pair(seed)
    assert min_distortion(A, B, 2)[0] == min_distortion(B, A, 2)[0]


@pytest.mark.parametrize("seed", range(10))
def test_upper_bound_soundness(seed):
    s = random_structure(seed, 3, n_anchors=3)
    t = perturbed(s, seed)
    K = max(large_K(s), large_K(t))
    A, B = sample_structure(s, K, F(1, 2)), sample_structure(t, K, F(1, 2))
    rho, _ = min_distortion(A, B, K, max_product=4096)
    full = Correlation(tuple((i, j) for i in range(len(A)) for j in range(len(B))),
                       tuple(sorted(set(zip(A.pins, B.pins)))))
    assert rho <= dis_K(full, A, B, K).dis


def test_metric_terms_monotone_in_K():
    A, B = small_sample_pair(4)
    O = Correlation(tuple((i, j) for i in range(len(A)) for j in range(len(B))),
                    tuple(sorted(set(zip(A.pins, B.pins)))))
    vals = [dis_metric_K(O, A, B, K)[0] for K in (1, 2, 3, 5)]
    assert vals == sorted(vals)


def test_brute_force_limit_constant():
    assert BRUTE_FORCE_LIMIT == 20
