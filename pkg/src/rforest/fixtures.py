"""Seeded random structures for tests, demos and the ``gen`` command."""
from __future__ import annotations

import random
from fractions import Fraction

from .errors import Unreachable
from .hull import SubHull, V, build_hull, free_amalgam, hull_of, project, random_forest
from .metric import FiniteExtendedMetric
from .numbers import INF, add
from .predicate import AnchorPredicate, RFRStructure


def random_predicate(rng, hull, n_anchors, denominator=8):
    """Inf-extension of random anchors at generators (made consistent)."""
    gens = list(hull.generators)
    anchors = []
    for _ in range(n_anchors):
        p, q = rng.choice(gens), rng.choice(gens)
        anchors.append((V(p), V(q), Fraction(rng.randint(0, denominator), denominator)))
    return AnchorPredicate(hull, anchors, check=False).normalized()


def random_structure(seed, n_generators=3, n_components=1, n_anchors=4, tuple_len=None,
                     length_scale=1):
    """Random hull, predicate and tuple (the first ``tuple_len`` generators)."""
    rng = random.Random(f"structure-{seed}")
    _, hull = random_forest(rng.randrange(2 ** 32), n_generators, n_components, length_scale)
    pred = random_predicate(rng, hull, n_anchors)
    k = n_generators if tuple_len is None else tuple_len
    return RFRStructure(hull, pred, [V(g) for g in hull.generators[:k]])


def perturbed(s: RFRStructure, seed, size=Fraction(1, 8)):
    """Copy of ``s`` with edge lengths and anchor values nudged by at most ``size``.

    The copy is built on the generators of ``s``; its tuple is the same list
    of generator labels.
    """
    rng = random.Random(f"perturb-{seed}")
    size = Fraction(size)
    kinds = dict(s.hull.kinds)
    edges = []
    for a, b, L in s.hull.edges:
        step = size * Fraction(rng.randint(-2, 2), 2)
        edges.append((a, b, max(L + step, L / 2)))
    # rebuild through the generator metric so the result is canonical
    from .hull import canonical_form
    h = canonical_form(kinds, edges)
    gm = h.generator_metric()
    h = build_hull(gm)
    anchors = []
    for p, q, v in s.pred.anchors:
        if p.kind != "v" or q.kind != "v" or p.vertex not in h.kinds or q.vertex not in h.kinds:
            continue
        if s.hull.kinds[p.vertex] != "generator" or s.hull.kinds[q.vertex] != "generator":
            continue
        w = v + size * Fraction(rng.randint(-2, 2), 2)
        anchors.append((p, q, min(Fraction(1), max(Fraction(0), w))))
    pred = AnchorPredicate(h, anchors, check=False).normalized()
    tup = [V(p.vertex) for p in s.tuple if p.kind == "v" and p.vertex in h.kinds]
    return RFRStructure(h, pred, tup)


def large_K(s: RFRStructure, slack=1):
    """Smallest integer K >= 1 that is large for the tuple, plus ``slack``."""
    worst = Fraction(0)
    for i, x in enumerate(s.tuple):
        for y in s.tuple[i + 1:]:
            d = s.hull.dist(x, y)
            if d != INF:
                worst = max(worst, d)
    return Fraction(max(1, int(worst) + slack))


def line_structure(lengths, anchors=(), labels=None):
    """Generators on a path with the given consecutive gaps."""
    n = len(lengths) + 1
    labels = labels or [f"g{i}" for i in range(n)]
    pos = [Fraction(0)]
    for L in lengths:
        pos.append(pos[-1] + Fraction(L))
    metric = FiniteExtendedMetric(labels, [[abs(x - y) for y in pos] for x in pos])
    h = build_hull(metric)
    return RFRStructure(h, AnchorPredicate(h, anchors), [V(g) for g in labels])


# ---------------------------------------------------------------------------
# instances for the type-path and independence operations


def attach(hull, point, leg, name):
    """New hull with generator ``name`` at distance ``leg`` beyond ``point``."""
    gm = hull.generator_metric()
    labels = list(gm.labels) + [name]

    def dfun(x, y):
        if x == name or y == name:
            other = y if x == name else x
            return INF if leg == INF else add(hull.dist(V(other), point), leg)
        return gm.d(x, y)

    return build_hull(FiniteExtendedMetric.from_function(labels, dfun))


def lifted_value(pred, p, q, v, protected):
    """Smallest value >= v that leaves ``pred`` unchanged on every protected sub-hull."""
    h = pred.host
    out = Fraction(v)
    for Y in protected:
        try:
            pp, pq = project(h, p, Y), project(h, q, Y)
        except Unreachable:
            continue
        out = max(out, pred(pp, pq) - h.dist(p, pp) - h.dist(q, pq))
    return min(Fraction(1), max(Fraction(0), out))


def _grow(rng, hull, names, p_inf=0.15):
    for name in names:
        pts = SubHull.whole(hull).mesh(Fraction(1, 2)) if hull.vertices else []
        if not pts or rng.random() < p_inf:
            hull = attach(hull, None, INF, name) if pts else _single(name)
        else:
            hull = attach(hull, rng.choice(pts), Fraction(rng.randint(1, 6), 4), name)
    return hull


def _single(name):
    return build_hull(FiniteExtendedMetric([name], [[Fraction(0)]]))


def _add_anchors(rng, pred, labels, n, protected, denominator=8):
    """Add ``n`` random anchors between ``labels``, lifted over the protected sub-hulls."""
    for _ in range(n):
        p, q = V(rng.choice(labels)), V(rng.choice(labels))
        v = lifted_value(pred, p, q, Fraction(rng.randint(0, denominator), denominator),
                         protected)
        if v < 1:
            pred = pred.plus([(p, q, v)])
    return AnchorPredicate(pred.host, pred.anchors, check=False)


def random_over(rng, base: RFRStructure, new_labels, n_anchors=3):
    """Extend ``base`` by generators ``new_labels``; the predicate on the base is kept."""
    hull = _grow(rng, base.hull, new_labels)
    old = list(base.hull.generators)
    pred = base.pred.transported(hull, old)
    protected = [hull_of(hull, [V(x) for x in old])] if old else []
    pred = _add_anchors(rng, pred, list(hull.generators), n_anchors, protected)
    tup = [V(x) for x in old + list(new_labels)]
    return RFRStructure(hull, pred.normalized(), tup)


def amalgamate(S0: RFRStructure, S1: RFRStructure, base_labels, rng=None, n_cross=0):
    """Free amalgam of two structures with both predicates and optional lifted cross anchors."""
    hull = free_amalgam(S0.hull, S1.hull, list(base_labels))
    anchors = list(S0.pred.transported(hull, S0.hull.generators).anchors)
    anchors += list(S1.pred.transported(hull, S1.hull.generators).anchors)
    pred = AnchorPredicate(hull, anchors, check=False).normalized()
    if n_cross and rng is not None:
        only0 = [g for g in S0.hull.generators if g not in base_labels]
        only1 = [g for g in S1.hull.generators if g not in base_labels]
        protected = [hull_of(hull, [V(x) for x in S.hull.generators]) for S in (S0, S1)]
        for _ in range(n_cross):
            if not only0 or not only1:
                break
            p, q = V(rng.choice(only0)), V(rng.choice(only1))
            if rng.random() < 0.5:
                p, q = q, p
            v = lifted_value(pred, p, q, Fraction(rng.randint(0, 8), 8), protected)
            if v < 1:
                pred = pred.plus([(p, q, v)])
        pred = pred.normalized()
    tup = [V(x) for x in S0.hull.generators]
    tup += [V(x) for x in S1.hull.generators if x not in S0.hull.generators]
    return RFRStructure(hull, pred, tup)


def random_independence_instance(seed, n_m=2, n_b=1, n_c=1):
    """Inputs for the independence amalgam: base over M B0 B1, C0 over M B0 C, C1 over M B1 C."""
    rng = random.Random(f"indep-{seed}")
    M = [f"m{i}" for i in range(n_m)]
    B0 = [f"p{i}" for i in range(n_b)]
    B1 = [f"q{i}" for i in range(n_b)]
    C = [f"c{i}" for i in range(n_c)]
    hm = _grow(rng, _single(M[0]), M[1:], p_inf=0)
    pm = _add_anchors(rng, AnchorPredicate(hm, []), M, 3, []).normalized()
    SM = RFRStructure(hm, pm, [V(x) for x in M])
    SB0 = random_over(rng, SM, B0)
    SB1 = random_over(rng, SM, B1)
    SC = random_over(rng, SM, C)
    base = amalgamate(SB0, SB1, M, rng, n_cross=2)
    C0 = amalgamate(SB0, SC, M, rng, n_cross=2)
    C1 = amalgamate(SB1, SC, M, rng, n_cross=2)
    return {"base": base, "C0": C0, "C1": C1, "M": M, "B0": B0, "B1": B1, "C": C}


def random_unzip_instance(seed, n_a=2):
    """Tuple ``A + (b, c)`` with b, c over the same foot and a shared stem."""
    rng = random.Random(f"unzip-{seed}")
    A = [f"a{i}" for i in range(n_a)]
    hA = _grow(rng, _single(A[0]), A[1:], p_inf=0)
    pA = _add_anchors(rng, AnchorPredicate(hA, []), A, 3, []).normalized()
    foot = rng.choice(SubHull.whole(hA).mesh(Fraction(1, 2)))
    h = Fraction(rng.randint(2, 6), 4)
    stem = h * Fraction(rng.randint(1, 3), 4)
    hs = attach(hA, foot, stem, "~e")
    hb = attach(hs, V("~e"), h - stem, "b")
    hbc = attach(hb, V("~e"), h - stem, "c")
    labels = A + ["b", "c"]
    gm = hbc.generator_metric().restrict(labels)
    hull = build_hull(gm)
    pred = pA.transported(hull, A)
    Y = [hull_of(hull, [V(x) for x in A])]
    pred = _add_anchors(rng, pred, labels, 4, Y).normalized()
    return RFRStructure(hull, pred, [V(x) for x in labels])


def random_interpolation_pair(seed, n_a=2):
    """Two structures over the same ``A`` whose pairs ``b, c`` are independent and of one type.

    The pairs differ only in the cross values between the b side and the c side.
    """
    rng = random.Random(f"interp-{seed}")
    A = [f"a{i}" for i in range(n_a)]
    hA = _grow(rng, _single(A[0]), A[1:], p_inf=0)
    pA = _add_anchors(rng, AnchorPredicate(hA, []), A, 3, []).normalized()
    if rng.random() < 0.2:
        hb = attach(hA, None, INF, "b")
        hull = attach(hb, None, INF, "c")
    else:
        foot = rng.choice(SubHull.whole(hA).mesh(Fraction(1, 2)))
        h = Fraction(rng.randint(1, 6), 4)
        hull = attach(attach(hA, foot, h, "b"), foot, h, "c")
    base = pA.transported(hull, A)
    YA = hull_of(hull, [V(x) for x in A])
    # one unary pattern copied to both b and c
    unary = [(rng.choice(A + [None]), rng.choice(["left", "right"]),
              Fraction(rng.randint(0, 8), 8)) for _ in range(3)]

    def with_unary(pred):
        for x, side, v in unary:
            for z in (V("b"), V("c")):
                other = z if x is None else V(x)
                p, q = (z, other) if side == "left" else (other, z)
                w = lifted_value(pred, p, q, v, [YA])
                if w < 1:
                    pred = pred.plus([(p, q, w)])
        return pred

    pu = with_unary(base).normalized()
    Yb = hull_of(hull, [V(x) for x in A + ["b"]])
    Yc = hull_of(hull, [V(x) for x in A + ["c"]])
    out = []
    for _ in range(2):
        pred = pu
        for _ in range(2):
            p, q = (V("b"), V("c")) if rng.random() < 0.5 else (V("c"), V("b"))
            w = lifted_value(pred, p, q, Fraction(rng.randint(0, 8), 8), [Yb, Yc])
            if w < 1:
                pred = pred.plus([(p, q, w)])
        out.append(RFRStructure(hull, pred.normalized(), [V(x) for x in A + ["b", "c"]]))
    return out[0], out[1]


def random_heart(seed, n=None, denominator=None):
    """Heart structure with repeated radii, several radius-1 points and a covering delta."""
    from .heart import HeartStructure, covering_radius
    rng = random.Random(f"heart-{seed}")
    denominator = denominator or rng.choice([4, 5, 8, 10])
    n = n or rng.randint(3, 12)
    radii = [Fraction(rng.randint(1, denominator), denominator) for _ in range(n)]
    radii += [Fraction(1)] * rng.randint(0, 3)
    rng.shuffle(radii)
    return HeartStructure(tuple(radii), max(covering_radius(radii), Fraction(1, denominator)))
