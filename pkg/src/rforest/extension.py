"""One-point extensions with a controlled distortion bound, and their iteration.

Given a source structure with tuple ``a`` and a target with tuple ``b + c``,
``extend_one_point`` builds a structure on ``<a e>`` extending the source and
a correlation with the target witnessing ``dis <= 4 * rho + eps``, where
``rho`` is the distortion of the sampled correlation it starts from.

Everything is done on finite samples.  The source sample is a mesh of the
K-truncated hull of the tuple; the target sample is a mesh of the hull of
``b`` plus the projections the later steps will need.  New points on a
grafted segment are added on both sides at matching parameters, so the
correlation of one step feeds the next one unchanged.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .distortion import Correlation, Sample, dis_K, min_distortion, sample_points
from .errors import PreconditionError, Unreachable
from .hull import V, build_hull, hull_of, interp, is_large, project, transport, truncated_hull
from .metric import FiniteExtendedMetric
from .numbers import INF, add, fmt
from .predicate import AnchorPredicate, RFRStructure

INFINITE = "infinite-distance"
GRAFT = "graft"


@dataclass
class ExtensionResult:
    extended: RFRStructure
    achievedDis: object
    correlationUsed: Correlation
    caseTag: str
    rhoIn: object
    bound: object
    sampleA: Sample = None
    sampleB: Sample = None

    @property
    def within_bound(self):
        return self.achievedDis <= self.bound

    def as_dict(self):
        return {"caseTag": self.caseTag, "achievedDis": fmt(self.achievedDis),
                "rhoIn": fmt(self.rhoIn), "bound": fmt(self.bound),
                "withinBound": self.within_bound,
                "correlationUsed": self.correlationUsed.as_dict()}


@dataclass
class TupleExtensionResult:
    extended: RFRStructure
    achievedDis: object
    rhoIn: object
    bound: object
    steps: list = field(default_factory=list)

    @property
    def within_bound(self):
        return self.achievedDis <= self.bound

    def as_dict(self):
        return {"achievedDis": fmt(self.achievedDis), "rhoIn": fmt(self.rhoIn),
                "bound": fmt(self.bound), "withinBound": self.within_bound,
                "steps": [s.as_dict() for s in self.steps]}


def _prefix(s: RFRStructure, n) -> RFRStructure:
    return RFRStructure(s.hull, s.pred, list(s.tuple[:n]))


def _fresh_label(hull, base="e"):
    name, k = base, 0
    while name in hull.kinds:
        k += 1
        name = f"{base}{k}"
    return name


@dataclass
class _Step:
    """Target-side data for one new point."""
    c: object
    foot: object          # projection onto the hull of the earlier points, or None
    length: object        # d(foot, c), INF when foot is None
    params: set = field(default_factory=set)


def _plan(target: RFRStructure, n, eps_mesh):
    """Projections of every new target point and the sample points they need."""
    T = target.hull
    steps, extras = [], set()
    base = hull_of(T, target.tuple[:n])
    for j in range(n, len(target.tuple)):
        c = target.tuple[j]
        try:
            foot = project(T, c, hull_of(T, target.tuple[:j]))
        except Unreachable:
            steps.append(_Step(c, None, INF))
            continue
        L = T.dist(foot, c)
        steps.append(_Step(c, foot, L))
        if base.contains(foot):
            extras.add(foot)
            continue
        for st in steps[:-1]:
            if st.foot is None:
                continue
            if T.dist(st.foot, foot) + T.dist(foot, st.c) == st.length:
                if st.length > 0:
                    st.params.add(T.dist(st.foot, foot) / st.length)
                break
    for st in steps:
        if st.foot is not None and st.length > 0:
            n_seg = max(1, math.ceil(st.length / eps_mesh))
            st.params |= {Fraction(k, n_seg) for k in range(n_seg + 1)}
    return steps, sorted(extras)


def _step(src: RFRStructure, target: RFRStructure, pairs, st: _Step, K, eps, name=None):
    """Extend ``src`` by one point following target data ``st``.

    ``pairs`` is the current correlation as a set of (source point, target
    point).  Returns (extended structure, new pairs, case tag, rho).
    """
    T, R_B = target.hull, target.pred
    H = src.hull
    a_pts = sorted({a for a, _ in pairs})
    b_pts = sorted({b for _, b in pairs})
    A0 = sample_points(src, a_pts)
    B0 = sample_points(_prefix(target, len(src.tuple)), b_pts)
    rho = dis_K(_as_correlation(pairs, A0, B0), A0, B0, K).dis

    if st.foot is None:
        label = name or _fresh_label(H)
        labels = list(H.generators) + [label]
        gm = H.generator_metric()
        metric = FiniteExtendedMetric.from_function(
            labels, lambda x, y: Fraction(0) if x == y else
            (INF if label in (x, y) else gm.d(x, y)))
        H2 = build_hull(metric)
        move = {p: transport(H, p, H2, H.generators) for p in a_pts}
        e = V(label)
        moved = [(move[a], b) for a, b in pairs]
        anchors = list(src.pred.transported(H2, H.generators).anchors)
        for a, b in moved:
            anchors.append((a, e, R_B(b, st.c)))
            anchors.append((e, a, R_B(st.c, b)))
        anchors.append((e, e, R_B(st.c, st.c)))
        pred = AnchorPredicate(H2, anchors, check=False).normalized()
        tup = [transport(H, p, H2, H.generators) for p in src.tuple] + [e]
        return RFRStructure(H2, pred, tup), set(moved) | {(e, st.c)}, INFINITE, rho

    a_dag = min(a for a, b in pairs if b == st.foot)
    if st.length == 0:
        return (RFRStructure(H, src.pred, list(src.tuple) + [a_dag]),
                set(pairs), GRAFT, rho)

    label = name or _fresh_label(H)
    labels = list(H.generators) + [label]
    gm = H.generator_metric()

    def dfun(x, y):
        if x == y:
            return Fraction(0)
        if x == label:
            return add(H.dist(V(y), a_dag), st.length)
        if y == label:
            return add(H.dist(V(x), a_dag), st.length)
        return gm.d(x, y)

    H2 = build_hull(FiniteExtendedMetric.from_function(labels, dfun))
    gens = H.generators
    move = {p: transport(H, p, H2, gens) for p in set(a_pts) | {a_dag}}
    e = V(label)
    a2 = move[a_dag]
    new_pairs = {(move[a], b) for a, b in pairs}
    for r in sorted(st.params):
        new_pairs.add((interp(H2, a2, r, e), interp(T, st.foot, r, st.c)))

    # binary inf-extension of the target predicate through the correlation
    plist = sorted(new_pairs)
    bs = sorted({b for _, b in plist})
    bpos = {b: i for i, b in enumerate(bs)}
    RB = R_B.eval_matrix(bs)
    best = {}
    for a, b in plist:
        for a1, b1 in plist:
            v = RB[bpos[b]][bpos[b1]]
            key = (a, a1)
            if key not in best or v < best[key]:
                best[key] = v
    shifted = [(p, q, v + rho) for (p, q), v in best.items() if v + rho < 1]
    old = list(src.pred.transported(H2, gens).anchors)
    pred = AnchorPredicate(H2, old + shifted, check=False).normalized()
    tup = [transport(H, p, H2, gens) for p in src.tuple] + [e]
    return RFRStructure(H2, pred, tup), new_pairs, GRAFT, rho


def _as_correlation(pairs, A: Sample, B: Sample) -> Correlation:
    pa = {p: i for i, p in enumerate(A.points)}
    pb = {p: i for i, p in enumerate(B.points)}
    idx = tuple(sorted((pa[a], pb[b]) for a, b in pairs))
    return Correlation(idx, tuple(sorted(set(zip(A.pins, B.pins))))).validate(len(A), len(B))


def _start(source, target, K, eps_mesh, max_product):
    n = len(source.tuple)
    if len(target.tuple) < n:
        raise PreconditionError("target tuple is shorter than the source tuple")
    if not is_large(K, target.hull, target.tuple):
        raise PreconditionError(f"K={K} is not large for the target tuple")
    steps, extras = _plan(target, n, eps_mesh)
    sub = truncated_hull(source.hull, source.tuple, K)
    A = sample_points(source, sub.mesh(eps_mesh))
    Bsub = hull_of(target.hull, target.tuple[:n])
    B = sample_points(_prefix(target, n), list(Bsub.mesh(eps_mesh)) + extras)
    rho, O = min_distortion(A, B, K, max_product=max_product)
    pairs = {(A.points[i], B.points[j]) for i, j in O.pairs}
    return steps, pairs, rho


def _default_mesh(target):
    return target.hull.length_scale() / 4


def extend_tuple(source: RFRStructure, target: RFRStructure, K, eps, eps_mesh=None,
                 max_product=4096) -> TupleExtensionResult:
    """Iterate one-point extensions until the source tuple matches the target's length.

    Step k is checked against ``4 * rho_k + eps_k`` with
    ``eps_k = eps * 2**-(k+1) * 5**(k-m)``; the final distortion is compared
    with ``5**m * rho_in + eps``.
    """
    K, eps = Fraction(K), Fraction(eps)
    if eps <= 0:
        raise PreconditionError("eps must be positive")
    eps_mesh = Fraction(eps_mesh) if eps_mesh is not None else _default_mesh(target)
    m = len(target.tuple) - len(source.tuple)
    if m == 0:
        return TupleExtensionResult(source, Fraction(0), Fraction(0), eps)
    steps, pairs, rho_in = _start(source, target, K, eps_mesh, max_product)
    cur = source
    results = []
    for k, st in enumerate(steps):
        eps_k = eps * Fraction(1, 2 ** (k + 1)) * Fraction(5) ** (k - m)
        cur, pairs, tag, rho = _step(cur, target, pairs, st, K, eps_k)
        A = sample_points(cur, sorted({a for a, _ in pairs}))
        B = sample_points(_prefix(target, len(cur.tuple)), sorted({b for _, b in pairs}))
        O = _as_correlation(pairs, A, B)
        achieved = dis_K(O, A, B, K).dis
        results.append(ExtensionResult(cur, achieved, O, tag, rho, 4 * rho + eps_k, A, B))
    final = results[-1]
    return TupleExtensionResult(cur, final.achievedDis, rho_in,
                                Fraction(5) ** m * rho_in + eps, results)


def extend_one_point(source: RFRStructure, target: RFRStructure, K, eps, eps_mesh=None,
                     max_product=4096) -> ExtensionResult:
    """Add one point ``e`` to the source so that ``a e`` looks like ``b c``.

    ``target.tuple`` must be one longer than ``source.tuple``.
    """
    if len(target.tuple) != len(source.tuple) + 1:
        raise PreconditionError("target tuple must have exactly one extra point")
    out = extend_tuple(source, target, K, eps, eps_mesh, max_product)
    step = out.steps[0]
    step.bound = 4 * out.rhoIn + Fraction(eps)
    return step
