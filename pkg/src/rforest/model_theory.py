"""Pointed types, independence, type paths and the order witness.

A finitely generated structure is summarised by a :class:`TypeFingerprint`:
the distance matrix of its tuple together with predicate values at the
points ``t_j ⌢ s ⌢ t_k`` for ``s`` on a uniform grid.  Two structures are
treated as having the same pointed type when their fingerprints agree.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .distortion import Correlation, min_distortion, sample_points
from .errors import PreconditionError, Unreachable
from .hull import (SubHull, V, build_hull, free_amalgam, hull_of, interp, project,
                   transport)
from .metric import FiniteExtendedMetric, check_metric, is_tree_embeddable
from .numbers import INF, fmt
from .predicate import (AnchorPredicate, MixturePredicate, RFRStructure, Restriction,
                        check_one_one_lipschitz, restrict_structure)

DEFAULT_MESH = 4


# ---------------------------------------------------------------------------
# fingerprints


@dataclass(frozen=True)
class TypeFingerprint:
    dist: tuple
    values: tuple       # sorted ((key_x, key_y), value); key = (j, k, s)
    mesh: int

    def as_dict(self):
        return {"dist": [[fmt(x) for x in row] for row in self.dist],
                "mesh": self.mesh,
                "values": [[list(map(str, kx)), list(map(str, ky)), fmt(v)]
                           for (kx, ky), v in self.values]}


def mesh_keys(s: RFRStructure, mesh=DEFAULT_MESH):
    """Keys ``(j, k, s)`` and points ``t_j ⌢ s ⌢ t_k`` of the interpolation mesh."""
    h, tup = s.hull, s.tuple
    keys, pts = [], []
    for j, t in enumerate(tup):
        keys.append((j, j, Fraction(0)))
        pts.append(t)
    for j in range(len(tup)):
        for k in range(j + 1, len(tup)):
            D = h.dist(tup[j], tup[k])
            if D == INF or D == 0:
                continue
            for i in range(1, mesh):
                r = Fraction(i, mesh)
                keys.append((j, k, r))
                pts.append(interp(h, tup[j], r, tup[k]))
    return keys, pts


def fingerprint(s: RFRStructure, mesh=DEFAULT_MESH) -> TypeFingerprint:
    h, tup = s.hull, s.tuple
    dist = tuple(tuple(h.dist(x, y) for y in tup) for x in tup)
    keys, pts = mesh_keys(s, mesh)
    vals = s.pred.eval_matrix(pts)
    items = sorted(((kx, ky), vals[i][j]) for i, kx in enumerate(keys)
                   for j, ky in enumerate(keys))
    return TypeFingerprint(dist, tuple(items), mesh)


@dataclass
class IsoReport:
    equal: bool
    reason: str = ""
    witness: object = None
    gap: object = Fraction(0)

    def __bool__(self):
        return self.equal

    def as_dict(self):
        w = self.witness
        if w is not None:
            w = [[str(t) for t in part] if isinstance(part, tuple) else str(part) for part in w]
        return {"equal": self.equal, "reason": self.reason, "witness": w, "gap": fmt(self.gap)}


def compare_fingerprints(f0: TypeFingerprint, f1: TypeFingerprint, tol=0) -> IsoReport:
    if len(f0.dist) != len(f1.dist):
        return IsoReport(False, "tuple lengths differ")
    for j, (r0, r1) in enumerate(zip(f0.dist, f1.dist)):
        for k, (x, y) in enumerate(zip(r0, r1)):
            if x != y:
                return IsoReport(False, "distance", (j, k), INF if INF in (x, y) else abs(x - y))
    if f0.mesh != f1.mesh:
        raise PreconditionError("fingerprints computed on different meshes")
    gap, wit = Fraction(0), None
    for (k0, v0), (k1, v1) in zip(f0.values, f1.values):
        assert k0 == k1
        if abs(v0 - v1) > gap:
            gap, wit = abs(v0 - v1), k0
    if gap > tol:
        return IsoReport(False, "predicate", wit, gap)
    return IsoReport(True, "", wit, gap)


def pointed_iso_check(s0: RFRStructure, s1: RFRStructure, mesh=DEFAULT_MESH, tol=0) -> IsoReport:
    """Same distance matrix and the same predicate values on the mesh."""
    if len(s0.tuple) != len(s1.tuple):
        raise PreconditionError("tuples have different lengths")
    h0, h1 = s0.hull, s1.hull
    for j in range(len(s0.tuple)):
        for k in range(len(s0.tuple)):
            x, y = h0.dist(s0.tuple[j], s0.tuple[k]), h1.dist(s1.tuple[j], s1.tuple[k])
            if x != y:
                return IsoReport(False, "distance", (j, k), INF if INF in (x, y) else abs(x - y))
    return compare_fingerprints(fingerprint(s0, mesh), fingerprint(s1, mesh), tol)


def sub_tuple(s: RFRStructure, idx) -> RFRStructure:
    return RFRStructure(s.hull, s.pred, [s.tuple[i] for i in idx])


# ---------------------------------------------------------------------------
# independence and the amalgam


def independent(parent, A, B, C) -> bool:
    """<AB> and <AC> meet exactly in <A>."""
    A, B, C = list(A), list(B), list(C)
    left = hull_of(parent, A + B)
    right = hull_of(parent, A + C)
    return left.intersection(right) == hull_of(parent, A)


def _covered(h, A, B, C) -> bool:
    return hull_of(h, A + B).union(hull_of(h, A + C)) == hull_of(h, A + B + C)


def independence_amalgam(base: RFRStructure, C0: RFRStructure, C1: RFRStructure,
                         M, B0, B1, C, mesh=DEFAULT_MESH) -> RFRStructure:
    """Glue ``C0`` (over M B0) and ``C1`` (over M B1) onto ``base`` (over M B0 B1).

    All arguments after the structures are lists of generator labels shared
    between the structures.  The predicate of the result is the
    inf-extension of the three anchor sets; each side is restricted first,
    so the result restricts to each input on its own hull.
    """
    M, B0, B1, C = list(M), list(B0), list(B1), list(C)
    if set(B1) & set(C) or set(B0) & set(C) or set(B0) & set(B1):
        raise PreconditionError("B0, B1 and C must use disjoint labels")
    rb = restrict_structure(base, _pts(M + B0 + B1), M + B0 + B1)
    r0 = restrict_structure(C0, _pts(M + B0 + C), M + B0 + C)
    r1 = restrict_structure(C1, _pts(M + B1 + C), M + B1 + C)
    if not independent(rb.hull, _pts(M), _pts(B0), _pts(B1)):
        raise PreconditionError("B0 and B1 are not independent over M")
    for i, (r, B) in enumerate(((r0, B0), (r1, B1))):
        if not independent(r.hull, _pts(M), _pts(B), _pts(C)):
            raise PreconditionError(f"C{i} is not independent from B{i} over M")
        if not _covered(r.hull, _pts(M), _pts(B), _pts(C)):
            raise PreconditionError(f"<M B{i} C{i}> is not the union of <M B{i}> and <M C{i}>")
        side = _by_labels(r, M + B)
        here = _by_labels(rb, M + B)
        rep = pointed_iso_check(side, here, mesh)
        if not rep:
            raise PreconditionError(f"C{i} disagrees with the base on <M B{i}> ({rep.reason})")
    if not _covered(rb.hull, _pts(M), _pts(B0), _pts(B1)):
        raise PreconditionError("<M B0 B1> is not the union of <M B0> and <M B1>")
    rep = pointed_iso_check(_by_labels(r0, M + C), _by_labels(r1, M + C), mesh)
    if not rep:
        raise PreconditionError(f"C0 and C1 have different types over M ({rep.reason})")

    hull = free_amalgam(rb.hull, r0.hull, M + B0)
    for a in M + B1 + C:
        for b in M + B1 + C:
            if hull.dist(a, b) != r1.hull.dist(a, b):
                raise PreconditionError("C1 does not sit over M the way C0 does")
    anchors = []
    for r in (rb, r0, r1):
        anchors.extend(r.pred.transported(hull, r.hull.generators).anchors)
    pred = AnchorPredicate(hull, anchors, check=False).normalized()
    return RFRStructure(hull, pred, _pts(M + B0 + B1 + C))


def _pts(labels):
    return [V(x) for x in labels]


def _by_labels(s: RFRStructure, labels) -> RFRStructure:
    return RFRStructure(s.hull, s.pred, _pts(labels))


# ---------------------------------------------------------------------------
# paths of 2-types


@dataclass
class PathResult:
    steps: list
    params: list
    rhos: list = field(default_factory=list)
    start: TypeFingerprint = None
    end: TypeFingerprint = None
    K: object = None
    constant: bool = False

    @property
    def max_rho(self):
        return max(self.rhos, default=Fraction(0))

    def as_dict(self):
        return {"params": [fmt(r) for r in self.params],
                "rhos": [fmt(r) for r in self.rhos],
                "maxRho": fmt(self.max_rho), "K": fmt(self.K),
                "constant": self.constant, "steps": len(self.steps)}


def validate_step(s: RFRStructure, eps=None):
    """Metric, tree and Lipschitz checks for one path step; returns (ok, detail)."""
    gm = s.hull.generator_metric()
    rep = check_metric(gm)
    if not rep.valid:
        return False, ("metric", rep.violations[:1])
    ok, quad = is_tree_embeddable(gm)
    if not ok:
        return False, ("tree", quad)
    lip = check_one_one_lipschitz(s, eps)
    if not lip.ok:
        return False, ("lipschitz", lip.witness)
    return True, None


def _split_pair(s: RFRStructure):
    n = len(s.tuple)
    if n < 2:
        raise PreconditionError("the tuple needs the two points b and c at the end")
    return list(range(n - 2)), n - 2, n - 1


def _chain_rhos(steps, coords, point_of, K, max_product):
    """rho_K between consecutive steps, seeded with the coordinate correlation."""
    rhos = []
    prev = None
    for st in steps:
        pts = [point_of(st, c) for c in coords]
        samp = sample_points(st, pts)
        pos = {p: i for i, p in enumerate(samp.points)}
        idx = [pos[p] for p in pts]
        if prev is not None:
            psamp, pidx = prev
            pairs = tuple(sorted(set(zip(pidx, idx))))
            seed = Correlation(pairs, tuple(sorted(set(zip(psamp.pins, samp.pins)))))
            rho, _ = min_distortion(psamp, samp, K, max_product=max_product, incumbent=seed)
            rhos.append(rho)
        prev = (samp, idx)
    return rhos


def _default_K(structures):
    worst = Fraction(0)
    for s in structures:
        for x in s.tuple:
            for y in s.tuple:
                d = s.hull.dist(x, y)
                if d != INF:
                    worst = max(worst, d)
    return Fraction(int(worst) + 1)


def unzip_path(s: RFRStructure, m, K=None, eps=None, max_product=4096,
               compute_rho=True) -> PathResult:
    """Path from an independent pair ``b_0 c_0`` to the given pair ``b c``.

    The last two tuple entries are ``b`` and ``c``; the others form ``A``.
    Step ``k`` separates the branches towards ``b`` and ``c`` at distance
    ``r = k * l / m`` from their common foot ``a`` on ``<A>``, where ``l``
    is the length of the shared stem.  Predicate values are pulled back
    along the map folding the step onto the original.
    """
    if m < 1:
        raise PreconditionError("m must be at least 1")
    A_idx, ib, ic = _split_pair(s)
    res = Restriction(s)
    base = res.structure()
    labels = res.labels
    LA = [labels[i] for i in A_idx]
    lb, lc = labels[ib], labels[ic]
    H = base.hull
    subA = hull_of(H, _pts(LA))
    try:
        a = project(H, V(lb), subA)
        a_c = project(H, V(lc), subA)
    except Unreachable:
        a = a_c = None
    h = INF if a is None else H.dist(a, V(lb))
    hc = INF if a_c is None else H.dist(a_c, V(lc))
    if h != hc or (a is not None and a != a_c):
        raise PreconditionError("b and c have different projections or distances to <A>")
    stem = Fraction(0) if h == INF else h - H.dist(V(lb), V(lc)) / 2
    if stem == 0:
        fp = fingerprint(s)
        return PathResult([s], [Fraction(0)], [], fp, fp, K, constant=True)

    gm = H.generator_metric()

    def step_at(r):
        def dfun(x, y):
            if {x, y} == {lb, lc}:
                return 2 * (h - r)
            return gm.d(x, y)
        Hr = build_hull(FiniteExtendedMetric.from_function(labels, dfun))
        ar = transport(H, a, Hr, LA)
        anchors = []
        for p, q, v in base.pred.anchors:
            for p2, op in _lifts(H, Hr, p, LA, a, ar, lb, lc, h, stem):
                for q2, oq in _lifts(H, Hr, q, LA, a, ar, lb, lc, h, stem):
                    if v + op + oq < 1:
                        anchors.append((p2, q2, v + op + oq))
        pred = AnchorPredicate(Hr, anchors, check=False).normalized()
        return RFRStructure(Hr, pred, _pts(labels)), ar

    params = [stem * Fraction(k, m) for k in range(m + 1)]
    built = [step_at(r) for r in params]
    steps = [b for b, _ in built]
    feet = {id(st): ar for st, ar in built}
    K = Fraction(K) if K is not None else _default_K(steps)
    out = PathResult(steps, params, [], fingerprint(steps[0]), fingerprint(steps[-1]), K)
    if compute_rho:
        eps = Fraction(eps) if eps is not None else max(h, Fraction(1)) / 2
        n_leg = max(1, -(-h // eps))
        legs = sorted(set(params) | {h * Fraction(i, n_leg) for i in range(n_leg + 1)})
        coords = [("A", p) for p in subA.mesh(eps)]
        coords += [(br, u) for br in (lb, lc) for u in legs]

        def point_of(st, coord):
            kind, u = coord
            if kind == "A":
                return transport(H, u, st.hull, LA)
            return interp(st.hull, feet[id(st)], u / h, V(kind))

        out.rhos = _chain_rhos(steps, coords, point_of, K, max_product)
    return out


def _lifts(H, Hr, p, LA, a, ar, lb, lc, h, stem):
    """Points of the step hull whose distances, plus offsets, realise d(phi(x), p)."""
    p = H.ref(p)
    da = H.dist(a, p)
    on_b = H.dist(a, p) + H.dist(p, V(lb)) == h and da > 0
    on_c = H.dist(a, p) + H.dist(p, V(lc)) == h and da > 0
    if not (on_b or on_c):
        return [(transport(H, p, Hr, LA), Fraction(0))]
    out = []
    for here, other in ((lb, lc), (lc, lb)):
        mine = on_b if here == lb else on_c
        if not mine:
            continue
        out.append((interp(Hr, ar, da / h, V(here)), Fraction(0)))
        u = min(da, stem)
        out.append((interp(Hr, ar, u / h, V(other)), da - u))
    return sorted(set(out))


def interpolate_path(q0: RFRStructure, q1: RFRStructure, m, K=None, eps=None,
                     max_product=4096, mesh=DEFAULT_MESH, compute_rho=True) -> PathResult:
    """Convex-combination path between two independent pairs over the same ``A``.

    Both tuples end with their pair ``b, c``; positions correspond.  Step
    ``k`` lives on the hull of ``q0`` with predicate
    ``(1 - r) R_0 + r R_1`` (``R_1`` moved over by the position labels).
    """
    if m < 1:
        raise PreconditionError("m must be at least 1")
    if len(q0.tuple) != len(q1.tuple):
        raise PreconditionError("tuples have different lengths")
    A_idx, ib, ic = _split_pair(q0)
    s0 = restrict_structure(q0)
    labels = Restriction(q0).labels
    s1 = restrict_structure(q1, None, labels)
    for s, name in ((s0, "q0"), (s1, "q1")):
        if not independent(s.hull, s.tuple[:-2], [s.tuple[-2]], [s.tuple[-1]]):
            raise PreconditionError(f"the pair of {name} is not independent over A")
    unary = [sub_tuple(s, A_idx + [i]) for s in (s0, s1) for i in (ib, ic)]
    for u in unary[1:]:
        rep = pointed_iso_check(unary[0], u, mesh)
        if not rep:
            raise PreconditionError(f"the four points do not share one type over A ({rep.reason})")
    if s0.hull.generator_metric() != s1.hull.generator_metric():
        raise PreconditionError("the two pairs sit at different distances from each other")
    H = s0.hull
    P0 = s0.pred
    P1 = s1.pred.transported(H, labels)
    params = [Fraction(k, m) for k in range(m + 1)]
    steps = []
    for r in params:
        pred = MixturePredicate(H, [(1 - r, P0), (r, P1)])
        if len(pred.parts) == 1:
            pred = pred.parts[0][1]
        steps.append(RFRStructure(H, pred, _pts(labels)))
    K = Fraction(K) if K is not None else _default_K(steps)
    out = PathResult(steps, params, [], fingerprint(steps[0], mesh),
                     fingerprint(steps[-1], mesh), K)
    if compute_rho:
        eps = Fraction(eps) if eps is not None else H.length_scale() / 2
        coords = SubHull.whole(H).mesh(eps)
        out.rhos = _chain_rhos(steps, coords, lambda st, p: p, K, max_product)
    return out


# ---------------------------------------------------------------------------
# distances between 1-types, the order witness


def type_distance(h, A, b0, b1):
    """Distance between the types of ``b0`` and ``b1`` over the tuple ``A`` (metric part)."""
    sub = hull_of(h, A)

    def foot(b):
        try:
            p = project(h, b, sub)
        except Unreachable:
            return None, INF
        return p, h.dist(b, p)

    p0, d0 = foot(b0)
    p1, d1 = foot(b1)
    if d0 == INF and d1 == INF:
        return Fraction(0)
    if d0 == INF or d1 == INF:
        return INF
    if p0 == p1:
        return abs(d0 - d1)
    return d0 + h.dist(p0, p1) + d1


def order_witness(n) -> RFRStructure:
    """``2n`` mutually infinitely distant points with ``R(a_i, b_j) = [i >= j]``.

    Pairs inside the a's, inside the b's, and every ``R(b_j, a_i)`` are 0.
    """
    if n < 1:
        raise PreconditionError("n must be at least 1")
    labels = [f"a{i}" for i in range(n)] + [f"b{i}" for i in range(n)]
    metric = FiniteExtendedMetric(labels, [[Fraction(0) if x == y else INF for y in labels]
                                           for x in labels])
    h = build_hull(metric)
    zero = Fraction(0)
    anchors = []
    for x in labels:
        for y in labels:
            if x[0] == "a" and y[0] == "b" and int(x[1:]) >= int(y[1:]):
                continue
            anchors.append((x, y, zero))
    return RFRStructure(h, AnchorPredicate(h, anchors), _pts(labels))
