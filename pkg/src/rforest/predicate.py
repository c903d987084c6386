"""Binary 1-1-Lipschitz predicates given by anchors.

A predicate is the inf-extension of finitely many anchors ``(p, q, v)``::

    R(x, y) = min(1, min_k v_k + d(x, p_k) + d(y, q_k))

which is 1-1-Lipschitz by construction and agrees with every anchor when
the anchors are mutually consistent.  Unary functions use the same shape
with single points.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import InconsistentAnchors, PreconditionError, Unreachable
from .hull import (GENERATOR, ForestHull, PointRef, SubHull, build_hull, free_amalgam,
                   hull_of, interp, project, transport, V)
from .metric import FiniteExtendedMetric
from .numbers import INF, IntGrid, fmt

ONE = Fraction(1)


def _value(v):
    v = Fraction(v)
    if not 0 <= v <= 1:
        raise PreconditionError(f"predicate value {v} outside [0, 1]")
    return v


def _grid_min(values, dx, dy):
    """min(1, min_k values[k] + dx[i, k] + dy[j, k]) for exact inputs.

    ``dx`` and ``dy`` are nested lists of Fractions/INF.  Returns a nested
    list of Fractions.
    """
    nx, ny, m = len(dx), len(dy), len(values)
    if m == 0:
        return [[ONE] * ny for _ in range(nx)]
    flat = list(values) + [ONE]
    for row in dx:
        flat.extend(row)
    for row in dy:
        flat.extend(row)
    grid = IntGrid(flat)
    v = grid.array(values)
    X = grid.array([t for row in dx for t in row], (nx, m))
    Y = grid.array([t for row in dy for t in row], (ny, m))
    one = grid.scale
    out = np.empty((nx, ny), dtype=grid.dtype)
    chunk = max(1, 2_000_000 // max(1, ny * m))
    for i in range(0, nx, chunk):
        block = X[i:i + chunk, None, :] + Y[None, :, :] + v[None, None, :]
        out[i:i + chunk] = block.min(axis=2)
    out = np.minimum(out, one)
    return [[Fraction(int(t), one) for t in row] for row in out]


class AnchorPredicate:
    """Inf-extension of anchors on a host hull."""

    def __init__(self, host: ForestHull, anchors=(), check=True):
        self.host = host
        norm = {}
        for p, q, v in anchors:
            key = (host.ref(p), host.ref(q))
            v = _value(v)
            if key in norm and norm[key] != v:
                if check:
                    raise InconsistentAnchors(key, key, abs(norm[key] - v))
                v = min(v, norm[key])
            norm[key] = v
        self.anchors = tuple(sorted((p, q, v) for (p, q), v in norm.items()))
        if check:
            self._check_consistent()

    def __repr__(self):
        return f"AnchorPredicate({len(self.anchors)} anchors)"

    def __eq__(self, other):
        return (isinstance(other, AnchorPredicate) and self.host == other.host
                and self.anchors == other.anchors)

    def _check_consistent(self):
        m = len(self.anchors)
        if m < 2:
            return
        ps = [a[0] for a in self.anchors]
        qs = [a[1] for a in self.anchors]
        Dp = self.host.dist_matrix(ps, ps)
        Dq = self.host.dist_matrix(qs, qs)
        vals = [a[2] for a in self.anchors]
        grid = IntGrid(vals + [t for r in Dp for t in r] + [t for r in Dq for t in r])
        v = grid.array(vals)
        bound = grid.array([t for r in Dp for t in r], (m, m)) + \
            grid.array([t for r in Dq for t in r], (m, m))
        gap = np.abs(v[:, None] - v[None, :]) - bound
        if (gap > 0).any():
            i, j = np.unravel_index(int(np.argmax(gap)), gap.shape)
            raise InconsistentAnchors(int(i), int(j), grid.value(gap[i, j]))

    def eval(self, x, y):
        h = self.host
        best = ONE
        for p, q, v in self.anchors:
            dp = h.dist(x, p)
            if dp == INF:
                continue
            dq = h.dist(y, q)
            if dq == INF:
                continue
            t = v + dp + dq
            if t < best:
                best = t
        return best

    __call__ = eval

    def eval_matrix(self, xs, ys=None):
        """Exact values on the grid ``xs`` x ``ys``."""
        ys = xs if ys is None else ys
        ps = [a[0] for a in self.anchors]
        qs = [a[1] for a in self.anchors]
        dx = self.host.dist_matrix(xs, ps)
        dy = self.host.dist_matrix(ys, qs)
        return _grid_min([a[2] for a in self.anchors], dx, dy)

    def normalized(self) -> "AnchorPredicate":
        """Same function with every redundant anchor removed.

        Values are first replaced by the function's own value at the anchor
        (never larger), which makes the anchor set consistent; an anchor is
        then dropped when another anchor's cone already reaches it.
        """
        if not self.anchors:
            return self
        ps = [a[0] for a in self.anchors]
        qs = [a[1] for a in self.anchors]
        at = self.eval_matrix_pairs(ps, qs)
        kept = [(p, q, v) for (p, q, _), v in zip(self.anchors, at) if v < 1]
        if len(kept) > 1:
            m = len(kept)
            ps = [a[0] for a in kept]
            qs = [a[1] for a in kept]
            Dp = self.host.dist_matrix(ps, ps)
            Dq = self.host.dist_matrix(qs, qs)
            vals = [a[2] for a in kept]
            grid = IntGrid(vals + [t for r in Dp for t in r] + [t for r in Dq for t in r])
            v = grid.array(vals)
            reach = v[None, :] + grid.array([t for r in Dp for t in r], (m, m)) + \
                grid.array([t for r in Dq for t in r], (m, m))
            np.fill_diagonal(reach, grid.sentinel * 3)
            redundant = (reach <= v[:, None]).any(axis=1)
            kept = [a for a, r in zip(kept, redundant) if not r]
        return AnchorPredicate(self.host, kept, check=False)

    def eval_matrix_pairs(self, xs, ys):
        """Values at the paired points (xs[i], ys[i])."""
        if not xs:
            return []
        ps = [a[0] for a in self.anchors]
        qs = [a[1] for a in self.anchors]
        dx = self.host.dist_matrix(xs, ps)
        dy = self.host.dist_matrix(ys, qs)
        vals = [a[2] for a in self.anchors]
        if not vals:
            return [ONE] * len(xs)
        grid = IntGrid(vals + [ONE] + [t for r in dx for t in r] + [t for r in dy for t in r])
        n, m = len(xs), len(vals)
        tot = grid.array([t for r in dx for t in r], (n, m)) + \
            grid.array([t for r in dy for t in r], (n, m)) + grid.array(vals)[None, :]
        best = np.minimum(tot.min(axis=1), grid.scale)
        return [Fraction(int(t), grid.scale) for t in best]

    def transported(self, dst: ForestHull, gens=None) -> "AnchorPredicate":
        moved = [(transport(self.host, p, dst, gens), transport(self.host, q, dst, gens), v)
                 for p, q, v in self.anchors]
        return AnchorPredicate(dst, moved, check=False)

    def plus(self, extra) -> "AnchorPredicate":
        return AnchorPredicate(self.host, list(self.anchors) + list(extra), check=False)


class LipFunction:
    """Unary inf-extension ``g(x) = min(1, min_k v_k + d(x, p_k))``."""

    def __init__(self, host: ForestHull, anchors=()):
        self.host = host
        best = {}
        for p, v in anchors:
            p = host.ref(p)
            v = Fraction(v)
            if v < 0:
                raise PreconditionError("unary values must be nonnegative")
            if p not in best or v < best[p]:
                best[p] = v
        self.anchors = tuple(sorted(best.items()))

    def __call__(self, x):
        best = ONE
        for p, v in self.anchors:
            d = self.host.dist(x, p)
            if d != INF and v + d < best:
                best = v + d
        return best

    def values(self, xs):
        ps = [a[0] for a in self.anchors]
        dx = self.host.dist_matrix(xs, ps)
        zero = [[Fraction(0)] * len(ps)]
        out = _grid_min([a[1] for a in self.anchors], dx, zero)
        return [row[0] for row in out]


@dataclass
class RFRStructure:
    """A hull, a predicate on it and a distinguished tuple of points."""

    hull: ForestHull
    pred: AnchorPredicate
    tuple: list = field(default_factory=list)

    def __post_init__(self):
        if self.pred.host is not self.hull and self.pred.host != self.hull:
            raise PreconditionError("predicate lives on a different hull")
        self.tuple = [self.hull.ref(p) for p in self.tuple]

    def R(self, x, y):
        return self.pred.eval(x, y)


def eval_predicate(s: RFRStructure, x, y):
    return s.pred.eval(x, y)


@dataclass
class LipReport:
    ok: bool
    worst_slack: object
    witness: object
    n_points: int

    def as_dict(self):
        return {"ok": self.ok, "worst_slack": fmt(self.worst_slack),
                "witness": None if self.witness is None else [str(w) for w in self.witness],
                "n_points": self.n_points}


def lipschitz_report(points, dmat, values) -> LipReport:
    """Check |F(x,y) - F(x',y')| <= d(x,x') + d(y,y') on a point grid.

    By the triangle inequality it is enough to move one coordinate at a
    time, which is what is checked (both coordinates).
    """
    n = len(points)
    if n == 0:
        return LipReport(True, INF, None, 0)
    flat = [t for r in values for t in r] + [t for r in dmat for t in r]
    grid = IntGrid(flat)
    F = grid.array([t for r in values for t in r], (n, n))
    D = grid.array([t for r in dmat for t in r], (n, n))
    finite = D < grid.sentinel
    np.fill_diagonal(finite, False)
    worst = None
    wit = None
    for axis in (0, 1):
        G = F if axis == 0 else F.T
        # G[x, y] vs G[x', y]
        diff = np.abs(G[:, None, :] - G[None, :, :])
        slack = np.where(finite[:, :, None], D[:, :, None] - diff, grid.sentinel)
        k = int(np.argmin(slack))
        i, j, y = np.unravel_index(k, slack.shape)
        s = slack[i, j, y]
        if worst is None or s < worst:
            worst = s
            wit = (points[i], points[j], points[y], "first" if axis == 0 else "second")
    worst_v = grid.value(worst) if worst < grid.sentinel else INF
    if worst_v == INF:
        wit = None
    return LipReport(worst_v == INF or worst_v >= 0, worst_v, wit, n)


def check_one_one_lipschitz(s: RFRStructure, eps=None, points=None) -> LipReport:
    """Verify the 1-1-Lipschitz bound on a mesh of the hull."""
    h = s.hull
    if points is None:
        eps = Fraction(eps) if eps is not None else h.length_scale() / 8
        points = SubHull.whole(h).mesh(eps)
    dmat = h.dist_matrix(points, points)
    vals = s.pred.eval_matrix(points)
    return lipschitz_report(points, dmat, vals)


# ---------------------------------------------------------------------------
# Lipschitz extensions


def mcshane_unary(f_values, O, host: ForestHull) -> LipFunction:
    """g(x) = min(1, min_{(a, b) in O} d(x, a) + f(b)).

    ``f_values`` maps the target-side points b to f(b); ``O`` lists pairs
    (a, b) with a a point of ``host``.  Empty ``O`` gives the constant 1.
    """
    return LipFunction(host, [(a, f_values[b]) for a, b in O])


def bounded_extension(f_pairs, g: LipFunction):
    """Extend f (given on finitely many points) staying close to g.

    Returns ``(h, r)`` with ``r = max |f - g|`` over the given points and
    ``h(x) = min(g(x) + r, min_a clamp(d(x, a) + f(a)))``.
    """
    f_pairs = [(g.host.ref(a), Fraction(v)) for a, v in f_pairs]
    if not f_pairs:
        return g, Fraction(0)
    gv = g.values([a for a, _ in f_pairs])
    r = max(abs(v - w) for (_, v), w in zip(f_pairs, gv))
    shifted = [(p, v + r) for p, v in g.anchors if v + r < 1]
    return LipFunction(g.host, shifted + f_pairs), r


def glue_check(parent: ForestHull, B: SubHull, C: SubHull, f, eps):
    """Certify that ``f`` is 1-Lipschitz on B, on C and across B x C.

    Cross pairs are also checked through the projection chain
    b -> pi_D(b) -> pi_D(c) -> c with D = B n C.
    """
    if B.union(C) != SubHull.whole(parent):
        raise PreconditionError("B and C do not cover the parent hull")
    D = B.intersection(C)
    eps = Fraction(eps)
    bm, cm = B.mesh(eps), C.mesh(eps)
    fb = {p: f(p) for p in set(bm) | set(cm)}

    def lip_on(pts):
        worst = INF
        for i, x in enumerate(pts):
            for y in pts[i + 1:]:
                dxy = parent.dist(x, y)
                if dxy != INF:
                    worst = min(worst, dxy - abs(fb[x] - fb[y]))
        return worst

    side_b, side_c = lip_on(bm), lip_on(cm)
    worst_cross = INF
    chain_ok = True
    proj = {}
    for x in set(bm) | set(cm):
        try:
            proj[x] = project(parent, x, D) if not D.is_empty() else None
        except Unreachable:
            proj[x] = None
    for b in bm:
        for c in cm:
            dbc = parent.dist(b, c)
            if dbc == INF:
                continue
            worst_cross = min(worst_cross, dbc - abs(fb[b] - fb[c]))
            pb, pc = proj[b], proj[c]
            if pb is None or pc is None:
                continue
            legs = parent.dist(b, pb) + parent.dist(pb, pc) + parent.dist(pc, c)
            change = abs(fb[b] - f(pb)) + abs(f(pb) - f(pc)) + abs(f(pc) - fb[c])
            if legs != dbc or change > legs:
                chain_ok = False
    ok = all(w == INF or w >= 0 for w in (side_b, side_c, worst_cross)) and chain_ok
    return {"ok": ok, "side_b_slack": side_b, "side_c_slack": side_c,
            "cross_slack": worst_cross, "chain_ok": chain_ok}


def restriction_gap(R0: AnchorPredicate, R1: AnchorPredicate, base, eps):
    """Max |R0 - R1| over a mesh of the base hull, compared via shared labels."""
    Y0, Y1 = R0.host, R1.host
    X0 = hull_of(Y0, [V(b) for b in base])
    pts0 = X0.mesh(eps)
    pts1 = [transport(Y0, p, Y1, base) for p in pts0]
    v0 = R0.eval_matrix(pts0)
    v1 = R1.eval_matrix(pts1)
    gap = Fraction(0)
    for r0, r1 in zip(v0, v1):
        for a, b in zip(r0, r1):
            gap = max(gap, abs(a - b))
    return gap


def predicate_amalgam(base, S0: RFRStructure, S1: RFRStructure, eps=None, tol=0):
    """Free amalgam of two structures over the hull of shared generators.

    The predicate is the inf-extension of both anchor sets.
    """
    base = list(base)
    eps = Fraction(eps) if eps is not None else max(S0.hull.length_scale(),
                                                    S1.hull.length_scale()) / 8
    if base:
        gap = restriction_gap(S0.pred, S1.pred, base, eps)
        if gap > tol:
            raise PreconditionError(f"predicates disagree on the base by {gap}")
    hull = free_amalgam(S0.hull, S1.hull, base)
    anchors = list(S0.pred.transported(hull).anchors) + list(S1.pred.transported(hull).anchors)
    pred = AnchorPredicate(hull, anchors, check=False).normalized()
    tup = [transport(S0.hull, p, hull) for p in S0.tuple]
    for p in S1.tuple:
        q = transport(S1.hull, p, hull)
        if q not in tup:
            tup.append(q)
    return RFRStructure(hull, pred, tup)


# ---------------------------------------------------------------------------
# restriction to a tuple hull, convex combinations


def point_address(h: ForestHull, p, pts):
    """Write ``p`` as ``pts[i] ⌢ r ⌢ pts[j]``; returns (i, r, j)."""
    p = h.ref(p)
    for i, t in enumerate(pts):
        if h.dist(t, p) == 0:
            return i, Fraction(0), i
    for i, t in enumerate(pts):
        dt = h.dist(t, p)
        if dt == INF:
            continue
        for j in range(i + 1, len(pts)):
            D = h.dist(t, pts[j])
            if D != INF and dt + h.dist(p, pts[j]) == D:
                return i, dt / D, j
    raise PreconditionError(f"{p} is not in the hull of the given points")


def tuple_labels(s: RFRStructure, points=None):
    """Generator labels for tuple points, ``t{i}`` for the others."""
    points = s.tuple if points is None else points
    out = []
    for i, p in enumerate(points):
        p = s.hull.ref(p)
        name = p.vertex if p.kind == "v" and s.hull.kinds[p.vertex] == GENERATOR else f"t{i}"
        while name in out:
            name = f"{name}'"
        out.append(name)
    return out


class Restriction:
    """The hull of some points of a structure, rebuilt with those points as generators."""

    def __init__(self, s: RFRStructure, points=None, labels=None):
        self.source = s
        self.points = [s.hull.ref(p) for p in (s.tuple if points is None else points)]
        self.labels = list(labels) if labels is not None else tuple_labels(s, self.points)
        if len(set(self.points)) != len(self.points):
            raise PreconditionError("restriction points must be distinct")
        h = s.hull
        metric = FiniteExtendedMetric(self.labels, h.dist_matrix(self.points, self.points))
        self.hull = build_hull(metric)
        self.sub = hull_of(h, self.points)

    def carry(self, p) -> PointRef:
        """Image in the rebuilt hull of a point of the sub-hull."""
        i, r, j = point_address(self.source.hull, p, self.points)
        if i == j:
            return V(self.labels[i])
        return interp(self.hull, V(self.labels[i]), r, V(self.labels[j]))

    def anchors(self):
        """Source anchors projected onto the sub-hull, values lifted by the distances."""
        h = self.source.hull
        out = []
        for p, q, v in self.source.pred.anchors:
            try:
                pp = project(h, p, self.sub)
                pq = project(h, q, self.sub)
            except Unreachable:
                continue
            w = v + h.dist(p, pp) + h.dist(q, pq)
            if w < 1:
                out.append((self.carry(pp), self.carry(pq), w))
        return out

    def structure(self) -> RFRStructure:
        pred = AnchorPredicate(self.hull, self.anchors(), check=False).normalized()
        return RFRStructure(self.hull, pred, [V(x) for x in self.labels])


def restrict_structure(s: RFRStructure, points=None, labels=None) -> RFRStructure:
    return Restriction(s, points, labels).structure()


class MixturePredicate:
    """Convex combination of predicates on one host (1-1-Lipschitz again)."""

    def __init__(self, host, parts):
        parts = [(Fraction(w), p) for w, p in parts if w != 0]
        if any(w < 0 for w, _ in parts) or sum(w for w, _ in parts) != 1:
            raise PreconditionError("mixture weights must be nonnegative and sum to 1")
        for _, p in parts:
            if p.host != host:
                raise PreconditionError("mixture parts live on different hulls")
        self.host = host
        self.parts = parts

    def __repr__(self):
        return f"MixturePredicate({[str(w) for w, _ in self.parts]})"

    @property
    def anchors(self):
        if len(self.parts) == 1:
            return self.parts[0][1].anchors
        raise PreconditionError("a proper mixture has no single anchor list")

    def eval(self, x, y):
        return sum((w * p.eval(x, y) for w, p in self.parts), Fraction(0))

    __call__ = eval

    def eval_matrix(self, xs, ys=None):
        ys = xs if ys is None else ys
        out = [[Fraction(0)] * len(ys) for _ in xs]
        for w, p in self.parts:
            for row, prow in zip(out, p.eval_matrix(xs, ys)):
                for j, v in enumerate(prow):
                    row[j] += w * v
        return out

    def eval_matrix_pairs(self, xs, ys):
        out = [Fraction(0)] * len(xs)
        for w, p in self.parts:
            for i, v in enumerate(p.eval_matrix_pairs(xs, ys)):
                out[i] += w * v
        return out

    def transported(self, dst, gens=None):
        return MixturePredicate(dst, [(w, p.transported(dst, gens)) for w, p in self.parts])

    def as_dict(self):
        return {"mixture": [{"weight": fmt(w), "anchors": len(p.anchors)} for w, p in self.parts]}
