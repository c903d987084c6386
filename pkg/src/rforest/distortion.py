"""Correlations, truncated distortion and its exact minimisation.

Structures are compared through finite samples (:class:`Sample`): a list of
hull points with their exact distance and predicate matrices plus the
indices of the distinguished tuple.  ``min_distortion`` is a depth-first
branch and bound; ``brute_force_min`` enumerates every relation and is kept
as an independent oracle for small samples.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import PreconditionError, SizeLimitError
from .hull import truncated_hull
from .numbers import IntGrid, clamp, fmt

DEFAULT_MAX_PRODUCT = 1024
BRUTE_FORCE_LIMIT = 20


@dataclass
class Sample:
    points: list
    D: list
    P: list
    pins: list
    hull: object = None

    def __len__(self):
        return len(self.points)


def sample_points(s, points) -> Sample:
    """Sample a structure at explicit points (tuple points are added)."""
    pts = sorted(set(s.hull.ref(p) for p in points) | set(s.tuple))
    D = s.hull.dist_matrix(pts, pts)
    P = s.pred.eval_matrix(pts)
    pos = {p: i for i, p in enumerate(pts)}
    return Sample(pts, D, P, [pos[t] for t in s.tuple], s.hull)


def sample_structure(s, K, eps, extra=()) -> Sample:
    """Mesh of the truncated hull of the tuple, plus tuple and extra points."""
    sub = truncated_hull(s.hull, s.tuple, K)
    return sample_points(s, list(sub.mesh(eps)) + list(extra))


@dataclass(frozen=True)
class Correlation:
    pairs: tuple
    pinned: tuple = ()

    def validate(self, nA, nB):
        left = {a for a, _ in self.pairs}
        right = {b for _, b in self.pairs}
        if left != set(range(nA)) or right != set(range(nB)):
            raise PreconditionError("correlation is not total and surjective")
        for pin in self.pinned:
            if pin not in self.pairs:
                raise PreconditionError(f"pinned pair {pin} missing")
        return self

    def as_dict(self):
        return {"pairs": [list(p) for p in self.pairs],
                "pinned": [list(p) for p in self.pinned]}


@dataclass
class DistortionReport:
    disMetric: object
    disPredicate: object
    dis: object
    witness: object = None
    metricWitness: object = None
    predicateWitness: object = None

    def as_dict(self):
        return {"disMetric": fmt(self.disMetric), "disPredicate": fmt(self.disPredicate),
                "dis": fmt(self.dis),
                "witness": None if self.witness is None else [list(p) for p in self.witness]}


def _pin_pairs(A: Sample, B: Sample):
    if len(A.pins) != len(B.pins):
        raise PreconditionError("tuples have different lengths")
    return tuple(sorted(set(zip(A.pins, B.pins))))


def dis_metric_K(O: Correlation, A: Sample, B: Sample, K):
    """sup |clamp d(a,a') - clamp d(b,b')| over pairs of correlated pairs."""
    best, wit = Fraction(0), None
    for p in O.pairs:
        for q in O.pairs:
            da = clamp(A.D[p[0]][q[0]], 0, K)
            db = clamp(B.D[p[1]][q[1]], 0, K)
            t = abs(da - db)
            if t > best:
                best, wit = t, (p, q)
    return best, wit


def dis_K(O: Correlation, A: Sample, B: Sample, K) -> DistortionReport:
    dm, wm = dis_metric_K(O, A, B, K)
    dp, wp = Fraction(0), None
    for p in O.pairs:
        for q in O.pairs:
            t = abs(A.P[p[0]][q[0]] - B.P[p[1]][q[1]])
            if t > dp:
                dp, wp = t, (p, q)
    dis = max(dm, dp)
    wit = wm if dm >= dp else wp
    if wit is None and O.pairs:
        wit = (O.pairs[0], O.pairs[0])
    return DistortionReport(dm, dp, dis, wit, wm, wp)


def product_metric_distortion(O: Correlation, A: Sample, B: Sample, K):
    """Truncated distortion of the induced pair correlation under the sum metric.

    Pairs of points are compared with ``d(xy, zw) = d(x, z) + d(y, w)``; the
    induced relation pairs ``(a, a')`` with ``(b, b')`` whenever both
    ``(a, b)`` and ``(a', b')`` are in ``O``.  Returns (value, witness) where
    the witness is a pair of index quadruples.  The value never exceeds twice
    the metric distortion of ``O``.
    """
    if not O.pairs:
        return Fraction(0), None
    K = Fraction(K)
    ia = [a for a, _ in O.pairs]
    ib = [b for _, b in O.pairs]
    grid = IntGrid([A.D[i][j] for i in ia for j in ia]
                   + [B.D[i][j] for i in ib for j in ib] + [K])
    k = grid.scaled(K)
    n = len(O.pairs)
    DA = grid.array([A.D[i][j] for i in ia for j in ia], (n, n))
    DB = grid.array([B.D[i][j] for i in ib for j in ib], (n, n))
    # index order [p, p', q, q']: compare (p, p') against (q, q')
    SA = np.minimum(DA[:, None, :, None] + DA[None, :, None, :], k)
    SB = np.minimum(DB[:, None, :, None] + DB[None, :, None, :], k)
    gap = np.abs(SA - SB)
    flat = int(np.argmax(gap))
    p, p2, q, q2 = np.unravel_index(flat, gap.shape)
    wit = ((O.pairs[p], O.pairs[p2]), (O.pairs[q], O.pairs[q2]))
    return Fraction(int(gap.flat[flat]), grid.scale), wit


class CostTable:
    """Exact pair-of-pairs costs as integers.

    Pair ``(a, b)`` has index ``a * nB + b``; ``C[p, q]`` is the larger of the
    clamped metric discrepancy and both predicate discrepancies.
    """

    def __init__(self, A: Sample, B: Sample, K):
        self.nA, self.nB = len(A), len(B)
        dA = [x for r in A.D for x in r]
        dB = [x for r in B.D for x in r]
        pA = [x for r in A.P for x in r]
        pB = [x for r in B.P for x in r]
        K = Fraction(K)
        grid = IntGrid(dA + dB + pA + pB + [K])
        nA, nB = self.nA, self.nB
        k = grid.scaled(K)
        # distances are nonnegative, so clamping to [0, K] is a minimum
        DA = np.minimum(grid.array(dA, (nA, nA)), k)
        DB = np.minimum(grid.array(dB, (nB, nB)), k)
        PA = grid.array(pA, (nA, nA))
        PB = grid.array(pB, (nB, nB))
        met = np.abs(DA[:, None, :, None] - DB[None, :, None, :])
        pr = np.abs(PA[:, None, :, None] - PB[None, :, None, :])
        prT = np.abs(PA.T[:, None, :, None] - PB.T[None, :, None, :])
        C = np.maximum(met, np.maximum(pr, prT))
        self.C = C.reshape(nA * nB, nA * nB)
        self.grid = grid
        # eccentricities for the search order
        self.eccA = DA.max(axis=1) if nA else DA
        self.eccB = DB.max(axis=1) if nB else DB

    def value(self, n):
        return self.grid.value(n)


def _check_sizes(A, B, limit):
    need = len(A) * len(B)
    if need > limit:
        raise SizeLimitError(need, limit)


def _search(table: CostTable, pins, order_a, order_b, bound, first_only):
    """Depth-first search over minimal correlations.

    Every correlation contains the pins plus one partner for each point not
    yet covered, and distortion only grows with the relation, so it is
    enough to search such minimal covers.  Returns (value, pairs) of the best
    cover with value < ``bound`` (or <= when ``first_only``), or None.
    """
    nA, nB = table.nA, table.nB
    C = table.C
    diag = np.diagonal(C).copy()
    n_pairs = nA * nB
    start_row = np.full(n_pairs, -1, dtype=C.dtype) if n_pairs else np.zeros(0, dtype=C.dtype)
    cur = -1
    chosen = []
    for a, b in pins:
        p = a * nB + b
        cur = max(cur, int(diag[p]), int(start_row[p]))
        start_row = np.maximum(start_row, C[:, p])
        chosen.append(p)
    covA = np.zeros(nA, dtype=bool)
    covB = np.zeros(nB, dtype=bool)
    for a, b in pins:
        covA[a] = True
        covB[b] = True
    items = [("a", i) for i in order_a] + [("b", j) for j in order_b]
    best = [bound, None]

    def lower(row, cur, covA, covB):
        T = np.maximum(diag, row).reshape(nA, nB)
        lb = cur
        if (~covA).any():
            lb = max(lb, int(T[~covA].min(axis=1).max()))
        if (~covB).any():
            lb = max(lb, int(T[:, ~covB].min(axis=0).max()))
        return lb

    def beats(v):
        return v <= best[0] if first_only else v < best[0]

    def rec(k, row, cur):
        while k < len(items):
            side, i = items[k]
            if (covA[i] if side == "a" else covB[i]):
                k += 1
                continue
            break
        if k == len(items):
            if beats(cur):
                best[0], best[1] = cur, list(chosen)
                return first_only
            return False
        if not beats(lower(row, cur, covA, covB)):
            return False
        side, i = items[k]
        if side == "a":
            cand = [i * nB + j for j in range(nB)]
        else:
            cand = [j * nB + i for j in range(nA)]
        costs = [max(cur, int(diag[p]), int(row[p])) for p in cand]
        order = range(len(cand)) if first_only else sorted(range(len(cand)),
                                                           key=lambda t: (costs[t], t))
        for t in order:
            c = costs[t]
            if not beats(c):
                continue
            p = cand[t]
            a, b = divmod(p, nB)
            prev = (covA[a], covB[b])
            covA[a] = covB[b] = True
            chosen.append(p)
            done = rec(k + 1, np.maximum(row, C[:, p]), c)
            chosen.pop()
            covA[a], covB[b] = prev
            if done:
                return True
        return False

    rec(0, start_row, cur)
    if best[1] is None:
        return None
    return best[0], best[1]


def min_distortion(A: Sample, B: Sample, K, max_product=DEFAULT_MAX_PRODUCT,
                   incumbent: Correlation | None = None):
    """Exact minimum of dis^K over correlations of the two samples.

    Returns ``(rho, correlation)``.  The correlation is the first optimal
    cover met by a search in plain index order, which makes the result
    independent of the pruning order used to find the optimum.
    """
    _check_sizes(A, B, max_product)
    pins = _pin_pairs(A, B)
    nA, nB = len(A), len(B)
    if nA == 0 or nB == 0:
        if nA == nB:
            return Fraction(0), Correlation((), ())
        raise PreconditionError("no correlation between an empty and a nonempty sample")
    table = CostTable(A, B, K)
    order_a = sorted(range(nA), key=lambda i: (-table.eccA[i], i))
    order_b = sorted(range(nB), key=lambda j: (-table.eccB[j], j))
    bound = table.grid.sentinel * 4
    if incumbent is not None:
        incumbent.validate(nA, nB)
        idx = [a * nB + b for a, b in incumbent.pairs]
        bound = int(table.C[np.ix_(idx, idx)].max()) + 1
    found = _search(table, pins, order_a, order_b, bound, first_only=False)
    if found is None:
        # the incumbent itself is optimal
        found_val = bound - 1
    else:
        found_val = found[0]
    canon = _search(table, pins, list(range(nA)), list(range(nB)), found_val, first_only=True)
    value, chosen = canon
    pairs = tuple(sorted(set(divmod(p, nB) for p in chosen)))
    return table.value(value), Correlation(pairs, pins)


def all_correlations(nA, nB, pins=()):
    """Every total, surjective relation containing the pins, each once."""
    if nA * nB > BRUTE_FORCE_LIMIT:
        raise SizeLimitError(nA * nB, BRUTE_FORCE_LIMIT)
    for mask in _valid_masks(nA, nB, pins):
        yield frozenset(divmod(p, nB) for p in range(nA * nB) if mask >> p & 1)


def _valid_masks(nA, nB, pins):
    P = nA * nB
    masks = np.arange(1 << P, dtype=np.int64)
    ok = np.ones(1 << P, dtype=bool)
    for a in range(nA):
        row = sum(1 << (a * nB + b) for b in range(nB))
        ok &= (masks & row) != 0
    for b in range(nB):
        col = sum(1 << (a * nB + b) for a in range(nA))
        ok &= (masks & col) != 0
    pin = sum(1 << (a * nB + b) for a, b in pins)
    ok &= (masks & pin) == pin
    return [int(m) for m in masks[ok]] if P <= 12 else masks[ok]


def brute_force_min(A: Sample, B: Sample, K):
    """Minimum dis^K over all relations, by exhaustive enumeration.

    Distortion of every one of the 2^(nA*nB) relations is tabulated by
    doubling over the pair bits, then invalid relations are masked out.
    """
    nA, nB = len(A), len(B)
    P = nA * nB
    if P > BRUTE_FORCE_LIMIT:
        raise SizeLimitError(P, BRUTE_FORCE_LIMIT)
    pins = _pin_pairs(A, B)
    if P == 0:
        return Fraction(0), frozenset()
    table = CostTable(A, B, K)
    C = table.C
    dis = np.array([-1], dtype=np.int64)
    for k in range(P):
        row = np.array([-1], dtype=np.int64)
        for q in range(k):
            row = np.concatenate([row, np.maximum(row, C[k, q])])
        new = np.maximum(np.maximum(dis, row), C[k, k])
        dis = np.concatenate([dis, new])
    masks = np.arange(1 << P, dtype=np.int64)
    ok = np.ones(1 << P, dtype=bool)
    for a in range(nA):
        ok &= (masks & sum(1 << (a * nB + b) for b in range(nB))) != 0
    for b in range(nB):
        ok &= (masks & sum(1 << (a * nB + b) for a in range(nA))) != 0
    pin = sum(1 << (a * nB + b) for a, b in pins)
    ok &= (masks & pin) == pin
    if not ok.any():
        raise PreconditionError("no valid correlation")
    vals = np.where(ok, dis, np.iinfo(np.int64).max)
    k = int(np.argmin(vals))
    pairs = frozenset(divmod(p, nB) for p in range(P) if k >> p & 1)
    return table.value(int(vals[k])), pairs
