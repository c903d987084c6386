"""Explicit finite hulls of tree-embeddable metrics.

A :class:`ForestHull` is a weighted forest whose leaves are generators; it
realises the smallest R-forest containing a finite set of points.  Points on
the hull are addressed by :class:`PointRef` (a vertex, or an interior point
of an edge).  :class:`SubHull` is a finite union of closed edge intervals
plus vertices, which is enough to describe segments, truncated hulls and
their intersections exactly.
"""
from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import PreconditionError, StructuralError, Unreachable
from .metric import FiniteExtendedMetric, check_metric, is_tree_embeddable
from .errors import NotTreeEmbeddable
from .numbers import INF, IntGrid, add, to_value

GENERATOR = "generator"
STEINER = "steiner"
STEINER_PREFIX = "~s"


@dataclass(frozen=True, order=True)
class PointRef:
    """A vertex (``kind == "v"``) or an interior edge point (``kind == "e"``)."""

    kind: str
    vertex: str = ""
    edge: int = -1
    offset: Fraction = Fraction(0)

    def __repr__(self):
        if self.kind == "v":
            return f"V({self.vertex})"
        return f"E({self.edge}@{self.offset})"


def V(vid) -> PointRef:
    return PointRef("v", str(vid))


def E(edge, offset) -> PointRef:
    return PointRef("e", "", int(edge), Fraction(offset))


class ForestHull:
    """Canonically ordered weighted forest.

    ``vertices`` maps id -> kind.  ``edges`` is a list of ``(a, b, length)``
    with ``a < b``; edge ids used by :class:`PointRef` are positions in the
    sorted edge list.
    """

    def __init__(self, vertices, edges):
        kinds = dict(vertices)
        for v, k in kinds.items():
            if k not in (GENERATOR, STEINER):
                raise StructuralError(f"unknown vertex kind {k!r}")
        norm = []
        for a, b, L in edges:
            a, b, L = str(a), str(b), to_value(L)
            if a not in kinds or b not in kinds:
                raise StructuralError(f"edge ({a},{b}) uses an unknown vertex")
            if a == b or L == INF or not L > 0:
                raise StructuralError(f"bad edge ({a},{b},{L})")
            norm.append((min(a, b), max(a, b), L))
        norm.sort(key=lambda e: (e[0], e[1]))
        for i in range(1, len(norm)):
            if norm[i][:2] == norm[i - 1][:2]:
                raise StructuralError("parallel edges")
        self.kinds = kinds
        self.vertices = tuple(sorted(kinds))
        self.edges = tuple(norm)
        self.adj = {v: [] for v in self.vertices}
        for i, (a, b, L) in enumerate(self.edges):
            self.adj[a].append((b, i))
            self.adj[b].append((a, i))
        self._index_components()
        self._all_pairs()
        self._dcache = {}
        self._vgrid = None

    # -- construction helpers -------------------------------------------
    def _index_components(self):
        comp = {}
        blocks = []
        for v in self.vertices:
            if v in comp:
                continue
            block = [v]
            comp[v] = -1
            queue = deque([v])
            while queue:
                u = queue.popleft()
                for w, _ in self.adj[u]:
                    if w not in comp:
                        comp[w] = -1
                        block.append(w)
                        queue.append(w)
            blocks.append(block)
        n_edges = sum(len(b) - 1 for b in blocks)
        if n_edges != len(self.edges):
            raise StructuralError("edge graph has a cycle")

        def key(block):
            gens = [v for v in block if self.kinds[v] == GENERATOR]
            return (0, min(gens)) if gens else (1, min(block))

        blocks.sort(key=key)
        for c, block in enumerate(blocks):
            for v in block:
                comp[v] = c
        self.comp = comp
        self.n_components = len(blocks)

    def _all_pairs(self):
        self._D = {}
        self._parent = {}
        for s in self.vertices:
            dist = {s: Fraction(0)}
            parent = {s: None}
            queue = deque([s])
            while queue:
                u = queue.popleft()
                for w, e in self.adj[u]:
                    if w not in dist:
                        dist[w] = dist[u] + self.edges[e][2]
                        parent[w] = u
                        queue.append(w)
            self._D[s] = dist
            self._parent[s] = parent

    # -- basic queries ----------------------------------------------------
    def __eq__(self, other):
        return (isinstance(other, ForestHull) and self.kinds == other.kinds
                and self.edges == other.edges)

    def __hash__(self):
        return hash((tuple(sorted(self.kinds.items())), self.edges))

    def __repr__(self):
        return f"ForestHull({len(self.vertices)} vertices, {len(self.edges)} edges)"

    @property
    def generators(self):
        return tuple(v for v in self.vertices if self.kinds[v] == GENERATOR)

    @property
    def steiners(self):
        return tuple(v for v in self.vertices if self.kinds[v] == STEINER)

    def degree(self, v):
        return len(self.adj[v])

    def vdist(self, u, v):
        return self._D[u].get(v, INF)

    def ref(self, p) -> PointRef:
        """Accept a PointRef or a vertex label; validate it."""
        if isinstance(p, PointRef):
            if p.kind == "v":
                if p.vertex not in self.kinds:
                    raise PreconditionError(f"dangling vertex {p.vertex!r}")
                return p
            if not 0 <= p.edge < len(self.edges):
                raise PreconditionError(f"dangling edge {p.edge}")
            L = self.edges[p.edge][2]
            if not 0 < p.offset < L:
                return self.point(p.edge, p.offset)
            return p
        return self.ref(V(p))

    def point(self, edge, offset) -> PointRef:
        """Normalised reference to the point at ``offset`` from the edge's first end."""
        a, b, L = self.edges[edge]
        offset = Fraction(offset)
        if offset == 0:
            return V(a)
        if offset == L:
            return V(b)
        if not 0 < offset < L:
            raise PreconditionError(f"offset {offset} outside edge {edge} of length {L}")
        return E(edge, offset)

    def ends(self, p):
        """Vertices bounding the cell of ``p`` with their distances to ``p``."""
        if p.kind == "v":
            return [(p.vertex, Fraction(0))]
        a, b, L = self.edges[p.edge]
        return [(a, p.offset), (b, L - p.offset)]

    def edges_of(self, p):
        if p.kind == "v":
            return {e for _, e in self.adj[p.vertex]}
        return {p.edge}

    def position(self, p, edge):
        """Offset of ``p`` along ``edge`` (``p`` must lie on its closure)."""
        a, b, L = self.edges[edge]
        if p.kind == "e":
            return p.offset
        return Fraction(0) if p.vertex == a else L

    def component(self, p) -> int:
        p = self.ref(p)
        if p.kind == "v":
            return self.comp[p.vertex]
        return self.comp[self.edges[p.edge][0]]

    def dist(self, p, q):
        key = (p, q)
        hit = self._dcache.get(key)
        if hit is not None:
            return hit
        out = self._dist(p, q)
        if len(self._dcache) < 500_000:
            self._dcache[key] = out
        return out

    def dist_matrix(self, xs, ys):
        """All distances between two point lists (vectorised, exact)."""
        xs = [self.ref(p) for p in xs]
        ys = [self.ref(p) for p in ys]
        if not xs or not ys:
            return [[] for _ in xs]
        if len(xs) * len(ys) < 16:
            return [[self.dist(x, y) for y in ys] for x in xs]
        grid, Dv = self._vertex_grid()
        pos = self._vpos

        def ends(pts):
            u = np.empty((len(pts), 2), dtype=np.int64)
            off = []
            for i, p in enumerate(pts):
                e = self.ends(p)
                if len(e) == 1:
                    e = e * 2
                u[i] = (pos[e[0][0]], pos[e[1][0]])
                off.extend((e[0][1], e[1][1]))
            return u, off

        xu, xo = ends(xs)
        yu, yo = ends(ys)
        dens = {o.denominator for o in xo} | {o.denominator for o in yo}
        scale = grid.scale
        for d in dens:
            scale = math.lcm(scale, d)
        f = scale // grid.scale
        top = max([grid.sentinel * f] + [o.numerator * (scale // o.denominator) for o in xo + yo])
        big = 3 * top + 1
        if big >= 2 ** 62:
            return [[self.dist(x, y) for y in ys] for x in xs]
        D = np.where(Dv >= grid.sentinel, big, Dv * f)
        xo = np.array([o.numerator * (scale // o.denominator) for o in xo],
                      dtype=np.int64).reshape(-1, 2)
        yo = np.array([o.numerator * (scale // o.denominator) for o in yo],
                      dtype=np.int64).reshape(-1, 2)
        best = None
        for i in range(2):
            for j in range(2):
                t = xo[:, i, None] + D[np.ix_(xu[:, i], yu[:, j])] + yo[None, :, j]
                best = t if best is None else np.minimum(best, t)
        # two interior points of one edge
        xe = np.array([p.edge if p.kind == "e" else -1 for p in xs])
        ye = np.array([p.edge if p.kind == "e" else -2 for p in ys])
        same = xe[:, None] == ye[None, :]
        if same.any():
            direct = np.abs(xo[:, 0, None] - yo[None, :, 0])
            best = np.where(same, np.minimum(best, direct), best)
        out = []
        for row in best.tolist():
            out.append([INF if v >= big else Fraction(v, scale) for v in row])
        return out

    def _vertex_grid(self):
        if self._vgrid is None:
            self._vpos = {v: i for i, v in enumerate(self.vertices)}
            vals = [self._D[u].get(v, INF) for u in self.vertices for v in self.vertices]
            grid = IntGrid(vals)
            n = len(self.vertices)
            self._vgrid = (grid, grid.array(vals, (n, n)))
        return self._vgrid

    def _dist(self, p, q):
        p, q = self.ref(p), self.ref(q)
        if p == q:
            return Fraction(0)
        if p.kind == "e" and q.kind == "e" and p.edge == q.edge:
            return abs(p.offset - q.offset)
        best = INF
        for u, du in self.ends(p):
            Du = self._D[u]
            for v, dv in self.ends(q):
                if v in Du:
                    c = du + Du[v] + dv
                    if c < best:
                        best = c
        return best

    d = dist

    def vertex_path(self, u, v):
        parent = self._parent[u]
        if v not in parent:
            raise Unreachable(f"{u} and {v} are in different components")
        path = [v]
        while path[-1] != u:
            path.append(parent[path[-1]])
        return path[::-1]

    def route(self, p, q):
        """Waypoints along [p, q]; consecutive ones share an edge."""
        p, q = self.ref(p), self.ref(q)
        if p == q:
            return [p]
        if self.edges_of(p) & self.edges_of(q):
            return [p, q]
        best = None
        for u, du in self.ends(p):
            for v, dv in self.ends(q):
                c = add(du, self.vdist(u, v), dv)
                if c != INF and (best is None or c < best[0]):
                    best = (c, u, v)
        if best is None:
            raise Unreachable("points lie in different components")
        _, u, v = best
        out = [p]
        for x in self.vertex_path(u, v):
            r = V(x)
            if r != out[-1]:
                out.append(r)
        if out[-1] != q:
            out.append(q)
        return out

    def _along(self, p, q, t):
        """Point at distance ``t`` from ``p`` towards ``q`` on their shared edge."""
        if t == 0:
            return p
        (e,) = tuple(self.edges_of(p) & self.edges_of(q))[:1]
        pp, pq = self.position(p, e), self.position(q, e)
        return self.point(e, pp + t if pq > pp else pp - t)

    def locate(self, p, q, t):
        """The point of [p, q] at distance ``t`` from ``p``."""
        wp = self.route(p, q)
        for u, w in zip(wp, wp[1:]):
            seg = self.dist(u, w)
            if t <= seg:
                return self._along(u, w, t)
            t -= seg
        if t == 0:
            return wp[-1]
        raise PreconditionError("distance beyond the end of the segment")

    def generator_metric(self) -> FiniteExtendedMetric:
        g = self.generators
        return FiniteExtendedMetric(g, [[self.vdist(x, y) for y in g] for x in g])

    def all_points(self, eps):
        return SubHull.whole(self).mesh(eps)

    def length_scale(self):
        """Largest edge length (1 for an edgeless hull)."""
        return max((L for _, _, L in self.edges), default=Fraction(1))

    # -- serialisation ----------------------------------------------------
    def as_dict(self):
        return {
            "vertices": [{"id": v, "kind": self.kinds[v]} for v in self.vertices],
            "edges": [{"a": a, "b": b, "len": str(L)} for a, b, L in self.edges],
        }

    @classmethod
    def from_dict(cls, data):
        try:
            verts = {str(v["id"]): v["kind"] for v in data["vertices"]}
            edges = [(e["a"], e["b"], e["len"]) for e in data["edges"]]
        except (KeyError, TypeError) as exc:
            raise StructuralError(f"bad hull JSON: {exc}") from exc
        return cls(verts, edges)


# ---------------------------------------------------------------------------
# canonical form and construction


def canonical_form(kinds, edges) -> ForestHull:
    """Prune non-generator leaves, suppress degree-2 steiner vertices and
    rename steiner vertices canonically.

    Steiner names are assigned in order of (component, distances to the
    component's generators), which makes the result independent of how the
    forest was produced.
    """
    kinds = dict(kinds)
    adj = {v: {} for v in kinds}
    for a, b, L in edges:
        L = to_value(L)
        adj[a][b] = L
        adj[b][a] = L

    def drop(v):
        for w in adj.pop(v):
            del adj[w][v]
        del kinds[v]

    changed = True
    while changed:
        changed = False
        for v in list(adj):
            if v in adj and kinds[v] == STEINER and len(adj[v]) <= 1:
                drop(v)
                changed = True
        for v in list(adj):
            if v in adj and kinds[v] == STEINER and len(adj[v]) == 2:
                (x, lx), (y, ly) = adj[v].items()
                drop(v)
                adj[x][y] = lx + ly
                adj[y][x] = lx + ly
                changed = True

    tmp = ForestHull(kinds, [(a, b, L) for a in adj for b, L in adj[a].items() if a < b])
    gens_by_comp = {}
    for g in tmp.generators:
        gens_by_comp.setdefault(tmp.comp[g], []).append(g)
    keyed = sorted(
        ((tmp.comp[s], tuple(tmp.vdist(s, g) for g in gens_by_comp.get(tmp.comp[s], ()))), s)
        for s in tmp.steiners)
    rename = {s: f"{STEINER_PREFIX}{i}" for i, (_, s) in enumerate(keyed)}
    new_kinds = {rename.get(v, v): k for v, k in kinds.items()}
    new_edges = [(rename.get(a, a), rename.get(b, b), L) for a, b, L in tmp.edges]
    return ForestHull(new_kinds, new_edges)


def gromov_product(space: FiniteExtendedMetric, x, y, z):
    """(d(z,x) + d(z,y) - d(x,y)) / 2."""
    dzx, dzy, dxy = space.d(z, x), space.d(z, y), space.d(x, y)
    if INF in (dzx, dzy, dxy):
        raise PreconditionError("gromov product needs finite distances")
    return (dzx + dzy - dxy) / 2


def build_hull(space: FiniteExtendedMetric) -> ForestHull:
    """Incrementally attach each generator at its Gromov-product point.

    The result is canonical, so the insertion order does not matter.
    """
    rep = check_metric(space)
    if not rep.valid:
        raise PreconditionError(f"not a metric: {rep.violations[:3]}")
    ok, quad = is_tree_embeddable(space)
    if not ok:
        raise NotTreeEmbeddable(quad)
    for x in space.labels:
        if x.startswith(STEINER_PREFIX):
            raise StructuralError(f"label {x!r} clashes with steiner names")

    kinds = {}
    adj = {}
    fresh = iter(range(10**9))

    def path(u, v):
        parent = {u: None}
        queue = deque([u])
        while queue:
            a = queue.popleft()
            if a == v:
                break
            for b in adj[a]:
                if b not in parent:
                    parent[b] = a
                    queue.append(b)
        out = [v]
        while out[-1] != u:
            out.append(parent[out[-1]])
        return out[::-1]

    def split(u, v, t):
        """Insert a vertex on edge (u, v) at distance t from u."""
        L = adj[u][v]
        s = f"{STEINER_PREFIX}t{next(fresh)}"
        kinds[s] = STEINER
        del adj[u][v], adj[v][u]
        adj[s] = {u: t, v: L - t}
        adj[u][s] = t
        adj[v][s] = L - t
        return s

    def rename(old, new):
        adj[new] = adj.pop(old)
        for w in adj[new]:
            adj[w][new] = adj[w].pop(old)
        del kinds[old]

    done = []
    for x in space.labels:
        prev = [g for g in done if space.d(x, g) != INF]
        done.append(x)
        if not prev:
            kinds[x] = GENERATOR
            adj[x] = {}
            continue
        best = (space.d(x, prev[0]), prev[0], prev[0])
        for i, g in enumerate(prev):
            for g2 in prev[i + 1:]:
                h = gromov_product(space, g, g2, x)
                if h < best[0]:
                    best = (h, g, g2)
        h, g, g2 = best
        t = space.d(x, g) - h
        # walk [g, g2] to distance t
        p = None
        walk = path(g, g2)
        for u, v in zip(walk, walk[1:]):
            L = adj[u][v]
            if t == 0:
                p = u
                break
            if t < L:
                p = split(u, v, t)
                break
            t -= L
        if p is None:
            p = walk[-1]
        if h == 0:
            if kinds[p] == GENERATOR:
                raise PreconditionError(f"{x} coincides with {p}")
            rename(p, x)
            kinds[x] = GENERATOR
        else:
            kinds[x] = GENERATOR
            adj[x] = {p: h}
            adj[p][x] = h
    edges = [(a, b, L) for a in adj for b, L in adj[a].items() if a < b]
    return canonical_form(kinds, edges)


def interp(h: ForestHull, a, r, b) -> PointRef:
    """The point of [a, b] at distance r * d(a, b) from a."""
    r = Fraction(r)
    if not 0 <= r <= 1:
        raise PreconditionError(f"interpolation parameter {r} outside [0, 1]")
    D = h.dist(a, b)
    if D == INF:
        raise PreconditionError("interpolation between points at infinite distance")
    return h.locate(h.ref(a), h.ref(b), r * D)


def hull_distance(h: ForestHull, p, q):
    return h.dist(p, q)


# ---------------------------------------------------------------------------
# sub-hulls


class SubHull:
    """A closed subset of a hull: edge intervals plus vertices."""

    def __init__(self, parent: ForestHull, intervals=None, vertices=()):
        self.parent = parent
        verts = set(vertices)
        out = {}
        for e, ivs in (intervals or {}).items():
            a, b, L = parent.edges[e]
            merged = []
            for lo, hi in sorted((Fraction(lo), Fraction(hi)) for lo, hi in ivs):
                if not 0 <= lo <= hi <= L:
                    raise PreconditionError(f"interval [{lo},{hi}] off edge {e}")
                if merged and lo <= merged[-1][1]:
                    merged[-1] = (merged[-1][0], max(hi, merged[-1][1]))
                else:
                    merged.append((lo, hi))
            keep = []
            for lo, hi in merged:
                if lo == 0:
                    verts.add(a)
                if hi == L:
                    verts.add(b)
                if lo == hi and lo in (0, L):
                    continue
                keep.append((lo, hi))
            if keep:
                out[e] = tuple(keep)
        self.intervals = out
        self.vertices = frozenset(verts)

    @classmethod
    def whole(cls, h):
        return cls(h, {e: [(0, L)] for e, (_, _, L) in enumerate(h.edges)}, h.vertices)

    @classmethod
    def of_point(cls, h, p):
        p = h.ref(p)
        if p.kind == "v":
            return cls(h, {}, {p.vertex})
        return cls(h, {p.edge: [(p.offset, p.offset)]})

    def _key(self):
        return (tuple(sorted(self.intervals.items())), tuple(sorted(self.vertices)))

    def __eq__(self, other):
        return isinstance(other, SubHull) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"SubHull(vertices={sorted(self.vertices)}, intervals={self.intervals})"

    def is_empty(self):
        return not self.vertices and not self.intervals

    def contains(self, p) -> bool:
        p = self.parent.ref(p)
        if p.kind == "v":
            return p.vertex in self.vertices
        return any(lo <= p.offset <= hi for lo, hi in self.intervals.get(p.edge, ()))

    def union(self, other) -> "SubHull":
        ivs = {e: list(v) for e, v in self.intervals.items()}
        for e, v in other.intervals.items():
            ivs.setdefault(e, []).extend(v)
        return SubHull(self.parent, ivs, self.vertices | other.vertices)

    def intersection(self, other) -> "SubHull":
        ivs = {}
        for e, mine in self.intervals.items():
            for lo, hi in mine:
                for lo2, hi2 in other.intervals.get(e, ()):
                    a, b = max(lo, lo2), min(hi, hi2)
                    if a <= b:
                        ivs.setdefault(e, []).append((a, b))
        return SubHull(self.parent, ivs, self.vertices & other.vertices)

    def mesh(self, eps):
        """Vertices, interval ends and evenly spaced points at spacing <= eps."""
        eps = Fraction(eps)
        if eps <= 0:
            raise PreconditionError("mesh spacing must be positive")
        pts = {V(v) for v in self.vertices}
        for e, ivs in self.intervals.items():
            for lo, hi in ivs:
                n = max(1, math.ceil((hi - lo) / eps)) if hi > lo else 1
                for k in range(n + 1):
                    pts.add(self.parent.point(e, lo + (hi - lo) * k / n))
        return sorted(pts)

    def total_length(self):
        return sum((hi - lo for ivs in self.intervals.values() for lo, hi in ivs),
                   Fraction(0))

    def as_dict(self):
        return {
            "vertices": sorted(self.vertices),
            "intervals": [{"edge": e, "lo": str(lo), "hi": str(hi)}
                          for e in sorted(self.intervals) for lo, hi in self.intervals[e]],
        }


def segment(h: ForestHull, p, q) -> SubHull:
    """The geodesic segment [p, q] as a sub-hull."""
    wp = h.route(p, q)
    if len(wp) == 1:
        return SubHull.of_point(h, wp[0])
    ivs = {}
    verts = set()
    for u, w in zip(wp, wp[1:]):
        (e,) = tuple(h.edges_of(u) & h.edges_of(w))[:1]
        a, b = h.position(u, e), h.position(w, e)
        ivs.setdefault(e, []).append((min(a, b), max(a, b)))
    for u in wp:
        if u.kind == "v":
            verts.add(u.vertex)
    return SubHull(h, ivs, verts)


def truncated_hull(h: ForestHull, tup, K=INF) -> SubHull:
    """Union of the segments [a_j, a_k] with d(a_j, a_k) < K (j = k included)."""
    if K != INF and not K > 0:
        raise PreconditionError("K must be positive")
    pts = [h.ref(p) for p in tup]
    out = SubHull(h)
    for j, p in enumerate(pts):
        for q in pts[j:]:
            if h.dist(p, q) < K:
                out = out.union(segment(h, p, q))
    return out


def hull_of(h: ForestHull, tup) -> SubHull:
    return truncated_hull(h, tup, INF)


def project(h: ForestHull, p, sub: SubHull):
    """Nearest point of ``sub`` to ``p`` (unique when ``sub`` is segment closed)."""
    p = h.ref(p)
    cands = []
    for v in sub.vertices:
        cands.append((h.dist(p, V(v)), V(v)))
    p_edges = h.edges_of(p)
    for e, ivs in sub.intervals.items():
        a, b, L = h.edges[e]
        for lo, hi in ivs:
            if e in p_edges:
                o = min(max(h.position(p, e), lo), hi)
            else:
                o = lo if h.dist(p, V(a)) < h.dist(p, V(b)) else hi
            q = h.point(e, o)
            cands.append((h.dist(p, q), q))
    cands = [c for c in cands if c[0] != INF]
    if not cands:
        raise Unreachable("every point of the sub-hull is at infinite distance")
    return min(cands)[1]


def distance_to(h: ForestHull, p, sub: SubHull):
    try:
        return h.dist(p, project(h, p, sub))
    except Unreachable:
        return INF


def hull_intersection(parent: ForestHull, s0: SubHull, s1: SubHull) -> SubHull:
    return s0.intersection(s1)


def is_large(K, space, tup) -> bool:
    """K >= 1 and every finite distance in the tuple is < K."""
    if K < 1:
        return False
    for i, x in enumerate(tup):
        for y in tup[i + 1:]:
            dxy = space.d(x, y)
            if dxy != INF and not dxy < K:
                return False
    return True


# ---------------------------------------------------------------------------
# moving points between hulls that share generators


def address(h: ForestHull, p, gens=None):
    """Write ``p`` as ``g ⌢ r ⌢ g2`` for generators g, g2 of ``h``."""
    p = h.ref(p)
    gens = h.generators if gens is None else tuple(gens)
    if p.kind == "v" and p.vertex in gens:
        return p.vertex, Fraction(0), p.vertex
    for i, g in enumerate(gens):
        dg = h.dist(g, p)
        if dg == INF:
            continue
        for g2 in gens[i:]:
            D = h.dist(g, g2)
            if D != INF and dg + h.dist(p, g2) == D and D > 0:
                return g, dg / D, g2
    raise PreconditionError(f"{p} is not in the hull of the given generators")


def transport(src: ForestHull, p, dst: ForestHull, gens=None) -> PointRef:
    """Image of ``p`` under the isometry fixing the shared generators."""
    g, r, g2 = address(src, p, gens)
    return interp(dst, V(g), r, V(g2))


def amalgam_distance(Y0: ForestHull, Y1: ForestHull, base, p0, p1):
    """Cross distance in the free amalgam via projections onto the base hull."""
    X0 = hull_of(Y0, [V(b) for b in base])
    X1 = hull_of(Y1, [V(b) for b in base])
    if X0.is_empty():
        return INF
    try:
        q0 = project(Y0, p0, X0)
        q1 = project(Y1, p1, X1)
    except Unreachable:
        return INF
    q0_in_1 = transport(Y0, q0, Y1, base)
    return add(Y0.dist(p0, q0), Y1.dist(q0_in_1, q1), Y1.dist(q1, p1))


def free_amalgam(Y0: ForestHull, Y1: ForestHull, base) -> ForestHull:
    """Glue Y0 and Y1 along the hull of the shared generator labels ``base``."""
    base = list(base)
    for b in base:
        if b not in Y0.generators or b not in Y1.generators:
            raise PreconditionError(f"base label {b!r} is not a generator of both sides")
    for i, b in enumerate(base):
        for c in base[i:]:
            if Y0.dist(b, c) != Y1.dist(b, c):
                raise PreconditionError(f"base embeddings not isometric at ({b},{c})")
    only0 = [g for g in Y0.generators if g not in base]
    only1 = [g for g in Y1.generators if g not in base]
    if set(only0) & set(only1):
        raise PreconditionError("non-base generators must be disjoint; relabel first")
    labels = base + only0 + only1
    side = {g: 0 for g in only0}
    side.update({g: 1 for g in only1})

    def dfun(x, y):
        sx, sy = side.get(x), side.get(y)
        if sx is None and sy is None:
            return Y0.dist(x, y)
        if sx != 1 and sy != 1:
            return Y0.dist(x, y)
        if sx != 0 and sy != 0:
            return Y1.dist(x, y)
        if sx == 0:
            return amalgam_distance(Y0, Y1, base, V(x), V(y))
        return amalgam_distance(Y0, Y1, base, V(y), V(x))

    return build_hull(FiniteExtendedMetric.from_function(labels, dfun))


# ---------------------------------------------------------------------------
# random fixtures


def random_tree_edges(rng, n_generators, length_scale=Fraction(1), prefix="g", start=0,
                      denominator=4):
    """Random explicit tree with ``n_generators`` generator nodes."""
    n_nodes = n_generators + rng.randint(0, n_generators)
    names = [f"~n{start}_{i}" for i in range(n_nodes)]
    edges = []
    for i in range(1, n_nodes):
        parent = rng.randrange(i)
        L = Fraction(rng.randint(1, 2 * denominator), denominator) * length_scale
        edges.append((names[parent], names[i], L))
    chosen = sorted(rng.sample(range(n_nodes), n_generators))
    kinds = {nm: STEINER for nm in names}
    rename = {}
    for j, i in enumerate(chosen):
        rename[names[i]] = f"{prefix}{start + j}"
    kinds = {rename.get(nm, nm): k if nm not in rename else GENERATOR
             for nm, k in kinds.items()}
    edges = [(rename.get(a, a), rename.get(b, b), L) for a, b, L in edges]
    return kinds, edges


def random_forest(seed, n_generators, n_components=1, length_scale=1):
    """Deterministic random forest: returns (generator metric, canonical hull)."""
    rng = random.Random(seed)
    length_scale = Fraction(length_scale)
    if n_generators == 0:
        empty = FiniteExtendedMetric([], [])
        return empty, ForestHull({}, [])
    n_components = max(1, min(n_components, n_generators))
    cuts = sorted(rng.sample(range(1, n_generators), n_components - 1))
    sizes = [b - a for a, b in zip([0] + cuts, cuts + [n_generators])]
    kinds, edges = {}, []
    start = 0
    for size in sizes:
        k, e = random_tree_edges(rng, size, length_scale, start=start)
        # steiner scratch names must not collide across components
        kinds.update(k)
        edges.extend(e)
        start += size
    hull = canonical_form(kinds, edges)
    return hull.generator_metric(), hull
