"""Finite extended metric spaces and the 4-point condition."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import StructuralError, UnknownPoint
from .numbers import INF, TOLERANCE, add, leq, to_value


class FiniteExtendedMetric:
    """Labelled points with a symmetric [0, inf] distance matrix.

    Construction only checks shape and sign; metric axioms are checked by
    :func:`check_metric` so that violations can be reported, not raised.
    """

    def __init__(self, labels, matrix):
        labels = [str(x) for x in labels]
        if len(set(labels)) != len(labels):
            raise StructuralError("duplicate point labels")
        n = len(labels)
        if len(matrix) != n or any(len(row) != n for row in matrix):
            raise StructuralError(f"distance matrix is not {n}x{n}")
        rows = []
        for row in matrix:
            vals = tuple(to_value(v) for v in row)
            for v in vals:
                if v < 0:
                    raise StructuralError(f"negative distance {v}")
            rows.append(vals)
        self.labels = tuple(labels)
        self.dist = tuple(rows)
        self.index = {x: i for i, x in enumerate(self.labels)}

    def __len__(self):
        return len(self.labels)

    def __repr__(self):
        return f"FiniteExtendedMetric({list(self.labels)})"

    def __eq__(self, other):
        return (isinstance(other, FiniteExtendedMetric)
                and self.labels == other.labels and self.dist == other.dist)

    def __hash__(self):
        return hash((self.labels, self.dist))

    def idx(self, x) -> int:
        if isinstance(x, int) and not isinstance(x, bool):
            if 0 <= x < len(self.labels):
                return x
            raise UnknownPoint(x)
        try:
            return self.index[x]
        except KeyError:
            raise UnknownPoint(x) from None

    def d(self, x, y):
        return self.dist[self.idx(x)][self.idx(y)]

    def restrict(self, labels) -> "FiniteExtendedMetric":
        ids = [self.idx(x) for x in labels]
        return FiniteExtendedMetric([self.labels[i] for i in ids],
                                    [[self.dist[i][j] for j in ids] for i in ids])

    @classmethod
    def from_function(cls, labels, dfun):
        labels = list(labels)
        return cls(labels, [[Fraction(0) if i == j else dfun(x, y)
                             for j, y in enumerate(labels)]
                            for i, x in enumerate(labels)])


@dataclass
class ValidationReport:
    valid: bool
    violations: list = field(default_factory=list)

    def as_dict(self):
        return {"valid": self.valid,
                "violations": [list(v) for v in self.violations]}


def check_metric(space: FiniteExtendedMetric) -> ValidationReport:
    """Report every failure of the extended-metric axioms.

    Entries are ``("zero", x, y)``, ``("asymmetric", x, y)``,
    ``("diagonal", x)`` or ``("triangle", x, z, y)`` meaning
    d(x, z) > d(x, y) + d(y, z).  Transitivity of finiteness is a special
    case of the triangle check (inf > finite sum).
    """
    lab, D = space.labels, space.dist
    n = len(lab)
    bad = []
    for i in range(n):
        if D[i][i] != 0:
            bad.append(("diagonal", lab[i]))
    for i, j in itertools.combinations(range(n), 2):
        if D[i][j] != D[j][i]:
            bad.append(("asymmetric", lab[i], lab[j]))
        elif D[i][j] == 0:
            bad.append(("zero", lab[i], lab[j]))
    for i, k in itertools.combinations(range(n), 2):
        for j in range(n):
            if j == i or j == k:
                continue
            if not leq(D[i][k], add(D[i][j], D[j][k])):
                bad.append(("triangle", lab[i], lab[k], lab[j]))
    return ValidationReport(not bad, bad)


def _pairings(dxy, dzw, dxz, dyw, dyz, dxw):
    return add(dxy, dzw), add(dxz, dyw), add(dyz, dxw)


def four_point(space: FiniteExtendedMetric, x, y, z, w) -> bool:
    """d(x,y) + d(z,w) <= max(d(x,z) + d(y,w), d(y,z) + d(x,w)).

    Vacuously true unless all four points share a finite-distance class.
    """
    d = space.d
    pts = (x, y, z, w)
    for p, q in itertools.combinations(pts, 2):
        if d(p, q) == INF:
            return True
    lhs, r1, r2 = _pairings(d(x, y), d(z, w), d(x, z), d(y, w), d(y, z), d(x, w))
    return leq(lhs, max(r1, r2))


def finite_components(space: FiniteExtendedMetric) -> list[list[str]]:
    """Finiteness classes, each in input order, ordered by first member."""
    seen = set()
    blocks = []
    D = space.dist
    for i, x in enumerate(space.labels):
        if i in seen:
            continue
        block = [j for j in range(len(space)) if j not in seen and D[i][j] != INF]
        seen.update(block)
        blocks.append([space.labels[j] for j in block])
    return blocks


def _int_matrix(space, ids):
    """Scale an exact finite block to integers for a fast 4PC sweep."""
    vals = [space.dist[i][j] for i in ids for j in ids]
    if any(isinstance(v, float) for v in vals):
        return None
    scale = 1
    for v in vals:
        scale = math.lcm(scale, v.denominator)
    return [[int(space.dist[i][j] * scale) for j in ids] for i in ids]


def is_tree_embeddable(space: FiniteExtendedMetric):
    """Return ``(True, None)`` or ``(False, (x, y, z, w))``.

    The witness puts the strictly largest pairing first, so
    ``four_point(space, *witness)`` is False.
    """
    for block in finite_components(space):
        ids = [space.idx(x) for x in block]
        M = _int_matrix(space, ids)
        if M is None:
            M = [[space.dist[i][j] for j in ids] for i in ids]
        m = len(ids)
        for a, b, c, e in itertools.combinations(range(m), 4):
            s1 = M[a][b] + M[c][e]
            s2 = M[a][c] + M[b][e]
            s3 = M[a][e] + M[b][c]
            top = max(s1, s2, s3)
            # the condition says the two largest sums coincide
            if isinstance(top, float):
                ok = sorted((s1, s2, s3))[1] + TOLERANCE >= top
            else:
                ok = sorted((s1, s2, s3))[1] == top
            if ok:
                continue
            name = [block[t] for t in (a, b, c, e)]
            if top == s1:
                quad = (name[0], name[1], name[2], name[3])
            elif top == s2:
                quad = (name[0], name[2], name[1], name[3])
            else:
                quad = (name[0], name[3], name[1], name[2])
            return False, quad
    return True, None
