"""Finite pieces of the max-metric on the unit interval.

A :class:`HeartStructure` is a base point ``*`` plus finitely many points
with radii in [0, 1]; distinct points sit at the larger of their radii.
Density of the radii cannot hold for a finite set, so it is replaced by a
covering radius ``delta`` that is checked and reported.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import PreconditionError
from .metric import FiniteExtendedMetric, check_metric
from .numbers import fmt, to_value

STAR = "*"


@dataclass(frozen=True)
class HeartStructure:
    radii: tuple
    delta: Fraction
    labels: tuple = None

    def __post_init__(self):
        object.__setattr__(self, "radii", tuple(to_value(r) for r in self.radii))
        object.__setattr__(self, "delta", to_value(self.delta))
        if self.labels is None:
            object.__setattr__(self, "labels",
                               tuple(f"x{i}" for i in range(1, len(self.radii) + 1)))
        if len(self.labels) != len(self.radii):
            raise PreconditionError("one label per radius is required")
        if STAR in self.labels or len(set(self.labels)) != len(self.labels):
            raise PreconditionError("labels must be distinct and differ from '*'")
        if self.delta <= 0:
            raise PreconditionError("delta must be positive")

    @property
    def points(self):
        """All point labels, base point first."""
        return (STAR,) + self.labels

    def radius(self, x):
        if x == STAR:
            return Fraction(0)
        return self.radii[self.labels.index(x)]

    def dist(self, x, y):
        if x == y:
            return Fraction(0)
        return max(self.radius(x), self.radius(y))

    def metric(self) -> FiniteExtendedMetric:
        return FiniteExtendedMetric.from_function(self.points, self.dist)

    def as_dict(self):
        return {"radii": [fmt(r) for r in self.radii], "delta": fmt(self.delta),
                "labels": list(self.labels)}


def covering_radius(radii):
    """Largest distance from a point of [0, 1] to the set ``{0} | radii``."""
    pts = sorted({Fraction(0)} | {r for r in radii if 0 <= r <= 1})
    worst = Fraction(1) - pts[-1]
    for lo, hi in zip(pts, pts[1:]):
        worst = max(worst, (hi - lo) / 2)
    return worst


@dataclass
class HeartReport:
    valid: bool
    metricValid: bool
    dense: bool
    coveringRadius: Fraction
    delta: Fraction
    violations: list = field(default_factory=list)

    def as_dict(self):
        return {"valid": self.valid, "metricValid": self.metricValid, "dense": self.dense,
                "coveringRadius": fmt(self.coveringRadius), "delta": fmt(self.delta),
                "violations": [list(v) for v in self.violations]}


def validate_heart(M: HeartStructure) -> HeartReport:
    """Check the metric axioms on the max-distances and delta-density of the radii."""
    bad = []
    for x, r in zip(M.labels, M.radii):
        if not 0 <= r <= 1:
            bad.append(("radius", x, fmt(r)))
    # the distances come from the max rule; the axioms are checked generically
    rep = check_metric(M.metric())
    bad += [tuple(v) for v in rep.violations]
    cover = covering_radius(M.radii)
    dense = cover <= M.delta
    if not dense:
        bad.append(("density", fmt(cover), fmt(M.delta)))
    metric_ok = not any(v[0] != "density" for v in bad)
    return HeartReport(metric_ok and dense, metric_ok, dense, cover, M.delta, bad)


def qf_fingerprint(M: HeartStructure, tup, params=()):
    """Distances from each tuple entry to ``*``, to the other entries and to the parameters.

    Entries are ``("star", i, v)``, ``("pair", i, j, v)`` with ``i < j`` and
    ``("param", i, k, v)`` in that order; indices refer to positions in
    ``tup`` and ``params``.
    """
    tup, params = list(tup), list(params)
    out = [("star", i, M.radius(x)) for i, x in enumerate(tup)]
    out += [("pair", i, j, M.dist(tup[i], tup[j]))
            for i, j in itertools.combinations(range(len(tup)), 2)]
    out += [("param", i, k, M.dist(x, a)) for i, x in enumerate(tup)
            for k, a in enumerate(params)]
    return tuple(out)


def is_automorphism(M: HeartStructure, perm) -> bool:
    """``perm`` maps labels to labels; it must fix ``*`` and preserve every distance."""
    f = {x: perm.get(x, x) for x in M.points}
    if f[STAR] != STAR or sorted(f.values()) != sorted(M.points):
        return False
    return all(M.dist(f[x], f[y]) == M.dist(x, y)
               for x, y in itertools.combinations(M.points, 2))


def orbits(M: HeartStructure, params=()):
    """Non-parameter points grouped by radius, each group in label order."""
    fixed = set(params) | {STAR}
    groups = {}
    for x in M.labels:
        if x not in fixed:
            groups.setdefault(M.radius(x), []).append(x)
    return [groups[r] for r in sorted(groups)]


@dataclass
class OrbitReport:
    ok: bool
    orbits: list
    transpositions: int
    failures: list = field(default_factory=list)

    def as_dict(self):
        return {"ok": self.ok, "orbits": self.orbits, "transpositions": self.transpositions,
                "failures": [list(f) for f in self.failures]}


def orbit_check(M: HeartStructure, params=()) -> OrbitReport:
    """Every swap of two equal-radius non-parameters is an automorphism fixing ``params``.

    Besides the distance check, each swap must preserve the fingerprint over
    ``params`` of every pair of points.
    """
    params = list(params)
    for a in params:
        if a not in M.points:
            raise PreconditionError(f"unknown parameter {a!r}")
    orbs = orbits(M, params)
    count, failures = 0, []
    for orb in orbs:
        for x, y in itertools.combinations(orb, 2):
            count += 1
            swap = {x: y, y: x}
            if not is_automorphism(M, swap):
                failures.append(("distance", x, y))
                continue
            for u, v in itertools.product(M.points, repeat=2):
                img = (swap.get(u, u), swap.get(v, v))
                if qf_fingerprint(M, img, params) != qf_fingerprint(M, (u, v), params):
                    failures.append(("fingerprint", x, y, u, v))
                    break
    return OrbitReport(not failures, orbs, count, failures)


def scale_structure(M: HeartStructure, s) -> HeartStructure:
    """Multiply every radius by ``s`` in (0, 1]; labels and delta are kept."""
    s = to_value(s)
    if not 0 < s <= 1:
        raise PreconditionError("scale factor must lie in (0, 1]")
    return HeartStructure(tuple(r * s for r in M.radii), M.delta, M.labels)


def zero_pattern(M: HeartStructure, tup):
    """Which pairs of entries of ``tup`` are at distance zero."""
    return tuple((i, j) for i, j in itertools.combinations(range(len(tup)), 2)
                 if M.dist(tup[i], tup[j]) == 0)


def radius_one_pairs(M: HeartStructure):
    """Distances between distinct points of radius exactly 1."""
    top = [x for x in M.labels if M.radius(x) == 1]
    return [(x, y, M.dist(x, y)) for x, y in itertools.combinations(top, 2)]
