"""JSON instance files and report encoding.

An instance document has the keys ``metric`` (``labels`` and ``matrix``),
``anchors``, ``tuple`` and ``heart``.  Numbers are exact: ``"p/q"`` strings,
integers or decimals (decimals are read as the rational they spell).  A
``null`` distance is infinite.
"""
from __future__ import annotations

import json
from fractions import Fraction

from .errors import PreconditionError, StructuralError
from .heart import HeartStructure
from .hull import PointRef, E, V, build_hull, interp
from .metric import FiniteExtendedMetric
from .numbers import INF, fmt, to_value
from .predicate import AnchorPredicate, RFRStructure

INSTANCE_KEYS = {"metric", "anchors", "tuple", "heart"}


def loads(text):
    """Parse JSON text, keeping decimals exact."""
    try:
        return json.loads(text, parse_float=Fraction)
    except (json.JSONDecodeError, ValueError) as exc:
        raise StructuralError(f"malformed JSON: {exc}") from exc


def dumps(obj) -> str:
    """Canonical encoding: sorted keys, fixed separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, separators=(",", ": ")) + "\n"


def read_text(path, stdin=None):
    if path == "-":
        import sys
        return (stdin or sys.stdin).read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise StructuralError(f"cannot read {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# decoding


def _number(x):
    v = to_value(x)
    if isinstance(v, float) and v != INF:
        raise StructuralError(f"inexact number {x!r}")
    return v


def parse_metric(obj) -> FiniteExtendedMetric:
    if not isinstance(obj, dict) or set(obj) != {"labels", "matrix"}:
        raise StructuralError("metric needs exactly the keys 'labels' and 'matrix'")
    labels, matrix = obj["labels"], obj["matrix"]
    if not isinstance(labels, list) or not isinstance(matrix, list):
        raise StructuralError("labels and matrix must be lists")
    if any(not isinstance(row, list) for row in matrix):
        raise StructuralError("matrix rows must be lists")
    return FiniteExtendedMetric(labels, [[_number(x) for x in row] for row in matrix])


def parse_point(h, obj) -> PointRef:
    """A vertex label, ``{"vertex": id}``, ``{"edge": i, "offset": x}`` or ``{"interp": [p, r, q]}``."""
    if isinstance(obj, str):
        return h.ref(V(obj))
    if isinstance(obj, dict):
        if set(obj) == {"vertex"}:
            return h.ref(V(obj["vertex"]))
        if set(obj) == {"edge", "offset"}:
            if not isinstance(obj["edge"], int) or isinstance(obj["edge"], bool):
                raise StructuralError("edge id must be an integer")
            return h.ref(E(obj["edge"], _number(obj["offset"])))
        if set(obj) == {"interp"} and isinstance(obj["interp"], list) and len(obj["interp"]) == 3:
            p, r, q = obj["interp"]
            return interp(h, parse_point(h, p), _number(r), parse_point(h, q))
    raise StructuralError(f"bad point reference {obj!r}")


def parse_heart(obj) -> HeartStructure:
    if not isinstance(obj, dict) or not {"radii", "delta"} <= set(obj) <= {"radii", "delta", "labels"}:
        raise StructuralError("heart needs 'radii' and 'delta' (and optional 'labels')")
    if not isinstance(obj["radii"], list):
        raise StructuralError("radii must be a list")
    labels = obj.get("labels")
    return HeartStructure(tuple(_number(r) for r in obj["radii"]), _number(obj["delta"]),
                          None if labels is None else tuple(str(x) for x in labels))


def parse_instance(doc):
    """Decode a document into a metric, a structure or a heart structure."""
    if not isinstance(doc, dict):
        raise StructuralError("instance must be a JSON object")
    unknown = set(doc) - INSTANCE_KEYS
    if unknown:
        raise StructuralError(f"unknown keys: {sorted(unknown)}")
    if "heart" in doc:
        if len(doc) != 1:
            raise StructuralError("a heart instance has no other keys")
        return parse_heart(doc["heart"])
    if "metric" not in doc:
        raise StructuralError("missing 'metric'")
    metric = parse_metric(doc["metric"])
    if "anchors" not in doc and "tuple" not in doc:
        return metric
    return structure_from(metric, doc.get("anchors", []), doc.get("tuple"))


def structure_from(metric: FiniteExtendedMetric, anchors=(), tup=None) -> RFRStructure:
    h = build_hull(metric)
    if not isinstance(anchors, (list, tuple)):
        raise StructuralError("anchors must be a list")
    parsed = []
    for a in anchors:
        if not isinstance(a, dict) or set(a) != {"p", "q", "v"}:
            raise StructuralError(f"anchor needs keys p, q, v: {a!r}")
        v = _number(a["v"])
        if not 0 <= v <= 1:
            raise StructuralError(f"anchor value {a['v']!r} outside [0, 1]")
        parsed.append((parse_point(h, a["p"]), parse_point(h, a["q"]), v))
    pred = AnchorPredicate(h, parsed)
    if tup is None:
        pts = [V(x) for x in metric.labels]
    elif isinstance(tup, list):
        pts = [parse_point(h, t) for t in tup]
    else:
        raise StructuralError("tuple must be a list")
    return RFRStructure(h, pred, pts)


def as_structure(obj) -> RFRStructure:
    """Promote a bare metric to a structure with no anchors and every label in the tuple."""
    if isinstance(obj, RFRStructure):
        return obj
    if isinstance(obj, FiniteExtendedMetric):
        return structure_from(obj)
    raise PreconditionError("expected a metric or a structure instance")


def load_instance(path, stdin=None):
    return parse_instance(loads(read_text(path, stdin)))


# ---------------------------------------------------------------------------
# encoding


def point_doc(p: PointRef):
    if p.kind == "v":
        return {"vertex": p.vertex}
    return {"edge": p.edge, "offset": fmt(p.offset)}


def metric_doc(m: FiniteExtendedMetric):
    return {"labels": list(m.labels), "matrix": [[fmt(x) for x in row] for row in m.dist]}


def structure_doc(s: RFRStructure):
    """Instance document; rebuilding its metric gives back the same canonical hull."""
    if not isinstance(s.pred, AnchorPredicate):
        raise PreconditionError("only anchor predicates can be written as instances")
    return {"metric": metric_doc(s.hull.generator_metric()),
            "anchors": [{"p": point_doc(p), "q": point_doc(q), "v": fmt(v)}
                        for p, q, v in s.pred.anchors],
            "tuple": [point_doc(p) for p in s.tuple]}


def heart_doc(M: HeartStructure):
    return {"heart": M.as_dict()}
