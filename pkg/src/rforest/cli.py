"""Command-line interface: ``rforest <command> [files] [flags]``.

Every command prints one JSON report on stdout.  Exit codes: 0 success,
1 a checked property failed, 2 malformed input or a violated precondition,
3 a search size limit was hit.
"""
from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction

from . import io
from .distortion import DEFAULT_MAX_PRODUCT, dis_K, min_distortion, sample_structure
from .errors import (InconsistentAnchors, NotTreeEmbeddable, PreconditionError, RForestError,
                     SizeLimitError)
from .extension import extend_one_point, extend_tuple
from .fixtures import (large_K, random_heart, random_independence_instance,
                       random_interpolation_pair, random_structure, random_unzip_instance)
from .heart import (HeartStructure, orbit_check, radius_one_pairs, scale_structure,
                    validate_heart)
from .hull import V
from .metric import FiniteExtendedMetric, check_metric, is_tree_embeddable
from .model_theory import (DEFAULT_MESH, independence_amalgam, interpolate_path, order_witness,
                           pointed_iso_check, type_distance, unzip_path, validate_step)
from .numbers import fmt
from .predicate import RFRStructure, check_one_one_lipschitz

OK, VIOLATION, BAD_INPUT, TOO_LARGE = 0, 1, 2, 3


class Failed(Exception):
    """A checked property does not hold; carries the report payload."""

    def __init__(self, payload):
        super().__init__("check failed")
        self.payload = payload


def _fraction(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _labels(text):
    return [x for x in text.split(",") if x]


def _structure(path):
    return io.as_structure(io.load_instance(path))


def _default_K(*structures):
    return max(large_K(s) for s in structures)


def _default_mesh(*structures):
    return max(s.hull.length_scale() for s in structures) / 2


# ---------------------------------------------------------------------------
# commands; each returns the result payload or raises Failed


def cmd_check(args):
    try:
        obj = io.load_instance(args.file)
    except NotTreeEmbeddable as exc:
        raise Failed({"kind": "structure", "tree": {"embeddable": False,
                                                    "witness": list(exc.quadruple)}})
    except InconsistentAnchors as exc:
        raise Failed({"kind": "structure", "anchors": {"consistent": False,
                                                       "pair": list(exc.pair),
                                                       "slack": fmt(exc.slack)}})
    if isinstance(obj, HeartStructure):
        rep = validate_heart(obj)
        out = {"kind": "heart", "heart": rep.as_dict()}
        if not rep.valid:
            raise Failed(out)
        return out
    metric = obj if isinstance(obj, FiniteExtendedMetric) else obj.hull.generator_metric()
    out = {"kind": "metric" if isinstance(obj, FiniteExtendedMetric) else "structure"}
    rep = check_metric(metric)
    out["metric"] = rep.as_dict()
    ok, quad = is_tree_embeddable(metric) if rep.valid else (False, None)
    out["tree"] = {"embeddable": ok, "witness": None if quad is None else list(quad)}
    if isinstance(obj, RFRStructure):
        lip = check_one_one_lipschitz(obj, args.mesh)
        out["lipschitz"] = lip.as_dict()
        ok = ok and lip.ok
    if not (rep.valid and ok):
        raise Failed(out)
    return out


def cmd_distortion(args):
    A, B = _structure(args.fileA), _structure(args.fileB)
    if len(A.tuple) != len(B.tuple):
        raise PreconditionError("the two tuples have different lengths")
    K = args.K or _default_K(A, B)
    eps = args.mesh or _default_mesh(A, B)
    SA, SB = sample_structure(A, K, eps), sample_structure(B, K, eps)
    rho, O = min_distortion(SA, SB, K, max_product=args.max_sample)
    rep = dis_K(O, SA, SB, K)
    return {"rho": fmt(rho), "certificate": fmt(4 * eps), "K": fmt(K), "mesh": fmt(eps),
            "sampleSizes": [len(SA), len(SB)], "correlation": O.as_dict(),
            "report": rep.as_dict(),
            "samplePoints": [[repr(p) for p in SA.points], [repr(p) for p in SB.points]]}


def cmd_extend(args):
    src, tgt = _structure(args.source), _structure(args.target)
    K = args.K or _default_K(tgt)
    eps = args.eps or Fraction(1, 10)
    if len(tgt.tuple) == len(src.tuple) + 1:
        res = extend_one_point(src, tgt, K, eps, args.mesh, args.max_sample)
    else:
        res = extend_tuple(src, tgt, K, eps, args.mesh, args.max_sample)
    out = res.as_dict()
    out["K"] = fmt(K)
    out["instance"] = io.structure_doc(res.extended)
    if not res.within_bound:
        raise Failed(out)
    return out


def _path_report(P, originals, eps):
    steps = []
    for k, st in enumerate(P.steps):
        ok, detail = validate_step(st, eps)
        steps.append({"index": k, "valid": ok, "detail": None if detail is None else str(detail)})
    out = P.as_dict()
    out["validation"] = steps
    ends = []
    for which, s in originals:
        fp = P.start if which == "start" else P.end
        rep = pointed_iso_check(P.steps[0] if which == "start" else P.steps[-1], s,
                                fp.mesh)
        ends.append({"end": which, "match": rep.equal, "reason": rep.reason})
    out["endpoints"] = ends
    if not all(x["valid"] for x in steps) or not all(e["match"] for e in ends):
        raise Failed(out)
    return out


def cmd_unzip(args):
    s = _structure(args.file)
    P = unzip_path(s, args.m, args.K, args.mesh, args.max_sample)
    return _path_report(P, [("end", s)], args.mesh)


def cmd_interp(args):
    q0, q1 = _structure(args.file0), _structure(args.file1)
    P = interpolate_path(q0, q1, args.m, args.K, args.mesh, args.max_sample, args.grid)
    return _path_report(P, [("start", q0), ("end", q1)], args.mesh)


def cmd_witness(args):
    s = order_witness(args.n)
    return {"n": args.n, "instance": io.structure_doc(s)}


def cmd_heart(args):
    M = io.load_instance(args.file)
    if not isinstance(M, HeartStructure):
        raise PreconditionError("expected a heart instance")
    if args.delta is not None:
        M = HeartStructure(M.radii, args.delta, M.labels)
    params = _labels(args.params or "")
    out = {"validate": validate_heart(M).as_dict(),
           "orbits": orbit_check(M, params).as_dict(),
           "radiusOnePairs": [[x, y, fmt(d)] for x, y, d in radius_one_pairs(M)]}
    if args.scale is not None:
        S = scale_structure(M, args.scale)
        out["scaled"] = {"heart": S.as_dict(), "validate": validate_heart(S).as_dict()}
    if not (out["validate"]["valid"] and out["orbits"]["ok"]):
        raise Failed(out)
    return out


def cmd_gen(args):
    seed, kind = args.seed, args.kind
    if seed is None:
        raise PreconditionError("gen needs an explicit --seed")
    if args.n is None and kind in ("metric", "structure"):
        args.n = 4
    if kind == "metric":
        s = random_structure(seed, args.n)
        return {"kind": kind, "instance": {"metric": io.metric_doc(s.hull.generator_metric())}}
    if kind == "structure":
        return {"kind": kind, "instance": io.structure_doc(random_structure(seed, args.n))}
    if kind == "heart":
        return {"kind": kind, "instance": io.heart_doc(random_heart(seed, args.n))}
    if kind == "unzip":
        return {"kind": kind, "instance": io.structure_doc(random_unzip_instance(seed))}
    if kind == "interp":
        q0, q1 = random_interpolation_pair(seed)
        return {"kind": kind, "instances": [io.structure_doc(q0), io.structure_doc(q1)]}
    inst = random_independence_instance(seed)
    return {"kind": kind,
            "instances": {k: io.structure_doc(inst[k]) for k in ("base", "C0", "C1")},
            "labels": {k: inst[k] for k in ("M", "B0", "B1", "C")}}


def cmd_iso(args):
    A, B = _structure(args.fileA), _structure(args.fileB)
    return pointed_iso_check(A, B, args.grid).as_dict()


def cmd_indep(args):
    base, C0, C1 = _structure(args.base), _structure(args.C0), _structure(args.C1)
    M, B0, B1, C = (_labels(x) for x in (args.M, args.B0, args.B1, args.C))
    s = independence_amalgam(base, C0, C1, M, B0, B1, C, args.grid)
    checks = {}
    for name, side, labels in (("C0", C0, M + B0 + C), ("C1", C1, M + B1 + C),
                               ("base", base, M + B0 + B1)):
        mine = RFRStructure(s.hull, s.pred, [V(x) for x in labels])
        theirs = RFRStructure(side.hull, side.pred, [V(x) for x in labels])
        checks[name] = pointed_iso_check(mine, theirs, args.grid).equal
    lip = check_one_one_lipschitz(s, args.mesh)
    out = {"restrictions": checks, "lipschitz": lip.as_dict(),
           "instance": io.structure_doc(s)}
    if not (all(checks.values()) and lip.ok):
        raise Failed(out)
    return out


def cmd_typedist(args):
    s = _structure(args.file)
    A = [V(x) for x in _labels(args.A)]
    d = type_distance(s.hull, A, V(args.b0), V(args.b1))
    return {"distance": fmt(d), "A": _labels(args.A), "b0": args.b0, "b1": args.b1}


# ---------------------------------------------------------------------------
# argument parsing


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--K", type=_fraction, help="truncation constant")
    common.add_argument("--eps", type=_fraction, help="extension slack")
    common.add_argument("--mesh", type=_fraction, help="mesh spacing on hull edges")
    common.add_argument("--delta", type=_fraction, help="density parameter for heart instances")
    common.add_argument("--seed", type=int, help="seed (only used by gen)")
    common.add_argument("--max-sample", type=int, default=DEFAULT_MAX_PRODUCT,
                        help="largest sample-size product the distortion search accepts")
    common.add_argument("--grid", type=int, default=DEFAULT_MESH,
                        help="subdivisions per tuple segment in type fingerprints")
    common.add_argument("--timing", action="store_true", help="add wall time to the report")

    p = argparse.ArgumentParser(prog="rforest", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, *files, help=None):
        sp = sub.add_parser(name, parents=[common], help=help)
        for f in files:
            sp.add_argument(f)
        sp.set_defaults(func=func, files=files)
        return sp

    add("check", cmd_check, "file", help="validate a metric, structure or heart instance")
    add("distortion", cmd_distortion, "fileA", "fileB", help="minimal truncated distortion")
    add("extend", cmd_extend, "source", "target", help="extend the source tuple like the target")
    sp = add("unzip", cmd_unzip, "file", help="path from an independent pair to the given pair")
    sp.add_argument("--m", type=int, default=8, help="number of steps")
    sp = add("interp", cmd_interp, "file0", "file1", help="path between two independent pairs")
    sp.add_argument("--m", type=int, default=8, help="number of steps")
    sp = add("witness", cmd_witness, help="order witness structure")
    sp.add_argument("--n", type=int, default=3)
    sp = add("heart", cmd_heart, "file", help="validate, orbit-check and scale a heart instance")
    sp.add_argument("--scale", type=_fraction)
    sp.add_argument("--params", help="comma-separated parameter labels")
    sp = add("gen", cmd_gen, help="seeded random instance")
    sp.add_argument("--kind", default="structure",
                    choices=["metric", "structure", "heart", "unzip", "interp", "indep"])
    sp.add_argument("--n", type=int, default=None, help="number of generators or points")
    add("iso", cmd_iso, "fileA", "fileB", help="pointed isomorphism check by fingerprints")
    sp = add("indep", cmd_indep, "base", "C0", "C1", help="independence amalgam")
    for name in ("M", "B0", "B1", "C"):
        sp.add_argument(f"--{name}", required=True, help="comma-separated labels")
    sp = add("typedist", cmd_typedist, "file", help="distance between two 1-types over A")
    sp.add_argument("--A", required=True, help="comma-separated labels")
    sp.add_argument("--b0", required=True)
    sp.add_argument("--b1", required=True)
    return p


def _report(args, payload):
    out = {"command": args.command,
           "inputs": [getattr(args, f) for f in args.files],
           "seed": args.seed,
           "params": {"K": fmt(args.K) if args.K is not None else None,
                      "eps": fmt(args.eps) if args.eps is not None else None,
                      "mesh": fmt(args.mesh) if args.mesh is not None else None,
                      "delta": fmt(args.delta) if args.delta is not None else None}}
    out.update(payload)
    return out


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    code = OK
    try:
        payload = {"result": args.func(args), "ok": True}
    except Failed as exc:
        payload, code = {"result": exc.payload, "ok": False}, VIOLATION
    except SizeLimitError as exc:
        print(f"error: {exc}", file=stderr)
        payload = {"ok": False, "error": {"type": "size-limit", "message": str(exc),
                                          "needed": exc.needed, "limit": exc.limit}}
        code = TOO_LARGE
    except (RForestError, ValueError) as exc:
        # NotTreeEmbeddable and InconsistentAnchors on input are malformed input too
        print(f"error: {exc}", file=stderr)
        kind = ("not-tree" if isinstance(exc, NotTreeEmbeddable)
                else "inconsistent-anchors" if isinstance(exc, InconsistentAnchors)
                else "precondition" if isinstance(exc, PreconditionError) else "input")
        payload = {"ok": False, "error": {"type": kind, "message": str(exc)}}
        code = BAD_INPUT
    report = _report(args, payload)
    if args.timing:
        report["wall_time"] = round(time.perf_counter() - start, 6)
    stdout.write(io.dumps(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
