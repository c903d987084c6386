"""Acceptance criteria, one test per criterion.

Each test prints a single ``CRITERION n: PASS|FAIL`` line with the measured
numbers; the lines are repeated in the terminal summary.  Run on its own
with ``pytest tests/test_acceptance.py -s``.
"""
import os
import random
import subprocess
import sys
import time
from fractions import Fraction


from rforest.distortion import (brute_force_min, dis_K, dis_metric_K, min_distortion,
                                product_metric_distortion)
from rforest.extension import extend_one_point
from rforest.fixtures import (large_K, perturbed, random_heart, random_independence_instance,
                              random_interpolation_pair, random_structure, random_unzip_instance)
from rforest.heart import orbit_check, radius_one_pairs, scale_structure, validate_heart
from rforest.hull import SubHull, V, amalgam_distance, build_hull, free_amalgam, interp, random_forest
from rforest.metric import check_metric, four_point, is_tree_embeddable
from rforest.model_theory import (compare_fingerprints, fingerprint, independence_amalgam,
                                  independent, interpolate_path, pointed_iso_check, unzip_path,
                                  validate_step)
from rforest.numbers import INF
from rforest.predicate import RFRStructure, bounded_extension, check_one_one_lipschitz, mcshane_unary

import oracles
from cli_cases import command_lines, instance_files
from instances import (amalgam_case, mcshane_case, planted_violation, random_lip,
                       small_sample_pair)

F = Fraction
SUMMARY = []


def report(n, ok, detail):
    line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    SUMMARY.append(line)
    print(line)
    assert ok, line


def test_criterion_01_four_point():
    start = time.perf_counter()
    trees_ok = 0
    for seed in range(1000):
        rng = random.Random(f"tree-{seed}")
        metric, _ = random_forest(seed, rng.randint(1, 12), rng.randint(1, 3))
        trees_ok += is_tree_embeddable(metric)[0]
    rejected = 0
    for seed in range(1000):
        metric, quad = planted_violation(seed)
        planted_ok = check_metric(metric).valid and not four_point(metric, *quad)
        ok, witness = is_tree_embeddable(metric)
        rejected += planted_ok and not ok and not four_point(metric, *witness)
    elapsed = time.perf_counter() - start
    report(1, trees_ok == 1000 and rejected == 1000 and elapsed < 10,
           f"trees accepted {trees_ok}/1000, planted rejected with witness {rejected}/1000, "
           f"{elapsed:.1f}s (limit 10s)")


def test_criterion_02_hull_fidelity():
    rebuilt = 0
    hulls = []
    for seed in range(500):
        rng = random.Random(f"hull-{seed}")
        metric, h = random_forest(seed, rng.randint(1, 8), rng.randint(1, 3))
        h2 = build_hull(metric)
        rebuilt += h2.edges == h.edges and h2.kinds == h.kinds and h2.generator_metric() == metric
        hulls.append(h)
    rng = random.Random("triples")
    good = 0
    for _ in range(10 ** 4):
        h = rng.choice(hulls)
        g0 = V(rng.choice(h.generators))
        gens = [g for g in h.generators if h.component(V(g)) == h.component(g0)]
        p = interp(h, V(rng.choice(gens)), F(rng.randint(0, 12), 12), V(rng.choice(gens)))
        q = V(rng.choice(gens))
        r = F(rng.randint(0, 16), 16)
        m = interp(h, p, r, q)
        good += (h.dist(p, m) + h.dist(m, q) == h.dist(p, q)
                 and h.dist(p, m) == r * h.dist(p, q))
    report(2, rebuilt == 500 and good == 10 ** 4,
           f"canonical rebuild {rebuilt}/500, exact interp triples {good}/10000")


def test_criterion_03_free_amalgam():
    eps = F(1, 4)
    worst, checked, exact_ok = F(0), 0, True
    for seed in range(200):
        Y0, Y1, base = amalgam_case(seed)
        Z = free_amalgam(Y0, Y1, base)
        rng = random.Random(seed)
        only0 = [g for g in Y0.generators if g not in base]
        only1 = [g for g in Y1.generators if g not in base]
        for a in only0:
            for b in only1:
                exact = amalgam_distance(Y0, Y1, base, V(a), V(b))
                exact_ok &= Z.dist(V(a), V(b)) == exact
        # interior points as well as generators
        pts0 = [V(g) for g in only0] + rng.sample(SubHull.whole(Y0).mesh(F(1, 2)), 2)
        pts1 = [V(g) for g in only1] + rng.sample(SubHull.whole(Y1).mesh(F(1, 2)), 2)
        for p0 in pts0:
            for p1 in pts1:
                exact = amalgam_distance(Y0, Y1, base, p0, p1)
                mesh = oracles.amalgam_inf(Y0, Y1, base, p0, p1, eps)
                if INF in (exact, mesh):
                    exact_ok &= exact == mesh
                    continue
                worst = max(worst, abs(mesh - exact))
                checked += 1
    report(3, exact_ok and worst <= 2 * eps,
           f"{checked} cross pairs, max |mesh inf - projection formula| = {worst} "
           f"(tolerance {2 * eps}), amalgam hull agrees: {exact_ok}")


def test_criterion_04_mcshane():
    part1 = part2 = part3 = 0
    eps = F(1, 4)
    worst3 = F(0)
    for seed in range(500):
        A, B, O, f, K = mcshane_case(seed)
        # part 1: deviation on correlated pairs, checked against a plain loop too
        g = mcshane_unary(dict(enumerate(f)), [(A.points[a], b) for a, b in O.pairs], A.hull)
        dis = dis_metric_K(O, A, B, K)[0]
        dev = max(abs(g(A.points[a]) - f[b]) for a, b in O.pairs)
        loop = all(g(A.points[a]) == oracles.mcshane(A.hull, [(A.points[x], y) for x, y in O.pairs],
                                                     dict(enumerate(f)), A.points[a])
                   for a, _ in O.pairs)
        part1 += dev <= dis and loop
        # part 2: extension of f from a subdomain staying within sup |f - g| of g
        rng = random.Random(f"part2-{seed}")
        gA = random_lip(rng, A.hull)
        other = random_lip(rng, A.hull)
        sub = rng.sample(A.points, max(1, len(A) // 2))
        h, r = bounded_extension([(a, other(a)) for a in sub], gA)
        mesh = SubHull.whole(A.hull).mesh(eps)
        sup = max(abs(h(x) - gA(x)) for x in mesh)
        part2 += abs(sup - r) <= 2 * eps and all(h(a) == other(a) for a in sub)
        # part 3: the pair relation at most doubles the distortion
        val, _ = product_metric_distortion(O, A, B, K)
        ok3 = val <= 2 * dis
        if len(O.pairs) <= 8:
            ok3 &= val == oracles.product_distortion(O.pairs, A.D, B.D, K)
        part3 += ok3
        if dis:
            worst3 = max(worst3, val / dis)
    report(4, part1 == part2 == part3 == 500,
           f"part 1 {part1}/500, part 2 {part2}/500 (tolerance {2 * eps}), "
           f"part 3 {part3}/500 (max ratio {worst3}, bound 2)")


def extension_case(seed):
    rng = random.Random(f"extension-{seed}")
    n = rng.randint(2, 5)
    tgt = random_structure(rng.randrange(10 ** 6), n_generators=n,
                           n_components=rng.randint(1, 2), n_anchors=rng.randint(1, 4))
    src = perturbed(RFRStructure(tgt.hull, tgt.pred, tgt.tuple[:-1]), seed,
                    F(rng.randint(0, 2), 8))
    eps = F(1, rng.choice([5, 10, 20]))
    return src, tgt, large_K(tgt), eps


def test_criterion_05_extension():
    start = time.perf_counter()
    ok = lower_checked = 0
    worst = F(0)
    for seed in range(200):
        src, tgt, K, eps = extension_case(seed)
        r = extend_one_point(src, tgt, K, eps, eps_mesh=F(1, 2))
        upper = dis_K(r.correlationUsed, r.sampleA, r.sampleB, K).dis
        good = upper == r.achievedDis and r.achievedDis <= 4 * r.rhoIn + eps
        if len(r.sampleA) <= 16 and len(r.sampleB) <= 16:
            lower = min_distortion(r.sampleA, r.sampleB, K, max_product=256)[0]
            good &= lower <= r.achievedDis
            lower_checked += 1
        ok += good
        if r.rhoIn:
            worst = max(worst, r.achievedDis / r.rhoIn)
    elapsed = time.perf_counter() - start
    report(5, ok == 200 and elapsed < 300,
           f"bound held {ok}/200 ({lower_checked} with exhaustive lower bound), "
           f"largest achieved/rho_in {float(worst):.3f} (bound 4 + eps/rho), {elapsed:.0f}s")


def test_criterion_06_branch_and_bound():
    agree = 0
    for seed in range(1000):
        A, B = small_sample_pair(seed)
        assert len(A) * len(B) <= 20
        agree += min_distortion(A, B, 2)[0] == brute_force_min(A, B, 2)[0]
    report(6, agree == 1000, f"branch and bound equals exhaustive search on {agree}/1000")


def halves(r8, r16):
    if r8 == 0:
        return r16 == 0
    return F(2, 5) <= r16 / r8 <= F(3, 5)


def test_criterion_07_paths():
    valid = ends = halved = 0
    ratios = []
    for seed in range(100):
        s = random_unzip_instance(seed)
        P8, P16 = unzip_path(s, 8), unzip_path(s, 16)
        valid += all(validate_step(st)[0] for st in P8.steps + P16.steps)
        ends += all(compare_fingerprints(fingerprint(s), P.end).equal
                    and independent(P.steps[0].hull, P.steps[0].tuple[:-2],
                                    P.steps[0].tuple[-2:-1], P.steps[0].tuple[-1:])
                    for P in (P8, P16))
        halved += halves(P8.max_rho, P16.max_rho)
        if P8.max_rho:
            ratios.append(P16.max_rho / P8.max_rho)
    for seed in range(100):
        q0, q1 = random_interpolation_pair(seed)
        P8, P16 = interpolate_path(q0, q1, 8), interpolate_path(q0, q1, 16)
        valid += all(validate_step(st)[0] for st in P8.steps + P16.steps)
        ends += all(pointed_iso_check(P.steps[0], q0) and pointed_iso_check(P.steps[-1], q1)
                    for P in (P8, P16))
        halved += halves(P8.max_rho, P16.max_rho)
        if P8.max_rho:
            ratios.append(P16.max_rho / P8.max_rho)
    spread = f"{float(min(ratios)):.3f}..{float(max(ratios)):.3f}" if ratios else "n/a"
    report(7, valid == ends == halved == 200,
           f"valid steps {valid}/200, endpoints {ends}/200, rho halves {halved}/200 "
           f"(rho16/rho8 in {spread}, allowed 0.4..0.6)")


def test_criterion_08_independence():
    good = 0
    for seed in range(100):
        I = random_independence_instance(seed)
        S = independence_amalgam(I["base"], I["C0"], I["C1"], I["M"], I["B0"], I["B1"], I["C"])
        ok = check_one_one_lipschitz(S).ok
        for side, B in ((I["C0"], I["B0"]), (I["C1"], I["B1"]), (I["base"], I["B0"] + I["B1"])):
            labels = [V(x) for x in I["M"] + B + (I["C"] if side is not I["base"] else [])]
            ok &= bool(pointed_iso_check(RFRStructure(S.hull, S.pred, labels),
                                         RFRStructure(side.hull, side.pred, labels)))
        good += ok
    report(8, good == 100, f"amalgams with matching restrictions and Lipschitz {good}/100")


def test_criterion_09_heart():
    good = ones = 0
    rng = random.Random("heart-scales")
    for seed in range(200):
        M = random_heart(seed)
        s, t = F(rng.randint(1, 8), 8), F(rng.randint(1, 8), 8)
        params = list(M.labels[:rng.randint(0, 2)])
        ok = validate_heart(M).valid and orbit_check(M, params).ok
        ok &= scale_structure(scale_structure(M, s), t) == scale_structure(M, s * t)
        good += ok
        ones += all(d == 1 for _, _, d in radius_one_pairs(M))
    report(9, good == ones == 200,
           f"validate, orbits and scale composition {good}/200, radius-1 pairs at 1 {ones}/200")


def test_criterion_10_cli_determinism(tmp_path):
    files = instance_files(tmp_path)
    same = 0
    cmds = command_lines(files)
    for name, argv in cmds.items():
        outs = set()
        for run in range(3):
            env = dict(os.environ, PYTHONHASHSEED=str(run))
            proc = subprocess.run([sys.executable, "-m", "rforest.cli", *argv],
                                  capture_output=True, env=env)
            outs.add((proc.returncode, proc.stdout))
        same += len(outs) == 1
    report(10, same == len(cmds),
           f"{same}/{len(cmds)} commands byte-identical over 3 runs in fresh processes")
