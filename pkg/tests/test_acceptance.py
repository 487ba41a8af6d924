"""Acceptance suite: one PASS/FAIL line per criterion, with timings."""

import math
import time

import numpy as np
import pytest

from ftcsurf.curves import (cusps_well_separated, fig21, random_test_point, random_trig_curve,
                            verify_prop24)
from ftcsurf.hitting import (Line3, against_set_planar, against_set_spatial, points_on_line,
                             preimages_of_line, random_line)
from ftcsurf.interpolate import CurveSystem, build_spray, gradient_check, identity_problem, solve
from ftcsurf.meromorphic import (INF, ComplexPoly, OneForm, PathContour, RationalFn,
                                 integrate_contour, residue_at)
from ftcsurf.weierstrass import (catenoid, check_regular_complete, enneper, invariants,
                                 load_catalog)


def report(capsys, name, ok, elapsed, limit, detail=""):
    ok_all = bool(ok) and elapsed < limit
    with capsys.disabled():
        print(f"\n{'PASS' if ok_all else 'FAIL'} {name}: {detail} [{elapsed:.2f}s < {limit}s]")
    assert ok, detail
    assert elapsed < limit, f"runtime {elapsed:.1f}s exceeds {limit}s"


def test_classical_invariants(capsys):
    t0 = time.perf_counter()
    ok, notes = True, []
    for s in (catenoid(), enneper()):
        inv = invariants(s)
        ok &= inv.degN == 1 and abs(inv.totalCurvature + 4 * math.pi) < 1e-12
    surfaces = [s for s, _ in load_catalog().values()] + [enneper(d) for d in range(1, 6)]
    for s in surfaces:
        inv = invariants(s)
        # integer form of the total curvature identity: -2 degN = chi - sum of end orders
        jm = -2 * inv.degN == inv.eulerChar - sum(inv.endOrders.values())
        ok &= jm and check_regular_complete(s).passed
        notes.append(f"{s.name}:{inv.degN}")
    report(capsys, "classical invariants and total curvature identity", ok,
           time.perf_counter() - t0, 1.0, " ".join(notes))


def test_residue_quadrature(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240501)
    worst_q = worst_s = 0.0
    done = 0
    contour = PathContour.circle(0, 4)
    while done < 500:
        npoles = int(rng.integers(1, 6))
        poles = rng.uniform(-2, 2, npoles) + 1j * rng.uniform(-2, 2, npoles)
        if npoles > 1 and min(abs(poles[i] - poles[j]) for i in range(npoles)
                              for j in range(i)) < 0.1:
            continue
        deg = int(rng.integers(0, npoles + 2))
        num = ComplexPoly(rng.normal(size=deg + 1) + 1j * rng.normal(size=deg + 1))
        den = ComplexPoly.from_roots(poles)
        form = OneForm(RationalFn(num, den))
        # residues at simple poles from p(a) / q'(a), independent of the library
        dq = den.deriv()
        finite = sum(num(a) / dq(a) for a in poles)
        quad = integrate_contour(form, contour)
        worst_q = max(worst_q, abs(quad - 2j * math.pi * finite))
        worst_s = max(worst_s, abs(finite + residue_at(form, INF)))
        done += 1
    report(capsys, "residue theorem on 500 random forms", worst_q < 1e-9 and worst_s < 1e-10,
           time.perf_counter() - t0, 30.0,
           f"max quadrature error {worst_q:.2e}, max sphere sum {worst_s:.2e}")


def test_hitting_bound(capsys):
    t0 = time.perf_counter()
    s = catenoid()
    axis1 = preimages_of_line(s, Line3.parse("0,0,0:1,0,0")).count
    axis3 = preimages_of_line(s, Line3.parse("0,0,0:0,0,1")).count
    violations, checked, worst = 0, 0, {}
    for k, (name, (surf, _)) in enumerate(sorted(load_catalog().items())):
        rng = np.random.default_rng(1000 + k)
        top = 0
        for _ in range(200):
            r = preimages_of_line(surf, random_line(rng))
            violations += r.count > r.bound
            top = max(top, r.count)
            checked += 1
        worst[name] = f"{top}/{r.bound}"
    ok = axis1 == 2 and axis3 == 0 and violations == 0
    report(capsys, "line preimage bound on catalog surfaces", ok, time.perf_counter() - t0,
           300.0, f"{checked} lines, {violations} violations, x1-axis {axis1}, x3-axis {axis3}, "
           f"max count/bound {worst}")


def test_winding_turning_bound(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(77)
    fails, done = 0, 0
    while done < 1000:
        c = random_trig_curve(rng)
        if not cusps_well_separated(c):
            continue
        r = verify_prop24(c, random_test_point(c, rng))
        fails += not (abs(r.w) <= 2 * r.t)
        done += 1
    ref = verify_prop24(fig21(), 0)
    ok = fails == 0 and (ref.w, ref.t) == (2, 1)
    report(capsys, "|w| <= 2t on 1000 random curves", ok, time.perf_counter() - t0, 120.0,
           f"{fails} failures, four-cusp curve (w, t) = ({ref.w}, {ref.t})")


def test_against_sets(capsys):
    t0 = time.perf_counter()
    ok, n = True, 0
    for r in range(1, 11):
        for m in range(2 - 2 * r, 2):
            a = against_set_planar(r, m)
            x0 = np.asarray(a.lines[0].base)
            ok &= a.size == 12 * r + 2 * m + 1
            ok &= bool(np.all(a.points[:, 2] == 0))
            ok &= all(points_on_line(a.points, ln) == 6 * r + m + 1 for ln in a.lines)
            ok &= all(np.allclose(ln.base, x0) for ln in a.lines)
            ok &= against_set_spatial(r, m).size == 12 * r + 2 * m + 2
            n += 1
    ok &= against_set_planar(1, 1).size == 15
    report(capsys, "against-set sizes", ok, time.perf_counter() - t0, 1.0,
           f"{n} (r, m) pairs, (1,1) -> {against_set_planar(1, 1).size} points")


def _coefficient_deviation(a, b) -> float:
    out = 0.0
    for f, g in ((a.u1, b.u1), (a.u2, b.u2)):
        for p, q in ((f.num, g.num), (f.den, g.den)):
            x, y = np.asarray(p.coeffs), np.asarray(q.coeffs)
            n = max(len(x), len(y))
            x, y = np.pad(x, (0, n - len(x))), np.pad(y, (0, n - len(y)))
            out = max(out, float(np.max(np.abs(x - y))))
    return out


def test_interpolation(capsys):
    t0 = time.perf_counter()
    s = catenoid()
    points = [2.0, 1.5j]
    ident = solve(identity_problem(s, points))
    trans = solve(identity_problem(s, points, shift=(0.3, -1.0, 2.0)))
    dev = max(_coefficient_deviation(ident.surface, s), _coefficient_deviation(trans.surface, s))
    trivial = ident.report.zeta == [] and trans.report.zeta == [] and dev < 1e-10

    rng = np.random.default_rng(2024)
    prob = identity_problem(s, points)
    prob.targets = prob.targets + rng.uniform(-0.1, 0.1, prob.targets.shape)
    res = solve(prob)
    rep = res.report
    out = res.surface
    inv = invariants(out)
    poles = all(v >= 1 for v in inv.endOrders.values()) and len(inv.endOrders) == 2
    ok = (trivial and rep.converged and rep.period_residual < 1e-8
          and rep.interpolation_error < 1e-6 and rep.flux_error < 1e-8
          and check_regular_complete(out).passed and poles)
    report(capsys, "interpolation solver", ok, time.perf_counter() - t0, 120.0,
           f"identity/translation deviation {dev:.1e}; perturbed: period {rep.period_residual:.1e}, "
           f"interpolation {rep.interpolation_error:.1e}, flux {rep.flux_error:.1e}, "
           f"degN {inv.degN}")


def test_gradient_check(capsys):
    t0 = time.perf_counter()
    s = catenoid()
    points = [2.0, 1.5j]
    spray = build_spray(s, CurveSystem.build(s, points), points)
    err = gradient_check(spray)
    report(capsys, "period map gradient vs central differences", err.max() < 1e-6,
           time.perf_counter() - t0, 10.0, f"{len(err)} directions, max relative error {err.max():.1e}")
