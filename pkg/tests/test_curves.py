import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ftcsurf.curves import (
    PlanarCurve, cardioid, circle, cusps_well_separated, detect_cusps, fig21, figure_eight,
    from_samples, limacon, load_curve_json, random_test_point, random_trig_curve,
    turning_number, verify_prop24, winding_number,
)
from ftcsurf.errors import NoRegularNormalField, OddOrderSingularity, PointOnCurve


def test_winding_examples():
    assert winding_number(circle(), 0) == 1
    assert winding_number(limacon(), (0.5, 0.0)) == 2
    assert winding_number(limacon(), (2.0, 0.0)) == 1
    assert winding_number(limacon(), (10.0, 3.0)) == 0
    assert winding_number(fig21(), 0) == 2


def test_limacon_passes_through_origin():
    with pytest.raises(PointOnCurve):
        winding_number(limacon(), 0)


def test_point_on_circle():
    with pytest.raises(PointOnCurve):
        winding_number(circle(), (math.cos(1.0), math.sin(1.0)))


def test_winding_reversal_flips_sign():
    for c, p in ((circle(), 0.2j), (limacon(), 0.5), (fig21(), 0)):
        assert winding_number(c.reversed(), p) == -winding_number(c, p)


def test_winding_reparametrization_invariant():
    base = circle()

    def f(t):
        s = t + 0.1 * np.sin(2 * np.pi * t)
        ds = 1 + 0.2 * np.pi * np.cos(2 * np.pi * t)
        dds = -0.4 * np.pi ** 2 * np.sin(2 * np.pi * t)
        g, dg, ddg = base.func(s)
        return g, dg * ds, ddg * ds * ds + dg * dds

    c = PlanarCurve(f, "reparam")
    assert winding_number(c, 0.3) == 1
    assert turning_number(c) == 1


def test_cusp_examples():
    assert detect_cusps(circle()) == []
    cs = detect_cusps(cardioid())
    assert len(cs) == 1 and cs[0].t0 == pytest.approx(0, abs=1e-9) and cs[0].m == 1
    assert len(detect_cusps(fig21())) == 4
    assert all(c.m == 1 for c in detect_cusps(fig21()))


def test_semicubical_normal_form():
    c = cardioid()
    u = np.array([1e-3, 2e-3])
    g = c.eval(u / (2 * np.pi))[0] - c.point(0.0)
    np.testing.assert_allclose(g.real, u ** 2, rtol=1e-3)
    np.testing.assert_allclose(g.imag, u ** 3, rtol=1e-3)


def _stalled_circle():
    # circle reparametrized by s = t - sin(2 pi t)/(2 pi): gamma - gamma(0) ~ t^3
    def f(t):
        w = 2 * np.pi
        s = t - np.sin(w * t) / w
        ds = 1 - np.cos(w * t)
        dds = w * np.sin(w * t)
        e = np.exp(1j * w * s)
        return e, 1j * w * e * ds, (1j * w) ** 2 * e * ds * ds + 1j * w * e * dds

    return PlanarCurve(f, "stalled")


def test_odd_order_singularity():
    with pytest.raises(OddOrderSingularity):
        detect_cusps(_stalled_circle())
    with pytest.raises(NoRegularNormalField):
        turning_number(_stalled_circle())


def test_turning_examples():
    assert turning_number(circle()) == 1
    assert turning_number(circle(turns=2)) == 2
    assert turning_number(fig21()) == 1
    assert turning_number(limacon()) == 2


def test_no_regular_normal_field():
    with pytest.raises(NoRegularNormalField):
        turning_number(cardioid())
    with pytest.raises(NoRegularNormalField):
        turning_number(figure_eight())
    assert turning_number(figure_eight(), require_regular=False) == 0


def test_winding_turning_bound_examples():
    r = verify_prop24(circle(), 0.1)
    assert (r.w, r.t, r.passed) == (1, 1, True)
    r = verify_prop24(fig21(), 0)
    assert (r.w, r.t, r.passed) == (2, 1, True)
    assert r.decomposition_ok and [a[2] for a in r.arcs] == [1, 1]
    r = verify_prop24(limacon(), 0.5)
    assert (r.w, r.t, r.passed) == (2, 2, True)
    assert r.csv_row() == "limacon,2,2,pass"


def test_from_samples_and_json():
    pts = [[math.cos(a), math.sin(a)] for a in np.linspace(0, 2 * np.pi, 200, endpoint=False)]
    c = load_curve_json({"points": pts, "name": "s"})
    assert winding_number(c, 0) == 1 and turning_number(c) == 1
    c2 = load_curve_json({"generator": "fig21"})
    assert winding_number(c2, 0) == 2
    again = from_samples(c2.to_json(2048)["points"])
    assert winding_number(again, 0) == 2


def test_open_curve_rejected():
    with pytest.raises(ValueError):
        PlanarCurve(lambda t: (t + 0j, np.ones_like(t) + 0j, 0 * t + 0j), "open")


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_winding_turning_bound_random_family(seed):
    rng = np.random.default_rng(seed)
    c = random_trig_curve(rng)
    if not cusps_well_separated(c):
        return
    p = random_test_point(c, rng)
    r = verify_prop24(c, p)
    assert abs(r.w) <= 2 * r.t
    assert r.decomposition_ok
    assert r.t == c.meta["turns"]


@settings(max_examples=30, deadline=None)
@given(st.floats(-0.1, 0.1), st.floats(-0.1, 0.1))
def test_winding_locally_constant(dx, dy):
    # a small square around (0.5, 0) stays inside the inner loop of the limacon
    assert winding_number(limacon(), complex(0.5 + dx, dy)) == 2
