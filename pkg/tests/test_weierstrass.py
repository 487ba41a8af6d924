import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ftcsurf.errors import InvalidSpinorialData, JorgeMeeksViolation, NonSquareDivisor, PeriodInconsistency
from ftcsurf.meromorphic import INF, OneForm, PathContour, RationalFn
from ftcsurf.weierstrass import (
    SpinorialSurface, SurfaceEvaluator, catenoid, check_regular_complete, enneper, flux_of,
    gauss_map, immerse, invariants, load_catalog, phi_values, spin_to_weierstrass,
    surface_points, weierstrass_to_spin,
)

z = RationalFn.identity()
dz = OneForm.dz()


def catenoid_closed_form(w):
    r, th = abs(w), np.angle(w)
    return np.array([-0.5 * (r + 1 / r) * math.cos(th), -0.5 * (r + 1 / r) * math.sin(th),
                     math.log(r)])


def test_catenoid_forms():
    wd = spin_to_weierstrass(catenoid())
    assert wd.g.allclose(z)
    assert wd.phi[0].allclose(OneForm((1 / z ** 2 - 1) * 0.5))
    assert wd.phi[1].allclose(OneForm((1 / z ** 2 + 1) * 0.5j))
    assert wd.phi[2].allclose(dz / z)
    assert wd.conformality_defect() < 1e-12


def test_enneper_forms():
    wd = spin_to_weierstrass(enneper())
    assert wd.phi[2].allclose(z * dz)
    assert wd.g.allclose(z)


def test_equal_spinors_give_zero_phi1():
    s = SpinorialSurface(1 / z, 1 / z, dz, (0j, INF))
    c = phi_values(s, np.array([0.3 + 0.2j]))
    assert abs(c[0, 0]) == 0


def test_weierstrass_to_spin_examples():
    s = weierstrass_to_spin(z, dz / z, (0j, INF))
    assert s.u1.allclose(1 / z) and s.u2.allclose(RationalFn.constant(1))
    s = weierstrass_to_spin(z, z * dz, (INF,))
    assert s.u1.allclose(RationalFn.constant(1)) and s.u2.allclose(z)


def test_weierstrass_to_spin_nonsquare():
    with pytest.raises(NonSquareDivisor):
        weierstrass_to_spin(z, dz, (0j, INF))


def test_immerse_catenoid_oracle():
    s = catenoid()
    np.testing.assert_allclose(immerse(s, 1), [-1, 0, 0], atol=1e-14)
    np.testing.assert_allclose(immerse(s, 1j), [0, -1, 0], atol=1e-12)
    np.testing.assert_allclose(immerse(s, math.e), [-0.5 * (math.e + 1 / math.e), 0, 1], atol=1e-12)


def test_immerse_path_through_pole():
    with pytest.raises(Exception):
        immerse(catenoid(), -1, path=PathContour.line(1, -1))


def test_evaluator_matches_quadrature_and_closed_form():
    s = catenoid()
    ev = SurfaceEvaluator(s)
    rng = np.random.default_rng(3)
    pts = rng.uniform(0.2, 3, 20) * np.exp(1j * rng.uniform(-3, 3, 20))
    for w in pts:
        np.testing.assert_allclose(ev(w), catenoid_closed_form(w), atol=1e-12)
        np.testing.assert_allclose(immerse(s, w), catenoid_closed_form(w), atol=1e-10)


def test_evaluator_rejects_real_periods():
    bad = catenoid().with_theta0(dz * 1j)
    with pytest.raises(PeriodInconsistency):
        SurfaceEvaluator(bad)


def test_two_path_check_catches_period():
    bad = catenoid().with_theta0(dz * 1j)
    with pytest.raises(PeriodInconsistency):
        immerse(bad, -1 + 0.1j, check_paths=True)


def test_flux_catenoid():
    s = catenoid()
    np.testing.assert_allclose(flux_of(s, PathContour.circle()), [0, 0, 2 * math.pi], atol=1e-12)
    np.testing.assert_allclose(flux_of(s, PathContour.circle(turns=2)), [0, 0, 4 * math.pi],
                               atol=1e-12)
    np.testing.assert_allclose(flux_of(enneper(), PathContour.circle(0.3, 2)), 0, atol=1e-12)


def test_flux_homomorphism():
    s = catenoid()
    a = PathContour.circle(0, 0.5)
    b = PathContour.circle(0, 2, start_angle=0.0)
    joined = PathContour.circle(0, 2).concat(PathContour.circle(0, 2))
    assert np.max(np.abs(flux_of(s, joined) - 2 * flux_of(s, b))) < 1e-9
    assert np.max(np.abs(flux_of(s, a) - flux_of(s, b))) < 1e-9


def test_invariants_catalog():
    inv = invariants(catenoid())
    assert (inv.degN, inv.eulerChar, inv.hittingBound) == (1, 0, 6)
    assert inv.endOrders == {0j: 1, INF: 1}
    assert inv.totalCurvature == pytest.approx(-4 * math.pi)
    inv = invariants(enneper())
    assert (inv.degN, inv.eulerChar, inv.endOrders[INF], inv.hittingBound) == (1, 1, 3, 7)
    for d in range(1, 6):
        inv = invariants(enneper(d))
        assert inv.degN == d
        assert inv.totalCurvature == pytest.approx(-4 * math.pi * d)
    assert invariants(enneper(2)).hittingBound == 13


def test_jorge_meeks_violation_on_missing_end():
    # catenoid data declared with only the end at 0
    s = SpinorialSurface(1 / z, RationalFn.constant(1), dz, (0j,))
    with pytest.raises(JorgeMeeksViolation):
        invariants(s)


def test_regularity_checks():
    assert check_regular_complete(catenoid()).passed
    rep = check_regular_complete(catenoid().with_theta0(dz * 1j))
    assert not rep.periods_vanish
    assert rep.real_periods[0j][2] == pytest.approx(-2 * math.pi)
    rep = check_regular_complete(SpinorialSurface(z, z, dz, (INF,)))
    assert not rep.immersed and not rep.passed


def test_validate_rejects_pole_outside_ends():
    s = SpinorialSurface(1 / z, RationalFn.constant(1), dz, (INF,))
    with pytest.raises(InvalidSpinorialData):
        spin_to_weierstrass(s)


def test_gauss_map_unit_and_vertical_at_zero():
    N = gauss_map(catenoid(), np.array([0.0 + 1e-300j, 1.0, 1j]))
    np.testing.assert_allclose(np.linalg.norm(N, axis=-1), 1)
    np.testing.assert_allclose(N[1], [1, 0, 0], atol=1e-15)


def test_catalog_roundtrip_and_env(tmp_path, monkeypatch):
    cat = load_catalog()
    assert {"catenoid", "enneper", "enneper_d2", "enneper_d5"} <= set(cat)
    for name, (s, prov) in cat.items():
        assert prov
        assert check_regular_complete(s).passed
        again = SpinorialSurface.from_json(json.loads(json.dumps(s.to_json())))
        assert invariants(again) == invariants(s)
    p = tmp_path / "cat.json"
    p.write_text(json.dumps({"surfaces": {"only": {"surface": catenoid().to_json()}}}))
    monkeypatch.setenv("FTC_CATALOG_PATH", str(p))
    assert list(load_catalog()) == ["only"]


def test_conformality_identity_for_random_spinors():
    rng = np.random.default_rng(0)
    for _ in range(20):
        a = RationalFn(rng.normal(size=3) + 1j * rng.normal(size=3), [rng.normal() + 1j, 1])
        b = RationalFn(rng.normal(size=2) + 1j * rng.normal(size=2))
        s = SpinorialSurface(a, b, dz, (INF,))
        phi = [f.coefficient for f in (s.eta1 - s.eta2, s.eta1 + s.eta2, s.u1 * s.u2 * dz)]
        q = (phi[0] * 0.5) ** 2 + (phi[1] * 0.5j) ** 2 + phi[2] ** 2
        assert q.is_zero() or q.num.norm() < 1e-10


@settings(max_examples=25, deadline=None)
@given(st.floats(0.2, 4), st.floats(-3.1, 3.1), st.floats(0.2, 4), st.floats(-3.1, 3.1))
def test_path_independence(r1, t1, r2, t2):
    for s in (catenoid(), enneper(2)):
        w = r1 * np.exp(1j * t1)
        mid = r2 * np.exp(1j * t2)
        if min(abs(w), abs(mid)) < 0.2:
            continue
        other = PathContour.polyline([1, mid, w])
        if other.distance_to(0) < 0.05:
            continue
        a = immerse(s, w)
        b = immerse(s, w, path=other)
        assert np.max(np.abs(a - b)) < 1e-8 * (1 + np.max(np.abs(a)))


def test_spin_weierstrass_roundtrip():
    for s in (catenoid(), enneper(), enneper(3)):
        wd = spin_to_weierstrass(s)
        back = weierstrass_to_spin(wd.g, wd.phi[2], s.ends)
        wd2 = spin_to_weierstrass(back)
        assert wd2.g.allclose(wd.g)
        assert wd2.phi[2].allclose(wd.phi[2]) or wd2.phi[2].allclose(-wd.phi[2])


def test_surface_points_enneper_origin():
    np.testing.assert_allclose(surface_points(enneper(), np.array([0j]))[0], 0, atol=1e-14)
