import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ftcsurf.errors import NonSquareDivisor, PoleEvaluation, PoleOnPath, RootFindingFailure
from ftcsurf.meromorphic import (
    INF, ComplexPoly, Divisor, OneForm, PathContour, Primitive, RationalFn, divisor_of,
    eval_rational, integrate_contour, integrate_path, residue_at,
)

z = RationalFn.identity()
dz = OneForm.dz()


def test_eval_examples():
    assert eval_rational(z, 2 + 1j) == 2 + 1j
    assert eval_rational(1 / z, 2) == pytest.approx(0.5)
    assert eval_rational((z ** 2 + 1) / (z * (z - 1)), 2) == pytest.approx(2.5)


def test_eval_at_pole_raises():
    with pytest.raises(PoleEvaluation):
        eval_rational(1 / z, 0)
    with pytest.raises(PoleEvaluation):
        eval_rational(1 / (z - 1) ** 2, 1 + 1e-12)


def test_divisor_examples():
    assert divisor_of(z).entries == ((0j, 1), (INF, -1))
    assert divisor_of(dz / z).entries == ((0j, -1), (INF, -1))
    assert divisor_of(z * dz).entries == ((0j, 1), (INF, -3))
    assert divisor_of(dz).order_at(INF) == -2


def test_divisor_degree_of_function_is_zero():
    f = (z - 2) ** 3 * (z + 1j) / ((z - 0.5) ** 2 * (z + 3))
    assert divisor_of(f).degree == 0
    assert divisor_of(f).order_at(2) == 3
    assert divisor_of(f).order_at(0.5) == -2


def test_divisor_json_roundtrip():
    d = divisor_of(z * dz / (z - 1j) ** 2)
    assert Divisor.from_json(d.to_json()).entries == d.entries


def test_residue_examples():
    assert residue_at(dz / z, 0) == pytest.approx(1)
    assert abs(residue_at(dz / z ** 2, 0)) < 1e-15
    assert residue_at((z ** 2 + 1) / (z * (z - 1)) * dz, 1) == pytest.approx(2)
    assert residue_at(dz / z, INF) == pytest.approx(-1)
    assert residue_at(dz, INF) == 0


def test_residue_higher_order_pole():
    # exp-free check: (z+2)/(z-1)^3 has residue equal to the z^2 coefficient of z+3 at w=0 -> 0
    w = (z + 2) / (z - 1) ** 3 * dz
    assert abs(residue_at(w, 1)) < 1e-12
    w = z ** 4 / (z - 1) ** 3 * dz
    # second derivative of z^4 at 1 over 2! = 6
    assert residue_at(w, 1) == pytest.approx(6)


def test_contour_examples():
    assert integrate_contour(dz / z, PathContour.circle()) == pytest.approx(2j * math.pi, abs=1e-12)
    tri = PathContour.polyline([0, 1, 1 + 2j, -3j, 0])
    assert abs(integrate_contour(dz, tri)) < 1e-14
    form = (z ** 2 + 1) / (z * (z - 1)) * dz
    assert integrate_contour(form, PathContour.circle(0, 3)) == pytest.approx(2j * math.pi, abs=1e-10)


def test_pole_on_path():
    with pytest.raises(PoleOnPath):
        integrate_contour(dz / (z - 1), PathContour.circle())


def test_vector_integrand():
    out = integrate_contour([dz / z, z * dz, dz / z ** 2], PathContour.circle(0, 2, turns=2))
    np.testing.assert_allclose(out, [4j * math.pi, 0, 0], atol=1e-12)


def test_reduction_cancels_common_factors():
    f = (z - 1) * (z + 2j) / ((z - 1) * (z - 3))
    assert f.num.degree == 1 and f.den.degree == 1
    assert f(0) == pytest.approx(2j / -3)
    g = (z * z) / z
    assert g.allclose(z)


def test_laurent_at_infinity():
    f = (2 * z ** 3 + 1) / (z - 1)
    nu, c = f.laurent(INF, 3)
    assert nu == -2
    np.testing.assert_allclose(c, [2, 2, 2], atol=1e-14)


def test_sqrt():
    f = (z - 1) ** 2 / (z + 1j) ** 4
    r = f.sqrt()
    assert (r * r).allclose(f, 1e-12)
    with pytest.raises(NonSquareDivisor):
        (z / (z - 1) ** 2).sqrt()


def test_multiple_roots_clustered():
    p = ComplexPoly.from_roots([0.3, 0.3, 0.3, 1j])
    cl = p.root_clusters()
    mult = {round(c.real, 6) + 1j * round(c.imag, 6): m for c, m in cl}
    assert mult == {0.3: 3, 1j: 1}
    triple = [c for c, m in cl if m == 3][0]
    assert abs(triple - 0.3) < 1e-12


def test_zero_poly_roots_raise():
    with pytest.raises(RootFindingFailure):
        ComplexPoly([0]).roots()


def test_json_roundtrip_rational():
    f = (z ** 2 + 1j) / (z - 0.25)
    g = RationalFn.from_json(f.to_json())
    assert g.allclose(f, 0)


def test_primitive_matches_quadrature():
    f = (z ** 3 + 2) / (z * (z - 1) ** 2)
    P = Primitive(f)
    path = PathContour.polyline([0.5 + 1j, 2 + 2j, 3 - 1j])
    quad = integrate_contour(OneForm(f), path)
    closed = P.value(path.end) - P.value(path.start)
    assert abs(quad - closed) < 1e-10


def _random_form(rng, npoles):
    poles = rng.uniform(-2, 2, npoles) + 1j * rng.uniform(-2, 2, npoles)
    deg = int(rng.integers(0, npoles + 2))
    num = ComplexPoly(rng.normal(size=deg + 1) + 1j * rng.normal(size=deg + 1))
    den = ComplexPoly.from_roots(poles)
    return num, den, poles


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 5))
def test_residue_theorem_and_sphere_sum(seed, npoles):
    rng = np.random.default_rng(seed)
    num, den, poles = _random_form(rng, npoles)
    gaps = [abs(poles[i] - poles[j]) for i in range(npoles) for j in range(i)]
    if gaps and min(gaps) < 0.05:
        return
    form = OneForm(RationalFn(num, den))
    dp = den.deriv()
    # independent residue formula at simple poles
    simple = [num(a) / dp(a) for a in poles]
    lib = [residue_at(form, a) for a in poles]
    np.testing.assert_allclose(lib, simple, atol=1e-7 * (1 + max(map(abs, simple))))
    quad = integrate_contour(form, PathContour.circle(0, 4))
    assert abs(quad - 2j * math.pi * sum(simple)) <= 1e-8 * (1 + abs(quad))
    total = sum(lib) + residue_at(form, INF)
    assert abs(total) <= 1e-8 * (1 + sum(map(abs, lib)))


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 5), st.floats(-3, 3), st.floats(-3, 3))
def test_cauchy_integral_of_simple_pole(r, x, y):
    a = complex(x, y)
    if abs(abs(a) - r) < 1e-3:
        return
    val = integrate_contour(dz / (z - a), PathContour.circle(0, r))
    expect = 2j * math.pi if abs(a) < r else 0
    assert abs(val - expect) < 1e-8


def test_integrate_path_callable():
    val = integrate_path(lambda w: np.exp(w), PathContour.line(0, 1j * math.pi))
    assert abs(val - (cmath.exp(1j * math.pi) - 1)) < 1e-13


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_root_multiplicities_recovered(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, 4))
    centres = rng.uniform(-2, 2, k) + 1j * rng.uniform(-2, 2, k)
    gaps = [abs(centres[i] - centres[j]) for i in range(k) for j in range(i)]
    if gaps and min(gaps) < 0.3:
        return
    mults = rng.integers(1, 5, k)
    p = ComplexPoly.from_roots(np.repeat(centres, mults))
    found = p.root_clusters()
    assert sorted(m for _, m in found) == sorted(mults.tolist())
    for c, m in zip(centres, mults):
        best = min(found, key=lambda t: abs(t[0] - c))
        assert best[1] == m and abs(best[0] - c) < 1e-8


def test_sum_of_forms_with_repeated_poles_cancels():
    a = (z + 0.3) / (z - 1.3 - 1j)
    b = z - 2j
    q = ((a * a - b * b) * 0.5) ** 2 + ((a * a + b * b) * 0.5j) ** 2 + (a * b) ** 2
    assert q.is_zero() or q.num.norm() < 1e-10
