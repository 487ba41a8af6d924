"""Closed planar curves: winding number, cusps, turning number and the |w| <= 2t bound.

Points of the plane are handled internally as complex numbers x + iy.  A curve
is a 1-periodic map t -> gamma(t) given by a callable returning gamma, gamma'
and gamma'' at an array of parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq, minimize_scalar

from .errors import (
    MethodDisagreement, NoRegularNormalField, OddOrderSingularity, PointOnCurve,
    SingularityClassificationError,
)

DEFAULT_SAMPLES = 4096
MAX_SAMPLES = 1 << 20
MAX_STEP_ANGLE = math.pi / 4
ON_CURVE_TOL = 1e-9
CLOSED_TOL = 1e-12
SINGULAR_RTOL = 1e-7
EXPONENT_TOL = 0.1
CUSP_OFFSETS = np.logspace(-4.0, -2.5, 5)


def _as_complex(p) -> complex:
    if isinstance(p, complex):
        return p
    if np.isscalar(p):
        return complex(p)
    x, y = p
    return complex(float(x), float(y))


class PlanarCurve:
    """A closed C^2 curve parametrized over t in [0, 1]."""

    def __init__(self, func, name: str = "", n_samples: int = DEFAULT_SAMPLES, meta=None):
        self.func = func
        self.name = name
        self.n_samples = int(n_samples)
        self.meta = dict(meta or {})
        g, dg, _ = self.eval(np.array([0.0, 1.0]))
        scale = max(1.0, abs(g[0]))
        if abs(g[0] - g[1]) > CLOSED_TOL * scale or abs(dg[0] - dg[1]) > 1e-9 * max(1.0, abs(dg[0])):
            raise ValueError(f"curve {name!r} is not closed: gamma(0) != gamma(1)")

    def eval(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        g, dg, ddg = self.func(t)
        return (np.asarray(g, dtype=complex), np.asarray(dg, dtype=complex),
                np.asarray(ddg, dtype=complex))

    def point(self, t) -> complex:
        return complex(self.eval(t)[0][0])

    def samples(self, n: int | None = None):
        """Return (t, gamma, gamma', gamma'') on n + 1 points including both endpoints."""
        n = self.n_samples if n is None else n
        t = np.linspace(0.0, 1.0, n + 1)
        return (t,) + self.eval(t)

    def reversed(self) -> "PlanarCurve":
        f = self.func

        def rev(t):
            g, dg, ddg = f(1.0 - t)
            return g, -dg, ddg

        return PlanarCurve(rev, self.name + "_rev", self.n_samples, self.meta)

    def bounding_box(self):
        _, g, _, _ = self.samples()
        return g.real.min(), g.real.max(), g.imag.min(), g.imag.max()

    def distance_to(self, p) -> float:
        p = _as_complex(p)
        t, g, _, _ = self.samples()
        i = int(np.argmin(np.abs(g - p)))
        h = 1.0 / (len(t) - 1)
        res = minimize_scalar(lambda s: abs(self.point(s) - p), bounds=(t[i] - h, t[i] + h),
                              method="bounded", options={"xatol": 1e-13})
        # the bounded search stalls near sqrt(eps); finish with Newton on d/dt |gamma - p|^2
        s = float(res.x)
        best = min(float(res.fun), float(np.abs(g[i] - p)))
        for _ in range(20):
            gs, d1, d2 = (v[0] for v in self.eval(s))
            f = (np.conj(gs - p) * d1).real
            fp = abs(d1) ** 2 + (np.conj(gs - p) * d2).real
            if fp <= 0:
                break
            s_new = s - f / fp
            if not (t[i] - 2 * h <= s_new <= t[i] + 2 * h):
                break
            s = s_new
            best = min(best, abs(self.point(s) - p))
        return float(best)

    def to_json(self, n: int = 512) -> dict:
        t = np.linspace(0.0, 1.0, n, endpoint=False)
        g = self.eval(t)[0]
        return {"name": self.name, "points": [[float(z.real), float(z.imag)] for z in g]}


@dataclass(frozen=True)
class CuspPoint:
    t0: float
    location: tuple
    m: int


# -- named generators -------------------------------------------------------------

def _harmonic(coef, k):
    """Curve sum_k coef_k exp(2 pi i k t) with derivatives."""
    coef = np.asarray(coef, dtype=complex)
    k = np.asarray(k, dtype=float)

    def f(t):
        e = np.exp(2j * np.pi * np.outer(t, k))
        w = 2j * np.pi * k
        return e @ coef, e @ (coef * w), e @ (coef * w * w)

    return f


def circle(radius: float = 1.0, center=0j, turns: int = 1) -> PlanarCurve:
    c = _as_complex(center)
    base = _harmonic([radius], [turns])

    def f(t):
        g, dg, ddg = base(t)
        return g + c, dg, ddg

    name = "circle" if turns == 1 else f"circle_x{turns}"
    return PlanarCurve(f, name)


def limacon() -> PlanarCurve:
    # (1 + 2 cos u) e^{iu} = e^{iu} + e^{2iu} + 1
    return PlanarCurve(_harmonic([1.0, 1.0, 1.0], [0, 1, 2]), "limacon")


def cardioid() -> PlanarCurve:
    """2 e^{iu} - e^{2iu}; near t = 0 it is gamma(0) + (u^2, u^3) + O(u^4)."""
    return PlanarCurve(_harmonic([2.0, -1.0], [1, 2]), "cardioid")


def figure_eight() -> PlanarCurve:
    def f(t):
        u = 2 * np.pi * t
        g = np.sin(2 * u) + 1j * np.sin(u)
        dg = 2 * np.pi * (2 * np.cos(2 * u) + 1j * np.cos(u))
        ddg = (2 * np.pi) ** 2 * (-4 * np.sin(2 * u) - 1j * np.sin(u))
        return g, dg, ddg

    return PlanarCurve(f, "figure_eight")


class SupportFunction:
    """Periodic support function h(theta) with its first three derivatives."""

    def __init__(self, derivs, period_turns: int = 1):
        self.derivs = derivs
        self.T = int(period_turns)

    def __call__(self, th):
        return self.derivs(th)

    def rho(self, th):
        h, _, h2, _ = self.derivs(th)
        return h + h2


def trig_support(a0: float, omegas, a, b, period_turns: int) -> SupportFunction:
    """h with h + h'' = a0 + sum a_j cos(w_j th) + b_j sin(w_j th); w_j != 1."""
    om = np.asarray(omegas, dtype=float)
    if np.any(np.abs(om - 1.0) < 1e-12):
        raise ValueError("frequency 1 is resonant for h + h'' = rho")
    c = (np.asarray(a, dtype=float) - 1j * np.asarray(b, dtype=float)) / (1.0 - om * om)

    def derivs(th):
        th = np.asarray(th, dtype=float)
        e = np.exp(1j * np.outer(th, om))
        out = []
        for k in range(4):
            v = (e @ (c * (1j * om) ** k)).real
            out.append(v + (a0 if k == 0 else 0.0))
        return tuple(out)

    return SupportFunction(derivs, period_turns)


def bump_support(c: float = 0.2, amp: float = 1.5, kappa: float = 20.0,
                 centers=(math.pi - 0.5, math.pi + 0.5)) -> SupportFunction:
    """h = c + cos th + amp * sum exp(kappa (cos(th - mu) - 1))."""

    def derivs(th):
        th = np.asarray(th, dtype=float)
        h = c + np.cos(th)
        h1 = -np.sin(th)
        h2 = -np.cos(th)
        h3 = np.sin(th)
        for mu in centers:
            x = th - mu
            s, co = np.sin(x), np.cos(x)
            bb = np.exp(kappa * (co - 1.0))
            q2 = kappa * kappa * s * s - kappa * co
            h = h + amp * bb
            h1 = h1 - amp * kappa * s * bb
            h2 = h2 + amp * q2 * bb
            h3 = h3 + amp * bb * (2 * kappa * kappa * s * co + kappa * s - kappa * s * q2)
        return h, h1, h2, h3

    return SupportFunction(derivs, 1)


def hedgehog(h: SupportFunction, name: str = "hedgehog", reverse: bool = False) -> PlanarCurve:
    """Envelope (h + i h') e^{i th} of the lines with support function h.

    Its normal is e^{i th}, so it always admits a regular normal field with
    turning number T (the number of turns of th); cusps sit at zeros of h + h''.
    """
    T = h.T
    w = 2 * np.pi * T
    sgn = -1.0 if reverse else 1.0

    def f(t):
        th = w * (1.0 - t) if reverse else w * t
        h0, h1, h2, h3 = h(th)
        e = np.exp(1j * th)
        rho = h0 + h2
        drho = h1 + h3
        g = (h0 + 1j * h1) * e
        dg = 1j * rho * e
        ddg = (1j * drho - rho) * e
        return g, sgn * w * dg, w * w * ddg

    return PlanarCurve(f, name, meta={"turns": T})


def fig21() -> PlanarCurve:
    """Four-cusp curve with turning number 1 and winding number 2 about the origin."""
    return hedgehog(bump_support(), name="fig21", reverse=True)


def from_samples(points, name: str = "samples") -> PlanarCurve:
    """Periodic cubic spline through equally spaced samples of a closed curve."""
    pts = np.array([_as_complex(p) for p in points])
    if len(pts) >= 2 and abs(pts[0] - pts[-1]) <= CLOSED_TOL * max(1.0, abs(pts[0])):
        pts = pts[:-1]
    if len(pts) < 4:
        raise ValueError("need at least four distinct samples")
    t = np.linspace(0.0, 1.0, len(pts) + 1)
    y = np.append(pts, pts[0])
    sx = CubicSpline(t, y.real, bc_type="periodic")
    sy = CubicSpline(t, y.imag, bc_type="periodic")

    def f(s):
        s = np.mod(s, 1.0)
        return (sx(s) + 1j * sy(s), sx(s, 1) + 1j * sy(s, 1), sx(s, 2) + 1j * sy(s, 2))

    return PlanarCurve(f, name)


GENERATORS = {
    "circle": lambda **kw: circle(**kw),
    "doubled_circle": lambda **kw: circle(turns=2, **kw),
    "limacon": lambda **kw: limacon(),
    "cardioid": lambda **kw: cardioid(),
    "figure_eight": lambda **kw: figure_eight(),
    "fig21": lambda **kw: fig21(),
}


def named_curve(name: str, **params) -> PlanarCurve:
    if name not in GENERATORS:
        raise KeyError(f"unknown curve {name!r}; known: {sorted(GENERATORS)}")
    return GENERATORS[name](**params)


def load_curve_json(data) -> PlanarCurve:
    if not isinstance(data, dict):
        raise ValueError("curve JSON must be an object")
    if "generator" in data:
        return named_curve(data["generator"], **data.get("params", {}))
    if "points" in data:
        return from_samples(data["points"], name=str(data.get("name", "samples")))
    raise ValueError("curve JSON needs 'points' or 'generator'")


def random_trig_curve(rng: np.random.Generator, max_terms: int = 4) -> PlanarCurve:
    """Random trigonometric-polynomial hedgehog with cusps or without."""
    T = int(rng.integers(1, 4))
    J = int(rng.integers(1, max_terms + 1))
    js = [j for j in range(1, J + T + 1) if j != T][:J]
    om = np.array(js, dtype=float) / T
    a = rng.normal(size=len(js))
    b = rng.normal(size=len(js))
    a0 = float(rng.uniform(-1.0, 3.0))
    return hedgehog(trig_support(a0, om, a, b, T), name=f"trig_T{T}",
                    reverse=bool(rng.integers(0, 2)))


def cusps_well_separated(c: PlanarCurve, n: int = 4096, margin: float = 1e-2) -> bool:
    """Reject near-degenerate curves: tiny nonzero speed minima or tangential speed zeros."""
    _, _, dg, _ = c.samples(n)
    s = np.abs(dg[:-1])
    smax = s.max()
    lo = (s < np.roll(s, 1)) & (s <= np.roll(s, -1)) & (s < margin * smax)
    dots = (dg[:-1] * np.conj(np.roll(dg[:-1], -1))).real
    rev = dots < 0
    # every small speed minimum must be an actual reversal (true cusp)
    for i in np.flatnonzero(lo):
        if not (rev[i] or rev[i - 1]):
            return False
    # every singular point must classify as an ordinary cusp
    try:
        detect_cusps(c)
    except SingularityClassificationError:
        return False
    return True


# -- winding number ---------------------------------------------------------------

def _angle_samples(c: PlanarCurve, p: complex):
    n = c.n_samples
    while True:
        t, g, _, _ = c.samples(n)
        d = g - p
        a = np.unwrap(np.angle(d))
        if np.max(np.abs(np.diff(a))) < MAX_STEP_ANGLE or n >= MAX_SAMPLES:
            return t, g, a
        n *= 2


def _ray_crossings(c: PlanarCurve, p: complex, phi: float, t, g):
    """Signed crossings of the ray p + s e^{i phi}, s > 0, with the curve (None if not transversal)."""
    rot = np.exp(-1j * phi)
    q = (g - p) * rot
    im = q.imag
    if np.any(im == 0):
        return None
    idx = np.flatnonzero(np.sign(im[:-1]) != np.sign(im[1:]))
    total = 0
    speed_scale = None
    for i in idx:
        def fim(s):
            return ((c.point(s) - p) * rot).imag

        ts = brentq(fim, t[i], t[i + 1], xtol=1e-15)
        gs, dgs, _ = c.eval(ts)
        qs = (gs[0] - p) * rot
        dqs = dgs[0] * rot
        if qs.real <= 0:
            continue
        if speed_scale is None:
            speed_scale = float(np.max(np.abs(c.samples(1024)[2])))
        if abs(dqs) < 1e-6 * speed_scale or abs(dqs.imag) < 1e-6 * abs(dqs):
            return None
        if qs.real < 1e-9:
            return None
        total += 1 if dqs.imag > 0 else -1
    return total


def winding_number(c: PlanarCurve, p, seed: int = 0) -> int:
    """Winding number by angle accumulation, cross-checked by signed ray crossings."""
    p = _as_complex(p)
    t, g, a = _angle_samples(c, p)
    if np.min(np.abs(g - p)) <= 1e-3 * max(1.0, float(np.max(np.abs(g - p)))):
        if c.distance_to(p) <= ON_CURVE_TOL:
            raise PointOnCurve(f"point {p} lies on the curve")
    w_angle = int(round((a[-1] - a[0]) / (2 * math.pi)))
    rng = np.random.default_rng(seed)
    for _ in range(25):
        phi = float(rng.uniform(0, 2 * math.pi))
        w_ray = _ray_crossings(c, p, phi, t, g)
        if w_ray is not None:
            break
    else:
        raise MethodDisagreement("no transversal ray found for the crossing count")
    if w_ray != w_angle:
        raise MethodDisagreement(
            f"angle accumulation gives {w_angle}, ray crossings give {w_ray} (undersampled?)")
    return w_angle


# -- cusps ---------------------------------------------------------------------------

def _exponent(c: PlanarCurve, t0: float) -> float:
    g0 = c.point(t0)
    slopes = []
    lh = np.log(CUSP_OFFSETS)
    for sgn in (1.0, -1.0):
        d = np.abs(c.eval(t0 + sgn * CUSP_OFFSETS)[0] - g0)
        if np.any(d <= 0):
            raise SingularityClassificationError(f"curve is constant near t={t0}")
        slopes.append(np.polyfit(lh, np.log(d), 1)[0])
    return float(np.mean(slopes))


def detect_cusps(c: PlanarCurve, n: int | None = None) -> list:
    """All singular parameters where gamma turns back, with their order m.

    An even leading exponent 2m gives a cusp; an odd exponent raises
    OddOrderSingularity and anything else SingularityClassificationError.
    """
    n = c.n_samples if n is None else n
    t, _, dg, _ = c.samples(n)
    # periodic view: drop the repeated endpoint and wrap indices
    t, dg = t[:-1], dg[:-1]
    h = 1.0 / n
    s = np.abs(dg)
    smax = float(s.max())
    if smax == 0:
        raise SingularityClassificationError("constant curve")
    cands = [float(x) for x in t[s == 0]]
    nxt = np.roll(dg, -1)
    dots = (dg * np.conj(nxt)).real
    for i in np.flatnonzero(dots < 0):
        ref = dg[i]

        def f(x):
            return (c.eval(x)[1][0] * np.conj(ref)).real

        cands.append(brentq(f, t[i], t[i] + h, xtol=1e-15))
    mins = np.flatnonzero((s <= np.roll(s, 1)) & (s <= np.roll(s, -1)) & (s < 1e-2 * smax))
    for i in mins:
        res = minimize_scalar(lambda x: abs(c.eval(x)[1][0]), bounds=(t[i] - h, t[i] + h),
                              method="bounded", options={"xatol": 1e-15})
        cands.append(float(res.x))
    found = []
    for t0 in sorted(x % 1.0 for x in cands):
        if any(min(abs(t0 - u), 1 - abs(t0 - u)) < 1e-6 for u in found):
            continue
        if abs(c.eval(t0)[1][0]) > SINGULAR_RTOL * smax:
            continue
        found.append(t0)
    cusps = []
    for t0 in found:
        e = _exponent(c, t0)
        k = int(round(e))
        if abs(e - k) > EXPONENT_TOL or k < 2:
            raise SingularityClassificationError(
                f"singular point at t={t0:.9f} has non-integer exponent {e:.3f}")
        if k % 2:
            raise OddOrderSingularity(
                f"singular point at t={t0:.9f} has odd leading exponent {k}")
        loc = c.point(t0)
        cusps.append(CuspPoint(t0=float(t0), location=(loc.real, loc.imag), m=k // 2))
    return cusps


# -- turning number ----------------------------------------------------------------

def _normal_angles(c: PlanarCurve, cusps, n: int):
    t, _, dg, _ = c.samples(n)
    s = np.abs(dg)
    keep = s > 1e-9 * s.max()
    flips = np.zeros(len(t))
    for cp in cusps:
        flips += t > cp.t0
    sign = np.where(flips % 2 == 0, 1.0, -1.0)
    u = sign[keep] * dg[keep] / s[keep]
    ang = np.unwrap(np.angle(1j * u))
    return t[keep], ang


def turning_number(c: PlanarCurve, require_regular: bool = True, cusps=None) -> int:
    """Absolute degree of a regular normal field continued through the cusps."""
    if cusps is None:
        try:
            cusps = detect_cusps(c)
        except OddOrderSingularity as exc:
            raise NoRegularNormalField(str(exc)) from exc
    if len(cusps) % 2:
        raise NoRegularNormalField(
            f"{len(cusps)} cusps: the continued normal field is not periodic")
    n = c.n_samples
    while True:
        t, ang = _normal_angles(c, cusps, n)
        d = np.diff(ang)
        if np.max(np.abs(d)) < MAX_STEP_ANGLE or n >= MAX_SAMPLES:
            break
        n *= 2
    total = ang[-1] - ang[0]
    deg = total / (2 * math.pi)
    if abs(deg - round(deg)) > 1e-6:
        raise NoRegularNormalField(f"normal field does not close up (degree {deg:.6f})")
    if require_regular:
        tol = 1e-9 * np.max(np.abs(d))
        if np.min(d) < -tol and np.max(d) > tol:
            raise NoRegularNormalField("normal angle is not monotone (curve has an inflection)")
    return abs(int(round(deg)))


# -- the |w| <= 2t bound -------------------------------------------------------------

@dataclass
class Prop24Report:
    curve_id: str
    w: int
    t: int
    passed: bool
    arcs: list = field(default_factory=list)  # (t_start, t_end, contribution)
    rotation: float = 0.0

    @property
    def decomposition_ok(self) -> bool:
        return (all(abs(a[2]) <= 1 for a in self.arcs)
                and sum(a[2] for a in self.arcs) == self.w
                and len(self.arcs) == 2 * self.t)

    def csv_row(self) -> str:
        return f"{self.curve_id},{self.w},{self.t},{'pass' if self.passed else 'fail'}"

    def to_json(self) -> dict:
        return {"curve": self.curve_id, "w": self.w, "t": self.t,
                "pass": self.passed, "rotation": self.rotation,
                "arcs": [{"t_start": a, "t_end": b, "contribution": k} for a, b, k in self.arcs]}


def _crossing_decomposition(c: PlanarCurve, p: complex, cusps, phi: float):
    rot = np.exp(-1j * phi)
    n = c.n_samples
    while True:
        t, ang = _normal_angles(c, cusps, n)
        if np.max(np.abs(np.diff(ang))) < MAX_STEP_ANGLE or n >= MAX_SAMPLES:
            break
        n *= 2
    ang = ang - phi
    # normal horizontal in the rotated frame <=> angle crosses a multiple of pi
    k = np.floor(ang / math.pi)
    splits = []
    for i in np.flatnonzero(np.diff(k) != 0):
        lvl = max(k[i], k[i + 1]) * math.pi
        frac = (lvl - ang[i]) / (ang[i + 1] - ang[i])
        splits.append(float(t[i] + frac * (t[i + 1] - t[i])))
    # vertical ray upward from p in the rotated frame
    tt, g, dg, _ = c.samples(n)
    q = (g - p) * rot
    re = q.real
    crossings = []
    for i in np.flatnonzero(np.sign(re[:-1]) != np.sign(re[1:])):
        def fre(s):
            return ((c.point(s) - p) * rot).real

        if re[i] == 0:
            ts = tt[i]
        else:
            ts = brentq(fre, tt[i], tt[i + 1], xtol=1e-15)
        gs, dgs, _ = c.eval(ts)
        qs = (gs[0] - p) * rot
        if qs.imag <= 0:
            continue
        dq = dgs[0] * rot
        if abs(dq.real) < 1e-9 * abs(dq) or abs(dq) == 0:
            return None
        crossings.append((float(ts), 1 if dq.real < 0 else -1))
    if not splits:
        arcs = [(0.0, 1.0, sum(s for _, s in crossings))]
        return arcs
    arcs = []
    m = len(splits)
    for j in range(m):
        a = splits[j]
        b = splits[(j + 1) % m]
        if j == m - 1:
            contrib = sum(s for ts, s in crossings if ts >= a or ts < b)
        else:
            contrib = sum(s for ts, s in crossings if a <= ts < b)
        arcs.append((a, b, contrib))
    return arcs


def verify_prop24(c: PlanarCurve, p, seed: int = 0, curve_id: str | None = None) -> Prop24Report:
    p = _as_complex(p)
    w = winding_number(c, p, seed=seed)
    try:
        cusps = detect_cusps(c)
    except OddOrderSingularity as exc:
        raise NoRegularNormalField(str(exc)) from exc
    t = turning_number(c, cusps=cusps)
    rng = np.random.default_rng(seed + 1)
    arcs, phi = None, 0.0
    for _ in range(25):
        phi = float(rng.uniform(0, 2 * math.pi))
        arcs = _crossing_decomposition(c, p, cusps, phi)
        if arcs is not None:
            break
    return Prop24Report(curve_id=curve_id or c.name, w=w, t=t, passed=abs(w) <= 2 * t,
                        arcs=arcs or [], rotation=phi)


def random_test_point(c: PlanarCurve, rng: np.random.Generator, margin: float = 1e-3) -> complex:
    x0, x1, y0, y1 = c.bounding_box()
    diam = max(x1 - x0, y1 - y0)
    for _ in range(100):
        p = complex(rng.uniform(x0 - 0.2 * diam, x1 + 0.2 * diam),
                    rng.uniform(y0 - 0.2 * diam, y1 + 0.2 * diam))
        _, g, _, _ = c.samples(1024)
        if np.min(np.abs(g - p)) > 5 * margin * diam and c.distance_to(p) > margin * diam:
            return p
    raise RuntimeError("could not place a test point off the curve")
