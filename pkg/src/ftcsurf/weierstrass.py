"""Spinorial and Weierstrass data of genus-zero minimal surfaces.

A surface is given by rational functions u1, u2 and a meromorphic 1-form theta0
on the sphere together with a finite set of ends E.  The spinor forms are
eta_j = u_j^2 theta0 and the Weierstrass forms are

    phi1 = (eta1 - eta2) / 2,  phi2 = i (eta1 + eta2) / 2,  phi3 = u1 u2 theta0,

with Gauss map g = u2 / u1.  The immersion is X = X0 + Re int_{p0}^z (phi1, phi2, phi3).
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .errors import (
    FTCError, InvalidSpinorialData, JorgeMeeksViolation, PeriodInconsistency, PoleOnPath,
)
from .meromorphic import (
    INF, OneForm, PathContour, Primitive, RationalFn, as_point, integrate_contour,
    point_to_json, same_point,
)

PERIOD_ATOL = 1e-10
PATH_AGREEMENT_TOL = 1e-8
CONFORMAL_ATOL = 1e-10
EULER_CHAR_SPHERE = 2
CATALOG_ENV = "FTC_CATALOG_PATH"


@dataclass(frozen=True)
class SpinorialSurface:
    u1: RationalFn
    u2: RationalFn
    theta0: OneForm
    ends: tuple
    basepoint: object = 1 + 0j
    X0: tuple = (0.0, 0.0, 0.0)
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "u1", RationalFn.coerce(self.u1))
        object.__setattr__(self, "u2", RationalFn.coerce(self.u2))
        if not isinstance(self.theta0, OneForm):
            object.__setattr__(self, "theta0", OneForm(self.theta0))
        ends = []
        for e in self.ends:
            e = as_point(e)
            if not any(same_point(e, q) for q in ends):
                ends.append(e)
        object.__setattr__(self, "ends", tuple(ends))
        object.__setattr__(self, "basepoint", as_point(self.basepoint))
        x0 = tuple(float(v) for v in self.X0)
        if len(x0) != 3:
            raise InvalidSpinorialData("X0 must have three components")
        object.__setattr__(self, "X0", x0)

    @property
    def eta1(self) -> OneForm:
        return self.u1 ** 2 * self.theta0

    @property
    def eta2(self) -> OneForm:
        return self.u2 ** 2 * self.theta0

    @property
    def finite_ends(self) -> list:
        return [e for e in self.ends if e is not INF]

    def is_end(self, p) -> bool:
        p = as_point(p)
        return any(same_point(p, e) for e in self.ends)

    def with_theta0(self, theta0: OneForm) -> "SpinorialSurface":
        return SpinorialSurface(self.u1, self.u2, theta0, self.ends, self.basepoint, self.X0,
                                self.name)

    def with_X0(self, X0) -> "SpinorialSurface":
        return SpinorialSurface(self.u1, self.u2, self.theta0, self.ends, self.basepoint,
                                tuple(X0), self.name)

    def validate(self):
        """Raise InvalidSpinorialData unless the defining invariants hold."""
        problems = spinorial_problems(self)
        if problems:
            raise InvalidSpinorialData("; ".join(problems))

    # -- serialization ----------------------------------------------------
    def to_json(self) -> dict:
        out = {
            "ends": [point_to_json(e) for e in self.ends],
            "u1": self.u1.to_json(),
            "u2": self.u2.to_json(),
            "theta0": self.theta0.to_json(),
            "basepoint": point_to_json(self.basepoint),
            "X0": list(self.X0),
        }
        if self.name:
            out["name"] = self.name
        return out

    @classmethod
    def from_json(cls, data) -> "SpinorialSurface":
        if not isinstance(data, dict):
            raise InvalidSpinorialData("surface JSON must be an object")
        missing = [k for k in ("ends", "u1", "u2", "theta0") if k not in data]
        if missing:
            raise InvalidSpinorialData(f"surface JSON is missing {missing}")
        try:
            return cls(
                u1=RationalFn.from_json(data["u1"]),
                u2=RationalFn.from_json(data["u2"]),
                theta0=OneForm.from_json(data["theta0"]),
                ends=tuple(as_point(e) for e in data["ends"]),
                basepoint=as_point(data.get("basepoint", [1.0, 0.0])),
                X0=tuple(data.get("X0", (0.0, 0.0, 0.0))),
                name=str(data.get("name", "")),
            )
        except (TypeError, ValueError, KeyError) as exc:
            raise InvalidSpinorialData(f"bad surface JSON: {exc}") from exc


@dataclass(frozen=True)
class WeierstrassData:
    g: RationalFn
    phi: tuple

    def conformality_defect(self) -> float:
        """Largest coefficient of phi1^2 + phi2^2 + phi3^2 (should vanish)."""
        c = [p.coefficient for p in self.phi]
        q = c[0] * c[0] + c[1] * c[1] + c[2] * c[2]
        return 0.0 if q.is_zero() else q.num.norm()


@dataclass
class SurfaceInvariants:
    degN: int
    totalCurvature: float
    eulerChar: int
    endOrders: dict
    hittingBound: int

    def to_json(self) -> dict:
        return {
            "degN": self.degN,
            "totalCurvature": self.totalCurvature,
            "eulerChar": self.eulerChar,
            "endOrders": [{"point": point_to_json(p), "I": i} for p, i in self.endOrders.items()],
            "hittingBound": self.hittingBound,
        }


@dataclass
class RegularityReport:
    common_zeros: list = field(default_factory=list)
    effective_poles: dict = field(default_factory=dict)
    real_periods: dict = field(default_factory=dict)
    nonflat: bool = True
    stray_poles: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def immersed(self) -> bool:
        return not self.common_zeros

    @property
    def complete(self) -> bool:
        return all(self.effective_poles.values()) and not self.stray_poles

    @property
    def periods_vanish(self) -> bool:
        return all(np.max(np.abs(v)) <= PERIOD_ATOL for v in self.real_periods.values())

    @property
    def passed(self) -> bool:
        return self.immersed and self.complete and self.periods_vanish and self.nonflat

    def failures(self) -> list:
        out = []
        if self.common_zeros:
            out.append("common zeros of eta1, eta2 off the ends: "
                       + ", ".join(str(point_to_json(p)) for p in self.common_zeros))
        if self.stray_poles:
            out.append("poles off the ends: "
                       + ", ".join(str(point_to_json(p)) for p in self.stray_poles))
        for e, ok in self.effective_poles.items():
            if not ok:
                out.append(f"no effective pole at end {point_to_json(e)}")
        for e, v in self.real_periods.items():
            if np.max(np.abs(v)) > PERIOD_ATOL:
                out.append(f"nonzero real period {np.round(v, 12).tolist()} around end "
                           f"{point_to_json(e)}")
        if not self.nonflat:
            out.append("Gauss map is constant (flat surface)")
        return out + list(self.notes)

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "common_zeros": [point_to_json(p) for p in self.common_zeros],
            "stray_poles": [point_to_json(p) for p in self.stray_poles],
            "effective_poles": [{"point": point_to_json(e), "ok": bool(v)}
                                for e, v in self.effective_poles.items()],
            "real_periods": [{"point": point_to_json(e), "period": [float(x) for x in v]}
                             for e, v in self.real_periods.items()],
            "nonflat": self.nonflat,
            "failures": self.failures(),
        }


# -- conversions ------------------------------------------------------------

def _forms(s: SpinorialSurface):
    e1, e2 = s.eta1, s.eta2
    phi1 = (e1 - e2) * 0.5
    phi2 = (e1 + e2) * 0.5j
    phi3 = (s.u1 * s.u2) * s.theta0
    return phi1, phi2, phi3


def _pole_points(form: OneForm) -> list:
    pts = [a for a, _ in form.coefficient.pole_clusters()]
    if not form.is_zero() and form.order_at(INF) < 0:
        pts.append(INF)
    return pts


def spinorial_problems(s: SpinorialSurface) -> list:
    problems = []
    if s.u1.is_zero() or s.u2.is_zero() or s.theta0.is_zero():
        return ["u1, u2 and theta0 must be nonzero"]
    for name, eta in (("eta1", s.eta1), ("eta2", s.eta2)):
        for p in _pole_points(eta):
            if not s.is_end(p):
                problems.append(f"{name} has a pole at {point_to_json(p)} outside the ends")
    for p in common_zeros(s):
        problems.append(f"eta1 and eta2 share a zero at {point_to_json(p)}")
    for e in s.ends:
        if max(-s.eta1.order_at(e), -s.eta2.order_at(e)) < 1:
            problems.append(f"end {point_to_json(e)} is not a pole of eta1 or eta2")
    p0 = s.basepoint
    if s.is_end(p0):
        problems.append("basepoint is an end")
    elif p0 is INF:
        problems.append("basepoint at infinity is not supported")
    else:
        prod = s.u1 * s.u2
        if any(same_point(p0, a) for a in prod.zeros()):
            problems.append("basepoint is a zero of u1*u2")
    return problems


def common_zeros(s: SpinorialSurface) -> list:
    d1 = s.eta1.divisor()
    d2 = s.eta2.divisor()
    out = []
    for p, n in d1.zeros():
        if d2.order_at(p) > 0 and not s.is_end(p):
            out.append(p)
    return out


def spin_to_weierstrass(s: SpinorialSurface) -> WeierstrassData:
    s.validate()
    phi = _forms(s)
    return WeierstrassData(g=s.u2 / s.u1, phi=phi)


def weierstrass_to_spin(g: RationalFn, phi3: OneForm, ends, theta0: OneForm | None = None,
                        basepoint=1 + 0j, X0=(0.0, 0.0, 0.0), name: str = "") -> SpinorialSurface:
    """Spinorial data with u1 u2 theta0 = phi3 and u2 / u1 = g.

    u1 is the rational square root of phi3 / (g theta0); NonSquareDivisor is
    raised when that quotient has a zero or pole of odd order.
    """
    g = RationalFn.coerce(g)
    theta0 = OneForm.dz() if theta0 is None else theta0
    if g.is_zero():
        raise InvalidSpinorialData("Gauss map must not vanish identically")
    ratio = (phi3 / theta0) / g
    u1 = ratio.sqrt()
    u2 = g * u1
    return SpinorialSurface(u1, u2, theta0, tuple(ends), basepoint, X0, name)


def gauss_map(s: SpinorialSurface, z):
    """Unit normal N(z) from the stereographic Gauss map g = u2/u1."""
    g = np.asarray((s.u2 / s.u1).evaluate(z, check=False), dtype=complex)
    a = np.abs(g) ** 2
    out = np.stack([2 * g.real, 2 * g.imag, a - 1.0], axis=-1) / (a + 1.0)[..., None]
    return out


def phi_values(s: SpinorialSurface, z):
    """Coefficients of (phi1, phi2, phi3) at points z, shape z.shape + (3,)."""
    z = np.asarray(z, dtype=complex)
    u1 = s.u1.evaluate(z, check=False)
    u2 = s.u2.evaluate(z, check=False)
    t = s.theta0.coefficient.evaluate(z, check=False)
    a, b = u1 * u1 * t, u2 * u2 * t
    return np.stack([0.5 * (a - b), 0.5j * (a + b), u1 * u2 * t], axis=-1)


# -- immersion ----------------------------------------------------------------

def _phi_poles(s: SpinorialSurface) -> list:
    pts = []
    for f in _forms(s):
        pts += [a for a, _ in f.coefficient.pole_clusters()]
    return pts


def _clearance(path: PathContour, poles) -> float:
    return min((path.distance_to(p) for p in poles), default=math.inf)


def default_path(s: SpinorialSurface, z: complex, poles=None) -> PathContour:
    """Straight segment from the basepoint, bent around poles when it passes too close."""
    p0 = complex(s.basepoint)
    z = complex(z)
    poles = _phi_poles(s) if poles is None else poles
    straight = PathContour.line(p0, z) if z != p0 else PathContour.line(p0, p0)
    span = abs(z - p0)
    want = 0.25 * min([span] + [abs(p - z) for p in poles] + [abs(p - p0) for p in poles])
    if _clearance(straight, poles) >= want:
        return straight
    best, best_c = straight, _clearance(straight, poles)
    normal = 1j * (z - p0) / span
    mid = 0.5 * (p0 + z)
    for k in (0.5, -0.5, 1.0, -1.0, 2.0, -2.0):
        cand = PathContour.polyline([p0, mid + k * span * normal, z])
        c = _clearance(cand, poles)
        if c > best_c:
            best, best_c = cand, c
        if c >= want:
            return cand
    return best


def immerse(s: SpinorialSurface, z, path: PathContour | None = None, check_paths: bool = False,
            rtol: float = 1e-12) -> np.ndarray:
    """X(z) = X0 + Re int_path (phi1, phi2, phi3), path from the basepoint to z."""
    z = as_point(z)
    if z is INF or s.is_end(z):
        raise PoleOnPath("cannot evaluate the immersion at an end")
    phi = _forms(s)
    if path is None:
        path = default_path(s, z)
    if not same_point(path.start, complex(s.basepoint), 1e-12):
        raise ValueError("integration path must start at the basepoint")
    if not same_point(path.end, z, 1e-12):
        raise ValueError("integration path must end at the evaluation point")
    X = np.array(s.X0) + np.real(integrate_contour(phi, path, rtol))
    if check_paths:
        alt = _alternative_path(s, z, path)
        Y = np.array(s.X0) + np.real(integrate_contour(phi, alt, rtol))
        scale = 1.0 + float(np.max(np.abs(X)))
        if np.max(np.abs(X - Y)) > PATH_AGREEMENT_TOL * scale:
            raise PeriodInconsistency(
                f"two paths to {z} disagree by {np.max(np.abs(X - Y)):.3g}")
    return X


def _loop_winding(points, p) -> int:
    ang = np.unwrap(np.angle(np.asarray(points) - p))
    return int(round((ang[-1] - ang[0]) / (2 * np.pi)))


def _alternative_path(s, z, path):
    """A second path to z, preferably differing from ``path`` by a loop around a pole."""
    p0 = complex(s.basepoint)
    poles = _phi_poles(s)
    span = max(abs(z - p0), 1e-3)
    d = (z - p0) / abs(z - p0) if z != p0 else 1.0
    fallback = None
    for k in (0.7, -0.7, 1.5, -1.5, 3.0, -3.0, 0.3, -0.3):
        cand = PathContour.polyline([p0, p0 + 0.5 * (z - p0) + 1j * d * k * span, z])
        if _clearance(cand, poles) <= 1e-3 * span:
            continue
        fallback = fallback or cand
        loop = np.concatenate([path.sample(256), cand.reversed().sample(256)])
        if any(_loop_winding(loop, p) != 0 for p in poles):
            return cand
    return fallback or path


class SurfaceEvaluator:
    """Vectorized immersion via closed-form primitives of the phi_j.

    Valid when every finite residue of every phi_j is real, i.e. when no finite
    end carries a real period; otherwise PeriodInconsistency is raised.
    """

    def __init__(self, s: SpinorialSurface):
        self.surface = s
        self.primitives = [Primitive(f.coefficient) for f in _forms(s)]
        for P in self.primitives:
            P.check_real_residues()
        p0 = complex(s.basepoint)
        self._offset = np.array(s.X0) - np.array([P.real_part(p0) for P in self.primitives])

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        cols = [P.real_part(z) for P in self.primitives]
        return np.stack(cols, axis=-1) + self._offset

    def phi(self, z):
        return phi_values(self.surface, z)


def surface_points(s: SpinorialSurface, z):
    return SurfaceEvaluator(s)(z)


# -- flux, invariants, regularity -------------------------------------------

def flux_of(s: SpinorialSurface, loop: PathContour) -> np.ndarray:
    """(Im of the periods of phi1, phi2, phi3) over a closed loop."""
    if not loop.is_closed(1e-10):
        raise ValueError("flux needs a closed loop")
    return np.imag(integrate_contour(_forms(s), loop))


def _max_pole_order(forms, q) -> int:
    return max((-f.order_at(q) for f in forms if not f.is_zero()), default=0)


def invariants(s: SpinorialSurface) -> SurfaceInvariants:
    phi = _forms(s)
    g = s.u2 / s.u1
    degN = g.degree
    end_orders = {}
    for q in s.ends:
        end_orders[q] = _max_pole_order(phi, q) - 1
    chi_M = EULER_CHAR_SPHERE - len(s.ends)
    rhs = -EULER_CHAR_SPHERE + sum(i + 1 for i in end_orders.values())
    if 2 * degN != rhs:
        raise JorgeMeeksViolation(
            f"2*deg(N) = {2 * degN} but -chi + sum(I+1) = {rhs} for end orders "
            f"{[(point_to_json(p), i) for p, i in end_orders.items()]}")
    return SurfaceInvariants(degN=degN, totalCurvature=-4.0 * math.pi * degN, eulerChar=chi_M,
                             endOrders=end_orders, hittingBound=6 * degN + chi_M)


def end_loops(s: SpinorialSurface) -> dict:
    """One small positively oriented loop per end (clockwise in z for infinity)."""
    fin = s.finite_ends
    loops = {}
    gaps = [abs(a - b) for i, a in enumerate(fin) for b in fin[:i]]
    r = min([1.0] + [0.5 * d for d in gaps])
    for e in fin:
        loops[e] = PathContour.circle(e, r)
    if INF in s.ends:
        R = 2.0 * max([abs(e) for e in fin], default=0.0) + 2.0
        loops[INF] = PathContour.circle(0j, R, clockwise=True)
    return loops


def check_regular_complete(s: SpinorialSurface) -> RegularityReport:
    rep = RegularityReport()
    if s.u1.is_zero() or s.u2.is_zero() or s.theta0.is_zero():
        rep.notes.append("u1, u2 and theta0 must be nonzero")
        rep.nonflat = False
        return rep
    rep.common_zeros = common_zeros(s)
    phi = _forms(s)
    for f in (s.eta1, s.eta2):
        for p in _pole_points(f):
            if not s.is_end(p) and not any(same_point(p, q) for q in rep.stray_poles):
                rep.stray_poles.append(p)
    for e in s.ends:
        rep.effective_poles[e] = max(-s.eta1.order_at(e), -s.eta2.order_at(e)) >= 1
    for e, loop in end_loops(s).items():
        try:
            rep.real_periods[e] = np.real(integrate_contour(phi, loop))
        except FTCError as exc:
            rep.notes.append(f"period around {point_to_json(e)} not computed: {exc}")
            rep.real_periods[e] = np.array([np.nan] * 3)
    g = s.u2 / s.u1
    rep.nonflat = not g.is_constant()
    return rep


# -- catalog --------------------------------------------------------------------

def catenoid() -> SpinorialSurface:
    z = RationalFn.identity()
    return SpinorialSurface(1 / z, RationalFn.constant(1.0), OneForm.dz(), (0j, INF), 1 + 0j,
                            (-1.0, 0.0, 0.0), "catenoid")


def enneper(d: int = 1) -> SpinorialSurface:
    """Enneper-type surface u1 = 1, u2 = z^d, normalized so that X(0) = 0."""
    z = RationalFn.identity()
    x0 = (d / (2 * d + 1), 0.0, 1.0 / (d + 1))
    name = "enneper" if d == 1 else f"enneper_d{d}"
    return SpinorialSurface(RationalFn.constant(1.0), z ** d, OneForm.dz(), (INF,), 1 + 0j, x0,
                            name)


def _read_catalog_json(path=None) -> dict:
    path = path or os.environ.get(CATALOG_ENV)
    if path:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    text = resources.files("ftcsurf").joinpath("data/catalog.json").read_text(encoding="utf-8")
    return json.loads(text)


def load_catalog(path=None) -> dict:
    """Named catalog entries: {name: (surface, provenance)}."""
    data = _read_catalog_json(path)
    entries = data.get("surfaces", data) if isinstance(data, dict) else None
    if not isinstance(entries, dict):
        raise InvalidSpinorialData("catalog JSON must map names to surfaces")
    out = {}
    for name, item in entries.items():
        surf = item.get("surface", item)
        s = SpinorialSurface.from_json({**surf, "name": name})
        out[name] = (s, str(item.get("provenance", "")))
    return out


def catalog_surface(name: str, path=None) -> SpinorialSurface:
    cat = load_catalog(path)
    if name not in cat:
        raise KeyError(f"unknown catalog surface {name!r}; known: {sorted(cat)}")
    return cat[name][0]
