"""Piecewise smooth paths in the plane and adaptive Gauss-Legendre line integrals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import PoleOnPath, QuadratureNonConvergence

GL_ORDER = 20
_GL_X, _GL_W = np.polynomial.legendre.leggauss(GL_ORDER)
# map to [0, 1]
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W

DEFAULT_RTOL = 1e-11
MAX_DEPTH = 48
POLE_CLEARANCE = 1e-12


@dataclass(frozen=True)
class LineSegment:
    a: complex
    b: complex

    def point(self, t):
        t = np.asarray(t, dtype=float)
        return self.a + (self.b - self.a) * t

    def deriv(self, t):
        t = np.asarray(t, dtype=float)
        return np.full(t.shape, self.b - self.a, dtype=complex)

    @property
    def length(self) -> float:
        return abs(self.b - self.a)

    def distance_to(self, p: complex) -> float:
        d = self.b - self.a
        if d == 0:
            return abs(p - self.a)
        s = ((p - self.a) * np.conj(d)).real / abs(d) ** 2
        s = min(max(s, 0.0), 1.0)
        return abs(p - (self.a + s * d))

    def reversed(self):
        return LineSegment(self.b, self.a)


@dataclass(frozen=True)
class ArcSegment:
    """Arc center + radius * exp(i theta) for theta from theta0 to theta1."""

    center: complex
    radius: float
    theta0: float
    theta1: float

    def point(self, t):
        t = np.asarray(t, dtype=float)
        th = self.theta0 + (self.theta1 - self.theta0) * t
        return self.center + self.radius * np.exp(1j * th)

    def deriv(self, t):
        t = np.asarray(t, dtype=float)
        th = self.theta0 + (self.theta1 - self.theta0) * t
        return 1j * (self.theta1 - self.theta0) * self.radius * np.exp(1j * th)

    @property
    def length(self) -> float:
        return abs(self.theta1 - self.theta0) * self.radius

    def distance_to(self, p: complex) -> float:
        rel = p - self.center
        lo, hi = sorted((self.theta0, self.theta1))
        if hi - lo >= 2 * np.pi:
            return abs(abs(rel) - self.radius)
        ang = np.angle(rel) if rel != 0 else lo
        k = np.ceil((lo - ang) / (2 * np.pi))
        ang = ang + 2 * np.pi * k
        if ang <= hi:
            return abs(abs(rel) - self.radius)
        return min(abs(p - self.point(0.0)), abs(p - self.point(1.0)))

    def reversed(self):
        return ArcSegment(self.center, self.radius, self.theta1, self.theta0)


class PathContour:
    """Concatenation of line and arc segments."""

    def __init__(self, segments):
        self.segments = tuple(segments)
        if not self.segments:
            raise ValueError("a path needs at least one segment")

    @classmethod
    def circle(cls, center: complex = 0j, radius: float = 1.0, *,
               clockwise: bool = False, turns: int = 1, start_angle: float = 0.0):
        if radius <= 0:
            raise ValueError("circle radius must be positive")
        sgn = -1.0 if clockwise else 1.0
        segs = [ArcSegment(complex(center), float(radius), start_angle + sgn * 2 * np.pi * k,
                           start_angle + sgn * 2 * np.pi * (k + 1)) for k in range(turns)]
        return cls(segs)

    @classmethod
    def line(cls, a: complex, b: complex):
        return cls([LineSegment(complex(a), complex(b))])

    @classmethod
    def polyline(cls, points):
        pts = [complex(p) for p in points]
        if len(pts) < 2:
            raise ValueError("a polyline needs at least two points")
        return cls([LineSegment(p, q) for p, q in zip(pts[:-1], pts[1:]) if p != q]
                   or [LineSegment(pts[0], pts[-1])])

    def concat(self, other: "PathContour") -> "PathContour":
        return PathContour(self.segments + other.segments)

    def reversed(self) -> "PathContour":
        return PathContour([s.reversed() for s in reversed(self.segments)])

    @property
    def start(self) -> complex:
        return complex(self.segments[0].point(0.0))

    @property
    def end(self) -> complex:
        return complex(self.segments[-1].point(1.0))

    @property
    def length(self) -> float:
        return float(sum(s.length for s in self.segments))

    def is_closed(self, tol: float = 1e-12) -> bool:
        return abs(self.start - self.end) <= tol * (1.0 + abs(self.start))

    def distance_to(self, p: complex) -> float:
        return min(s.distance_to(p) for s in self.segments)

    def sample(self, n_per_segment: int = 64) -> np.ndarray:
        t = np.linspace(0.0, 1.0, n_per_segment)
        return np.concatenate([s.point(t) for s in self.segments])

    def quadrature_nodes(self, panels: int = 32, order: int = GL_ORDER):
        """Fixed composite Gauss-Legendre rule: returns (z, dz) with sum f(z) dz ~ integral."""
        x, w = np.polynomial.legendre.leggauss(order)
        x = 0.5 * (x + 1.0)
        w = 0.5 * w
        edges = np.linspace(0.0, 1.0, panels + 1)
        t = (edges[:-1, None] + np.diff(edges)[:, None] * x[None, :]).ravel()
        wt = (np.diff(edges)[:, None] * w[None, :]).ravel()
        zs, dzs = [], []
        for s in self.segments:
            zs.append(s.point(t))
            dzs.append(s.deriv(t) * wt)
        return np.concatenate(zs), np.concatenate(dzs)


def _panel(f, seg, a, b):
    t = a + (b - a) * _GL_X
    z = seg.point(t)
    vals = np.asarray(f(z), dtype=complex)
    dz = seg.deriv(t) * (b - a) * _GL_W
    if vals.ndim > 1:
        return np.tensordot(dz, vals, axes=(0, 0))
    return np.dot(vals, dz)


def _seg_integral(f, seg, abs_tol, depth_cap=MAX_DEPTH, noise=0.0):
    total = 0j
    stack = [(0.0, 1.0, _panel(f, seg, 0.0, 1.0), 0)]
    while stack:
        a, b, whole, depth = stack.pop()
        m = 0.5 * (a + b)
        left = _panel(f, seg, a, m)
        right = _panel(f, seg, m, b)
        err = np.max(np.abs(left + right - whole))
        # rounding floor: cannot resolve below a few ulps of the panel values
        floor = 64 * np.finfo(float).eps * float(np.max(np.abs(left) + np.abs(right)))
        local_tol = max(abs_tol * (b - a), floor, noise * (b - a), 1e-300)
        if err <= local_tol:
            total = total + left + right
            continue
        if depth >= depth_cap:
            raise QuadratureNonConvergence(
                f"adaptive quadrature did not converge (error {err:.3g} at depth {depth})")
        stack.append((a, m, left, depth + 1))
        stack.append((m, b, right, depth + 1))
    return total


def integrate_path(f, path: PathContour, rtol: float = DEFAULT_RTOL, poles=()):
    """Integrate f(z) dz along a path with adaptive Gauss-Legendre.

    ``f`` maps an array of points to an array of values whose first axis matches
    the points (extra trailing axes give vector integrands).  Points in ``poles``
    must keep a positive distance from the path.
    """
    for p in poles:
        d = path.distance_to(complex(p))
        if d <= POLE_CLEARANCE * (1.0 + abs(p)):
            raise PoleOnPath(f"pole {complex(p)} lies on the integration path (distance {d:.3g})")
    # scale estimate from a fixed rule, used to turn rtol into an absolute tolerance
    z, dz = path.quadrature_nodes(panels=16)
    vals = np.asarray(f(z), dtype=complex)
    if vals.ndim > 1:
        est = np.tensordot(dz, vals, axes=(0, 0))
        l1 = np.tensordot(np.abs(dz), np.abs(vals), axes=(0, 0))
    else:
        est = np.dot(vals, dz)
        l1 = np.dot(np.abs(vals), np.abs(dz))
    scale = max(float(np.max(np.abs(est))), float(np.max(l1)) * 1e-3, 1e-300)
    abs_tol = rtol * scale
    # values that cancel to zero still carry rounding noise of the typical magnitude
    mean_abs = float(np.max(l1)) / max(float(np.sum(np.abs(dz))), 1e-300)
    total = 0j
    for seg in path.segments:
        noise = 64 * np.finfo(float).eps * mean_abs * seg.length
        total = total + _seg_integral(f, seg, abs_tol, noise=noise)
    if np.ndim(total) == 0:
        return complex(total)
    return np.asarray(total)


def integrate_contour(omega, path: PathContour, rtol: float = DEFAULT_RTOL):
    """Integral of a 1-form (OneForm or sequence of OneForms) along a path."""
    from .rational import OneForm

    if isinstance(omega, OneForm):
        coef = omega.coefficient
        return integrate_path(lambda z: coef.evaluate(z, check=False), path, rtol,
                              poles=coef.poles())
    forms = list(omega)
    coefs = [w.coefficient for w in forms]
    poles = [p for c in coefs for p in c.poles()]

    def f(z):
        return np.stack([c.evaluate(z, check=False) for c in coefs], axis=-1)

    return integrate_path(f, path, rtol, poles=poles)
