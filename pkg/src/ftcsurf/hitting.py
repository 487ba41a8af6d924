"""Counting preimages of straight lines on minimal surfaces, and against-sets.

A line L = {b + s d} meets X(M) at z exactly when the component of X(z) - b
orthogonal to d vanishes.  That is two real equations in the two real
coordinates of z, solved by damped Newton from seeds spread over a region
that excludes small disks around the ends.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import FlatSurface, ParameterOutOfRange, RegionTooSmall
from .meromorphic import INF, point_to_json
from .weierstrass import SpinorialSurface, SurfaceEvaluator, gauss_map, invariants

ROOT_CAP = 50
DEDUPE_TOL = 1e-7
RESIDUAL_TOL = 1e-9
NEWTON_STEPS = 60
TANGENCY_TOL = 1e-6
BOUNDARY_MARGIN = 1.0
GRID_N = 25
AGAINST_ANGLE = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class Line3:
    base: tuple
    direction: tuple

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float)
        n = np.linalg.norm(d)
        if n == 0 or not np.isfinite(n):
            raise ValueError("line direction must be a nonzero vector")
        object.__setattr__(self, "direction", tuple(float(x) for x in d / n))
        object.__setattr__(self, "base", tuple(float(x) for x in self.base))

    @classmethod
    def parse(cls, text: str) -> "Line3":
        """Parse 'x,y,z:dx,dy,dz'."""
        try:
            a, b = text.split(":")
            base = [float(v) for v in a.split(",")]
            d = [float(v) for v in b.split(",")]
        except ValueError as exc:
            raise ValueError(f"bad line spec {text!r}; expected x,y,z:dx,dy,dz") from exc
        if len(base) != 3 or len(d) != 3:
            raise ValueError(f"bad line spec {text!r}; expected x,y,z:dx,dy,dz")
        return cls(tuple(base), tuple(d))

    def frame(self):
        """Orthonormal e1, e2 spanning the plane orthogonal to the direction."""
        d = np.array(self.direction)
        k = int(np.argmin(np.abs(d)))
        a = np.zeros(3)
        a[k] = 1.0
        e1 = a - d * d[k]
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(d, e1)
        return e1, e2

    def distance(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        rel = X - np.array(self.base)
        along = rel @ np.array(self.direction)
        return np.linalg.norm(rel - along[..., None] * np.array(self.direction), axis=-1)

    def to_json(self) -> dict:
        return {"base": list(self.base), "direction": list(self.direction)}


def random_line(rng: np.random.Generator, box: float = 3.0) -> Line3:
    base = rng.uniform(-box, box, 3)
    d = rng.normal(size=3)
    return Line3(tuple(base), tuple(d))


@dataclass
class SearchRegion:
    """Disk |z| <= outer (or the whole plane) minus disks |z - e| < radius around finite ends."""

    holes: dict
    outer: float | None

    def contains(self, z, slack: float = 0.0) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        ok = np.ones(z.shape, dtype=bool)
        for e, r in self.holes.items():
            ok &= np.abs(z - e) >= r * (1.0 - slack)
        if self.outer is not None:
            ok &= np.abs(z) <= self.outer * (1.0 + slack)
        return ok

    def to_json(self) -> dict:
        return {"holes": [{"center": point_to_json(e), "radius": r} for e, r in self.holes.items()],
                "outer_radius": self.outer}


@dataclass
class HitReport:
    preimages: list
    count: int
    bound: int
    searchRegion: dict
    certificateStatus: str
    multiplicities: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    newton: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "count": self.count,
            "bound": self.bound,
            "status": self.certificateStatus,
            "preimages": [{"z": [float(z.real), float(z.imag)], "X": [float(v) for v in X],
                           "distance": float(d), "seeds": int(m)}
                          for (z, X, d), m in zip(self.preimages, self.multiplicities)],
            "search_region": self.searchRegion,
            "warnings": self.warnings,
            "newton": self.newton,
            "provenance": self.provenance,
        }


# -- bound ------------------------------------------------------------------------

def hitting_bound(s: SpinorialSurface) -> int:
    if (s.u2 / s.u1).is_constant():
        raise FlatSurface("Gauss map is constant; the line-hitting bound does not apply")
    inv = invariants(s)
    a = 6 * inv.degN + inv.eulerChar
    b = -3.0 / (2.0 * math.pi) * inv.totalCurvature + inv.eulerChar
    if abs(a - b) > 1e-9:
        raise AssertionError(f"bound expressions disagree: {a} vs {b}")
    return a


# -- region selection ---------------------------------------------------------------

def _circle_min_distance(ev, line, center, r, n=720):
    th = np.linspace(0, 2 * np.pi, n, endpoint=False)
    X = ev(center + r * np.exp(1j * th))
    return float(np.min(line.distance(X)))


def choose_region(s: SpinorialSurface, line: Line3, ev: SurfaceEvaluator, margin=BOUNDARY_MARGIN,
                  start_hole=None, start_outer=None) -> SearchRegion:
    """Shrink the end holes and grow the outer circle until X stays away from L near the ends."""
    fin = s.finite_ends
    gaps = [abs(a - b) for i, a in enumerate(fin) for b in fin[:i]]
    base = min([0.5] + [0.25 * g for g in gaps])
    holes = {}
    for e in fin:
        r = base if start_hole is None else start_hole
        prev = -math.inf
        for _ in range(60):
            d = _circle_min_distance(ev, line, e, r)
            d_in = _circle_min_distance(ev, line, e, 0.5 * r)
            if d >= margin and d_in >= d and d >= prev:
                break
            prev = d
            r *= 0.5
            if r < 1e-14:
                raise RegionTooSmall(f"cannot isolate the end at {e}: X stays near the line")
        holes[e] = r
    outer = None
    if INF in s.ends:
        R = 2.0 * (1.0 + max([abs(e) for e in fin], default=0.0))
        if start_outer is not None:
            R = max(R, start_outer)
        prev = -math.inf
        for _ in range(60):
            d = _circle_min_distance(ev, line, 0j, R)
            d_out = _circle_min_distance(ev, line, 0j, 2.0 * R)
            if d >= margin and d_out >= d and d >= prev:
                break
            prev = d
            R *= 2.0
            if R > 1e14:
                raise RegionTooSmall("cannot isolate the end at infinity: X stays near the line")
        outer = R
    return SearchRegion(holes=holes, outer=outer)


# -- seeding and Newton ----------------------------------------------------------------

def _nested(n, lo, hi, periodic=False):
    if periodic:
        return np.linspace(lo, hi, n, endpoint=False)
    return np.linspace(lo, hi, n)


def _seed_charts(s: SpinorialSurface, region: SearchRegion, n: int):
    """List of (kind, center, seed array in chart coordinates)."""
    charts = []
    fin = s.finite_ends
    mid = 1.0 + max([abs(e) for e in fin], default=0.0)
    nu = n
    nv = 2 * (n - 1)
    for e, r in region.holes.items():
        reach = min([mid] + [0.5 * abs(e - f) for f in fin if f != e])
        u = _nested(nu, math.log(r), math.log(max(reach, 1.5 * r)))
        v = _nested(nv, -math.pi, math.pi, periodic=True)
        U, V = np.meshgrid(u, v)
        charts.append(("log", e, (U + 1j * V).ravel()))
    if region.outer is not None:
        u = _nested(nu, math.log(0.5 * mid), math.log(region.outer))
        v = _nested(nv, -math.pi, math.pi, periodic=True)
        U, V = np.meshgrid(u, v)
        charts.append(("log", 0j, (U + 1j * V).ravel()))
    x = _nested(2 * n - 1, -mid, mid)
    Xg, Yg = np.meshgrid(x, x)
    charts.append(("cart", 0j, (Xg + 1j * Yg).ravel()))
    return charts


def _to_z(kind, center, w):
    return center + np.exp(w) if kind == "log" else w


def _newton(ev, line, kind, center, w0):
    e1, e2 = line.frame()
    b = np.array(line.base)
    P = np.stack([e1, e2])  # 2 x 3

    def residual(w):
        z = _to_z(kind, center, w)
        return (ev(z) - b) @ P.T, z

    w = w0.copy()
    with np.errstate(all="ignore"):
        F, z = residual(w)
    nf = np.linalg.norm(F, axis=-1)
    idx = np.flatnonzero(np.isfinite(nf))
    for _ in range(NEWTON_STEPS):
        if idx.size == 0:
            break
        wa, Fa, za = w[idx], F[idx], z[idx]
        with np.errstate(all="ignore"):
            phi = ev.phi(za)
            a = phi * (np.exp(wa) if kind == "log" else np.ones_like(wa))[..., None]
        Ju = np.real(a) @ P.T
        Jv = -np.imag(a) @ P.T
        det = Ju[:, 0] * Jv[:, 1] - Jv[:, 0] * Ju[:, 1]
        with np.errstate(all="ignore"):
            du = (Jv[:, 1] * Fa[:, 0] - Jv[:, 0] * Fa[:, 1]) / det
            dv = (-Ju[:, 1] * Fa[:, 0] + Ju[:, 0] * Fa[:, 1]) / det
            step = -(du + 1j * dv)
        ok = np.isfinite(step)
        step[~ok] = 0
        big = np.abs(step) > 2.0
        step[big] *= 2.0 / np.abs(step[big])
        improved = np.zeros(idx.size, dtype=bool)
        lam = 1.0
        for _ in range(12):
            pend = np.flatnonzero(ok & ~improved)
            if pend.size == 0:
                break
            trial = wa[pend] + lam * step[pend]
            with np.errstate(all="ignore"):
                F2, z2 = residual(trial)
            n2 = np.linalg.norm(F2, axis=-1)
            good = np.isfinite(n2) & (n2 < nf[idx[pend]])
            gi = idx[pend[good]]
            w[gi] = trial[good]
            F[gi] = F2[good]
            z[gi] = z2[good]
            nf[gi] = n2[good]
            improved[pend[good]] = True
            lam *= 0.5
        idx = idx[improved & (nf[idx] > 1e-15)]
    with np.errstate(all="ignore"):
        scale = 1.0 + np.linalg.norm(ev(z), axis=-1)
    conv = np.isfinite(nf) & (nf <= RESIDUAL_TOL * scale)
    return z, nf, conv


def _dedupe(zs, tol=DEDUPE_TOL):
    reps, counts = [], []
    for z in sorted(zs, key=lambda c: (c.real, c.imag)):
        for k, r in enumerate(reps):
            if abs(z - r) <= tol * max(1.0, abs(z)):
                counts[k] += 1
                break
        else:
            reps.append(z)
            counts.append(1)
    return reps, counts


def preimages_of_line(s: SpinorialSurface, line: Line3, grid: int = GRID_N, seed: int = 0,
                      region: SearchRegion | None = None, max_enlarge: int = 6) -> HitReport:
    """All z with X(z) on the line, inside a search region that isolates the ends."""
    ev = SurfaceEvaluator(s)
    bound = hitting_bound(s)
    auto = region is None
    if auto:
        region = choose_region(s, line, ev)
    for attempt in range(max_enlarge + 1):
        roots = []
        stats = {"seeds": 0, "converged": 0}
        for kind, center, w0 in _seed_charts(s, region, grid):
            z, nf, conv = _newton(ev, line, kind, center, w0)
            stats["seeds"] += len(w0)
            stats["converged"] += int(conv.sum())
            roots.extend(complex(v) for v in z[conv])
        reps, counts = _dedupe(roots)
        inside = region.contains(np.array(reps, dtype=complex)) if reps else np.array([], bool)
        outside = [r for r, ok in zip(reps, inside) if not ok]
        if not outside or not auto or attempt == max_enlarge or len(reps) > ROOT_CAP:
            break
        # a genuine root beyond the region boundary: the region was too small
        holes = {e: min([0.5 * r] + [0.5 * abs(z - e) for z in outside])
                 for e, r in region.holes.items()}
        outer = None if region.outer is None else max([2.0 * region.outer]
                                                      + [2.0 * abs(z) for z in outside])
        region = SearchRegion(holes=holes, outer=outer)
    if outside and auto and len(reps) <= ROOT_CAP:
        raise RegionTooSmall(f"roots keep appearing outside the search region: {outside[:3]}")
    keep = [(r, c) for r, c, ok in zip(reps, counts, inside) if ok]
    keep.sort(key=lambda t: (round(t[0].real, 9), round(t[0].imag, 9)))
    pts, mult = [], []
    warnings = []
    d = np.array(line.direction)
    for z, c in keep:
        X = ev(np.array([z]))[0]
        pts.append((z, X, float(line.distance(X))))
        mult.append(c)
        N = gauss_map(s, np.array([z]))[0]
        if abs(N @ d) < TANGENCY_TOL:
            warnings.append(f"line is nearly tangent to the surface at z={z:.6g}")
    count = len(pts)
    if count > ROOT_CAP:
        status = "line_contained"
    elif count <= bound:
        status = "within_bound"
    else:
        status = "bound_violated"
    prov = {"surface": s.name or "custom", "line": line.to_json(), "grid": grid, "seed": seed,
            "dedupe_tol": DEDUPE_TOL, "residual_tol": RESIDUAL_TOL, "root_cap": ROOT_CAP,
            "boundary_margin": BOUNDARY_MARGIN}
    return HitReport(preimages=pts, count=count, bound=bound, searchRegion=region.to_json(),
                     certificateStatus=status, multiplicities=mult, warnings=warnings,
                     newton=stats, provenance=prov)


# -- against-sets ------------------------------------------------------------------------

@dataclass
class AgainstSet:
    points: np.ndarray
    lines: list
    a: float
    r: int
    m: int
    perLineCount: int
    spatial: bool = False

    @property
    def size(self) -> int:
        return len(self.points)

    def certificate(self) -> dict:
        bound = 6 * self.r + self.m
        return {
            "per_line_count": self.perLineCount,
            "max_hitting_bound_in_class": bound,
            "exceeds_bound": self.perLineCount > bound,
            "angle_parameter": "a = 1/sqrt(2) (irrational; stored to double precision)",
            "reason": ("each generating line holds more points than any surface of the class "
                       "can meet on a line it does not contain"),
        }

    def to_xyz(self) -> str:
        lines = [str(len(self.points)),
                 f"against-set r={self.r} m={self.m} spatial={self.spatial} a=1/sqrt(2)"]
        for p in self.points:
            lines.append(f"P {p[0]:.17g} {p[1]:.17g} {p[2]:.17g}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {"r": self.r, "m": self.m, "a": self.a, "spatial": self.spatial,
                "per_line_count": self.perLineCount,
                "points": [[float(v) for v in p] for p in self.points],
                "lines": [ln.to_json() for ln in self.lines],
                "certificate": self.certificate()}


def _check_rm(r: int, m: int):
    if not (isinstance(r, (int, np.integer)) and isinstance(m, (int, np.integer))):
        raise ParameterOutOfRange("r and m must be integers")
    if r < 1 or not (2 - 2 * r <= m <= 1):
        raise ParameterOutOfRange(f"need r >= 1 and 2 - 2r <= m <= 1, got r={r}, m={m}")


def against_set_planar(r: int, m: int, a: float = AGAINST_ANGLE) -> AgainstSet:
    """12r + 2m + 1 points on two lines through the origin at angle 2 pi a."""
    _check_rm(r, m)
    k = 6 * r + m
    d1 = np.array([1.0, 0.0, 0.0])
    d2 = np.array([math.cos(2 * math.pi * a), math.sin(2 * math.pi * a), 0.0])
    steps = np.arange(1, k + 1, dtype=float)[:, None]
    pts = np.vstack([np.zeros((1, 3)), steps * d1, steps * d2])
    lines = [Line3((0.0, 0.0, 0.0), tuple(d1)), Line3((0.0, 0.0, 0.0), tuple(d2))]
    return AgainstSet(points=pts, lines=lines, a=a, r=r, m=m, perLineCount=k + 1)


def against_set_spatial(r: int, m: int, a: float = AGAINST_ANGLE) -> AgainstSet:
    """The planar set plus one point off its plane."""
    base = against_set_planar(r, m, a)
    pts = np.vstack([base.points, [[0.0, 0.0, 1.0]]])
    return AgainstSet(points=pts, lines=base.lines, a=a, r=r, m=m,
                      perLineCount=base.perLineCount, spatial=True)


def points_on_line(points, line: Line3, tol: float = 1e-12) -> int:
    return int(np.sum(line.distance(points) <= tol))


# -- reflection groups ------------------------------------------------------------------

@dataclass
class ReflectionVerdict:
    verdict: str
    order: int | None
    depth: int
    elements: int
    evidence: str

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "order": self.order, "depth": self.depth,
                "elements": self.elements, "evidence": self.evidence}


def line_reflection(line: Line3) -> np.ndarray:
    """4x4 affine matrix of the rotation by pi about the line."""
    d = np.array(line.direction)
    b = np.array(line.base)
    R = 2.0 * np.outer(d, d) - np.eye(3)
    M = np.eye(4)
    M[:3, :3] = R
    M[:3, 3] = b - R @ b
    return M


def _key(M, digits=9):
    return tuple(np.round(M[:3, :], digits).ravel() + 0.0)


def check_reflection_family(lines, max_word: int = 24, cap: int = 5000) -> ReflectionVerdict:
    """Breadth-first closure of the group generated by reflections about the lines."""
    if len(lines) < 2:
        raise ValueError("need at least two lines")
    gens = [line_reflection(ln) for ln in lines]
    seen = {_key(np.eye(4)): np.eye(4)}
    frontier = [np.eye(4)]
    for depth in range(1, max_word + 1):
        new = []
        for g in frontier:
            for h in gens:
                p = h @ g
                k = _key(p)
                if k not in seen:
                    seen[k] = p
                    new.append(p)
        if not new:
            return ReflectionVerdict("finite_group", len(seen), depth, len(seen),
                                     f"closed after words of length {depth - 1}")
        if len(seen) > cap:
            return ReflectionVerdict("infinite_group", None, depth, len(seen),
                                     f"more than {cap} distinct elements by word length {depth}")
        frontier = new
    return ReflectionVerdict("infinite_group", None, max_word, len(seen),
                             f"new elements still appear at word length {max_word} "
                             "(numerical evidence, not a proof)")


def z3_lines() -> list:
    """Axis-parallel lines through the lattice points of the unit cube."""
    out = []
    for k in range(3):
        e = np.zeros(3)
        e[k] = 1.0
        for p in np.ndindex(2, 2, 2):
            if p[k] == 0:
                out.append(Line3(tuple(float(v) for v in p), tuple(e)))
    return out


def concurrent_lines(angle: float) -> list:
    return [Line3((0.0, 0.0, 0.0), (1.0, 0.0, 0.0)),
            Line3((0.0, 0.0, 0.0), (math.cos(angle), math.sin(angle), 0.0))]
