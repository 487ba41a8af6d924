"""Interpolation by minimal surfaces of finite total curvature at genus 0.

The data (u1, u2) of a core surface is deformed inside a spray

    psi(zeta) = ((1 + H) u1, (1 + 2H) u2),   H = sum_n zeta_n h_n,

whose directions h_n are rational with poles only at the ends.  The complex
integrals of the Weierstrass forms along arcs from the basepoint to the
interpolation points, and around one loop per homology generator, are driven to
prescribed values.  Real parts of loop integrals are periods (must vanish),
imaginary parts are fluxes, real parts of arc integrals are the surface values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import (ContactOrderUnachieved, DominanceFailure, ImmersionLoss, NewtonDivergence,
                     PoleOnPath)
from .meromorphic import (INF, OneForm, PathContour, RationalFn, as_point, integrate_contour,
                          integrate_path, same_point)
from .weierstrass import (SpinorialSurface, SurfaceEvaluator, _forms, catalog_surface,
                          check_regular_complete, default_path, flux_of, immerse, invariants)

NEWTON_TOL = 1e-10
NEWTON_MAX_ITER = 60
LM_LAMBDA0 = 1e-8
COND_LIMIT = 1e10
NODE_RTOL = 1e-14
MAX_STAGES = 8


# -- curve system -------------------------------------------------------------------

@dataclass
class CurveSystem:
    """Arcs from p0 to each interpolation point, then one loop per homology generator."""

    p0: complex
    arcs: list
    loops: list
    loop_ends: list

    @property
    def paths(self) -> list:
        return list(self.arcs) + list(self.loops)

    @property
    def l(self) -> int:
        return len(self.arcs) + len(self.loops)

    @classmethod
    def build(cls, s: SpinorialSurface, points) -> "CurveSystem":
        p0 = complex(s.basepoint)
        arcs = [default_path(s, complex(p)) for p in points]
        fin = s.finite_ends
        loop_ends = list(fin) if INF in s.ends else list(fin[:-1])
        gaps = [abs(a - b) for i, a in enumerate(fin) for b in fin[:i]]
        gaps += [abs(a - p0) for a in fin]
        r = min([1.0] + [0.5 * d for d in gaps])
        loops = [PathContour.circle(e, r) for e in loop_ends]
        return cls(p0, arcs, loops, loop_ends)

    def check_nonvanishing(self, u1: RationalFn, u2: RationalFn, n: int = 400):
        for path in self.paths:
            z = path.sample(n)
            for name, u in (("u1", u1), ("u2", u2)):
                v = np.abs(u.evaluate(z, check=False))
                if not np.all(np.isfinite(v)) or v.min() <= 1e-12 * max(v.max(), 1e-300):
                    raise ValueError(f"{name} vanishes (or has a pole) on the curve system")


def period_map(candidate, core, theta0: OneForm, system: CurveSystem, rtol: float = 1e-10):
    """Integrals of Phi(candidate) - Phi(core) along every path of the system, shape (l, 3)."""
    f1, f2 = (RationalFn.coerce(f) for f in candidate)
    u1, u2 = (RationalFn.coerce(u) for u in core)
    t = theta0.coefficient

    def integrand(z):
        a1, a2 = f1.evaluate(z, check=False), f2.evaluate(z, check=False)
        b1, b2 = u1.evaluate(z, check=False), u2.evaluate(z, check=False)
        d11 = (a1 - b1) * (a1 + b1)
        d22 = (a2 - b2) * (a2 + b2)
        d12 = a1 * a2 - b1 * b2
        tz = t.evaluate(z, check=False)
        return np.stack([0.5 * (d11 - d22), 0.5j * (d11 + d22), d12], axis=-1) * tz[:, None]

    poles = [p for r in (f1, f2, u1, u2, t) for p in r.poles()]
    return np.array([integrate_path(integrand, p, rtol, poles=poles) for p in system.paths])


def core_integrals(u1, u2, theta0: OneForm, system: CurveSystem, rtol: float = 1e-13):
    e1 = u1 * u1 * theta0
    e2 = u2 * u2 * theta0
    phi = [(e1 - e2) * 0.5, (e1 + e2) * 0.5j, (u1 * u2) * theta0]
    return np.array([integrate_contour(phi, p, rtol) for p in system.paths])


# -- node cache ---------------------------------------------------------------------

class _Nodes:
    """Quadrature nodes of the curve system with the core data sampled on them."""

    def __init__(self, u1, u2, theta0, system: CurveSystem, panels: int):
        self.panels = panels
        self.z, self.w, self.owner = [], [], []
        for k, path in enumerate(system.paths):
            z, dz = path.quadrature_nodes(panels=panels)
            self.z.append(z)
            self.w.append(dz)
            self.owner.append(np.full(len(z), k))
        self.z = np.concatenate(self.z)
        w = np.concatenate(self.w)
        self.owner = np.concatenate(self.owner)
        self.l = system.l
        t = theta0.coefficient.evaluate(self.z, check=False)
        a = u1.evaluate(self.z, check=False)
        b = u2.evaluate(self.z, check=False)
        self.tw = t * w
        self.U11, self.U22, self.U12 = a * a, b * b, a * b
        # per-path summation matrix
        self.S = np.zeros((self.l, len(self.z)))
        self.S[self.owner, np.arange(len(self.z))] = 1.0

    def _sum(self, vals):
        return self.S @ (vals * self.tw)

    def core(self):
        return np.stack([self._sum(0.5 * (self.U11 - self.U22)),
                         self._sum(0.5j * (self.U11 + self.U22)), self._sum(self.U12)], axis=-1)

    def columns(self, hvals):
        """Derivatives of the period map at zeta = 0 along directions with node values hvals."""
        g = np.stack([self.U11 - 2 * self.U22, 1j * (self.U11 + 2 * self.U22), 3 * self.U12])
        out = np.einsum("nk,ck,lk->lcn", hvals, g * self.tw, self.S)
        return out.reshape(3 * self.l, -1)

    def periods(self, H):
        A = (2 * H + H * H) * self.U11
        B = (4 * H + 4 * H * H) * self.U22
        C = (3 * H + 2 * H * H) * self.U12
        return np.stack([self._sum(0.5 * (A - B)), self._sum(0.5j * (A + B)), self._sum(C)], axis=-1)

    def jacobian(self, H, hvals):
        g = np.stack([(1 + H) * self.U11 - 2 * (1 + 2 * H) * self.U22,
                      1j * ((1 + H) * self.U11 + 2 * (1 + 2 * H) * self.U22),
                      (3 + 4 * H) * self.U12])
        out = np.einsum("nk,ck,lk->lcn", hvals, g * self.tw, self.S)
        return out.reshape(3 * self.l, -1)


def _converged_nodes(u1, u2, theta0, system, probe_vals=None):
    panels = 8
    prev = None
    for _ in range(8):
        nodes = _Nodes(u1, u2, theta0, system, panels)
        val = nodes.core().ravel()
        if probe_vals is not None:
            pv = probe_vals(nodes.z)
            pv = pv / np.maximum(np.max(np.abs(pv), axis=1, keepdims=True), 1e-300)
            val = np.concatenate([val, nodes.columns(pv).ravel()])
        if prev is not None and np.all(np.abs(val - prev) <= NODE_RTOL * 100 * (1e-3 + np.abs(prev))):
            return nodes
        prev = val
        panels *= 2
    return nodes


# -- spray ---------------------------------------------------------------------------

@dataclass
class Spray:
    u1: RationalFn
    u2: RationalFn
    theta0: OneForm
    system: CurveSystem
    directions: list
    singular_values: np.ndarray
    nodes: object = field(repr=False, default=None)

    @property
    def size(self) -> int:
        return len(self.directions)

    def H(self, zeta) -> RationalFn:
        out = RationalFn.constant(0.0)
        for c, h in zip(np.asarray(zeta, dtype=complex), self.directions):
            if c != 0:
                out = out + h * complex(c)
        return out

    def psi(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        if not np.any(zeta):
            return self.u1, self.u2
        H = self.H(zeta)
        return (1 + H) * self.u1, (1 + 2 * H) * self.u2

    def hvals(self, z=None):
        z = self.nodes.z if z is None else z
        return np.array([h.evaluate(z, check=False) for h in self.directions])

    def node_periods(self, zeta):
        H = np.asarray(zeta, dtype=complex) @ self._hv
        return self.nodes.periods(H)

    def node_jacobian(self, zeta):
        H = np.asarray(zeta, dtype=complex) @ self._hv
        return self.nodes.jacobian(H, self._hv)

    def period_map(self, zeta, rtol: float = 1e-10):
        """Adaptive quadrature of Phi(psi(zeta)) - Phi(core) with the difference expanded in H."""
        H = self.H(zeta)
        u1, u2, t = self.u1, self.u2, self.theta0.coefficient

        def integrand(z):
            h = H.evaluate(z, check=False)
            a, b = u1.evaluate(z, check=False), u2.evaluate(z, check=False)
            d11 = (2 * h + h * h) * a * a
            d22 = (4 * h + 4 * h * h) * b * b
            d12 = (3 * h + 2 * h * h) * a * b
            tz = t.evaluate(z, check=False)
            return np.stack([0.5 * (d11 - d22), 0.5j * (d11 + d22), d12], axis=-1) * tz[:, None]

        poles = [p for r in (H, u1, u2, t) for p in r.poles()]
        return np.array([integrate_path(integrand, p, rtol, poles=poles) for p in self.system.paths])

    def __post_init__(self):
        self._hv = None if self.nodes is None else self.hvals()


def _vanishing_factor(u1, u2, ends, points, k):
    """Polynomial vanishing to order 2k at the points and at every finite zero of u1 u2 off the ends."""
    F = RationalFn.constant(1.0)
    z = RationalFn.identity()
    for p in points:
        if k > 0:
            F = F * (z - complex(p)) ** (2 * k)
    for q in (u1 * u2).zeros():
        if not any(same_point(q, e) for e in ends):
            F = F * (z - complex(q))
    return F


def _candidates(s: SpinorialSurface, F: RationalFn, max_order: int, center: complex):
    """F times Laurent monomials whose poles lie at the ends, lowest order first."""
    z = RationalFn.identity()
    fin = s.finite_ends
    out = []
    degF = F.num.degree
    need_inf_zero = INF not in s.ends and (s.u1 * s.u2).order_at(INF) > 0
    for n in range(max_order + 1):
        if INF in s.ends:
            out.append(F * (z - center) ** n)
        for e in fin:
            if INF in s.ends:
                if n > 0:
                    out.append(F / (z - e) ** n)
            else:
                p = degF + n + (1 if need_inf_zero else 0)
                if p > 0:
                    out.append(F / (z - e) ** p)
                elif n == 0 and e == fin[0]:
                    out.append(F)
    return out


def build_spray(s: SpinorialSurface, system: CurveSystem, points=(), k: int = 0,
                retries: int = 3, seed: int = 0, max_order: int | None = None,
                dual: bool = True) -> Spray:
    """Period-dominating spray.

    With ``dual`` the 3l directions are normalized so that dP/dzeta(0) is the identity;
    each is the minimum-norm combination of unit-size candidates with that derivative.
    Without it the directions are the unit-size candidates themselves (more than 3l).
    """
    u1, u2, theta0 = s.u1, s.u2, s.theta0
    if (u2 / u1).is_constant():
        raise DominanceFailure("flat core: the Gauss map is constant, no spray can dominate periods")
    n = 3 * system.l
    if n == 0:
        return Spray(u1, u2, theta0, system, [], np.zeros(0), None)
    system.check_nonvanishing(u1, u2)
    F = _vanishing_factor(u1, u2, s.ends, points, k)
    rng = np.random.default_rng(seed)
    center = complex(system.p0)
    order = max_order if max_order is not None else max(4, n // 2 + 2)
    last = None
    for attempt in range(retries + 1):
        pool = _candidates(s, F, order, center)
        nodes = _converged_nodes(u1, u2, theta0, system,
                                 lambda z: np.array([b.evaluate(z, check=False) for b in pool]))
        hv = np.array([b.evaluate(nodes.z, check=False) for b in pool])
        scale = np.max(np.abs(hv), axis=1)
        scale[scale == 0] = 1.0
        pool = [b * (1.0 / c) for b, c in zip(pool, scale)]
        cols = nodes.columns(hv / scale[:, None])
        sv = np.linalg.svd(cols, compute_uv=False)
        last = sv
        if len(sv) == n and sv[-1] > sv[0] / COND_LIMIT:
            if not dual:
                return Spray(u1, u2, theta0, system, pool, sv, nodes)
            coef = np.linalg.pinv(cols)  # (pool, n)
            dirs = []
            for c in range(n):
                h = RationalFn.constant(0.0)
                for kk, b in enumerate(pool):
                    if coef[kk, c] != 0:
                        h = h + b * complex(coef[kk, c])
                dirs.append(h)
            return Spray(u1, u2, theta0, system, dirs, sv, nodes)
        center = complex(system.p0) + complex(*rng.normal(size=2)) * 0.5
        order += 2
    raise DominanceFailure(f"spray Jacobian stays singular (singular values {last})")


def gradient_check(spray: Spray, zeta0=None, eps: float = 1e-4) -> np.ndarray:
    """Relative error, per direction, between the analytic derivative of the period map and a
    central difference of the independently integrated period map."""
    n = spray.size
    zeta0 = np.zeros(n, complex) if zeta0 is None else np.asarray(zeta0, complex)
    J = spray.node_jacobian(zeta0)
    errs = np.zeros(n)
    for i in range(n):
        e = np.zeros(n, complex)
        e[i] = eps
        fd = (spray.period_map(zeta0 + e) - spray.period_map(zeta0 - e)).reshape(-1) / (2 * eps)
        errs[i] = np.linalg.norm(fd - J[:, i]) / max(np.linalg.norm(J[:, i]), 1e-300)
    return errs


# -- problem -------------------------------------------------------------------------

@dataclass
class InterpolationProblem:
    initial: SpinorialSurface
    points: list
    targets: np.ndarray
    k: int = 0
    flux: np.ndarray | None = None

    def __post_init__(self):
        self.points = [complex(as_point(p)) for p in self.points]
        self.targets = np.asarray(self.targets, dtype=float).reshape(len(self.points), 3)
        if self.flux is not None:
            self.flux = np.asarray(self.flux, dtype=float).reshape(-1, 3)

    def validate(self):
        s = self.initial
        if self.k < 0:
            raise ValueError("contact order must be nonnegative")
        zeros = (s.u1 * s.u2).zeros()
        for i, p in enumerate(self.points):
            if s.is_end(p):
                raise ValueError(f"interpolation point {p} is an end")
            if any(same_point(p, q) for q in zeros):
                raise ValueError(f"interpolation point {p} is a zero of u1*u2")
            if same_point(p, complex(s.basepoint)):
                raise ValueError("interpolation points must differ from the basepoint")
            if any(same_point(p, q) for q in self.points[:i]):
                raise ValueError("interpolation points must be distinct")

    @classmethod
    def from_json(cls, data: dict, catalog_path=None) -> "InterpolationProblem":
        init = data["initial"]
        s = catalog_surface(init, catalog_path) if isinstance(init, str) \
            else SpinorialSurface.from_json(init)
        lam = data.get("lambda", [])
        pts = [complex(*e["p"]) for e in lam]
        vals = [e["v"] for e in lam]
        flux = data.get("flux")
        return cls(s, pts, np.array(vals, dtype=float).reshape(-1, 3), int(data.get("k", 0)),
                   None if flux is None else np.array(flux, dtype=float))

    def to_json(self) -> dict:
        out = {"initial": self.initial.to_json(),
               "lambda": [{"p": [p.real, p.imag], "v": [float(x) for x in v]}
                          for p, v in zip(self.points, self.targets)],
               "k": self.k}
        if self.flux is not None:
            out["flux"] = self.flux.tolist()
        return out


@dataclass
class SolveReport:
    converged: bool
    translation: np.ndarray
    zeta: list
    residual_trace: list
    singular_values: list
    stages: int
    period_residual: float = math.nan
    interpolation_error: float = math.nan
    flux_error: float = math.nan
    sup_deviation: float = math.nan
    regularity: dict = field(default_factory=dict)
    invariants: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "converged": self.converged,
            "translation": [float(x) for x in self.translation],
            "zeta": [[[float(c.real), float(c.imag)] for c in z] for z in self.zeta],
            "residual_trace": [float(r) for r in self.residual_trace],
            "jacobian_singular_values": [[float(x) for x in sv] for sv in self.singular_values],
            "stages": self.stages,
            "period_residual": self.period_residual,
            "interpolation_error": self.interpolation_error,
            "flux_error": self.flux_error,
            "sup_deviation": self.sup_deviation,
            "regularity": self.regularity,
            "invariants": self.invariants,
        }


@dataclass
class SolveResult:
    surface: SpinorialSurface
    report: SolveReport


# -- Newton ---------------------------------------------------------------------------

def _realify(J):
    return np.block([[J.real, -J.imag], [J.imag, J.real]])


def newton_solve(spray: Spray, target, zeta0=None, tol: float = NEWTON_TOL,
                 max_iter: int = NEWTON_MAX_ITER, rows=None):
    """Damped Gauss-Newton (Levenberg-Marquardt) on the real split of node_periods = target.

    ``rows`` selects equations of the real split [Re P, Im P]; the step is the
    minimum-norm one, so more unknowns than equations is fine.
    """
    n = spray.size
    target = np.asarray(target, dtype=complex).reshape(-1)
    zeta = np.zeros(n, complex) if zeta0 is None else np.asarray(zeta0, complex).copy()
    sel = np.ones(2 * len(target), bool) if rows is None else np.asarray(rows, bool)

    def resid(zt):
        F = spray.node_periods(zt).reshape(-1) - target
        return np.concatenate([F.real, F.imag])[sel]

    r = resid(zeta)
    norm = float(np.linalg.norm(r))
    trace = [norm]
    lam = LM_LAMBDA0
    it = 0
    while norm >= tol:
        if it >= max_iter:
            raise NewtonDivergence(f"no convergence after {max_iter} iterations "
                                   f"(residual {norm:.3g})", trace)
        it += 1
        Jr = _realify(spray.node_jacobian(zeta))[sel]
        G = Jr @ Jr.T
        for _ in range(20):
            y = np.linalg.solve(G + lam * np.eye(len(G)), -r)
            step = Jr.T @ y
            trial = zeta + step[:n] + 1j * step[n:]
            r2 = resid(trial)
            n2 = float(np.linalg.norm(r2))
            if np.isfinite(n2) and n2 < norm:
                zeta, r, norm = trial, r2, n2
                lam = max(lam / 10.0, 1e-16)
                break
            lam *= 10.0
        else:
            raise NewtonDivergence(f"damping failed to reduce the residual {norm:.3g}", trace)
        trace.append(norm)
    return zeta, trace


# -- solve ----------------------------------------------------------------------------

def _loop_flux(s: SpinorialSurface, system: CurveSystem) -> np.ndarray:
    return np.array([flux_of(s, lp) for lp in system.loops]).reshape(-1, 3)


def _targets(s: SpinorialSurface, system: CurveSystem, problem, flux, translation):
    """Required change of every path integral, shape (l, 3)."""
    base = core_integrals(s.u1, s.u2, s.theta0, system)
    m = len(problem.points)
    T = np.zeros_like(base)
    X0 = np.array(s.X0) + translation
    for j in range(m):
        T[j] = problem.targets[j] - X0 - base[j].real
    for i in range(len(system.loops)):
        T[m + i] = -base[m + i].real + 1j * (flux[i] - base[m + i].imag)
    return T


def _new_surface(s: SpinorialSurface, u1, u2, X0) -> SpinorialSurface:
    return SpinorialSurface(u1, u2, s.theta0, s.ends, s.basepoint, tuple(float(x) for x in X0), s.name)


def solve(problem: InterpolationProblem, tol: float = NEWTON_TOL, max_stages: int = MAX_STAGES,
          seed: int = 0, verify: bool = True) -> SolveResult:
    """Surface with the initial ends whose values at the points are the targets and whose flux
    on the loop basis is the prescription."""
    problem.validate()
    s0 = problem.initial
    reg = check_regular_complete(s0)
    if not reg.passed:
        raise ValueError("initial surface is not regular and complete: " + "; ".join(reg.failures()))
    system = CurveSystem.build(s0, problem.points)
    flux = _loop_flux(s0, system) if problem.flux is None else problem.flux
    if flux.shape != (len(system.loops), 3):
        raise ValueError(f"flux prescription needs {len(system.loops)} rows of 3 values")
    ev = SurfaceEvaluator(s0)
    m = len(problem.points)
    if m:
        here = ev(np.array(problem.points))
        translation = np.mean(problem.targets - here, axis=0)
    else:
        translation = np.zeros(3)

    T = _targets(s0, system, problem, flux, translation).reshape(-1)
    # real parts everywhere; imaginary parts only on loops (flux), arcs leave them free
    l = system.l
    imag_rows = np.zeros((l, 3), bool)
    imag_rows[m:] = True
    rows = np.concatenate([np.ones(3 * l, bool), imag_rows.ravel()])
    trace, svals, zeta = [], [], None
    stages = 0
    s = s0
    if np.max(np.abs(np.concatenate([T.real, T.imag])[rows]), initial=0.0) < tol:
        trace.append(0.0)
    else:
        spray = build_spray(s0, system, problem.points, problem.k, seed=seed, dual=False)
        svals.append(spray.singular_values.tolist())
        zeta = np.zeros(spray.size, complex)
        done, step = 0.0, 1.0
        while done < 1.0:
            if stages >= max_stages:
                raise NewtonDivergence("continuation did not reach the targets", trace)
            stages += 1
            t = min(1.0, done + step)
            try:
                zeta_new, tr = newton_solve(spray, t * T, zeta, tol=tol, rows=rows)
            except NewtonDivergence as exc:
                trace.extend(exc.trace)
                step *= 0.5
                continue
            trace.extend(tr)
            zeta, done = zeta_new, t
        u1, u2 = spray.psi(zeta)
        s = _new_surface(s0, u1, u2, s0.X0)
    s = _new_surface(s, s.u1, s.u2, np.array(s0.X0) + translation)
    report = SolveReport(converged=True, translation=translation,
                         zeta=[] if zeta is None else [zeta],
                         residual_trace=trace, singular_values=svals, stages=stages)
    if verify:
        _verify(s0, s, system, problem, flux, report)
    return SolveResult(s, report)


def _contact_check(s0, s, points, k):
    if k < 1:
        return
    old = _forms(s0)
    new = _forms(s)
    for p in points:
        for a, b in zip(old, new):
            d = b - a
            if d.is_zero():
                continue
            if d.order_at(p) < k - 1:
                raise ContactOrderUnachieved(
                    f"contact order at {p} is {d.order_at(p)}, need at least {k - 1}")


def _verify(s0, s, system, problem, flux, report: SolveReport):
    reg = check_regular_complete(s)
    report.regularity = reg.to_json()
    if reg.common_zeros or reg.stray_poles or not reg.complete:
        raise ImmersionLoss("solved data is not a complete immersion: " + "; ".join(reg.failures()))
    report.period_residual = max([float(np.max(np.abs(v))) for v in reg.real_periods.values()],
                                 default=0.0)
    report.invariants = invariants(s).to_json()
    errs = []
    for p, v in zip(problem.points, problem.targets):
        try:
            X = immerse(s, p, check_paths=True)
        except PoleOnPath:
            X = immerse(s, p)
        errs.append(float(np.linalg.norm(X - v)))
    report.interpolation_error = max(errs, default=0.0)
    if len(system.loops):
        report.flux_error = float(np.max(np.abs(_loop_flux(s, system) - flux)))
    else:
        report.flux_error = 0.0
    _contact_check(s0, s, problem.points, problem.k)
    report.sup_deviation = sup_deviation(s0, s, system)


def sup_deviation(s0, s, system: CurveSystem, n: int = 64) -> float:
    """max |X - X0| over samples of the curve system (translation included)."""
    pts = np.concatenate([p.sample(n) for p in system.arcs] + [p.sample(n) for p in system.loops]) \
        if system.l else np.array([complex(s.basepoint)])
    a = SurfaceEvaluator(s0)(pts)
    b = SurfaceEvaluator(s)(pts)
    return float(np.max(np.linalg.norm(a - b, axis=-1)))


def identity_problem(s: SpinorialSurface, points, shift=(0.0, 0.0, 0.0), k: int = 0):
    vals = SurfaceEvaluator(s)(np.array(points, dtype=complex)) + np.asarray(shift, dtype=float)
    return InterpolationProblem(s, list(points), vals, k)
