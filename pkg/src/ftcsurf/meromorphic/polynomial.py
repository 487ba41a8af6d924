"""Dense complex polynomials stored with ascending coefficients.

Coefficients ``[1, 2, 3]`` correspond to ``1 + 2z + 3z^2``.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial import polynomial as npoly

from ..errors import NonSquareDivisor, RootFindingFailure

# trailing coefficients below this fraction of the largest one are treated as zero
COEFF_RTOL = 1e-13
# candidate multiple roots are grouped at these relative distances, coarsest first;
# a group is accepted only if the low derivatives vanish at its refined centre
CLUSTER_LEVELS = (3e-2, 1e-3, 1e-5)
CLUSTER_RTOL = CLUSTER_LEVELS[-1]
# |p^(k)(c)| relative to the rounding scale of p^(k) at c below which c is a root of p^(k)
MULTIPLICITY_RTOL = 1e-7
# accepted |p(r)| relative to sum |c_k| |r|^k for a computed root
ROOT_RESIDUAL_RTOL = 1e-6


class ComplexPoly:
    """Immutable complex polynomial.

    The zero polynomial is stored as ``[0]`` and has degree -1.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs=(0,)):
        c = np.array(coeffs, dtype=complex).ravel()
        nz = np.flatnonzero(c)
        c = c[: nz[-1] + 1].copy() if nz.size else np.zeros(1, dtype=complex)
        c.flags.writeable = False
        self._c = c

    # -- construction -----------------------------------------------------
    @classmethod
    def monomial(cls, n: int, coeff: complex = 1.0) -> "ComplexPoly":
        c = np.zeros(n + 1, dtype=complex)
        c[n] = coeff
        return cls(c)

    @classmethod
    def from_roots(cls, roots, lead: complex = 1.0) -> "ComplexPoly":
        c = np.array([lead], dtype=complex)
        for r in roots:
            c = np.convolve(c, np.array([-r, 1.0], dtype=complex))
        return cls(c)

    @classmethod
    def coerce(cls, obj) -> "ComplexPoly":
        if isinstance(obj, ComplexPoly):
            return obj
        if np.isscalar(obj):
            return cls([obj])
        return cls(obj)

    # -- basic properties -------------------------------------------------
    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def degree(self) -> int:
        return -1 if self.is_zero() else len(self._c) - 1

    @property
    def leading(self) -> complex:
        return complex(self._c[-1])

    def is_zero(self) -> bool:
        return len(self._c) == 1 and self._c[0] == 0

    def norm(self) -> float:
        return float(np.max(np.abs(self._c)))

    def __repr__(self):
        return f"ComplexPoly({np.array2string(self._c, precision=6)})"

    def __len__(self):
        return len(self._c)

    # -- evaluation -------------------------------------------------------
    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.full(z.shape, self._c[-1], dtype=complex)
        for a in self._c[-2::-1]:
            out = out * z + a
        return out if out.ndim else complex(out)

    def abs_bound(self, z):
        """sum |c_k| |z|^k, the natural scale for rounding errors of p(z)."""
        r = np.abs(np.asarray(z, dtype=complex))
        out = np.zeros(r.shape)
        for a in np.abs(self._c[::-1]):
            out = out * r + a
        return out

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        other = ComplexPoly.coerce(other)
        return ComplexPoly(npoly.polyadd(self._c, other._c))

    __radd__ = __add__

    def __neg__(self):
        return ComplexPoly(-self._c)

    def __sub__(self, other):
        other = ComplexPoly.coerce(other)
        return ComplexPoly(npoly.polysub(self._c, other._c))

    def __rsub__(self, other):
        return ComplexPoly.coerce(other) - self

    def __mul__(self, other):
        if np.isscalar(other):
            return ComplexPoly(self._c * other)
        other = ComplexPoly.coerce(other)
        return ComplexPoly(np.convolve(self._c, other._c))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return ComplexPoly(self._c / scalar)

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power of a polynomial")
        out = ComplexPoly([1.0])
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def divmod(self, other: "ComplexPoly"):
        q, r = npoly.polydiv(self._c, ComplexPoly.coerce(other)._c)
        return ComplexPoly(q), ComplexPoly(r)

    def deriv(self, m: int = 1) -> "ComplexPoly":
        if self.degree < m:
            return ComplexPoly([0])
        return ComplexPoly(npoly.polyder(self._c, m))

    def integ(self) -> "ComplexPoly":
        return ComplexPoly(npoly.polyint(self._c))

    def trim(self, rtol: float = COEFF_RTOL) -> "ComplexPoly":
        if self.is_zero():
            return self
        a = np.abs(self._c)
        keep = np.flatnonzero(a > rtol * a.max())
        return ComplexPoly(self._c[: keep[-1] + 1])

    def deflate(self, a: complex) -> "ComplexPoly":
        """Quotient of synthetic division by (z - a); the remainder is dropped."""
        d = self._c[::-1]
        q = np.empty(len(d) - 1, dtype=complex)
        acc = 0j
        for i in range(len(d) - 1):
            acc = acc * a + d[i]
            q[i] = acc
        return ComplexPoly(q[::-1])

    def taylor_shift(self, a: complex) -> np.ndarray:
        """Ascending coefficients of w -> p(a + w)."""
        d = self._c[::-1].copy()
        n = len(d)
        for k in range(n - 1):
            for j in range(1, n - k):
                d[j] += a * d[j - 1]
        return d[::-1]

    def reversed(self, degree: int | None = None) -> np.ndarray:
        """Ascending coefficients of z^degree p(1/z)."""
        deg = self.degree if degree is None else degree
        c = np.zeros(deg + 1, dtype=complex)
        c[deg - len(self._c) + 1:] = self._c[::-1]
        return c

    def allclose(self, other, atol: float = 1e-10) -> bool:
        other = ComplexPoly.coerce(other)
        n = max(len(self._c), len(other._c))
        a = np.zeros(n, complex)
        b = np.zeros(n, complex)
        a[: len(self._c)] = self._c
        b[: len(other._c)] = other._c
        return bool(np.all(np.abs(a - b) <= atol))

    # -- roots ------------------------------------------------------------
    def roots(self) -> np.ndarray:
        """All roots with multiplicity: companion eigenvalues plus one Newton polish."""
        if self.is_zero():
            raise RootFindingFailure("the zero polynomial has no isolated roots")
        c = self._c
        nzero = int(np.flatnonzero(c)[0])
        core = c[nzero:]
        if len(core) <= 1:
            return np.zeros(nzero, dtype=complex)
        r = npoly.polyroots(core).astype(complex)
        if not np.all(np.isfinite(r)):
            raise RootFindingFailure("non-finite eigenvalue from companion matrix")
        p = ComplexPoly(core)
        dp = p.deriv()
        val = p(r)
        dval = dp(r)
        with np.errstate(divide="ignore", invalid="ignore"):
            cand = r - val / dval
        better = np.isfinite(cand) & (np.abs(p(cand)) < np.abs(val))
        r = np.where(better, cand, r)
        resid = np.abs(p(r)) / np.maximum(p.abs_bound(r), 1e-300)
        if np.any(resid > ROOT_RESIDUAL_RTOL):
            raise RootFindingFailure(
                f"root residual {resid.max():.3g} exceeds {ROOT_RESIDUAL_RTOL:g}")
        return np.concatenate([np.zeros(nzero, dtype=complex), r])

    def root_clusters(self) -> list[tuple[complex, int]]:
        """Distinct roots with multiplicities, sorted by (real, imag)."""
        out = []
        self._cluster(self.roots(), 0, out)
        out.sort(key=lambda t: (round(t[0].real, 12), round(t[0].imag, 12)))
        return out

    def _cluster(self, pts, level, out):
        last = level == len(CLUSTER_LEVELS) - 1
        for members in _groups(pts, CLUSTER_LEVELS[level]):
            m = len(members)
            c = complex(np.mean(members))
            if m == 1:
                out.append((c, 1))
                continue
            c = self._refine_multiple(c, m)
            if last or self._is_multiple(c, m):
                out.append((c, m))
            else:
                self._cluster(members, level + 1, out)

    def _is_multiple(self, c: complex, m: int) -> bool:
        q = self
        for _ in range(m):
            if abs(q(c)) > MULTIPLICITY_RTOL * max(float(q.abs_bound(c)), 1e-300):
                return False
            q = q.deriv()
        return True

    def _refine_multiple(self, c: complex, m: int) -> complex:
        # an m-fold root is a simple root of the (m-1)-th derivative
        q = self.deriv(m - 1)
        dq = q.deriv()
        x = c
        for _ in range(8):
            d = dq(x)
            if d == 0:
                break
            step = q(x) / d
            x = x - step
            if abs(step) <= 1e-16 * (1.0 + abs(x)):
                break
        if abs(x - c) <= CLUSTER_LEVELS[0] * (1.0 + abs(c)) and np.isfinite(x):
            return complex(x)
        return c

    # -- square roots -----------------------------------------------------
    def sqrt(self, rtol: float = 1e-8) -> "ComplexPoly":
        """Polynomial q with q**2 == self, via the power-series square root at infinity."""
        if self.is_zero():
            return self
        deg = self.degree
        if deg % 2:
            raise NonSquareDivisor(f"odd degree {deg} polynomial is not a square")
        n = deg // 2
        r = self._c[::-1]
        s = np.zeros(n + 1, dtype=complex)
        s[0] = np.sqrt(r[0])
        for k in range(1, n + 1):
            acc = r[k] - np.dot(s[1:k], s[k - 1:0:-1])
            s[k] = acc / (2 * s[0])
        q = ComplexPoly(s[::-1])
        err = np.max(np.abs((q * q - self)._c))
        if err > rtol * self.norm():
            raise NonSquareDivisor(
                f"polynomial is not a perfect square (residual {err:.3g})")
        return q

    # -- serialization ----------------------------------------------------
    def to_json(self) -> list:
        return [[float(a.real), float(a.imag)] for a in self._c]

    @classmethod
    def from_json(cls, data) -> "ComplexPoly":
        if not isinstance(data, list) or not data:
            raise ValueError("polynomial JSON must be a non-empty list of [re, im] pairs")
        vals = []
        for item in data:
            if isinstance(item, (int, float)):
                vals.append(complex(item))
            elif isinstance(item, list) and len(item) == 2:
                vals.append(complex(float(item[0]), float(item[1])))
            else:
                raise ValueError(f"bad polynomial coefficient {item!r}")
        return cls(vals)


def cluster_points(points, rtol: float = CLUSTER_RTOL) -> list[tuple[complex, int]]:
    """Single-linkage clustering of complex points; returns (centroid, size) pairs."""
    out = [(complex(np.mean(g)), len(g)) for g in _groups(points, rtol)]
    out.sort(key=lambda t: (round(t[0].real, 12), round(t[0].imag, 12)))
    return out


def _groups(points, rtol: float) -> list:
    pts = np.asarray(points, dtype=complex).ravel()
    n = len(pts)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            tol = rtol * (1.0 + max(abs(pts[i]), abs(pts[j])))
            if abs(pts[i] - pts[j]) < tol:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return [pts[idx] for idx in groups.values()]
