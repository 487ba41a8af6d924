"""Rational functions and meromorphic 1-forms on the Riemann sphere."""

from __future__ import annotations

import numbers

import numpy as np

from ..errors import PoleEvaluation
from .divisor import INF, Divisor, as_point, same_point
from .polynomial import COEFF_RTOL, ComplexPoly

POLE_RTOL = 1e-10
MATCH_RTOL = 1e-7


def _series_div(n: np.ndarray, d: np.ndarray, nterms: int) -> np.ndarray:
    out = np.zeros(nterms, dtype=complex)
    for k in range(nterms):
        acc = n[k] if k < len(n) else 0j
        for i in range(1, min(k, len(d) - 1) + 1):
            acc -= d[i] * out[k - i]
        out[k] = acc / d[0]
    return out


def _exact_quotient(a: ComplexPoly, b: ComplexPoly):
    """a / b when b divides a up to rounding, else None."""
    if b.degree == 0:
        return a / complex(b.coeffs[0])
    q, r = a.divmod(b)
    if r.is_zero() or r.norm() <= 1e-12 * a.norm():
        return q
    return None


def _cancel_sum(a: ComplexPoly, b: ComplexPoly) -> ComplexPoly:
    """a + b with coefficients lost to cancellation set exactly to zero."""
    n = max(len(a), len(b))
    x = np.zeros(n, complex)
    y = np.zeros(n, complex)
    x[: len(a)] = a.coeffs
    y[: len(b)] = b.coeffs
    s = x + y
    s[np.abs(s) <= 1e-13 * (np.abs(x) + np.abs(y))] = 0
    return ComplexPoly(s)


_PROBE = np.exp(2j * np.pi * np.array([0.113, 0.377, 0.591, 0.829])) * np.array([0.7, 1.3, 2.1, 3.4])


def _same_function(n0, d0, n1, d1, rtol: float = 1e-9) -> bool:
    # cross-multiplied comparison at fixed probe points, scaled by rounding bounds
    zs = _PROBE
    lhs = n0(zs) * d1(zs)
    rhs = n1(zs) * d0(zs)
    bound = n0.abs_bound(zs) * d1.abs_bound(zs) + n1.abs_bound(zs) * d0.abs_bound(zs)
    return bool(np.all(np.abs(lhs - rhs) <= rtol * bound))


def _strip_common_power(num: ComplexPoly, den: ComplexPoly):
    a = int(np.flatnonzero(num.coeffs)[0])
    b = int(np.flatnonzero(den.coeffs)[0])
    k = min(a, b)
    if k == 0:
        return num, den
    return ComplexPoly(num.coeffs[k:]), ComplexPoly(den.coeffs[k:])


def _reduce(num: ComplexPoly, den: ComplexPoly):
    num = num.trim(COEFF_RTOL)
    den = den.trim(COEFF_RTOL)
    if num.is_zero():
        return ComplexPoly([0]), ComplexPoly([1])
    num, den = _strip_common_power(num, den)
    if num.degree >= 1 and den.degree >= 1:
        n0, d0 = num, den
        zc = num.root_clusters()
        for a, md in den.root_clusters():
            for b, mn in zc:
                if same_point(a, b, MATCH_RTOL * 100):
                    for _ in range(min(md, mn)):
                        num = num.deflate(a)
                        den = den.deflate(a)
                    break
        if den.degree < d0.degree and not _same_function(n0, d0, num, den):
            num, den = n0, d0
    lead = den.leading
    return num / lead, den / lead


class RationalFn:
    """Reduced quotient num/den of complex polynomials, den monic."""

    __slots__ = ("num", "den", "_zc", "_pc")

    def __init__(self, num, den=(1.0,), *, reduce: bool = True):
        num = ComplexPoly.coerce(num)
        den = ComplexPoly.coerce(den)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if reduce:
            num, den = _reduce(num, den)
        else:
            lead = den.leading
            num, den = num / lead, den / lead
        self.num = num
        self.den = den
        self._zc = None
        self._pc = None

    # -- construction -----------------------------------------------------
    @classmethod
    def constant(cls, c: complex) -> "RationalFn":
        return cls([c])

    @classmethod
    def identity(cls) -> "RationalFn":
        return cls([0, 1])

    @classmethod
    def coerce(cls, obj) -> "RationalFn":
        if isinstance(obj, RationalFn):
            return obj
        if isinstance(obj, ComplexPoly):
            return cls(obj)
        if isinstance(obj, numbers.Number):
            return cls([obj])
        raise TypeError(f"cannot convert {type(obj).__name__} to RationalFn")

    # -- properties -------------------------------------------------------
    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_constant(self) -> bool:
        return self.num.degree <= 0 and self.den.degree == 0

    @property
    def degree(self) -> int:
        """Degree as a map from the sphere to itself."""
        if self.is_zero():
            return 0
        return max(self.num.degree, self.den.degree)

    def __repr__(self):
        return f"RationalFn(num={self.num.coeffs!r}, den={self.den.coeffs!r})"

    # -- evaluation -------------------------------------------------------
    def evaluate(self, z, check: bool = True):
        z = np.asarray(z, dtype=complex)
        d = self.den(z)
        if check:
            thresh = POLE_RTOL * (1.0 + np.abs(z)) ** self.den.degree
            if np.any(np.abs(d) < thresh):
                raise PoleEvaluation(f"{self!r} evaluated at or near a pole")
        out = self.num(z) / d
        return complex(out) if np.ndim(out) == 0 else out

    def __call__(self, z):
        return self.evaluate(z, check=True)

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, OneForm):
            return NotImplemented
        o = RationalFn.coerce(other)
        if self.is_zero():
            return o
        if o.is_zero():
            return self
        # prefer the lcm of the denominators when one divides the other; building
        # the product would create clustered multiple roots that reduce poorly
        if self.den.degree >= o.den.degree:
            q = _exact_quotient(self.den, o.den)
            if q is not None:
                return RationalFn(_cancel_sum(self.num, o.num * q), self.den)
        else:
            q = _exact_quotient(o.den, self.den)
            if q is not None:
                return RationalFn(_cancel_sum(self.num * q, o.num), o.den)
        return RationalFn(_cancel_sum(self.num * o.den, o.num * self.den), self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFn(-self.num, self.den, reduce=False)

    def __sub__(self, other):
        return self + (-RationalFn.coerce(other))

    def __rsub__(self, other):
        return RationalFn.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, OneForm):
            return OneForm(self * other.coefficient)
        if isinstance(other, numbers.Number):
            return RationalFn(self.num * complex(other), self.den, reduce=False)
        o = RationalFn.coerce(other)
        return RationalFn(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, numbers.Number):
            return RationalFn(self.num / complex(other), self.den, reduce=False)
        o = RationalFn.coerce(other)
        if o.is_zero():
            raise ZeroDivisionError("division by the zero function")
        return RationalFn(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        return RationalFn.coerce(other) / self

    def __pow__(self, n: int):
        if n >= 0:
            return RationalFn(self.num ** n, self.den ** n, reduce=False)
        return RationalFn(self.den ** (-n), self.num ** (-n))

    def deriv(self) -> "RationalFn":
        return RationalFn(self.num.deriv() * self.den - self.num * self.den.deriv(),
                          self.den * self.den)

    def allclose(self, other, atol: float = 1e-10) -> bool:
        o = RationalFn.coerce(other)
        return self.num.allclose(o.num, atol) and self.den.allclose(o.den, atol)

    # -- zeros, poles, local expansions -----------------------------------
    def zero_clusters(self) -> list:
        if self._zc is None:
            self._zc = [] if self.num.degree <= 0 else self.num.root_clusters()
        return self._zc

    def pole_clusters(self) -> list:
        if self._pc is None:
            self._pc = [] if self.den.degree <= 0 else self.den.root_clusters()
        return self._pc

    def poles(self) -> list:
        """Finite poles as complex numbers."""
        return [a for a, _ in self.pole_clusters()]

    def zeros(self) -> list:
        return [a for a, _ in self.zero_clusters()]

    def order_at_infinity(self) -> int:
        if self.is_zero():
            raise ValueError("order of the zero function is undefined")
        return self.den.degree - self.num.degree

    def _mult(self, clusters, a) -> int:
        for b, m in clusters:
            if same_point(a, b, MATCH_RTOL):
                return m
        return 0

    def order_at(self, p) -> int:
        p = as_point(p)
        if p is INF:
            return self.order_at_infinity()
        if self.is_zero():
            raise ValueError("order of the zero function is undefined")
        return self._mult(self.zero_clusters(), p) - self._mult(self.pole_clusters(), p)

    def laurent(self, p, nterms: int):
        """Return (nu, c) with f = sum_k c[k] w^(nu+k) near p.

        The local coordinate is w = z - p for finite p and w = 1/z at infinity.
        """
        p = as_point(p)
        if self.is_zero():
            return 0, np.zeros(nterms, dtype=complex)
        if p is INF:
            nu = self.order_at_infinity()
            n = self.num.reversed()
            d = self.den.reversed()
            return nu, _series_div(n, d, nterms)
        mz = self._mult(self.zero_clusters(), p)
        mp = self._mult(self.pole_clusters(), p)
        n = self.num.taylor_shift(p)[mz:]
        d = self.den.taylor_shift(p)[mp:]
        return mz - mp, _series_div(n, d, nterms)

    def divisor(self) -> Divisor:
        if self.is_zero():
            raise ValueError("divisor of the zero function is undefined")
        entries = [(a, m) for a, m in self.zero_clusters()]
        entries += [(a, -m) for a, m in self.pole_clusters()]
        entries.append((INF, self.order_at_infinity()))
        return Divisor(entries)

    def sqrt(self) -> "RationalFn":
        """Rational square root; raises NonSquareDivisor for odd orders."""
        return RationalFn(self.num.sqrt(), self.den.sqrt(), reduce=False)

    # -- serialization ----------------------------------------------------
    def to_json(self) -> dict:
        return {"num": self.num.to_json(), "den": self.den.to_json()}

    @classmethod
    def from_json(cls, data) -> "RationalFn":
        if not isinstance(data, dict) or "num" not in data:
            raise ValueError("rational function JSON needs a 'num' entry")
        den = ComplexPoly.from_json(data["den"]) if "den" in data else ComplexPoly([1])
        return cls(ComplexPoly.from_json(data["num"]), den)


class OneForm:
    """Meromorphic 1-form ``coefficient(z) dz`` on the sphere."""

    __slots__ = ("coefficient",)

    def __init__(self, coefficient):
        self.coefficient = RationalFn.coerce(coefficient)

    @classmethod
    def dz(cls) -> "OneForm":
        return cls(RationalFn.constant(1.0))

    def __repr__(self):
        return f"OneForm({self.coefficient!r} dz)"

    def __call__(self, z):
        return self.coefficient(z)

    def is_zero(self) -> bool:
        return self.coefficient.is_zero()

    def __add__(self, other):
        if not isinstance(other, OneForm):
            return NotImplemented
        return OneForm(self.coefficient + other.coefficient)

    def __sub__(self, other):
        if not isinstance(other, OneForm):
            return NotImplemented
        return OneForm(self.coefficient - other.coefficient)

    def __neg__(self):
        return OneForm(-self.coefficient)

    def __mul__(self, other):
        if isinstance(other, OneForm):
            raise TypeError("product of two 1-forms is not a 1-form")
        return OneForm(self.coefficient * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, OneForm):
            return self.coefficient / other.coefficient
        return OneForm(self.coefficient / other)

    def allclose(self, other: "OneForm", atol: float = 1e-10) -> bool:
        return self.coefficient.allclose(other.coefficient, atol)

    def poles(self) -> list:
        return self.coefficient.poles()

    def order_at(self, p) -> int:
        p = as_point(p)
        if p is INF:
            return self.coefficient.order_at_infinity() - 2
        return self.coefficient.order_at(p)

    def divisor(self) -> Divisor:
        if self.is_zero():
            raise ValueError("divisor of the zero form is undefined")
        f = self.coefficient
        entries = [(a, m) for a, m in f.zero_clusters()]
        entries += [(a, -m) for a, m in f.pole_clusters()]
        entries.append((INF, f.order_at_infinity() - 2))
        return Divisor(entries)

    def residue(self, p) -> complex:
        p = as_point(p)
        f = self.coefficient
        if f.is_zero():
            return 0j
        if p is INF:
            nu = f.order_at_infinity()
            j = 1 - nu
            if j < 0:
                return 0j
            _, c = f.laurent(INF, j + 1)
            return complex(-c[j])
        nu = f.order_at(p)
        if nu >= 0:
            return 0j
        _, c = f.laurent(p, -nu)
        return complex(c[-1 - nu])

    def to_json(self) -> dict:
        return self.coefficient.to_json()

    @classmethod
    def from_json(cls, data) -> "OneForm":
        return cls(RationalFn.from_json(data))


def eval_rational(f: RationalFn, z: complex) -> complex:
    return RationalFn.coerce(f)(z)


def divisor_of(obj) -> Divisor:
    """Divisor of a nonzero rational function or 1-form, including the point at infinity."""
    if isinstance(obj, (RationalFn, OneForm)):
        return obj.divisor()
    return RationalFn.coerce(obj).divisor()


def residue_at(omega: OneForm, p) -> complex:
    return omega.residue(p)
