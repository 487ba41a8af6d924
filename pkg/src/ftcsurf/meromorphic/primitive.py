"""Closed-form antiderivatives of rational functions via partial fractions."""

from __future__ import annotations

import numpy as np

from ..errors import PeriodInconsistency
from .polynomial import ComplexPoly
from .rational import RationalFn

REAL_RESIDUE_ATOL = 1e-9


class Primitive:
    """Antiderivative of f dz written as

    Q(z) + sum_a res_a log(z - a) + sum_a sum_{k>=2} c_{a,k} / ((1 - k) (z - a)^(k-1)).

    ``real_part`` is single valued only when every residue is real, which is
    checked by :meth:`check_real_residues`.
    """

    def __init__(self, f: RationalFn):
        self.f = RationalFn.coerce(f)
        q, _ = self.f.num.divmod(self.f.den)
        self.poly = q.integ() if not q.is_zero() else ComplexPoly([0])
        self.terms = []  # (a, residue, [c_2, c_3, ...])
        for a, m in self.f.pole_clusters():
            _, c = self.f.laurent(a, m)
            # c[j] multiplies (z - a)^(j - m)
            higher = [c[m - k] for k in range(2, m + 1)]
            self.terms.append((a, complex(c[m - 1]), higher))

    @property
    def residues(self) -> list:
        return [(a, r) for a, r, _ in self.terms]

    def check_real_residues(self, atol: float = REAL_RESIDUE_ATOL):
        for a, r in self.residues:
            if abs(r.imag) > atol * (1.0 + abs(r)):
                raise PeriodInconsistency(
                    f"residue {r} at {a} is not real; the real part of the primitive is multivalued")

    def _rational_part(self, z):
        out = self.poly(z)
        for a, _, higher in self.terms:
            w = z - a
            for k, c in enumerate(higher, start=2):
                out = out + c / ((1 - k) * w ** (k - 1))
        return out

    def value(self, z):
        """Primitive on the principal branch of each logarithm."""
        z = np.asarray(z, dtype=complex)
        out = self._rational_part(z)
        for a, r, _ in self.terms:
            out = out + r * np.log(z - a)
        return out

    def real_part(self, z):
        """Re of the primitive, using Re(res log w) = Re(res) log|w| for real residues."""
        z = np.asarray(z, dtype=complex)
        out = self._rational_part(z).real
        for a, r, _ in self.terms:
            out = out + r.real * np.log(np.abs(z - a))
        return out

    def reconstruct(self, z):
        """Derivative of the closed form, for consistency checks against f."""
        z = np.asarray(z, dtype=complex)
        out = self.poly.deriv()(z)
        for a, r, higher in self.terms:
            w = z - a
            out = out + r / w
            for k, c in enumerate(higher, start=2):
                out = out + c / w ** k
        return out
