"""Rational functions, 1-forms, divisors and contour integrals on the Riemann sphere."""

from .contour import ArcSegment, LineSegment, PathContour, integrate_contour, integrate_path
from .divisor import INF, Divisor, as_point, point_to_json, same_point
from .polynomial import ComplexPoly, cluster_points
from .primitive import Primitive
from .rational import OneForm, RationalFn, divisor_of, eval_rational, residue_at

__all__ = [
    "ArcSegment", "ComplexPoly", "Divisor", "INF", "LineSegment", "OneForm", "PathContour",
    "Primitive", "RationalFn", "as_point", "cluster_points", "divisor_of", "eval_rational",
    "integrate_contour", "integrate_path", "point_to_json", "residue_at", "same_point",
]
