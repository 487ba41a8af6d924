"""Complete minimal surfaces of finite total curvature from spinorial Weierstrass data."""

__version__ = "0.1.0"
