"""Points of the Riemann sphere and finite divisors on it."""

from __future__ import annotations

import numbers


class _Infinity:
    """The point at infinity of the Riemann sphere (singleton)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()


def is_inf(p) -> bool:
    return p is INF


def as_point(p):
    """Normalize user input (complex, [re, im], 'inf', INF) to complex or INF."""
    if p is INF:
        return INF
    if isinstance(p, str):
        if p.strip().lower() in ("inf", "infinity", "∞"):
            return INF
        return complex(p.replace(" ", "").replace("i", "j"))
    if isinstance(p, (list, tuple)) and len(p) == 2:
        return complex(float(p[0]), float(p[1]))
    if isinstance(p, numbers.Number):
        return complex(p)
    raise ValueError(f"cannot interpret {p!r} as a point of the sphere")


def point_to_json(p):
    return "inf" if p is INF else [float(p.real), float(p.imag)]


def same_point(p, q, tol: float = 1e-7) -> bool:
    if p is INF or q is INF:
        return p is q
    return abs(p - q) <= tol * (1.0 + abs(p))


class Divisor:
    """Finite formal sum of sphere points with nonzero integer orders."""

    def __init__(self, entries=(), tol: float = 1e-7):
        merged: list[list] = []
        for p, n in entries:
            p = as_point(p)
            n = int(n)
            for e in merged:
                if same_point(e[0], p, tol):
                    e[1] += n
                    break
            else:
                merged.append([p, n])
        self._entries = tuple((p, n) for p, n in merged if n != 0)
        self._tol = tol

    @property
    def entries(self) -> tuple:
        return self._entries

    @property
    def degree(self) -> int:
        return sum(n for _, n in self._entries)

    def order_at(self, p, tol: float | None = None) -> int:
        p = as_point(p)
        tol = self._tol if tol is None else tol
        for q, n in self._entries:
            if same_point(q, p, tol):
                return n
        return 0

    def zeros(self) -> list:
        return [(p, n) for p, n in self._entries if n > 0]

    def poles(self) -> list:
        return [(p, -n) for p, n in self._entries if n < 0]

    def support(self) -> list:
        return [p for p, _ in self._entries]

    def finite_part(self) -> "Divisor":
        return Divisor([(p, n) for p, n in self._entries if p is not INF])

    def __iter__(self):
        return iter(self._entries)

    def __len__(self):
        return len(self._entries)

    def __add__(self, other: "Divisor") -> "Divisor":
        return Divisor(list(self._entries) + list(other._entries))

    def __neg__(self):
        return Divisor([(p, -n) for p, n in self._entries])

    def __sub__(self, other):
        return self + (-other)

    def __repr__(self):
        body = ", ".join(f"{p!r}: {n:+d}" for p, n in self._entries)
        return "Divisor({" + body + "})"

    def to_json(self) -> list:
        return [{"point": point_to_json(p), "order": n} for p, n in self._entries]

    @classmethod
    def from_json(cls, data) -> "Divisor":
        return cls([(as_point(d["point"]), int(d["order"])) for d in data])
