"""Dense univariate polynomials over the rationals."""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, List, Sequence, Tuple

from .mpoly import MPoly
from .rational import as_rat, format_rat, parse_rat


class UPoly:
    __slots__ = ("var", "coeffs")

    def __init__(self, var: str, coeffs: Iterable = ()):
        cs = [as_rat(c) for c in coeffs]
        while cs and not cs[-1]:
            cs.pop()
        self.var = var
        self.coeffs: Tuple[Fraction, ...] = tuple(cs)

    @classmethod
    def const(cls, var: str, c) -> "UPoly":
        return cls(var, [c])

    @classmethod
    def x(cls, var: str) -> "UPoly":
        return cls(var, [0, 1])

    @classmethod
    def from_mpoly(cls, p: MPoly, var: str) -> "UPoly":
        if not set(p.vars) <= {var}:
            raise ValueError(f"{p} is not univariate in {var}")
        if not p.vars:
            return cls(var, [p.constant_value()])
        cs = [Fraction(0)] * (p.degree() + 1)
        for (k,), c in p.terms.items():
            cs[k] = c
        return cls(var, cs)

    def to_mpoly(self) -> MPoly:
        return MPoly((self.var,), {(k,): c for k, c in enumerate(self.coeffs)})

    # -- queries -------------------------------------------------------------
    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def lc(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __call__(self, x):
        """Horner evaluation; exact for int/Fraction, float/complex otherwise."""
        exact = isinstance(x, (int, Fraction))
        acc = Fraction(0) if exact else 0.0
        for c in reversed(self.coeffs):
            acc = acc * x + (c if exact else float(c))
        return acc

    def __eq__(self, other):
        if isinstance(other, UPoly):
            return self.coeffs == other.coeffs and (self.var == other.var or self.degree <= 0)
        if isinstance(other, (int, Fraction)):
            return self.coeffs == UPoly(self.var, [other]).coeffs
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __bool__(self):
        return bool(self.coeffs)

    # -- arithmetic ----------------------------------------------------------
    def _coerce(self, other) -> "UPoly":
        if isinstance(other, UPoly):
            if other.var != self.var and other.degree > 0 and self.degree > 0:
                raise ValueError(f"variable mismatch {self.var} vs {other.var}")
            return other
        return UPoly(self.var, [as_rat(other)])

    def __add__(self, other):
        other = self._coerce(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (n - len(other.coeffs))
        return UPoly(self._var(other), [x + y for x, y in zip(a, b)])

    __radd__ = __add__

    def __neg__(self):
        return UPoly(self.var, [-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        if not self.coeffs or not other.coeffs:
            return UPoly(self._var(other))
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return UPoly(self._var(other), out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = UPoly(self.var, [1])
        for _ in range(k):
            out = out * self
        return out

    def _var(self, other: "UPoly") -> str:
        return self.var if self.degree > 0 or other.degree <= 0 else other.var

    def scale(self, k) -> "UPoly":
        k = as_rat(k)
        return UPoly(self.var, [c * k for c in self.coeffs])

    def divmod(self, other: "UPoly"):
        other = self._coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.degree
        lc = other.lc()
        quot = [Fraction(0)] * max(0, len(rem) - dq)
        for i in range(len(rem) - 1, dq - 1, -1):
            c = rem[i] / lc
            if c:
                quot[i - dq] = c
                for j, b in enumerate(other.coeffs):
                    rem[i - dq + j] -= c * b
        return UPoly(self.var, quot), UPoly(self.var, rem[:dq] if dq > 0 else [])

    def __floordiv__(self, other):
        return self.divmod(other)[0]

    def __mod__(self, other):
        return self.divmod(other)[1]

    def derivative(self) -> "UPoly":
        return UPoly(self.var, [k * c for k, c in enumerate(self.coeffs)][1:])

    def monic(self) -> "UPoly":
        if self.is_zero():
            return self
        return self.scale(1 / self.lc())

    def gcd(self, other: "UPoly") -> "UPoly":
        """Monic gcd (zero if both are zero)."""
        a, b = self, self._coerce(other)
        while not b.is_zero():
            a, b = b, a % b
            # keep coefficient growth in check
            if not b.is_zero():
                b = b.monic()
        return a.monic()

    def primitive_integer(self) -> Tuple[int, ...]:
        """Integer coefficients with content 1 and positive leading coefficient."""
        from math import gcd, lcm

        if self.is_zero():
            return ()
        den = 1
        for c in self.coeffs:
            den = lcm(den, c.denominator)
        ints = [int(c * den) for c in self.coeffs]
        g = 0
        for v in ints:
            g = gcd(g, v)
        ints = [v // g for v in ints]
        if ints[-1] < 0:
            ints = [-v for v in ints]
        return tuple(ints)

    def squarefree_decomposition(self) -> List[Tuple["UPoly", int]]:
        """Yun's algorithm: [(g_i, i)] with self = lc * prod g_i^i, g_i squarefree, coprime."""
        if self.degree <= 0:
            return []
        f = self.monic()
        out = []
        a = f.gcd(f.derivative())
        b = f // a
        c = f.derivative() // a
        d = c - b.derivative()
        i = 1
        while b.degree > 0:
            g = b.gcd(d)
            if g.degree > 0:
                out.append((g, i))
            b = b // g
            c = d // g
            d = c - b.derivative()
            i += 1
        return out

    def squarefree_part(self) -> "UPoly":
        out = UPoly(self.var, [1])
        for g, _ in self.squarefree_decomposition():
            out = out * g
        return out

    # -- output ----------------------------------------------------------------
    def __str__(self):
        return str(self.to_mpoly())

    def __repr__(self):
        return f"UPoly({self.var!r}, {str(self)!r})"

    def to_json(self) -> dict:
        return {"var": self.var, "coeffs": [format_rat(c) for c in self.coeffs]}

    @classmethod
    def from_json(cls, data) -> "UPoly":
        return cls(data["var"], [parse_rat(c) for c in data["coeffs"]])


def upoly_from_roots(var: str, roots: Sequence) -> UPoly:
    out = UPoly(var, [1])
    for r in roots:
        out = out * UPoly(var, [-as_rat(r), 1])
    return out
