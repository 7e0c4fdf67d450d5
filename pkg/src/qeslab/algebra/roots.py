"""Real root isolation with Sturm sequences, in exact rational arithmetic.

An isolating interval has rational endpoints and either ``lo == hi`` (the
root is exactly that rational) or ``lo < hi``, in which case it is the open
interval ``(lo, hi)`` holding exactly one distinct root, and neither endpoint
is a root.
Roots that land on the search range endpoints are returned as exact point
intervals rather than by perturbing the range.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence, Tuple

from ..errors import ZeroPolynomialError
from .rational import as_rat, format_rat
from .upoly import UPoly


@dataclass(frozen=True)
class RootInterval:
    lo: Fraction
    hi: Fraction
    multiplicity: int = 1

    @property
    def exact(self) -> bool:
        return self.lo == self.hi

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x) -> bool:
        """Membership in the point ``{lo}`` or the open interval ``(lo, hi)``."""
        if self.exact:
            return x == self.lo
        return self.lo < x < self.hi

    def to_json(self) -> dict:
        return {"lo": format_rat(self.lo), "hi": format_rat(self.hi), "multiplicity": self.multiplicity}


def sturm_sequence(p: UPoly) -> List[UPoly]:
    seq = [p, p.derivative()]
    while not seq[-1].is_zero():
        r = seq[-2] % seq[-1]
        seq.append(-r)
    seq.pop()
    return seq


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def _variations(signs: Sequence[int]) -> int:
    nz = [s for s in signs if s]
    return sum(1 for a, b in zip(nz, nz[1:]) if a != b)


def _var_at(seq: List[UPoly], x: Fraction, right_limit: bool = False) -> int:
    signs = [_sign(q(x)) for q in seq]
    if right_limit and signs[0] == 0:
        # p(x)=0 with p squarefree: just right of x, p has the sign of p'
        signs[0] = signs[1]
    return _variations(signs)


def count_roots_open(seq: List[UPoly], a: Fraction, b: Fraction) -> int:
    """Number of distinct roots of the squarefree seq[0] in the open interval (a, b)."""
    if a >= b:
        return 0
    n = _var_at(seq, a, right_limit=True) - _var_at(seq, b)
    if seq[0](b) == 0:
        n -= 1
    return n


def cauchy_bound(p: UPoly) -> Fraction:
    lc = abs(p.lc())
    return 1 + max((abs(c) / lc for c in p.coeffs[:-1]), default=Fraction(0))


def _isolate_squarefree(p: UPoly, lo: Fraction, hi: Fraction) -> List[Tuple[Fraction, Fraction]]:
    seq = sturm_sequence(p)
    out: List[Tuple[Fraction, Fraction]] = []
    if p(lo) == 0:
        out.append((lo, lo))
    stack = [(lo, hi)]
    found = []
    while stack:
        a, b = stack.pop()
        k = count_roots_open(seq, a, b)
        if k == 0:
            continue
        if k == 1:
            found.append((a, b))
            continue
        m = (a + b) / 2
        if p(m) == 0:
            found.append((m, m))
        stack.append((m, b))
        stack.append((a, m))
    out.extend(sorted(found))
    if hi != lo and p(hi) == 0:
        out.append((hi, hi))
    return out


def sturm_isolate_roots(p: UPoly, interval: Tuple | None = None) -> List[RootInterval]:
    """Isolate the distinct real roots of ``p`` in the closed ``interval``.

    Without an interval, all real roots are isolated (Cauchy bound).
    Multiplicities come from the squarefree decomposition.
    """
    if p.is_zero():
        raise ZeroPolynomialError("cannot isolate roots of the zero polynomial")
    if p.degree == 0:
        return []
    if interval is None:
        b = cauchy_bound(p)
        lo, hi = -b, b
    else:
        lo, hi = as_rat(interval[0]), as_rat(interval[1])
    if lo > hi:
        raise ValueError("empty interval")
    pieces = []
    for g, mult in p.squarefree_decomposition():
        for a, b in _isolate_squarefree(g, lo, hi):
            pieces.append([a, b, mult, g])
    # factors are coprime, so overlapping intervals can be separated by refining
    pieces.sort(key=lambda t: (t[0], t[1]))
    changed = True
    while changed:
        changed = False
        pieces.sort(key=lambda t: (t[0], t[1]))
        for i in range(len(pieces) - 1):
            A, B = pieces[i], pieces[i + 1]
            if A[1] > B[0]:
                for P in (A, B):
                    if P[0] != P[1]:
                        P[0], P[1] = _bisect_once(P[3], P[0], P[1])
                changed = True
                break
    return [RootInterval(a, b, m) for a, b, m, _ in pieces]


def _bisect_once(g: UPoly, a: Fraction, b: Fraction) -> Tuple[Fraction, Fraction]:
    """Halve an isolating interval of the squarefree ``g``."""
    m = (a + b) / 2
    vm = g(m)
    if vm == 0:
        return m, m
    sa = _sign(g(a))
    if sa == 0:
        # a is a (simple) root outside the open interval: sign just right of a
        sa = _sign(g.derivative()(a))
    if sa != _sign(vm):
        return a, m
    return m, b


def refine(p: UPoly, iv: RootInterval, width) -> RootInterval:
    """Bisect an isolating interval of ``p`` until it is narrower than ``width``."""
    width = as_rat(width) if not isinstance(width, float) else Fraction(width)
    g = p.squarefree_part()
    a, b = iv.lo, iv.hi
    while b - a > width:
        a, b = _bisect_once(g, a, b)
    return RootInterval(a, b, iv.multiplicity)


def rational_roots(p: UPoly, interval: Tuple | None = None) -> List[Fraction]:
    """All rational roots of ``p`` in the closed interval, exactly.

    A rational root p/q of an integer polynomial has q dividing the leading
    coefficient ``L``; two such rationals differ by at least 1/L^2, so an
    isolating interval narrower than that pins down a unique candidate.
    """
    if p.is_zero():
        raise ZeroPolynomialError("every rational is a root of the zero polynomial")
    g = p.squarefree_part()
    ints = g.primitive_integer()
    if len(ints) <= 1:
        return []
    L = abs(ints[-1])
    out = []
    for iv in sturm_isolate_roots(g, interval):
        if iv.exact:
            out.append(iv.lo)
            continue
        fine = refine(g, iv, Fraction(1, 2 * L * L))
        if fine.exact:
            out.append(fine.lo)
            continue
        cand = fine.midpoint().limit_denominator(L)
        if fine.lo <= cand <= fine.hi and g(cand) == 0:
            out.append(cand)
    return out
