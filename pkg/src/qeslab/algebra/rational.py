"""Exact rationals.

``Rat`` is :class:`fractions.Fraction`: it already keeps ``gcd(|num|, den) = 1``
with a positive denominator and is immutable. This module only adds the
``"p/q"`` text form used by every serializer in the package.
"""
from __future__ import annotations

import re
from fractions import Fraction
from numbers import Rational
from typing import Union

Rat = Fraction
RatLike = Union[int, Fraction, str]

_RAT_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+)\s*)?$")


def as_rat(value: RatLike) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction.

    Floats are rejected on purpose: they would silently contaminate exact paths.
    """
    if isinstance(value, bool):
        raise TypeError("bool is not a rational")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Rational):
        return Fraction(value.numerator, value.denominator)
    if isinstance(value, str):
        return parse_rat(value)
    raise TypeError(f"cannot use {type(value).__name__} {value!r} as an exact rational")


def parse_rat(text: str) -> Fraction:
    m = _RAT_RE.match(text)
    if not m:
        raise ValueError(f"malformed rational {text!r}; expected 'p' or 'p/q'")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise ValueError(f"zero denominator in {text!r}")
    return Fraction(num, den)


def format_rat(r: Fraction) -> str:
    r = as_rat(r)
    if r.denominator == 1:
        return str(r.numerator)
    return f"{r.numerator}/{r.denominator}"


def rat_sqrt(r: RatLike) -> Fraction | None:
    """Exact square root if ``r`` is the square of a rational, else None."""
    from math import isqrt

    r = as_rat(r)
    if r < 0:
        return None
    p, q = r.numerator, r.denominator
    sp, sq = isqrt(p), isqrt(q)
    if sp * sp == p and sq * sq == q:
        return Fraction(sp, sq)
    return None
