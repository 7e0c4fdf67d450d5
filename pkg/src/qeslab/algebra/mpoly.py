"""Sparse multivariate polynomials with exact rational coefficients.

A polynomial stores a sorted tuple of variable names and a dict mapping dense
exponent tuples (one entry per variable) to nonzero Fractions. Only variables
that actually occur are kept, so two equal polynomials always have identical
storage. Term order for display and serialization is graded-lex, highest first.

    >>> p = MPoly.parse("(x+1)*(x-1)")
    >>> str(p)
    'x^2 - 1'
"""
from __future__ import annotations

import ast
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Tuple, Union

from .rational import as_rat, format_rat

Exps = Tuple[int, ...]
Scalar = Union[int, Fraction]


class MPoly:
    __slots__ = ("vars", "terms", "_hash")

    def __init__(self, vars: Iterable[str] = (), terms: Mapping[Exps, Scalar] | None = None):
        vars = tuple(vars)
        terms = dict(terms or {})
        if list(vars) != sorted(set(vars)):
            order = sorted(range(len(vars)), key=lambda i: vars[i])
            if len(set(vars)) != len(vars):
                raise ValueError(f"duplicate variables in {vars}")
            vars = tuple(vars[i] for i in order)
            terms = {tuple(e[i] for i in order): c for e, c in terms.items()}
        clean: Dict[Exps, Fraction] = {}
        for e, c in terms.items():
            if len(e) != len(vars):
                raise ValueError("exponent vector length does not match variables")
            if any(k < 0 for k in e):
                raise ValueError("negative exponent")
            c = as_rat(c)
            if c:
                clean[tuple(e)] = c
        # drop variables that never occur
        used = [i for i in range(len(vars)) if any(e[i] for e in clean)]
        if len(used) != len(vars):
            vars = tuple(vars[i] for i in used)
            clean = {tuple(e[i] for i in used): c for e, c in clean.items()}
        self.vars = vars
        self.terms = clean
        self._hash = None

    # -- constructors -------------------------------------------------------
    @classmethod
    def const(cls, c: Scalar) -> "MPoly":
        return cls((), {(): c})

    @classmethod
    def var(cls, name: str) -> "MPoly":
        return cls((name,), {(1,): 1})

    @classmethod
    def parse(cls, text: str) -> "MPoly":
        """Parse an arithmetic expression: ``+ - * / ** ^``, integers, names.

        Division is only allowed by nonzero constants.
        """
        tree = ast.parse(text.replace("^", "**"), mode="eval")
        return _from_ast(tree.body)

    @staticmethod
    def coerce(x) -> "MPoly":
        if isinstance(x, MPoly):
            return x
        if isinstance(x, str):
            return MPoly.parse(x)
        return MPoly.const(as_rat(x))

    # -- basic queries ------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.vars

    def constant_value(self) -> Fraction:
        if self.vars:
            raise ValueError(f"{self} is not constant")
        return self.terms.get((), Fraction(0))

    def degree(self, var: str | None = None) -> int:
        """Total degree, or degree in ``var``. The zero polynomial has degree -1."""
        if not self.terms:
            return -1
        if var is None:
            return max(sum(e) for e in self.terms)
        if var not in self.vars:
            return 0
        i = self.vars.index(var)
        return max(e[i] for e in self.terms)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: (sum(kv[0]), kv[0]), reverse=True)

    def leading_term(self) -> Tuple[Exps, Fraction]:
        """Leading term in lex order (used by exact division)."""
        e = max(self.terms)
        return e, self.terms[e]

    def leading_rational(self) -> Fraction:
        """Coefficient of the first term in display order."""
        if not self.terms:
            return Fraction(0)
        return self.sorted_terms()[0][1]

    def __eq__(self, other):
        if not isinstance(other, MPoly):
            try:
                other = MPoly.coerce(other)
            except (TypeError, ValueError):
                return NotImplemented
        return self.vars == other.vars and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.vars, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    # -- arithmetic ---------------------------------------------------------
    def _aligned(self, other: "MPoly"):
        if self.vars == other.vars:
            return self.vars, self.terms, other.terms
        vars = tuple(sorted(set(self.vars) | set(other.vars)))
        return vars, _embed(self, vars), _embed(other, vars)

    def __add__(self, other):
        other = MPoly.coerce(other)
        vars, a, b = self._aligned(other)
        out = dict(a)
        for e, c in b.items():
            out[e] = out.get(e, 0) + c
        return MPoly(vars, out)

    __radd__ = __add__

    def __neg__(self):
        return MPoly(self.vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-MPoly.coerce(other))

    def __rsub__(self, other):
        return MPoly.coerce(other) - self

    def __mul__(self, other):
        other = MPoly.coerce(other)
        if other.is_constant():
            k = other.constant_value()
            return MPoly(self.vars, {e: c * k for e, c in self.terms.items()})
        vars, a, b = self._aligned(other)
        out: Dict[Exps, Fraction] = {}
        for ea, ca in a.items():
            for eb, cb in b.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                out[e] = out.get(e, 0) + ca * cb
        return MPoly(vars, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = MPoly.coerce(other)
        if other.is_constant():
            k = other.constant_value()
            if not k:
                raise ZeroDivisionError("division by zero polynomial")
            return MPoly(self.vars, {e: c / k for e, c in self.terms.items()})
        return self.div_exact(other)

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only nonnegative integer powers")
        result = MPoly.const(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def div_exact(self, divisor: "MPoly") -> "MPoly":
        """Exact quotient; raises ValueError if ``divisor`` does not divide."""
        divisor = MPoly.coerce(divisor)
        if divisor.is_zero():
            raise ZeroDivisionError("division by zero polynomial")
        vars = tuple(sorted(set(self.vars) | set(divisor.vars)))
        d_terms = _embed(divisor, vars)
        de, dc = max(d_terms.items())
        rem = dict(_embed(self, vars))
        quot: Dict[Exps, Fraction] = {}
        while rem:
            e = max(rem)
            c = rem[e]
            q = tuple(x - y for x, y in zip(e, de))
            if any(k < 0 for k in q):
                raise ValueError(f"{divisor} does not divide {self}")
            qc = c / dc
            quot[q] = quot.get(q, 0) + qc
            for te, tc in d_terms.items():
                ee = tuple(x + y for x, y in zip(te, q))
                v = rem.get(ee, 0) - qc * tc
                if v:
                    rem[ee] = v
                else:
                    rem.pop(ee, None)
        return MPoly(vars, quot)

    # -- calculus and substitution ------------------------------------------
    def diff(self, var: str) -> "MPoly":
        if var not in self.vars:
            return MPoly()
        i = self.vars.index(var)
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                ne = list(e)
                ne[i] -= 1
                out[tuple(ne)] = c * e[i]
        return MPoly(self.vars, out)

    def substitute(self, bindings: Mapping[str, "Scalar | MPoly | str"]) -> "MPoly":
        """Replace variables by rationals or polynomials (simultaneously).

        Bindings for variables that do not occur are ignored.
        """
        active = {k: v for k, v in bindings.items() if k in self.vars}
        if not active:
            return self
        idx = [self.vars.index(k) for k in active]
        vals = [MPoly.coerce(v) for v in active.values()]
        keep = [i for i in range(len(self.vars)) if i not in idx]
        keep_vars = tuple(self.vars[i] for i in keep)
        # numeric fast path
        if all(v.is_constant() for v in vals):
            nums = [v.constant_value() for v in vals]
            out: Dict[Exps, Fraction] = {}
            for e, c in self.terms.items():
                for i, x in zip(idx, nums):
                    c = c * x ** e[i]
                    if not c:
                        break
                if c:
                    ke = tuple(e[i] for i in keep)
                    out[ke] = out.get(ke, 0) + c
            return MPoly(keep_vars, out)
        powers: Dict[Tuple[int, int], MPoly] = {}

        def power(j, k):
            if (j, k) not in powers:
                powers[(j, k)] = vals[j] ** k
            return powers[(j, k)]

        result = MPoly()
        for e, c in self.terms.items():
            term = MPoly(keep_vars, {tuple(e[i] for i in keep): c})
            for j, i in enumerate(idx):
                if e[i]:
                    term = term * power(j, e[i])
            result = result + term
        return result

    def evaluate(self, values: Mapping[str, object]):
        """Numeric evaluation with arbitrary number types (float, complex, Fraction)."""
        missing = [v for v in self.vars if v not in values]
        if missing:
            raise KeyError(f"unbound variables {missing}")
        xs = [values[v] for v in self.vars]
        total = 0
        for e, c in self.terms.items():
            term = c if all(isinstance(x, (int, Fraction)) for x in xs) else float(c)
            for x, k in zip(xs, e):
                if k:
                    term = term * x ** k
            total = total + term
        return total

    def collect(self, var: str) -> Dict[int, "MPoly"]:
        """Coefficients with respect to ``var``: {power: MPoly in the other variables}."""
        if var not in self.vars:
            return {0: self} if self.terms else {}
        i = self.vars.index(var)
        rest = self.vars[:i] + self.vars[i + 1:]
        groups: Dict[int, Dict[Exps, Fraction]] = {}
        for e, c in self.terms.items():
            groups.setdefault(e[i], {})[e[:i] + e[i + 1:]] = c
        return {k: MPoly(rest, t) for k, t in sorted(groups.items())}

    # -- output -------------------------------------------------------------
    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            mono = "*".join(
                v if k == 1 else f"{v}^{k}" for v, k in zip(self.vars, e) if k
            )
            mag = abs(c)
            if not mono:
                body = format_rat(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{format_rat(mag)}*{mono}"
            parts.append(("- " if c < 0 else "+ ") + body)
        s = " ".join(parts)
        return s[2:] if s.startswith("+ ") else "-" + s[2:]

    def __repr__(self):
        return f"MPoly({str(self)!r})"

    def to_json(self) -> dict:
        return {
            "vars": list(self.vars),
            "terms": [[list(e), format_rat(c)] for e, c in self.sorted_terms()],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "MPoly":
        from .rational import parse_rat

        return cls(data["vars"], {tuple(e): parse_rat(c) for e, c in data["terms"]})

    def to_sympy(self):
        import sympy

        syms = [sympy.Symbol(v) for v in self.vars]
        expr = sympy.Integer(0)
        for e, c in self.terms.items():
            term = sympy.Rational(c.numerator, c.denominator)
            for s, k in zip(syms, e):
                term *= s ** k
            expr += term
        return expr


def _embed(p: MPoly, vars: Tuple[str, ...]) -> Dict[Exps, Fraction]:
    pos = [vars.index(v) for v in p.vars]
    out = {}
    for e, c in p.terms.items():
        ne = [0] * len(vars)
        for i, k in zip(pos, e):
            ne[i] = k
        out[tuple(ne)] = c
    return out


def _from_ast(node) -> MPoly:
    if isinstance(node, ast.Constant) and isinstance(node.value, int) and not isinstance(node.value, bool):
        return MPoly.const(node.value)
    if isinstance(node, ast.Name):
        return MPoly.var(node.id)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _from_ast(node.operand)
        return -inner if isinstance(node.op, ast.USub) else inner
    if isinstance(node, ast.BinOp):
        left = _from_ast(node.left)
        if isinstance(node.op, ast.Pow):
            right = _from_ast(node.right)
            if not right.is_constant() or right.constant_value().denominator != 1:
                raise ValueError("exponent must be a nonnegative integer")
            return left ** int(right.constant_value())
        right = _from_ast(node.right)
        if isinstance(node.op, ast.Add):
            return left + right
        if isinstance(node.op, ast.Sub):
            return left - right
        if isinstance(node.op, ast.Mult):
            return left * right
        if isinstance(node.op, ast.Div):
            return left / right
    raise ValueError(f"unsupported expression element: {ast.dump(node)}")


def poly_mul(p: MPoly, q: MPoly) -> MPoly:
    return MPoly.coerce(p) * MPoly.coerce(q)


def poly_substitute(p: MPoly, bindings: Mapping[str, object]) -> MPoly:
    return MPoly.coerce(p).substitute(bindings)


def falling_factorial(x: MPoly, k: int) -> MPoly:
    """x (x-1) ... (x-k+1) as a polynomial."""
    out = MPoly.const(1)
    for j in range(k):
        out = out * (x - j)
    return out
