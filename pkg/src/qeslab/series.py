"""Linear ODEs with polynomial coefficients and their power-series recurrences.

The central routine, :func:`derive_recurrence`, substitutes a power series
into the ODE and collects the coefficient of each power of the independent
variable. A term ``c_{k,j} x^j f^{(k)}`` contributes ``c_{k,j} ff(N+k-j, k)
a_{N+k-j}`` to the coefficient of ``x^N`` (``ff`` the falling factorial), so
every term is tagged by its index shift ``k - j``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Dict, List, Mapping, Sequence, Tuple

from .algebra import MPoly, UPoly, falling_factorial, format_rat, rational_roots
from .errors import (
    LeadingCoeffVanishesError,
    NotPolynomialError,
    UnboundParameterError,
    WrongShapeError,
)

SCALINGS = ("plain", "factorial")


def _as_poly(c) -> MPoly:
    try:
        return MPoly.coerce(c)
    except ValueError as exc:
        raise NotPolynomialError(f"coefficient {c!r} is not a polynomial: {exc}") from exc


@dataclass(frozen=True)
class LinearOde:
    """``sum_k coeff_k(x) f^{(k)}(x) = 0`` with polynomial coefficients.

    ``terms`` is a tuple of ``(order, MPoly)``; coefficients may also be given
    as expression strings. Rational-function coefficients must be cleared by
    the caller first.
    """

    indep: str
    terms: Tuple[Tuple[int, MPoly], ...]

    def __post_init__(self):
        merged: Dict[int, MPoly] = {}
        for k, c in self.terms:
            if k < 0:
                raise ValueError("derivative order must be >= 0")
            merged[k] = merged.get(k, MPoly()) + _as_poly(c)
        merged = {k: c for k, c in merged.items() if not c.is_zero()}
        if not merged or max(merged) < 1:
            raise ValueError("an ODE needs a nonzero term of order >= 1")
        object.__setattr__(self, "terms", tuple(sorted(merged.items(), reverse=True)))

    @property
    def order(self) -> int:
        return self.terms[0][0]

    def coeff(self, k: int) -> MPoly:
        return dict(self.terms).get(k, MPoly())

    @property
    def parameters(self) -> Tuple[str, ...]:
        names = set()
        for _, c in self.terms:
            names.update(c.vars)
        names.discard(self.indep)
        return tuple(sorted(names))

    def scaled(self, k) -> "LinearOde":
        return LinearOde(self.indep, tuple((o, c * k) for o, c in self.terms))

    def substitute(self, bindings: Mapping) -> "LinearOde":
        return LinearOde(self.indep, tuple((o, c.substitute(bindings)) for o, c in self.terms))

    def apply(self, f: MPoly) -> MPoly:
        """The polynomial ``sum_k coeff_k * d^k f / dx^k``."""
        out = MPoly()
        for k, c in self.terms:
            d = f
            for _ in range(k):
                d = d.diff(self.indep)
            out = out + c * d
        return out

    def to_json(self) -> dict:
        return {
            "indep": self.indep,
            "terms": [{"order": k, "coeff": c.to_json()} for k, c in self.terms],
        }

    @classmethod
    def from_json(cls, data) -> "LinearOde":
        return cls(data["indep"], tuple((t["order"], MPoly.from_json(t["coeff"])) for t in data["terms"]))


@dataclass(frozen=True)
class SeriesAnsatz:
    """``plain``: f = sum a_n x^n.  ``factorial``: f = sum P_n x^n / n!."""

    scaling: str = "plain"
    index: str = "n"

    def __post_init__(self):
        if self.scaling not in SCALINGS:
            raise ValueError(f"scaling must be one of {SCALINGS}")


@dataclass(frozen=True)
class Recurrence:
    """``sum_j coeffs[j](n) * P[n + lead_shift - j*step] = 0``.

    ``coeffs[0]`` multiplies the highest index. Entries with negative index
    are zero.
    """

    coeffs: Tuple[MPoly, ...]
    step: int = 1
    lead_shift: int = 0
    index: str = "n"
    spectral: str | None = None
    scaling: str = "factorial"

    def __post_init__(self):
        cs = tuple(MPoly.coerce(c) for c in self.coeffs)
        if len(cs) < 2:
            raise WrongShapeError("a recurrence needs at least two terms")
        if cs[0].is_zero():
            raise WrongShapeError("leading coefficient is identically zero")
        if self.step < 1:
            raise WrongShapeError("step must be >= 1")
        object.__setattr__(self, "coeffs", cs)

    @property
    def span(self) -> int:
        return len(self.coeffs) - 1

    @property
    def parameters(self) -> Tuple[str, ...]:
        names = set()
        for c in self.coeffs:
            names.update(c.vars)
        names.discard(self.index)
        names.discard(self.spectral)
        return tuple(sorted(names))

    def term_offset(self, j: int) -> int:
        return self.lead_shift - j * self.step

    def coeff_at(self, j: int, n: int) -> MPoly:
        return self.coeffs[j].substitute({self.index: n})

    def _replace(self, **kw) -> "Recurrence":
        data = dict(
            coeffs=self.coeffs, step=self.step, lead_shift=self.lead_shift,
            index=self.index, spectral=self.spectral, scaling=self.scaling,
        )
        data.update(kw)
        return Recurrence(**data)

    def with_lead_shift(self, shift: int) -> "Recurrence":
        """Re-index so that the highest index reads ``n + shift``."""
        if shift == self.lead_shift:
            return self
        n = MPoly.var(self.index)
        move = {self.index: n + (shift - self.lead_shift)}
        return self._replace(coeffs=tuple(c.substitute(move) for c in self.coeffs), lead_shift=shift)

    def substitute(self, bindings: Mapping) -> "Recurrence":
        if self.index in bindings:
            raise ValueError("bind the index through coeff_at, not substitute")
        return self._replace(coeffs=tuple(c.substitute(bindings) for c in self.coeffs))

    def scaled(self, k) -> "Recurrence":
        return self._replace(coeffs=tuple(c * k for c in self.coeffs))

    def normalized(self) -> "Recurrence":
        """Sign convention for display: leading rational of ``coeffs[0]`` positive."""
        if self.coeffs[0].leading_rational() < 0:
            return self.scaled(-1)
        return self

    def monic(self) -> "Recurrence":
        """Divide through by the leading rational of ``coeffs[0]`` (for comparisons)."""
        return self.scaled(1 / self.coeffs[0].leading_rational())

    def same_as(self, other: "Recurrence") -> bool:
        """Equal up to a common nonzero rational factor and re-indexing."""
        if (self.step, self.span) != (other.step, other.span):
            return False
        b = other.with_lead_shift(self.lead_shift).monic()
        return self.monic().coeffs == _rename(b.coeffs, other.index, self.index)

    def factored(self) -> List[str]:
        """Coefficients factored over Q, as display strings."""
        import sympy

        return [str(sympy.factor(c.to_sympy())) for c in self.coeffs]

    def labels(self, symbol: str = "P") -> List[str]:
        out = []
        for j in range(len(self.coeffs)):
            off = self.term_offset(j)
            out.append(f"{symbol}[{self.index}{'+' if off > 0 else '-' if off < 0 else ''}{abs(off) if off else ''}]")
        return out

    def __str__(self):
        parts = [f"({c})*{lab}" for c, lab in zip(self.coeffs, self.labels())]
        return " + ".join(parts) + " = 0"

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "spectral": self.spectral,
            "step": self.step,
            "lead_shift": self.lead_shift,
            "scaling": self.scaling,
            "coeffs": [c.to_json() for c in self.coeffs],
            "display": [str(c) for c in self.coeffs],
            "terms": self.labels(),
        }

    @classmethod
    def from_json(cls, data) -> "Recurrence":
        return cls(
            coeffs=tuple(MPoly.from_json(c) for c in data["coeffs"]),
            step=data["step"],
            lead_shift=data["lead_shift"],
            index=data["index"],
            spectral=data.get("spectral"),
            scaling=data.get("scaling", "factorial"),
        )


def _rename(coeffs, old, new):
    if old == new:
        return coeffs
    return tuple(c.substitute({old: MPoly.var(new)}) for c in coeffs)


@dataclass
class PolySequence:
    """A family P_0, P_1, ... of polynomials in the spectral variable."""

    spectral: str
    entries: List[UPoly] = field(default_factory=list)
    seed: Tuple[str, ...] = ("1",)

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def degrees(self) -> List[int]:
        return [p.degree for p in self.entries]

    def to_json(self) -> dict:
        return {
            "spectral": self.spectral,
            "seed": list(self.seed),
            "entries": [p.to_json() for p in self.entries],
        }

    @classmethod
    def from_json(cls, data) -> "PolySequence":
        return cls(data["spectral"], [UPoly.from_json(p) for p in data["entries"]], tuple(data.get("seed", ("1",))))

    def csv_rows(self) -> List[List[str]]:
        width = max((len(p.coeffs) for p in self.entries), default=0)
        rows = [["n", "degree"] + [f"c{k}" for k in range(width)]]
        for i, p in enumerate(self.entries):
            cs = [format_rat(c) for c in p.coeffs]
            rows.append([str(i), str(p.degree)] + cs + [""] * (width - len(cs)))
        return rows


# -- derivation ---------------------------------------------------------------

def _shift_table(ode: LinearOde, index: str) -> Dict[int, MPoly]:
    """Plain-scaling coefficient K_delta(N) of a_{N+delta} in [x^N]."""
    N = MPoly.var(index)
    if index in ode.parameters or index == ode.indep:
        raise ValueError(f"index symbol {index!r} clashes with an ODE variable")
    table: Dict[int, MPoly] = {}
    for k, c in ode.terms:
        for j, cj in c.collect(ode.indep).items():
            d = k - j
            table[d] = table.get(d, MPoly()) + cj * falling_factorial(N + d, k)
    return {d: K for d, K in table.items() if not K.is_zero()}


def _integer_roots_in_index(p: MPoly, index: str) -> List[int]:
    """Integers N0 with p(N0, params) identically zero in the parameters."""
    by_param: Dict[Tuple, Dict[int, Fraction]] = {}
    if index not in p.vars:
        return []
    i = p.vars.index(index)
    for e, c in p.terms.items():
        rest = e[:i] + e[i + 1:]
        by_param.setdefault(rest, {})[e[i]] = c
    g = None
    for coeffs in by_param.values():
        u = UPoly(index, [coeffs.get(k, 0) for k in range(max(coeffs) + 1)])
        g = u if g is None else g.gcd(u)
    if g is None or g.degree <= 0:
        return []
    return [int(r) for r in rational_roots(g) if r.denominator == 1]


def derive_recurrence(ode: LinearOde, ansatz: SeriesAnsatz, spectral: str | None = None,
                      lead_shift: int | None = None) -> Recurrence:
    """Recurrence for the series coefficients of a polynomial-coefficient ODE.

    The result is indexed by the collected power ``N`` of the independent
    variable (highest index ``N + max shift``) unless ``lead_shift`` is given.
    With factorial scaling the exact rescaling by ``(N + max shift)!`` is
    applied and linear factors ``N + c`` common to every coefficient are
    cancelled.
    """
    index = ansatz.index
    table = _shift_table(ode, index)
    if len(table) < 2:
        raise WrongShapeError(f"series substitution gives a single index shift {sorted(table)}")
    shifts = sorted(table, reverse=True)
    dmax, dmin = shifts[0], shifts[-1]
    step = 0
    for d in shifts:
        step = gcd(step, dmax - d)
    span = (dmax - dmin) // step

    lead = table[dmax]
    for n0 in _integer_roots_in_index(lead, index):
        # roots whose highest index falls among the free seeds are the indicial ones
        if n0 + dmax >= step:
            raise LeadingCoeffVanishesError(
                f"leading coefficient vanishes identically at {index}={n0}", n=n0
            )

    N = MPoly.var(index)
    coeffs: List[MPoly] = []
    for j in range(span + 1):
        d = dmax - j * step
        K = table.get(d, MPoly())
        if ansatz.scaling == "factorial":
            K = K * falling_factorial(N + dmax, dmax - d)
        coeffs.append(K)

    if ansatz.scaling == "factorial":
        for c in range(dmax, dmin, -1):
            if all(K.substitute({index: -c}).is_zero() for K in coeffs):
                lin = N + c
                coeffs = [K.div_exact(lin) for K in coeffs]

    rec = Recurrence(
        coeffs=tuple(coeffs), step=step, lead_shift=dmax, index=index,
        spectral=spectral, scaling=ansatz.scaling,
    ).normalized()
    if lead_shift is not None:
        rec = rec.with_lead_shift(lead_shift)
    return rec


def parity_decouple(rec: Recurrence, index: str = "m") -> Tuple[Recurrence, Recurrence]:
    """Split a step-2 three-term recurrence into its even and odd sectors.

    With the highest index written ``n+2``: even sector ``P_m = Q_{2m}``
    (``n = 2m-2``), odd sector ``P_m = Q_{2m+1}`` (``n = 2m-1``). Both results
    have highest index ``m``.
    """
    if rec.span != 2 or rec.step != 2:
        raise WrongShapeError(f"need span 2 and step 2, got span {rec.span}, step {rec.step}")
    r = rec.with_lead_shift(2)
    m = MPoly.var(index)
    if index in r.parameters or index == r.spectral:
        raise ValueError(f"index symbol {index!r} clashes with a parameter")
    out = []
    for shift in (2, 1):
        cs = tuple(c.substitute({r.index: 2 * m - shift}) for c in r.coeffs)
        out.append(Recurrence(coeffs=cs, step=1, lead_shift=0, index=index,
                              spectral=r.spectral, scaling=r.scaling))
    return out[0], out[1]


def exact_residual(ode: LinearOde, f: UPoly | MPoly, bindings: Mapping | None = None) -> MPoly:
    """``sum_k coeff_k f^{(k)}`` with every parameter bound; zero iff f solves the ODE."""
    bound = ode.substitute(bindings or {})
    if bound.parameters:
        raise UnboundParameterError(f"unbound parameters {bound.parameters}", parameters=",".join(bound.parameters))
    fp = f.to_mpoly() if isinstance(f, UPoly) else MPoly.coerce(f)
    extra = set(fp.vars) - {ode.indep}
    if extra:
        raise UnboundParameterError(f"candidate solution depends on {sorted(extra)}")
    return bound.apply(fp)


def series_from_coefficients(coeffs: Sequence, var: str, scaling: str = "factorial") -> UPoly:
    """Polynomial ``sum c_n x^n`` (plain) or ``sum c_n x^n / n!`` (factorial)."""
    from math import factorial

    cs = [Fraction(c) for c in coeffs]
    if scaling == "factorial":
        cs = [c / factorial(k) for k, c in enumerate(cs)]
    return UPoly(var, cs)


def hermite_ode(spectral: str = "lam") -> LinearOde:
    """f'' - 2x f' + 2 lam f = 0."""
    return LinearOde("x", ((2, MPoly.const(1)), (1, MPoly.parse("-2*x")), (0, MPoly.parse(f"2*{spectral}"))))
