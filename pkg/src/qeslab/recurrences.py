"""Polynomial families from recurrences and the tests applied to them.

* :func:`generate_sequence` runs a recurrence forward in exact arithmetic.
* :func:`favard_check` tests the three-term form ``P_n = (A_n E + B_n) P_{n-1}
  + C_n P_{n-2}`` with ``A_n != 0``, ``C_1 = 0``, ``C_n != 0``.
* :func:`moments_from_sequence` / :func:`gram_matrix` are the brute-force
  orthogonality oracle: a family is orthogonal for a functional ``L`` iff
  the Gram matrix ``L[P_i P_j]`` is diagonal.
* :func:`truncation_scan` finds the spectral values where the series
  terminates (the quasi-exactly solvable points).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, List, Mapping, Sequence, Tuple

from .algebra import (
    MPoly,
    RootInterval,
    UPoly,
    as_rat,
    format_rat,
    parse_rat,
    rational_roots,
    refine,
    sturm_isolate_roots,
)
from .errors import (
    DegreeDefectError,
    InsufficientMomentsError,
    LeadingZeroError,
    SImaginaryError,
    UnboundParameterError,
    WrongShapeError,
)
from .series import PolySequence, Recurrence

VIOLATION_CODES = (
    "LEAD_NOT_CONST", "MIDDLE_NOT_DEG1", "A_ZERO", "C_DEPENDS_ON_SPECTRAL",
    "C_ZERO", "C1_NONZERO", "DEG_GROWTH",
)


def _seed_polys(seed, spectral: str, step: int) -> List[UPoly]:
    if seed is None:
        seed = [1] + [0] * (step - 1)
    out = []
    for s in seed:
        if isinstance(s, UPoly):
            out.append(UPoly(spectral, s.coeffs))
        else:
            out.append(UPoly.from_mpoly(MPoly.coerce(s), spectral))
    if len(out) < step:
        raise ValueError(f"a step-{step} recurrence needs at least {step} seed values")
    return out


def _bound(rec: Recurrence, bindings: Mapping | None) -> Recurrence:
    r = rec.substitute(dict(bindings or {})) if bindings else rec
    extra = set(r.parameters)
    if extra:
        raise UnboundParameterError(f"unbound parameters {sorted(extra)}", parameters=",".join(sorted(extra)))
    return r


def generate_sequence(rec: Recurrence, bindings: Mapping | None = None, N: int = 10,
                      seed=None, partial: bool = False) -> PolySequence:
    """Entries ``P_0 .. P_N`` as polynomials in the spectral variable.

    ``bindings`` must fix every parameter; binding the spectral variable too
    gives a numeric (constant) sequence. ``seed`` overrides the default
    ``P_0 = 1`` (and ``P_1 = 0`` for step-2 recurrences).
    """
    spectral = rec.spectral or "x"
    r = _bound(rec, bindings)
    seeds = _seed_polys(seed, spectral, r.step)
    entries = seeds[: N + 1]
    coeffs = r.coeffs
    for k in range(len(entries), N + 1):
        n = k - r.lead_shift
        c0 = UPoly.from_mpoly(coeffs[0].substitute({r.index: n}), spectral)
        if c0.is_zero():
            if partial:
                break
            raise LeadingZeroError(k, PolySequence(spectral, list(entries), _seed_label(seed)))
        if c0.degree > 0:
            raise WrongShapeError(f"leading coefficient {c0} depends on {spectral} at index {k}")
        acc = UPoly(spectral)
        for j in range(1, len(coeffs)):
            idx = k - j * r.step
            if idx < 0 or entries[idx].is_zero():
                continue
            cj = coeffs[j].substitute({r.index: n})
            if cj.is_zero():
                continue
            acc = acc + UPoly.from_mpoly(cj, spectral) * entries[idx]
        entries.append(acc.scale(-1 / c0.coeffs[0]))
    return PolySequence(spectral, list(entries), _seed_label(seed))


def _seed_label(seed) -> Tuple[str, ...]:
    if seed is None:
        return ("1",)
    return tuple(str(s) for s in seed)


# -- Favard ------------------------------------------------------------------

@dataclass
class Violation:
    n: int
    code: str
    detail: str

    def to_json(self):
        return {"n": self.n, "code": self.code, "detail": self.detail}


@dataclass
class FavardReport:
    N: int
    violations: List[Violation] = field(default_factory=list)
    degree_checked: bool = True

    @property
    def passed(self) -> bool:
        return not self.violations

    def first_violation(self) -> Violation | None:
        return min(self.violations, key=lambda v: v.n, default=None)

    def codes(self) -> set:
        return {v.code for v in self.violations}

    def to_json(self) -> dict:
        return {
            "pass": self.passed,
            "N": self.N,
            "degree_checked": self.degree_checked,
            "violations": [v.to_json() for v in self.violations],
        }

    @classmethod
    def from_json(cls, data) -> "FavardReport":
        return cls(data["N"], [Violation(v["n"], v["code"], v["detail"]) for v in data["violations"]],
                   data.get("degree_checked", True))


def favard_check(rec: Recurrence, N: int, bindings: Mapping | None = None, seed=None) -> FavardReport:
    """Check the three-term orthogonality form for indices ``1 .. N``.

    Coefficient conditions are decided symbolically in any unbound
    parameters ("nonzero" = not identically zero). The degree condition
    ``deg P_n = n`` needs every parameter bound and is otherwise skipped.
    A two-entry ``seed`` fixes ``P_1`` directly (``C_1 = 0`` by construction).
    """
    if rec.span != 2 or rec.step != 1:
        raise WrongShapeError(f"need span 2 and step 1, got span {rec.span}, step {rec.step}")
    E = rec.spectral or "x"
    r = rec.with_lead_shift(0)
    if bindings:
        r = r.substitute(bindings)
    viol: List[Violation] = []
    start = 1
    if seed is not None and len(seed) >= 2:
        start = 2
    for n in range(start, N + 1):
        c0, c1, c2 = (r.coeff_at(j, n) for j in range(3))
        if c0.is_zero() or c0.degree(E) > 0:
            viol.append(Violation(n, "LEAD_NOT_CONST", f"coefficient of P_{n} is {c0}"))
            continue
        d1 = c1.degree(E) if not c1.is_zero() else -1
        if d1 < 1:
            viol.append(Violation(n, "A_ZERO", f"coefficient of P_{n-1} is {c1}, free of {E}"))
        elif d1 > 1:
            viol.append(Violation(n, "MIDDLE_NOT_DEG1", f"coefficient of P_{n-1} has degree {d1} in {E}: {c1}"))
        if n == 1:
            if not c2.is_zero():
                viol.append(Violation(n, "C1_NONZERO", f"C_1 term is {c2}"))
        elif c2.is_zero():
            viol.append(Violation(n, "C_ZERO", f"coefficient of P_{n-2} vanishes"))
        elif c2.degree(E) > 0:
            viol.append(Violation(n, "C_DEPENDS_ON_SPECTRAL", f"coefficient of P_{n-2} is {c2}"))
    degree_checked = not r.parameters
    if degree_checked:
        seq = generate_sequence(r, None, N, seed=seed, partial=True)
        for n, p in enumerate(seq.entries):
            if p.degree != n:
                viol.append(Violation(n, "DEG_GROWTH", f"deg P_{n} = {p.degree}"))
        if len(seq) < N + 1:
            viol.append(Violation(len(seq), "LEAD_NOT_CONST", "generation stopped: leading coefficient vanishes"))
    viol.sort(key=lambda v: (v.n, VIOLATION_CODES.index(v.code)))
    return FavardReport(N, viol, degree_checked)


# -- moment functionals and Gram matrices --------------------------------------

@dataclass
class MomentFunctional:
    moments: List[Fraction]
    padded: Tuple[int, ...] = ()

    def __call__(self, p: UPoly) -> Fraction:
        if p.degree >= len(self.moments):
            raise InsufficientMomentsError(
                f"need moment {p.degree}, have {len(self.moments)}", needed=p.degree + 1
            )
        return sum((c * m for c, m in zip(p.coeffs, self.moments)), Fraction(0))

    def to_json(self):
        return {"moments": [format_rat(m) for m in self.moments], "padded": list(self.padded)}

    @classmethod
    def from_json(cls, data):
        return cls([parse_rat(m) for m in data["moments"]], tuple(data.get("padded", ())))


def moments_from_sequence(seq: PolySequence) -> MomentFunctional:
    """The functional with ``L[P_0] = 1`` and ``L[P_n] = 0`` for n >= 1."""
    moments: List[Fraction] = []
    for n, p in enumerate(seq.entries):
        if p.degree != n:
            raise DegreeDefectError(n, p.degree)
        target = Fraction(1) if n == 0 else Fraction(0)
        partial = sum((c * m for c, m in zip(p.coeffs[:-1], moments)), Fraction(0))
        moments.append((target - partial) / p.lc())
    return MomentFunctional(moments)


def best_effort_moments(seq: PolySequence, count: int, free: Mapping[int, Fraction] | None = None) -> MomentFunctional:
    """Moments ``m_0 .. m_{count-1}`` for a family with ``deg P_n != n``.

    Degree ``k`` is fixed by ``L[P_n] = [n == 0]`` for the first ``P_n`` of
    degree ``k``; degrees hit by no entry are padded with ``free.get(k, 0)``.
    """
    free = dict(free or {})
    owner = {}
    for n, p in enumerate(seq.entries):
        if not p.is_zero() and p.degree not in owner:
            owner[p.degree] = n
    moments: List[Fraction] = []
    padded = []
    for k in range(count):
        if k in owner:
            p = seq.entries[owner[k]]
            target = Fraction(1) if owner[k] == 0 else Fraction(0)
            partial = sum((c * m for c, m in zip(p.coeffs[:-1], moments)), Fraction(0))
            moments.append((target - partial) / p.lc())
        else:
            padded.append(k)
            moments.append(as_rat(free.get(k, 0)))
    return MomentFunctional(moments, tuple(padded))


@dataclass
class GramMatrix:
    entries: List[List[Fraction]]

    @property
    def size(self) -> int:
        return len(self.entries)

    def off_diagonal_nonzero(self) -> List[Tuple[int, int, Fraction]]:
        return [(i, j, self.entries[i][j]) for i in range(self.size)
                for j in range(i + 1, self.size) if self.entries[i][j]]

    def is_diagonal(self) -> bool:
        return not self.off_diagonal_nonzero()

    def is_symmetric(self) -> bool:
        return all(self.entries[i][j] == self.entries[j][i]
                   for i in range(self.size) for j in range(self.size))

    def rank(self) -> int:
        rows = [list(r) for r in self.entries]
        rank = 0
        cols = self.size
        for c in range(cols):
            piv = next((i for i in range(rank, len(rows)) if rows[i][c]), None)
            if piv is None:
                continue
            rows[rank], rows[piv] = rows[piv], rows[rank]
            for i in range(len(rows)):
                if i != rank and rows[i][c]:
                    f = rows[i][c] / rows[rank][c]
                    rows[i] = [a - f * b for a, b in zip(rows[i], rows[rank])]
            rank += 1
        return rank

    def to_json(self):
        return {"size": self.size, "entries": [[format_rat(x) for x in row] for row in self.entries]}

    @classmethod
    def from_json(cls, data):
        return cls([[parse_rat(x) for x in row] for row in data["entries"]])


def gram_matrix(seq: PolySequence, L: MomentFunctional, size: int | None = None) -> GramMatrix:
    size = len(seq) if size is None else size
    if size > len(seq):
        raise InsufficientMomentsError(f"sequence has only {len(seq)} entries")
    P = seq.entries[:size]
    need = max((P[i].degree + P[j].degree for i in range(size) for j in range(size)), default=0)
    if need >= len(L.moments):
        raise InsufficientMomentsError(f"need moments up to {need}, have {len(L.moments)}", needed=need + 1)
    G = [[Fraction(0)] * size for _ in range(size)]
    for i in range(size):
        for j in range(i, size):
            G[i][j] = G[j][i] = L(P[i] * P[j])
    return GramMatrix(G)


@dataclass
class OrthogonalityProbe:
    """Outcome of testing a family of moment functionals on one sequence."""

    size: int
    tested: int
    diagonal_hits: int
    free_degrees: Tuple[int, ...]
    witnesses: List[Tuple[int, int]]

    @property
    def non_orthogonal(self) -> bool:
        return self.tested > 0 and self.diagonal_hits == 0


def probe_orthogonality(seq: PolySequence, size: int, free_count: int = 3,
                        values: Sequence = (-2, -1, Fraction(-1, 2), 0, Fraction(1, 2), 1, 2)) -> OrthogonalityProbe:
    """Try the best-effort functional and a rational grid of perturbations of it.

    The lowest ``free_count`` padded degrees are varied over ``values``; each
    resulting functional gets its own Gram matrix.
    """
    need = 2 * max(p.degree for p in seq.entries[:size]) + 1
    base = best_effort_moments(seq, need)
    free_deg = base.padded[:free_count]
    tested = hits = 0
    witnesses = []
    for combo in itertools.product(values, repeat=len(free_deg)):
        L = best_effort_moments(seq, need, dict(zip(free_deg, combo)))
        G = gram_matrix(seq, L, size)
        tested += 1
        nz = G.off_diagonal_nonzero()
        if not nz:
            hits += 1
        else:
            witnesses.append(nz[0][:2])
    return OrthogonalityProbe(size, tested, hits, tuple(free_deg), witnesses)


# -- truncation ------------------------------------------------------------------

@dataclass
class TruncationRecord:
    M: int
    c_factor_roots: List[RootInterval]
    p_roots: List[RootInterval]
    qes_points: List[Fraction]
    numeric_only: List[RootInterval] = field(default_factory=list)

    def to_json(self):
        return {
            "M": self.M,
            "c_factor_roots": [r.to_json() for r in self.c_factor_roots],
            "p_roots": [r.to_json() for r in self.p_roots],
            "qes_points": [format_rat(q) for q in self.qes_points],
            "numeric_only": [r.to_json() for r in self.numeric_only],
        }


@dataclass
class TruncationResult:
    spectral: str
    M_max: int
    interval: Tuple[Fraction, Fraction]
    records: List[TruncationRecord]

    def qes_points(self) -> List[Tuple[int, Fraction]]:
        return [(r.M, q) for r in self.records for q in r.qes_points]

    def to_json(self):
        return {
            "spectral": self.spectral,
            "M_max": self.M_max,
            "interval": [format_rat(self.interval[0]), format_rat(self.interval[1])],
            "records": [r.to_json() for r in self.records],
        }

    @classmethod
    def from_json(cls, data):
        def iv(d):
            return RootInterval(parse_rat(d["lo"]), parse_rat(d["hi"]), d["multiplicity"])

        recs = [TruncationRecord(r["M"], [iv(x) for x in r["c_factor_roots"]], [iv(x) for x in r["p_roots"]],
                                 [parse_rat(q) for q in r["qes_points"]], [iv(x) for x in r["numeric_only"]])
                for r in data["records"]]
        return cls(data["spectral"], data["M_max"], (parse_rat(data["interval"][0]), parse_rat(data["interval"][1])), recs)


def _roots_in(p: UPoly, interval) -> List[RootInterval]:
    if p.is_zero() or p.degree <= 0:
        return []
    return sturm_isolate_roots(p, interval)


def truncation_scan(rec: Recurrence, bindings: Mapping | None, M_max: int,
                    interval=(0, 2), seed=None) -> TruncationResult:
    """Spectral values where the sequence stops: last nonzero entry ``P_M``.

    ``P_{M+1} = P_{M+2} = 0`` is equivalent to ``P_{M+1}`` vanishing together
    with the trailing coefficient of the relation that produces ``P_{M+2}``;
    candidates are the roots of their gcd. Rational candidates are confirmed
    by regenerating the numeric sequence through index ``M_max + 2``;
    irrational common roots are reported as numeric-only intervals.
    """
    if rec.span != 2 or rec.step != 1:
        raise WrongShapeError(f"need span 2 and step 1, got span {rec.span}, step {rec.step}")
    S = rec.spectral or "x"
    r = _bound(rec.with_lead_shift(0), bindings)
    lo, hi = as_rat(interval[0]), as_rat(interval[1])
    seq = generate_sequence(r, None, M_max + 2, seed=seed)
    records = []
    for M in range(M_max + 1):
        trailing = UPoly.from_mpoly(r.coeff_at(2, M + 2), S)
        nxt = seq.entries[M + 1]
        if seq.entries[M].is_zero():
            records.append(TruncationRecord(M, [], [], []))
            continue
        if trailing.is_zero() and nxt.is_zero():
            raise WrongShapeError(f"sequence terminates at M={M} for every {S}")
        if trailing.is_zero():
            common = nxt
        elif nxt.is_zero():
            common = trailing
        else:
            common = trailing.gcd(nxt)
        c_roots = _roots_in(trailing, (lo, hi))
        p_roots = _roots_in(nxt, (lo, hi))
        qes, numeric = [], []
        if common.degree > 0:
            rats = rational_roots(common, (lo, hi))
            for q in rats:
                if _verify_truncation(r, S, q, M, M_max + 2, seed):
                    qes.append(q)
            for iv in sturm_isolate_roots(common, (lo, hi)):
                if not any(iv.contains(q) for q in rats):
                    numeric.append(refine(common, iv, Fraction(1, 10 ** 12)))
        records.append(TruncationRecord(M, c_roots, p_roots, qes, numeric))
    return TruncationResult(S, M_max, (lo, hi), records)


def _verify_truncation(r: Recurrence, S: str, value: Fraction, M: int, upto: int, seed) -> bool:
    seq = generate_sequence(r, {S: value}, upto, seed=seed)
    vals = [p(Fraction(0)) if not p.is_zero() else Fraction(0) for p in seq.entries]
    return vals[M] != 0 and all(v == 0 for v in vals[M + 1:])


# -- energy map --------------------------------------------------------------------

def energy_from_s(s, mu=1):
    """``E = mu^2 (1 - s^2)``; exact when both arguments are rational."""
    if isinstance(s, (int, Fraction)) and isinstance(mu, (int, Fraction)):
        return Fraction(mu) ** 2 * (1 - Fraction(s) ** 2)
    return float(mu) ** 2 * (1.0 - float(s) ** 2)


def s_from_energy(E, mu=1):
    """Nonnegative branch ``s = sqrt(1 - E/mu^2)``; requires ``E <= mu^2``."""
    ratio = 1 - (Fraction(E) / Fraction(mu) ** 2 if isinstance(E, (int, Fraction)) and isinstance(mu, (int, Fraction))
                 else float(E) / float(mu) ** 2)
    if ratio < 0:
        raise SImaginaryError(f"E={E} exceeds mu^2={mu}^2: s is imaginary", E=E)
    if isinstance(ratio, Fraction):
        from .algebra import rat_sqrt

        exact = rat_sqrt(ratio)
        if exact is not None:
            return exact
    return math.sqrt(float(ratio))


# -- control families ----------------------------------------------------------------

def monic_hermite_recurrence(var: str = "x") -> Recurrence:
    """p_n = x p_{n-1} - ((n-1)/2) p_{n-2}."""
    return Recurrence((MPoly.const(1), -MPoly.var(var), MPoly.parse("(n-1)/2")), spectral=var)


def chebyshev_like_recurrence(var: str = "x", c: Fraction = Fraction(1, 4)) -> Recurrence:
    """p_n = x p_{n-1} - c p_{n-2}; use with :data:`CHEBYSHEV_SEED` so that p_1 = x."""
    return Recurrence((MPoly.const(1), -MPoly.var(var), MPoly.const(c)), spectral=var)


CHEBYSHEV_SEED = ("1", "x")
