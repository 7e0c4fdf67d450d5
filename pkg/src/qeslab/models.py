"""The three concrete systems.

Kink stability potential (units hbar = 2m = 1)::

    V(x) = mu^2 [8 S^2 - 4(5/e - 1) S + 2(1/e^2 - 1/e - 2)] / (8 [1 + 1/e + S]^2),
    S = sinh^2(mu x / 2),  e = eps^2

With ``y = S/(1 + 1/e + S)``, ``psi = (1-y)^s f`` and ``s = sqrt(1 - E/mu^2)``
the Schroedinger equation becomes Heun's equation in ``y``; ``t^2 = y + e``
turns it into the ``t``-ODE built by :func:`build_kink_t_ode`. Replacing
``x -> i theta`` gives the periodic partner with negated energies.

The Bhaduri angular problem is taken from its Heun form in ``x`` (cleared of
the ``1/x`` term); its radial part is the 4-d oscillator.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Tuple

import numpy as np

from .algebra import MPoly, UPoly, as_rat, rat_sqrt
from .errors import (
    BetaOutOfRangeError,
    InvalidG1Error,
    ResidualNonzeroError,
)
from .recurrences import energy_from_s, generate_sequence, truncation_scan
from .series import (
    LinearOde,
    Recurrence,
    SeriesAnsatz,
    derive_recurrence,
    exact_residual,
    parity_decouple,
    series_from_coefficients,
)

EPS2 = "eps2"

# |Re(mu x)| beyond this makes sinh^2(mu x / 2) overflow a double
OVERFLOW_BOUND = 700.0


class AsymptoteWarning(RuntimeWarning):
    """Raised (as a warning) when kink_potential returns its mu^2 limit."""


@dataclass(frozen=True)
class KinkParams:
    mu: float = 1.0
    eps2: Fraction = Fraction(1, 2)

    def __post_init__(self):
        object.__setattr__(self, "eps2", as_rat(self.eps2))
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if not self.eps2 > 0:
            raise ValueError("eps2 must be positive")

    @property
    def e(self) -> float:
        return float(self.eps2)


# -- potentials ---------------------------------------------------------------------

def _kink_value(S, D, p: KinkParams):
    e = p.e
    r = 1.0 / D
    sr = S * r
    k = 1.0 / e ** 2 - 1.0 / e - 2.0
    return p.mu ** 2 * (8.0 * sr ** 2 - 4.0 * (5.0 / e - 1.0) * sr * r + 2.0 * k * r ** 2) / 8.0


def kink_potential(x, p: KinkParams = KinkParams()):
    """Kink stability potential; accepts real or complex ``x`` (scalar or array).

    Points with ``|Re(mu x)| > OVERFLOW_BOUND`` get the asymptotic value
    ``mu^2`` and an :class:`AsymptoteWarning` is issued.
    """
    x_arr = np.asarray(x)
    big = np.abs(np.real(x_arr) * p.mu) > OVERFLOW_BOUND
    safe = np.where(big, 0.0, x_arr)
    S = np.sinh(p.mu * safe / 2.0) ** 2
    D = 1.0 + 1.0 / p.e + S
    V = _kink_value(S, D, p)
    if np.any(big):
        warnings.warn("kink_potential: argument beyond overflow bound, returning mu^2", AsymptoteWarning)
        V = np.where(big, p.mu ** 2, V)
    return V if np.ndim(x) else V[()]


def periodic_potential(theta, p: KinkParams = KinkParams()):
    """Anti-isospectral partner: ``V(theta) = -V_kink(i theta)``, period ``2 pi / mu``."""
    e = p.e
    S = np.sin(p.mu * np.asarray(theta, dtype=float) / 2.0) ** 2
    D = 1.0 + 1.0 / e - S
    k = 1.0 / e ** 2 - 1.0 / e - 2.0
    V = -p.mu ** 2 * (8.0 * S ** 2 + 4.0 * (5.0 / e - 1.0) * S + 2.0 * k) / (8.0 * D ** 2)
    return V if np.ndim(theta) else float(V)


def kink_transform(x, p: KinkParams = KinkParams()):
    """``(y, t)`` with ``y = S/(1+1/e+S)`` and ``t = sqrt(y + e)``."""
    S = np.sinh(p.mu * np.asarray(x, dtype=float) / 2.0) ** 2
    c = 1.0 + 1.0 / p.e
    with np.errstate(over="ignore"):
        one_minus_y = c / (c + S)
    y = 1.0 - one_minus_y
    t = np.sqrt(y + p.e)
    if np.ndim(x):
        return y, t
    return float(y), float(t)


def _one_minus_y(x, p: KinkParams):
    S = np.sinh(p.mu * np.asarray(x, dtype=float) / 2.0) ** 2
    c = 1.0 + 1.0 / p.e
    with np.errstate(over="ignore"):
        return c / (c + S)


# -- Heun data and ODE builders -------------------------------------------------------------

@dataclass(frozen=True)
class HeunParams:
    alpha: MPoly
    betaH: MPoly
    qH: MPoly


def heun_params(s="s", eps2=EPS2) -> HeunParams:
    S, e = MPoly.coerce(s), MPoly.coerce(eps2)
    alpha = Fraction(-5, 2) - S
    betaH = Fraction(3, 2) - S
    qH = (1 - S * S) * (1 + e) - S * e / 2 - (1 - 2 * e) / 4
    return HeunParams(alpha, betaH, qH)


def build_kink_t_ode(s="s", eps2=EPS2) -> LinearOde:
    """The ODE for ``f(t)``; ``s`` and ``eps2`` may be symbols or rationals."""
    S, e = MPoly.coerce(s), MPoly.coerce(eps2)
    hp = heun_params(S, e)
    ab = hp.alpha * hp.betaH
    t = MPoly.var("t")
    t2 = t * t
    A = (t2 - e) * (t2 - 1 - e)
    B = ((t2 - 1 - e) + 2 * (1 + 2 * S) * (t2 - e)) * t
    C = 4 * ab * t2 - 4 * (ab * e + hp.qH)
    return LinearOde("t", ((2, A), (1, B), (0, C)))


def kink_heun_ode_y(s="s", eps2=EPS2) -> LinearOde:
    """Heun's equation in ``y`` multiplied by ``4 y (y-1)(y+eps2)``."""
    S, e = MPoly.coerce(s), MPoly.coerce(eps2)
    hp = heun_params(S, e)
    y = MPoly.var("y")
    P2 = 4 * y * (y - 1) * (y + e)
    P1 = 2 * (y - 1) * (y + e) + 4 * (1 + 2 * S) * y * (y + e) + 2 * y * (y - 1)
    P0 = 4 * (hp.alpha * hp.betaH * y - hp.qH)
    return LinearOde("y", ((2, P2), (1, P1), (0, P0)))


def heun_y_to_t(ode: LinearOde, eps2=EPS2) -> LinearOde:
    """Change of variable ``t^2 = y + eps2`` for a second-order ODE in ``y``.

    With ``f(y) = g(t)``: ``f' = g'/(2t)``, ``f'' = g''/(4t^2) - g'/(4t^3)``.
    After multiplying by ``4t^2`` the coefficients are
    ``(P2, (2 t^2 P1 - P2)/t, 4 t^2 P0)``; the common factor ``4 t^2`` is then
    divided out.
    """
    if ode.indep != "y" or ode.order != 2:
        raise ValueError("expects a second-order ODE in y")
    t = MPoly.var("t")
    sub = {"y": t * t - MPoly.coerce(eps2)}
    P2, P1, P0 = (ode.coeff(k).substitute(sub) for k in (2, 1, 0))
    A = P2
    B = (2 * t * t * P1 - P2).div_exact(t)
    C = 4 * t * t * P0
    common = 4 * t * t
    return LinearOde("t", ((2, A.div_exact(common)), (1, B.div_exact(common)), (0, C.div_exact(common))))


def kink_recurrence() -> Recurrence:
    """Engine-derived step-2 recurrence for ``Q_n`` (highest index ``n+2``)."""
    return derive_recurrence(build_kink_t_ode(), SeriesAnsatz("factorial"), "s").with_lead_shift(2)


def kink_sectors() -> Tuple[Recurrence, Recurrence]:
    """Engine-derived (even, odd) recurrences: ``P_m = Q_{2m}`` and ``P_m = Q_{2m+1}``."""
    return parity_decouple(kink_recurrence())


def _rec(c0, c1, c2, **kw) -> Recurrence:
    return Recurrence(tuple(MPoly.parse(c) for c in (c0, c1, c2)), **kw)


# Recursions exactly as printed, kept for regression comparison only.
PRINTED_KINK = _rec(
    "eps2*(eps2+1)",
    "-((2*eps2+1)*n^2 + (5*eps2+2+4*s*eps2)*n - 4*s^2 + 2*s*eps2 + 3 - 9*eps2)",
    "n*(n-1)*(n^2 + n*(4*s-2) + 4*s^2 - 4*s - 15)",
    step=2, lead_shift=2, spectral="s",
)
PRINTED_KINK_EVEN = _rec(
    "eps2*(eps2+1)",
    "-((8*eps2+4)*m^2 + (8*s*eps2-6*eps2-4)*m - 4*s^2 - 6*s*eps2 + 3 - 11*eps2)",
    "(m-1)*(2*m-3)*(8*m^2 + (16*s-24)*m + 8*s^2 - 24*s - 14)",
    index="m", spectral="s",
)
PRINTED_KINK_ODD = _rec(
    "eps2*(eps2+1)",
    "-((8*eps2+4)*m^2 + (8*s*eps2+2*eps2)*m - 4*s^2 - 2*s*eps2 + 2 - 12*eps2)",
    "(m-1)*(2*m-1)*(8*m^2 + (16*s-16)*m + 8*s^2 - 16*s - 24)",
    index="m", spectral="s",
)
PRINTED_BHADURI = _rec(
    "n + 2*a - 1",
    "-2*(b-c)*(n - 1 + a)",
    "(n-1)*((beta+1)^2/4 - (a+b+c-3/2)^2)",
    spectral="beta",
)


def recurrence_diff(derived: Recurrence, printed: Recurrence) -> List[MPoly]:
    """Coefficient-wise ``derived - printed`` after aligning the indexing."""
    p = printed.with_lead_shift(derived.lead_shift)
    if p.index != derived.index:
        p = p._replace(coeffs=tuple(c.substitute({p.index: MPoly.var(derived.index)}) for c in p.coeffs),
                       index=derived.index)
    return [a - b for a, b in zip(derived.coeffs, p.coeffs)]


# -- Bhaduri ------------------------------------------------------------------------------

@dataclass(frozen=True)
class BhaduriParams:
    l: int
    mq: int
    g1: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "g1", as_rat(self.g1))
        if self.g1 < Fraction(-1, 4):
            raise InvalidG1Error(f"g1={self.g1} < -1/4 has no real a", g1=self.g1)

    @property
    def b(self) -> Fraction:
        return Fraction(abs(self.l + self.mq), 4)

    @property
    def c(self) -> Fraction:
        return Fraction(abs(self.l - self.mq), 4)

    @property
    def a(self):
        """Branch ``a = (1 + sqrt(1 + 4 g1))/2 >= 1/2``; a Fraction when exact, else float."""
        root = rat_sqrt(1 + 4 * self.g1)
        if root is not None:
            return (1 + root) / 2
        return (1 + math.sqrt(1 + 4 * float(self.g1))) / 2

    def bindings(self) -> dict:
        a = self.a
        if not isinstance(a, Fraction):
            raise ValueError(f"a = {a} is irrational; exact ODE needs 1 + 4 g1 to be a rational square")
        return {"a": a, "b": self.b, "c": self.c}


def build_bhaduri_ode(p: BhaduriParams | dict | None = None, beta: str = "beta") -> LinearOde:
    """Bhaduri Heun equation multiplied by ``x``.

    ``p`` may be BhaduriParams, an explicit ``{'a','b','c'}`` mapping, or None
    for fully symbolic ``a, b, c``.
    """
    x = MPoly.var("x")
    a, b, c = MPoly.var("a"), MPoly.var("b"), MPoly.var("c")
    B = MPoly.var(beta)
    A2 = x * (1 - x * x)
    A1 = 2 * (a - (b - c) * x - (a + b + c + 1) * x * x)
    A0 = ((B + 1) * (B + 1) / 4 - (a + b + c + Fraction(1, 2)) ** 2) * x + 2 * a * (c - b)
    ode = LinearOde("x", ((2, A2), (1, A1), (0, A0)))
    if p is None:
        return ode
    binds = p.bindings() if isinstance(p, BhaduriParams) else {k: as_rat(v) for k, v in p.items()}
    return ode.substitute(binds)


def bhaduri_recurrence(p: BhaduriParams | dict | None = None) -> Recurrence:
    """Engine-derived recurrence with highest index ``n``."""
    return derive_recurrence(build_bhaduri_ode(p), SeriesAnsatz("factorial"), "beta", lead_shift=0)


@dataclass(frozen=True)
class RadialProblem:
    """``-u'' + (R^2 + ((beta+1)^2 - 1/4)/R^2) u = 2E u`` on ``(0, R_max)``, Dirichlet."""

    beta: float
    R_max: float = 10.0

    @property
    def centrifugal(self) -> float:
        return (self.beta + 1) ** 2 - 0.25

    def potential(self, R):
        R = np.asarray(R, dtype=float)
        return R ** 2 + self.centrifugal / R ** 2

    def energy(self, eigenvalue):
        return np.asarray(eigenvalue) / 2.0

    def expected(self, n_r: int) -> float:
        return 2 * n_r + self.beta + 2


def bhaduri_radial_problem(beta, R_max: float = 10.0) -> RadialProblem:
    if beta < 1:
        raise BetaOutOfRangeError(f"beta={beta} < 1", beta=beta)
    return RadialProblem(float(beta), R_max)


# -- QES states -------------------------------------------------------------------------

@dataclass
class QesState:
    """A closed-form state ``(1-y)^s f(t)`` with exact series ``f``.

    ``system`` is ``"kink"`` (line) or ``"periodic"`` (the x -> i theta partner).
    """

    system: str
    sector: str
    s: Fraction
    eps2: Fraction
    series: UPoly
    description: str = ""
    label: str = ""

    def energy(self, mu=1):
        E = energy_from_s(self.s, mu)
        # "E and E" keeps a zero energy from turning into -0.0
        return -E if self.system == "periodic" and E else E

    def residual(self) -> MPoly:
        return exact_residual(build_kink_t_ode(self.s, self.eps2), self.series)

    def verified(self) -> bool:
        return self.residual().is_zero()


def state_from_sector(sector: str, s: Fraction, eps2: Fraction, sequence, system: str = "kink") -> QesState:
    """Series ``f(t) = sum Q_k t^k / k!`` from a truncated sector sequence."""
    vals = [p(Fraction(0)) if not p.is_zero() else Fraction(0) for p in sequence.entries]
    while vals and vals[-1] == 0:
        vals.pop()
    coeffs = []
    for m, v in enumerate(vals):
        if sector == "even":
            coeffs += [v, 0]
        else:
            coeffs += [0, v]
    f = series_from_coefficients(coeffs, "t", "factorial")
    lowest = next(c for c in f.coeffs if c)
    f = f.scale(1 / lowest)
    return QesState(system, sector, as_rat(s), as_rat(eps2), f)


def kink_qes_states(eps2, M_max: int = 6, interval=(Fraction(1, 4), 2)) -> List[QesState]:
    """QES states of the line problem found by scanning both sectors.

    The default interval leaves out the continuum edge s = 0.
    """
    eps2 = as_rat(eps2)
    even, odd = kink_sectors()
    states = []
    for name, rec in (("even", even), ("odd", odd)):
        res = truncation_scan(rec, {EPS2: eps2}, M_max, interval)
        for M, s in res.qes_points():
            seq = generate_sequence(rec, {EPS2: eps2, "s": s}, M)
            st = state_from_sector(name, s, eps2, seq)
            st.description = f"{name} sector, truncates after P_{M}"
            states.append(st)
    states.sort(key=lambda st: st.energy())
    for i, st in enumerate(states):
        st.label = f"kink-{i}"
    return states


def periodic_qes_states(eps2, **kw) -> List[QesState]:
    """Line states continued to the periodic partner (energies negated)."""
    out = []
    for st in kink_qes_states(eps2, **kw):
        out.append(QesState("periodic", st.sector, st.s, st.eps2, st.series,
                            st.description + "; continued x -> i theta"))
    out.sort(key=lambda st: st.energy())
    for i, st in enumerate(out):
        st.label = f"periodic-{i}"
    return out


def reconstruct_wavefunction(state: QesState, p: KinkParams | None = None) -> Callable:
    """``psi(x) = (1-y)^s f(t)`` (line) or its continuation ``chi(theta)`` (periodic).

    On the circle ``y = -S/(1+1/e-S)`` with ``S = sin^2(mu theta/2)``; then
    ``1 - y = (1+1/e)/(1+1/e-S)`` and ``y + e = (1+e) cos^2(mu theta/2)/(1+1/e-S)``,
    and ``t`` takes the signed branch ``cos(mu theta/2) sqrt((1+e)/(1+1/e-S))``.
    """
    if not state.verified():
        raise ResidualNonzeroError(f"series {state.series} does not solve the t-ODE at s={state.s}")
    p = p or KinkParams(eps2=state.eps2)
    if p.eps2 != state.eps2:
        raise ValueError("KinkParams.eps2 differs from the state's eps2")
    coeffs = [float(c) for c in state.series.coeffs]
    s = float(state.s)
    e = p.e
    c = 1.0 + 1.0 / e

    def f(t):
        acc = np.zeros_like(t)
        for a in reversed(coeffs):
            acc = acc * t + a
        return acc

    if state.system == "kink":
        def psi(x):
            x = np.asarray(x, dtype=float)
            omy = _one_minus_y(x, p)
            t = np.sqrt(1.0 - omy + e)
            return omy ** s * f(t)
    else:
        def psi(theta):
            theta = np.asarray(theta, dtype=float)
            S = np.sin(p.mu * theta / 2.0) ** 2
            D = c - S
            t = np.cos(p.mu * theta / 2.0) * np.sqrt((1.0 + e) / D)
            return (c / D) ** s * f(t)
    return psi


def count_nodes(values, rel_threshold: float = 1e-8) -> int:
    """Sign changes of a sampled function, ignoring entries below the threshold."""
    v = np.asarray(values, dtype=float)
    keep = v[np.abs(v) > rel_threshold * np.max(np.abs(v))]
    return int(np.count_nonzero(np.diff(np.sign(keep)) != 0))
