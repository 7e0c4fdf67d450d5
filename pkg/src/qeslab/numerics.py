"""Finite-difference Schroedinger spectra (units hbar = 2m = 1).

``H = -d^2/dx^2 + V`` is discretised with the three-point stencil. Dirichlet
grids carry both endpoints and the matrix acts on the interior points;
periodic grids carry ``N`` points of the circle with the last one wrapping
to the first.

Tridiagonal matrices are solved by Sturm-count bisection, cyclic and dense
ones by the Jacobi rotation method (Sturm counts do not hold once the corner
entries are present).
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.linalg import solve_banded

from .errors import (
    DegeneratePsiError,
    MismatchedProblemsError,
    NoConvergenceError,
    NonfinitePotentialError,
)

BOUNDARY_CONDITIONS = ("dirichlet", "periodic")


@dataclass(frozen=True)
class Tolerances:
    bisection_abs: float = 1e-10     # eigenvalue bracket width for Sturm bisection
    jacobi_rel: float = 1e-12        # off(A)_F < jacobi_rel * ||A||_F ends the rotations
    jacobi_max_sweeps: int = 60
    inverse_iterations: int = 3
    psi_floor: float = 1e-12         # max|psi| below this is treated as identically zero
    spacing_rel: float = 1e-9        # how close h_fine must be to h_coarse / 2
    node_threshold: float = 1e-6     # eigenvector entries below this (relative) are not signed


TOLERANCES = Tolerances()


@dataclass(frozen=True)
class Grid:
    lo: float
    hi: float
    N: int
    bc: str = "dirichlet"

    def __post_init__(self):
        if self.bc not in BOUNDARY_CONDITIONS:
            raise ValueError(f"unknown boundary condition {self.bc!r}")
        if self.N < 16:
            raise ValueError("a grid needs at least 16 points")
        if not self.hi > self.lo:
            raise ValueError("grid needs hi > lo")

    @property
    def h(self) -> float:
        return (self.hi - self.lo) / (self.N if self.bc == "periodic" else self.N - 1)

    @property
    def points(self) -> np.ndarray:
        if self.bc == "periodic":
            return self.lo + self.h * np.arange(self.N)
        return np.linspace(self.lo, self.hi, self.N)

    @property
    def unknowns(self) -> np.ndarray:
        """Points carrying an unknown of the discrete problem."""
        return self.points if self.bc == "periodic" else self.points[1:-1]

    def refined(self) -> "Grid":
        """Same interval at half the spacing."""
        return Grid(self.lo, self.hi, 2 * self.N if self.bc == "periodic" else 2 * self.N - 1, self.bc)

    def to_json(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "N": self.N, "bc": self.bc, "h": self.h}

    @classmethod
    def from_json(cls, d) -> "Grid":
        return cls(float(d["lo"]), float(d["hi"]), int(d["N"]), d["bc"])


@dataclass(frozen=True)
class SymMatrix:
    """Real symmetric matrix in one of three storage kinds.

    ``tridiagonal``: ``diag`` and ``off``; ``cyclic``: the same plus ``corner``
    at positions (0, n-1) and (n-1, 0); ``dense``: the full array in ``dense``.
    """

    kind: str
    diag: Optional[np.ndarray] = None
    off: Optional[np.ndarray] = None
    corner: float = 0.0
    dense: Optional[np.ndarray] = None

    @property
    def size(self) -> int:
        return len(self.dense) if self.kind == "dense" else len(self.diag)

    def to_dense(self) -> np.ndarray:
        if self.kind == "dense":
            return np.array(self.dense, dtype=float)
        A = np.diag(self.diag) + np.diag(self.off, 1) + np.diag(self.off, -1)
        if self.kind == "cyclic":
            n = self.size
            A[0, n - 1] += self.corner
            A[n - 1, 0] += self.corner
        return A

    def trace(self) -> float:
        return float(np.trace(self.dense)) if self.kind == "dense" else float(np.sum(self.diag))


def build_hamiltonian(V: Callable, grid: Grid, bc: str | None = None) -> SymMatrix:
    bc = bc or grid.bc
    if bc != grid.bc:
        grid = Grid(grid.lo, grid.hi, grid.N, bc)
    x = grid.unknowns
    v = np.asarray(V(x), dtype=float) * np.ones_like(x)
    bad = ~np.isfinite(v)
    if np.any(bad):
        xi = float(x[np.argmax(bad)])
        raise NonfinitePotentialError(f"potential is not finite at x={xi!r}", x=xi)
    h2 = grid.h ** 2
    diag = 2.0 / h2 + v
    off = np.full(len(x) - 1, -1.0 / h2)
    if bc == "periodic":
        return SymMatrix("cyclic", diag, off, corner=-1.0 / h2)
    return SymMatrix("tridiagonal", diag, off)


# -- tridiagonal: Sturm bisection ---------------------------------------------------

def sturm_count(diag: np.ndarray, off: np.ndarray, x) -> np.ndarray:
    """Number of eigenvalues below each shift in ``x`` (LDL^T pivot signs)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    e2 = off ** 2
    tiny = np.finfo(float).tiny
    q = diag[0] - x
    count = (q < 0).astype(int)
    # an overflowing pivot becomes -inf, which still has the right sign
    with np.errstate(over="ignore"):
        for i in range(1, len(diag)):
            q = np.where(q == 0, tiny, q)
            q = diag[i] - x - e2[i - 1] / q
            count += q < 0
    return count


def _gershgorin(diag, off):
    r = np.zeros_like(diag)
    r[:-1] += np.abs(off)
    r[1:] += np.abs(off)
    return float(np.min(diag - r)), float(np.max(diag + r))


def _bisect_tridiagonal(diag, off, k, tol) -> np.ndarray:
    lo_b, hi_b = _gershgorin(diag, off)
    lo = np.full(k, lo_b - 1e-12 * max(1.0, abs(lo_b)))
    hi = np.full(k, hi_b + 1e-12 * max(1.0, abs(hi_b)))
    want = np.arange(k)
    while np.max(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        above = sturm_count(diag, off, mid) > want
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
    return 0.5 * (lo + hi)


def _inverse_iteration(diag, off, lam, steps) -> np.ndarray:
    n = len(diag)
    vecs = np.empty((n, len(lam)))
    start = 1.0 + 0.01 * np.sin(np.arange(n) * 0.7)
    for j, mu in enumerate(lam):
        shift = mu - 1e-9 * max(1.0, abs(mu))
        ab = np.zeros((3, n))
        ab[0, 1:] = off
        ab[1] = diag - shift
        ab[2, :-1] = off
        v = start / np.linalg.norm(start)
        for _ in range(steps):
            v = solve_banded((1, 1), ab, v)
            v /= np.linalg.norm(v)
        # orthogonalise against close eigenvalues already found
        for i in range(j):
            if abs(lam[i] - mu) < 1e-6 * max(1.0, abs(mu)):
                v -= vecs[:, i] * (vecs[:, i] @ v)
                v /= np.linalg.norm(v)
        vecs[:, j] = v if v[np.argmax(np.abs(v))] > 0 else -v
    return vecs


# -- cyclic / dense: Jacobi rotations ---------------------------------------------------

def _round_robin(n: int):
    """Pairings of ``range(n)`` (n even) so that every pair meets once per sweep."""
    idx = list(range(n))
    for _ in range(n - 1):
        p = np.array([idx[i] for i in range(n // 2)])
        q = np.array([idx[n - 1 - i] for i in range(n // 2)])
        yield np.minimum(p, q), np.maximum(p, q)
        idx = [idx[0]] + [idx[-1]] + idx[1:-1]


def _rotate_rows(A, p, q, c, s):
    Ap, Aq = A[p], A[q]
    A[p] = c[:, None] * Ap - s[:, None] * Aq
    A[q] = s[:, None] * Ap + c[:, None] * Aq


def jacobi_eigh(A: np.ndarray, vectors: bool = False, tol: Tolerances = TOLERANCES):
    """Cyclic Jacobi with parallel (disjoint-pair) rotations; returns ascending values."""
    A = np.array(A, dtype=float)
    n = len(A)
    pad = n % 2
    if pad:
        B = np.zeros((n + 1, n + 1))
        B[:n, :n] = A
        B[n, n] = np.max(np.abs(A)) + 1.0 if n else 0.0
        A = B
    m = len(A)
    W = np.eye(m) if vectors else None  # transposed eigenvector matrix
    scale = np.linalg.norm(A)
    target = tol.jacobi_rel * scale
    schedule = list(_round_robin(m)) if m > 1 else []
    for sweep in range(tol.jacobi_max_sweeps + 1):
        off = float(np.linalg.norm(A - np.diag(np.diag(A))))
        if off <= target:
            break
        if sweep == tol.jacobi_max_sweeps:
            raise NoConvergenceError(f"Jacobi did not converge in {sweep} sweeps (off={off:.3e})",
                                     sweeps=sweep, off=off)
        for p, q in schedule:
            apq = A[p, q]
            app = A[p, p]
            aqq = A[q, q]
            active = apq != 0.0
            # a tiny apq sends tau to inf and t to 0, which is the correct limit
            with np.errstate(over="ignore"):
                tau = np.where(active, (aqq - app) / np.where(active, 2.0 * apq, 1.0), 0.0)
                t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.hypot(1.0, tau))
            t = np.where(active, t, 0.0)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            _rotate_rows(A, p, q, c, s)
            # A J = (J^T A^T)^T and J^T A J is symmetric, so rotate rows of the transpose
            A = np.ascontiguousarray(A.T)
            _rotate_rows(A, p, q, c, s)
            A[p, q] = 0.0
            A[q, p] = 0.0
            if vectors:
                _rotate_rows(W, p, q, c, s)
    w = np.diag(A).copy()
    V = W.T if vectors else None
    if pad:
        w, V = w[:n], (V[:n, :n] if vectors else None)
    order = np.argsort(w, kind="stable")
    if vectors:
        return w[order], V[:, order]
    return w[order]


# -- spectra -----------------------------------------------------------------------

@dataclass
class Spectrum:
    eigenvalues: np.ndarray
    grid: Optional[Grid] = None
    bc: str = ""
    potential: str = ""
    method: str = ""
    vectors: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        self.eigenvalues = np.asarray(self.eigenvalues, dtype=float)
        if np.any(np.diff(self.eigenvalues) < 0):
            raise ValueError("eigenvalues must be ascending")

    def __len__(self):
        return len(self.eigenvalues)

    def nodes(self, j: int, threshold: float = TOLERANCES.node_threshold) -> int:
        """Sign changes of eigenvector ``j`` (ignoring entries below the relative threshold)."""
        v = self.vectors[:, j]
        keep = v[np.abs(v) > threshold * np.max(np.abs(v))]
        return int(np.count_nonzero(np.diff(np.sign(keep)) != 0))

    def to_json(self) -> dict:
        return {
            "schema": "qeslab/spectrum/1",
            "eigenvalues": [float(e) for e in self.eigenvalues],
            "grid": self.grid.to_json() if self.grid else None,
            "bc": self.bc,
            "potential": self.potential,
            "method": self.method,
        }

    @classmethod
    def from_json(cls, d) -> "Spectrum":
        g = Grid.from_json(d["grid"]) if d.get("grid") else None
        return cls(np.array(d["eigenvalues"], dtype=float), g, d.get("bc", ""), d.get("potential", ""),
                   d.get("method", ""))

    def vectors_csv(self) -> str:
        """Eigenvector table: one row per unknown, columns x, v0, v1, ..."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        k = self.vectors.shape[1]
        w.writerow(["x"] + [f"v{j}" for j in range(k)])
        for x, row in zip(self.grid.unknowns, self.vectors):
            w.writerow([repr(float(x))] + [repr(float(v)) for v in row])
        return buf.getvalue()


def eig_sym(m: SymMatrix, k: int, vectors: bool = False, tol: Tolerances = TOLERANCES) -> Spectrum:
    """The ``k`` smallest eigenvalues (and optionally unit eigenvectors)."""
    n = m.size
    if not 0 <= k <= n:
        raise ValueError(f"k={k} outside 0..{n}")
    if m.kind == "tridiagonal":
        lam = _bisect_tridiagonal(np.asarray(m.diag, float), np.asarray(m.off, float), k, tol.bisection_abs)
        vecs = _inverse_iteration(m.diag, m.off, lam, tol.inverse_iterations) if vectors else None
        return Spectrum(lam, method="sturm-bisection", vectors=vecs)
    if vectors:
        w, V = jacobi_eigh(m.to_dense(), True, tol)
        return Spectrum(w[:k], method="jacobi", vectors=V[:, :k])
    return Spectrum(jacobi_eigh(m.to_dense(), False, tol)[:k], method="jacobi")


def solve(V: Callable, grid: Grid, k: int, potential: str = "", vectors: bool = False,
          tol: Tolerances = TOLERANCES) -> Spectrum:
    """Build the Hamiltonian on ``grid`` and return its ``k`` lowest levels with metadata."""
    sp = eig_sym(build_hamiltonian(V, grid), k, vectors, tol)
    sp.grid, sp.bc, sp.potential = grid, grid.bc, potential
    return sp


def richardson_refine(coarse, fine, tol: Tolerances = TOLERANCES):
    """``(4 E_{h/2} - E_h) / 3`` per level.

    Plain sequences are combined as given; :class:`Spectrum` inputs must
    describe the same problem with the fine spacing half the coarse one.
    """
    if not isinstance(coarse, Spectrum) or not isinstance(fine, Spectrum):
        a = np.asarray(getattr(coarse, "eigenvalues", coarse), dtype=float)
        b = np.asarray(getattr(fine, "eigenvalues", fine), dtype=float)
        if a.shape != b.shape:
            raise MismatchedProblemsError("different numbers of levels", coarse=len(a), fine=len(b))
        return (4.0 * b - a) / 3.0
    if len(coarse) != len(fine):
        raise MismatchedProblemsError("different numbers of levels", coarse=len(coarse), fine=len(fine))
    if coarse.bc != fine.bc or coarse.potential != fine.potential:
        raise MismatchedProblemsError("spectra come from different problems",
                                      coarse=[coarse.bc, coarse.potential], fine=[fine.bc, fine.potential])
    if coarse.grid is None or fine.grid is None:
        raise MismatchedProblemsError("grid metadata missing")
    gc, gf = coarse.grid, fine.grid
    if (gc.lo, gc.hi) != (gf.lo, gf.hi) or abs(gf.h * 2 - gc.h) > tol.spacing_rel * gc.h:
        raise MismatchedProblemsError("fine grid is not the coarse grid at half spacing",
                                      coarse=gc.to_json(), fine=gf.to_json())
    lam = (4.0 * fine.eigenvalues - coarse.eigenvalues) / 3.0
    return Spectrum(np.sort(lam), gf, fine.bc, fine.potential, fine.method + "+richardson")


def solve_richardson(V: Callable, grid: Grid, k: int, potential: str = "", vectors: bool = False,
                     tol: Tolerances = TOLERANCES):
    """Spectra on ``grid`` and on its refinement plus their extrapolation.

    Returns ``(coarse, fine, extrapolated)``; eigenvectors, when requested,
    come with the fine spectrum.
    """
    coarse = solve(V, grid, k, potential, False, tol)
    fine = solve(V, grid.refined(), k, potential, vectors, tol)
    return coarse, fine, richardson_refine(coarse, fine, tol)


# -- residuals ---------------------------------------------------------------------

@dataclass(frozen=True)
class ResidualReport:
    residual: float
    energy: float
    grid: Grid
    label: str = ""

    def to_json(self) -> dict:
        return {"schema": "qeslab/residual/1", "label": self.label, "energy": self.energy,
                "residual": self.residual, "grid": self.grid.to_json()}


def pointwise_residual(psi: Callable, E: float, V: Callable, grid: Grid,
                       tol: Tolerances = TOLERANCES) -> float:
    """``max |-psi'' + V psi - E psi| / max |psi|`` over the interior, 5-point ``psi''``."""
    x = grid.points
    f = np.asarray(psi(x), dtype=float)
    peak = float(np.max(np.abs(f)))
    if not np.isfinite(peak) or peak < tol.psi_floor:
        raise DegeneratePsiError(f"max|psi| = {peak!r} on the grid", peak=peak)
    h = grid.h
    d2 = (-f[4:] + 16 * f[3:-1] - 30 * f[2:-2] + 16 * f[1:-3] - f[:-4]) / (12 * h * h)
    xi = x[2:-2]
    r = -d2 + (np.asarray(V(xi), dtype=float) - E) * f[2:-2]
    return float(np.max(np.abs(r)) / peak)


def residual_report(psi: Callable, E: float, V: Callable, grid: Grid, label: str = "") -> ResidualReport:
    return ResidualReport(pointwise_residual(psi, E, V, grid), float(E), grid, label)


def table_csv(x, columns: dict) -> str:
    """CSV with an ``x`` column followed by the named columns (for external plotting)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    names = list(columns)
    w.writerow(["x"] + names)
    cols = [np.asarray(columns[n], dtype=float) for n in names]
    for i, xi in enumerate(np.asarray(x, dtype=float)):
        w.writerow([repr(float(xi))] + [repr(float(c[i])) for c in cols])
    return buf.getvalue()
