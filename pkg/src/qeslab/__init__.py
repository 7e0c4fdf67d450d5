"""Symbolic-numeric checks of polynomial families from quasi-exactly solvable problems.

Exact side: series recurrences derived from ODEs, orthogonality tests and
truncation scans over rational arithmetic. Numeric side: finite-difference
spectra that confirm the closed-form energies.
"""
from .algebra import MPoly, Rat, RootInterval, UPoly, parse_rat, poly_mul, poly_substitute, sturm_isolate_roots
from .errors import QesError
from .models import (
    BhaduriParams,
    KinkParams,
    QesState,
    bhaduri_radial_problem,
    bhaduri_recurrence,
    build_bhaduri_ode,
    build_kink_t_ode,
    kink_potential,
    kink_qes_states,
    kink_sectors,
    kink_transform,
    periodic_potential,
    periodic_qes_states,
    reconstruct_wavefunction,
)
from .numerics import Grid, Spectrum, SymMatrix, build_hamiltonian, eig_sym, pointwise_residual, richardson_refine
from .recurrences import (
    FavardReport,
    GramMatrix,
    MomentFunctional,
    TruncationResult,
    energy_from_s,
    favard_check,
    generate_sequence,
    gram_matrix,
    moments_from_sequence,
    truncation_scan,
)
from .series import LinearOde, PolySequence, Recurrence, SeriesAnsatz, derive_recurrence, exact_residual, parity_decouple

__version__ = "0.1.0"
