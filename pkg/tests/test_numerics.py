import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qeslab.errors import DegeneratePsiError, MismatchedProblemsError, NonfinitePotentialError, NoConvergenceError
from qeslab.models import KinkParams, kink_potential, kink_qes_states, periodic_potential, periodic_qes_states, reconstruct_wavefunction
from qeslab.numerics import (
    TOLERANCES,
    Grid,
    Spectrum,
    SymMatrix,
    Tolerances,
    build_hamiltonian,
    eig_sym,
    jacobi_eigh,
    pointwise_residual,
    residual_report,
    richardson_refine,
    solve,
    solve_richardson,
    sturm_count,
    table_csv,
)

KINK = KinkParams(mu=1.0, eps2="1/2")


def zero(x):
    return np.zeros_like(x)


def kink(x):
    return kink_potential(x, KINK)


# -- grid and Hamiltonian -----------------------------------------------------------

def test_grid_spacing():
    assert Grid(0, 1, 101).h == pytest.approx(0.01)
    assert Grid(0, 1, 100, "periodic").h == pytest.approx(0.01)
    assert len(Grid(0, 1, 101).unknowns) == 99 and len(Grid(0, 1, 100, "periodic").unknowns) == 100
    assert Grid(0, 1, 101).refined().h == pytest.approx(0.005)
    assert Grid(0, 1, 100, "periodic").refined().h == pytest.approx(0.005)
    g = Grid(-2.0, 3.0, 64, "periodic")
    assert Grid.from_json(json.loads(json.dumps(g.to_json()))) == g


@pytest.mark.parametrize("args", [(0, 1, 15), (1, 0, 100), (0, 1, 100, "neumann")])
def test_grid_rejects(args):
    with pytest.raises(ValueError):
        Grid(*args)


def test_box_spectrum():
    sp = solve(zero, Grid(0, np.pi, 2000), 3)
    assert np.allclose(sp.eigenvalues, [1, 4, 9], atol=1e-3)
    assert sp.method == "sturm-bisection"


def test_rotor_spectrum():
    # the dense path is O(N^3); N=256 already meets the 1e-3 target for these modes
    sp = solve(zero, Grid(0, 2 * np.pi, 256, "periodic"), 5)
    assert np.allclose(sp.eigenvalues, [0, 1, 1, 4, 4], atol=1e-3)
    assert sp.method == "jacobi"


def test_kink_diagonal_asymptote():
    g = Grid(-25.0, 25.0, 4000)
    m = build_hamiltonian(kink, g)
    assert m.kind == "tridiagonal"
    assert m.diag[0] - 2 / g.h ** 2 == pytest.approx(1.0, abs=1e-4)
    assert np.all(m.off == -1 / g.h ** 2)


def test_cyclic_corner():
    m = build_hamiltonian(zero, Grid(0, 1, 32, "periodic"))
    A = m.to_dense()
    assert m.kind == "cyclic" and A[0, -1] == A[-1, 0] == m.corner
    assert np.array_equal(A, A.T)


def test_nonfinite_potential():
    with pytest.raises(NonfinitePotentialError) as err:
        build_hamiltonian(lambda x: np.where(x > 0.5, np.inf, 0.0), Grid(0, 1, 101))
    assert err.value.details["x"] == pytest.approx(0.51)


# -- eigensolvers ------------------------------------------------------------------

def test_eig_examples():
    d = SymMatrix("dense", dense=np.diag([3.0, 1.0, 2.0]))
    assert np.allclose(eig_sym(d, 3).eigenvalues, [1, 2, 3])
    assert np.allclose(eig_sym(SymMatrix("dense", dense=np.array([[0.0, 1], [1, 0]])), 2).eigenvalues, [-1, 1])
    t = SymMatrix("tridiagonal", np.array([1.0, 2, 3]), np.zeros(2))
    assert np.allclose(eig_sym(t, 3).eigenvalues, [1, 2, 3], atol=1e-10)


def test_k_bounds():
    with pytest.raises(ValueError):
        eig_sym(SymMatrix("dense", dense=np.eye(2)), 3)


def test_sturm_count_matches_numpy():
    rng = np.random.default_rng(7)
    d, e = rng.normal(size=30), rng.normal(size=29)
    A = np.diag(d) + np.diag(e, 1) + np.diag(e, -1)
    w = np.linalg.eigvalsh(A)
    for x in np.linspace(-4, 4, 17):
        assert sturm_count(d, e, x) == np.count_nonzero(w < x)


sym_dense = st.integers(2, 12).flatmap(
    lambda n: arrays(np.float64, (n, n), elements=st.floats(-10, 10)).map(lambda a: (a + a.T) / 2))


@settings(max_examples=80)
@given(sym_dense)
def test_jacobi_preserves_trace_and_matches_lapack(A):
    w, V = jacobi_eigh(A, vectors=True)
    scale = max(1.0, np.abs(A).max())
    assert abs(w.sum() - np.trace(A)) <= 1e-10 * scale * len(A)
    assert np.allclose(w, np.linalg.eigvalsh(A), atol=1e-9 * scale)
    assert np.allclose(V.T @ V, np.eye(len(A)), atol=1e-9)
    assert np.allclose(A @ V, V * w, atol=1e-8 * scale)


@settings(max_examples=40)
@given(st.integers(3, 40).flatmap(lambda n: st.tuples(
    arrays(np.float64, n, elements=st.floats(-5, 5)), arrays(np.float64, n - 1, elements=st.floats(-5, 5)))))
def test_jacobi_matches_bisection(de):
    d, e = de
    t = SymMatrix("tridiagonal", d, e)
    a = eig_sym(t, len(d)).eigenvalues
    b = eig_sym(SymMatrix("dense", dense=t.to_dense()), len(d)).eigenvalues
    assert np.allclose(a, b, atol=1e-8)


def test_jacobi_sweep_cap():
    A = np.random.default_rng(1).normal(size=(20, 20))
    with pytest.raises(NoConvergenceError):
        jacobi_eigh(A + A.T, tol=Tolerances(jacobi_max_sweeps=1))


def test_jacobi_odd_size_padding():
    A = np.array([[2.0, 1, 0], [1, 2, 1], [0, 1, 2]])
    assert np.allclose(jacobi_eigh(A), [2 - np.sqrt(2), 2, 2 + np.sqrt(2)])


def test_jacobi_deterministic():
    A = np.random.default_rng(3).normal(size=(33, 33))
    A = A + A.T
    w1, V1 = jacobi_eigh(A, True)
    w2, V2 = jacobi_eigh(A, True)
    assert np.array_equal(w1, w2) and np.array_equal(V1, V2)


def test_spectrum_invariants_and_json():
    with pytest.raises(ValueError):
        Spectrum([2.0, 1.0])
    sp = solve(kink, Grid(-25.0, 25.0, 400), 3, potential="kink", vectors=True)
    again = Spectrum.from_json(json.loads(json.dumps(sp.to_json())))
    assert np.array_equal(again.eigenvalues, sp.eigenvalues) and again.grid == sp.grid
    lines = sp.vectors_csv().splitlines()
    assert lines[0] == "x,v0,v1,v2" and len(lines) == 399


# -- kink spectrum properties ---------------------------------------------------------

def test_bound_state_count_stable():
    counts = []
    for N in (2000, 4000):
        sp = solve(kink, Grid(-25.0, 25.0, N), 6)
        counts.append(int(np.count_nonzero(sp.eigenvalues < 1 - 1e-3)))
    assert counts[0] == counts[1] == 4


def test_kink_node_counts():
    sp = solve(kink, Grid(-25.0, 25.0, 2000), 3, vectors=True)
    assert sp.eigenvalues[2] == pytest.approx(0.75, abs=1e-3)
    assert sp.nodes(0) == 0 and sp.nodes(2) == 2


# -- Richardson -----------------------------------------------------------------

def test_richardson_box_example():
    assert richardson_refine([0.99990], [0.999975])[0] == pytest.approx(1.0, abs=1e-6)


def test_richardson_fixed_point():
    v = np.array([0.1, 0.2, 0.3])
    assert np.allclose(richardson_refine(v, v), v)


def test_richardson_improves_kink_e2():
    c, f, x = solve_richardson(kink, Grid(-25.0, 25.0, 2001), 3, potential="kink")
    assert abs(x.eigenvalues[2] - 0.75) < min(abs(c.eigenvalues[2] - 0.75), abs(f.eigenvalues[2] - 0.75))
    assert x.grid == f.grid and x.method.endswith("+richardson")


def test_richardson_mismatch():
    a = solve(zero, Grid(0, np.pi, 101), 2, potential="box")
    with pytest.raises(MismatchedProblemsError):
        richardson_refine(a, solve(zero, Grid(0, np.pi, 201), 3, potential="box"))
    with pytest.raises(MismatchedProblemsError):
        richardson_refine(a, solve(zero, Grid(0, np.pi, 201), 2, potential="other"))
    with pytest.raises(MismatchedProblemsError):
        richardson_refine(a, solve(zero, Grid(0, np.pi, 301), 2, potential="box"))
    with pytest.raises(MismatchedProblemsError):
        richardson_refine([1.0, 2.0], [1.0])


def test_box_second_order():
    errs = [abs(solve(zero, Grid(0, np.pi, N), 1).eigenvalues[0] - 1) for N in (101, 201, 401, 801)]
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    assert all(2 <= r <= 8 for r in ratios)


# -- residuals ------------------------------------------------------------------

def test_residual_sine():
    g = Grid(0.1, 3.0, int(round(2.9 / 1e-3)) + 1)
    assert g.h == pytest.approx(1e-3)
    assert pointwise_residual(np.sin, 1.0, zero, g) < 1e-8


def test_residual_flags_wrong_energy():
    assert pointwise_residual(np.sin, 1.1, zero, Grid(0.1, 3.0, 2901)) > 1e-2


def test_residual_kink_and_periodic_ground_states():
    psi0 = reconstruct_wavefunction(kink_qes_states("1/2")[0])
    assert pointwise_residual(psi0, 0.0, kink, Grid(-20.0, 20.0, 20001)) < 1e-6
    chi0 = reconstruct_wavefunction(periodic_qes_states("1/2")[0])
    rep = residual_report(chi0, -0.75, lambda th: periodic_potential(th, KINK), Grid(0.0, 4 * np.pi, 20001), "chi0")
    assert rep.residual < 1e-6
    assert rep.to_json()["schema"] == "qeslab/residual/1"


def test_degenerate_psi():
    with pytest.raises(DegeneratePsiError):
        pointwise_residual(zero, 0.0, zero, Grid(0, 1, 100))
    with pytest.raises(DegeneratePsiError):
        pointwise_residual(lambda x: np.full_like(x, np.nan), 0.0, zero, Grid(0, 1, 100))


def test_tolerances_defaults():
    assert TOLERANCES.bisection_abs == 1e-10 and TOLERANCES.jacobi_rel == 1e-12


def test_table_csv():
    out = table_csv([0.0, 1.0], {"V": [2.0, 3.0]})
    assert out.splitlines() == ["x,V", "0.0,2.0", "1.0,3.0"]
