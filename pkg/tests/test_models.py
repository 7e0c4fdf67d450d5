import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qeslab.algebra import MPoly, UPoly
from qeslab.errors import BetaOutOfRangeError, InvalidG1Error, ResidualNonzeroError
from qeslab.models import (
    AsymptoteWarning,
    BhaduriParams,
    KinkParams,
    QesState,
    bhaduri_radial_problem,
    bhaduri_recurrence,
    build_bhaduri_ode,
    build_kink_t_ode,
    count_nodes,
    heun_params,
    heun_y_to_t,
    kink_heun_ode_y,
    kink_potential,
    kink_qes_states,
    kink_transform,
    periodic_potential,
    periodic_qes_states,
    reconstruct_wavefunction,
)
from qeslab.numerics import Grid, pointwise_residual, solve, solve_richardson
from qeslab.series import exact_residual, parity_decouple, SeriesAnsatz, derive_recurrence

HALF = Fraction(1, 2)
EPS = [Fraction(1, 3), HALF, Fraction(2)]


# -- potentials ----------------------------------------------------------------

def test_kink_potential_vanishes_at_origin():
    assert kink_potential(0.0) == pytest.approx(0.0, abs=1e-15)
    assert periodic_potential(0.0) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("mu", [0.5, 1.0, 2.0])
def test_kink_asymptote(mu):
    p = KinkParams(mu=mu, eps2=Fraction(1, 3))
    assert kink_potential(60.0 / mu, p) == pytest.approx(mu * mu, rel=1e-12)
    with pytest.warns(AsymptoteWarning):
        v = kink_potential(np.array([-1e4, 0.0, 1e4]), p)
    assert v[0] == v[2] == mu * mu


def test_no_warning_inside_bound():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        kink_potential(np.linspace(-30, 30, 11))


def test_complex_continuation_matches_periodic():
    v = kink_potential(1j * np.pi / 2)
    assert abs(v.imag) < 1e-14
    assert v.real == pytest.approx(-periodic_potential(np.pi / 2), abs=1e-14)


@pytest.mark.parametrize("eps2", EPS)
def test_anti_isospectral_identity(eps2):
    p = KinkParams(eps2=eps2)
    theta = np.linspace(-2 * np.pi, 2 * np.pi, 10_000)
    vk = kink_potential(1j * theta, p)
    assert np.max(np.abs(periodic_potential(theta, p) + vk.real)) < 1e-12
    assert np.max(np.abs(vk.imag)) < 1e-12


@settings(max_examples=200)
@given(st.floats(-50, 50), st.sampled_from([0.5, 1.0, 3.0]), st.sampled_from(EPS))
def test_periodic_potential_period(theta, mu, eps2):
    p = KinkParams(mu=mu, eps2=eps2)
    period = 2 * np.pi / mu
    assert periodic_potential(theta + period, p) == pytest.approx(periodic_potential(theta, p), abs=1e-9)


def test_params_validation():
    with pytest.raises(ValueError):
        KinkParams(mu=0.0)
    with pytest.raises(ValueError):
        KinkParams(eps2=Fraction(-1))


# -- transform ----------------------------------------------------------------

def test_transform_examples():
    for eps2 in EPS:
        p = KinkParams(eps2=eps2)
        y, t = kink_transform(0.0, p)
        assert y == 0 and t == pytest.approx(float(eps2) ** 0.5)
        y, t = kink_transform(80.0, p)
        assert y == pytest.approx(1.0) and t == pytest.approx((1 + float(eps2)) ** 0.5)
    y, t = kink_transform(1.3)
    assert t == pytest.approx((y + 0.5) ** 0.5, abs=1e-15)


@settings(max_examples=200)
@given(st.floats(0, 40), st.floats(1e-3, 5), st.sampled_from(EPS))
def test_transform_monotone_in_abs_x(x, dx, eps2):
    p = KinkParams(eps2=eps2)
    y1, t1 = kink_transform(x, p)
    y2, t2 = kink_transform(-(x + dx), p)
    assert 0 <= y1 <= y2 <= 1
    if x < 15:
        assert y1 < 1
    assert p.e ** 0.5 - 1e-15 <= t1 <= t2 <= (1 + p.e) ** 0.5


# -- ODE builders -----------------------------------------------------------------

def test_heun_params_invariants():
    hp = heun_params()
    assert hp.alpha == MPoly.parse("-5/2 - s") and hp.betaH == MPoly.parse("3/2 - s")
    assert hp.qH == MPoly.parse("(1-s^2)*(1+eps2) - s*eps2/2 - (1-2*eps2)/4")


def test_heun_form_consistency():
    assert heun_y_to_t(kink_heun_ode_y()) == build_kink_t_ode()


def test_t_ode_constant_term():
    ode = build_kink_t_ode(1, HALF)
    assert ode.coeff(0).substitute({"t": 0}) == MPoly.const(Fraction(9, 2))
    sym = build_kink_t_ode(1).coeff(0).substitute({"t": 0})
    assert sym == MPoly.parse("1 + 7*eps2")


@pytest.mark.parametrize("eps2", EPS)
def test_ground_state_residual(eps2):
    assert exact_residual(build_kink_t_ode(1, eps2), UPoly("t", [0, 1])).is_zero()


def test_t_ode_trailing_factorization():
    rec = derive_recurrence(build_kink_t_ode(), SeriesAnsatz("factorial"), "s").with_lead_shift(2)
    assert rec.coeffs[2] == MPoly.parse("n*(n-1)*(n+2*s-5)*(n+2*s+3)")


def test_bhaduri_params():
    assert BhaduriParams(1, 1, 2).a == 2
    p = BhaduriParams(2, 2)
    assert p.c == 0 and p.b == 1
    assert BhaduriParams(3, -1, Fraction(3, 4)).a == Fraction(3, 2)
    assert isinstance(BhaduriParams(0, 0, 1).a, float)
    with pytest.raises(InvalidG1Error):
        BhaduriParams(1, 0, Fraction(-1, 3))
    with pytest.raises(ValueError):
        BhaduriParams(0, 0, 1).bindings()


def test_bhaduri_b_equals_c_decouples():
    # the vanishing middle term leaves a two-term recurrence in steps of 2
    rec = bhaduri_recurrence({"a": 2, "b": HALF, "c": HALF})
    assert rec.step == 2 and len(rec.coeffs) == 2
    assert bhaduri_recurrence().coeffs[1].substitute({"c": MPoly.var("b")}).is_zero()


def test_bhaduri_ode_shape():
    ode = build_bhaduri_ode(BhaduriParams(2, 0, 2))
    assert ode.coeff(2) == MPoly.parse("x - x^3")
    assert ode.coeff(1) == MPoly.parse("2*(2 - 4*x^2)")


# -- radial problem ---------------------------------------------------------------

def test_radial_problem_definition():
    rp = bhaduri_radial_problem(1)
    assert rp.centrifugal == 15 / 4
    assert rp.expected(0) == 3 and bhaduri_radial_problem(2).expected(1) == 6
    with pytest.raises(BetaOutOfRangeError):
        bhaduri_radial_problem(0.5)


@pytest.mark.parametrize("beta, n_r, E", [(1, 0, 3.0), (2, 1, 6.0)])
def test_radial_spectrum(beta, n_r, E):
    rp = bhaduri_radial_problem(beta)
    _, _, ext = solve_richardson(rp.potential, Grid(0.0, rp.R_max, 1001), n_r + 1)
    assert rp.energy(ext.eigenvalues[n_r]) == pytest.approx(E, abs=1e-6)


# -- closed-form states ------------------------------------------------------------

def test_states_at_half():
    states = kink_qes_states(HALF)
    assert [(st.sector, st.s, st.energy()) for st in states] == [
        ("odd", Fraction(1), 0), ("even", HALF, Fraction(3, 4))]
    assert states[0].series == UPoly("t", [0, 1])
    assert states[1].series == UPoly("t", [1, 0, Fraction(-4, 3)])
    assert all(st.verified() for st in states)


@pytest.mark.parametrize("eps2", [Fraction(1, 3), Fraction(1), Fraction(2)])
def test_only_ground_state_away_from_half(eps2):
    states = kink_qes_states(eps2)
    assert [(st.sector, st.s) for st in states] == [("odd", 1)]


def test_periodic_states_negate_energy():
    ps = periodic_qes_states(HALF)
    assert [st.energy() for st in ps] == [Fraction(-3, 4), 0]
    assert ps[0].energy(2.0) == -3.0


def test_unverified_state_rejected():
    bad = QesState("kink", "odd", Fraction(1, 2), HALF, UPoly("t", [0, 1]))
    with pytest.raises(ResidualNonzeroError):
        reconstruct_wavefunction(bad)


def test_wavefunction_closed_forms():
    psi0, psi2 = (reconstruct_wavefunction(st) for st in kink_qes_states(HALF))
    x = np.linspace(-8, 8, 401)
    y, t = kink_transform(x)
    assert np.allclose(psi0(x), (1 - y) * np.sqrt(y + 0.5))
    assert np.allclose(psi2(x), np.sqrt(1 - y) * (1 - 4 * y) / 3, atol=1e-14)
    assert count_nodes(psi0(x)) == 0 and count_nodes(psi2(x)) == 2


def test_periodic_ground_state_form():
    chi0 = reconstruct_wavefunction(periodic_qes_states(HALF)[0])
    th = np.linspace(0, 4 * np.pi, 801)
    S = np.sin(th / 2) ** 2
    ref = (1 + S) / (3 - S) ** 1.5
    ratio = chi0(th) / ref
    assert np.allclose(ratio, ratio[0])
    assert count_nodes(chi0(th)) == 0
    assert np.allclose(chi0(th + 2 * np.pi), chi0(th))


def test_e0_periodic_state_is_antiperiodic():
    chi2 = reconstruct_wavefunction(periodic_qes_states(HALF)[1])
    th = np.linspace(0, 2 * np.pi, 101)
    assert np.allclose(chi2(th + 2 * np.pi), -chi2(th))


@pytest.mark.parametrize("mu", [1.0, 1.5])
def test_states_pass_numeric_residual(mu):
    p = KinkParams(mu=mu, eps2=HALF)
    for st in kink_qes_states(HALF):
        psi = reconstruct_wavefunction(st, p)
        r = pointwise_residual(psi, float(st.energy(mu)), lambda x: kink_potential(x, p),
                               Grid(-20 / mu, 20 / mu, 20001))
        assert r < 1e-6
    for st in periodic_qes_states(HALF):
        chi = reconstruct_wavefunction(st, p)
        r = pointwise_residual(chi, float(st.energy(mu)), lambda th: periodic_potential(th, p),
                               Grid(0.0, 4 * np.pi / mu, 20001))
        assert r < 1e-6


def test_nodes_from_numerics_match():
    p = KinkParams(eps2=HALF)
    sp = solve(lambda x: kink_potential(x, p), Grid(-25.0, 25.0, 2001), 3, vectors=True)
    assert [sp.nodes(j) for j in range(3)] == [0, 1, 2]
