from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qeslab.algebra import MPoly, UPoly
from qeslab.errors import (
    DegreeDefectError,
    InsufficientMomentsError,
    LeadingZeroError,
    SImaginaryError,
    UnboundParameterError,
    WrongShapeError,
)
from qeslab.models import PRINTED_BHADURI, PRINTED_KINK_EVEN, PRINTED_KINK_ODD, bhaduri_recurrence, kink_sectors
from qeslab.recurrences import (
    CHEBYSHEV_SEED,
    MomentFunctional,
    TruncationResult,
    best_effort_moments,
    chebyshev_like_recurrence,
    energy_from_s,
    favard_check,
    generate_sequence,
    gram_matrix,
    moments_from_sequence,
    monic_hermite_recurrence,
    probe_orthogonality,
    s_from_energy,
    truncation_scan,
)
from qeslab.series import PolySequence, Recurrence

P = MPoly.parse
HALF = Fraction(1, 2)
EVEN, ODD = kink_sectors()


# -- generation ------------------------------------------------------------------

def test_bhaduri_p1():
    for a, b, c in [(2, 1, 0), (HALF, Fraction(3, 4), Fraction(1, 4)), (1, 0, 2)]:
        seq = generate_sequence(bhaduri_recurrence(), {"a": a, "b": b, "c": c}, 3)
        assert seq.entries[1] == UPoly("beta", [Fraction(b) - Fraction(c)])


def test_bhaduri_p1_symbolic_oracle():
    # n = 1: (2a) P_1 - 2(b-c) a P_0 = 0
    r = bhaduri_recurrence()
    assert r.coeff_at(0, 1) == P("2*a") and r.coeff_at(1, 1) == P("-2*(b-c)*a")
    assert r.coeff_at(2, 1).is_zero()


def test_hermite_control_p2():
    seq = generate_sequence(monic_hermite_recurrence(), None, 2)
    assert seq.entries[2] == UPoly("x", [-HALF, 0, 1])


def test_seed_only():
    assert generate_sequence(EVEN, {"eps2": HALF}, 0).entries == [UPoly("s", [1])]


def test_generation_needs_bound_parameters():
    with pytest.raises(UnboundParameterError):
        generate_sequence(EVEN, None, 3)


def test_leading_zero_reported_with_partial():
    rec = Recurrence((P("n-3"), P("-x"), P("1")), spectral="x")
    with pytest.raises(LeadingZeroError) as err:
        generate_sequence(rec, None, 6)
    assert err.value.n == 3 and len(err.value.partial) == 3
    assert len(generate_sequence(rec, None, 6, partial=True)) == 3


def test_leading_coefficient_with_spectral_is_wrong_shape():
    with pytest.raises(WrongShapeError):
        generate_sequence(Recurrence((P("x"), P("1"), P("1")), spectral="x"), None, 3)


def test_kink_odd_degrees():
    seq = generate_sequence(ODD, {"eps2": HALF}, 4)
    assert seq.degrees() == [0, 2, 4, 6, 8]


# -- Favard -------------------------------------------------------------------

@pytest.mark.parametrize("rec, seed", [(monic_hermite_recurrence(), None),
                                       (chebyshev_like_recurrence(), CHEBYSHEV_SEED)])
def test_controls_pass(rec, seed):
    rep = favard_check(rec, 50, seed=seed)
    assert rep.passed and rep.degree_checked and rep.violations == []


def test_kink_odd_fails_as_claimed():
    for rec in (ODD, PRINTED_KINK_ODD):
        rep = favard_check(rec, 10, {"eps2": HALF})
        assert not rep.passed
        assert {"MIDDLE_NOT_DEG1", "C_DEPENDS_ON_SPECTRAL"} <= rep.codes()
        assert rep.first_violation().n <= 3


def test_bhaduri_fails_as_claimed():
    rep = favard_check(bhaduri_recurrence(), 40, {"a": 2, "b": 1, "c": 0})
    assert {"A_ZERO", "C_DEPENDS_ON_SPECTRAL"} <= rep.codes()
    assert rep.first_violation().code == "A_ZERO"
    rep = favard_check(PRINTED_BHADURI, 10)
    assert "A_ZERO" in rep.codes() and not rep.degree_checked


@pytest.mark.parametrize("rec", [EVEN, ODD, PRINTED_KINK_EVEN, PRINTED_KINK_ODD, bhaduri_recurrence()])
def test_qes_families_fail_early(rec):
    rep = favard_check(rec, 8)
    assert not rep.passed and rep.first_violation().n <= 3


def test_favard_requires_three_terms_step_one():
    with pytest.raises(WrongShapeError):
        favard_check(Recurrence((P("1"), P("-1")), spectral="x"), 5)


def test_favard_c1_rule():
    # without the seed, c = 1/4 at n = 1 multiplies P_{-1} and is flagged
    rep = favard_check(chebyshev_like_recurrence(), 5)
    assert rep.codes() == {"C1_NONZERO"}


def test_favard_json_round_trip():
    rep = favard_check(ODD, 4, {"eps2": HALF})
    from qeslab.recurrences import FavardReport

    again = FavardReport.from_json(rep.to_json())
    assert again.to_json() == rep.to_json()


@st.composite
def orthogonal_shaped(draw):
    """Three-term recurrences with lead 1, middle of degree <= 1 in x, C free of x."""
    k = st.integers(-3, 3)
    A0, A1, B0, C0, C1 = (draw(k) for _ in range(5))
    middle = MPoly.parse(f"-(({A0}) + ({A1})*n)*x - ({B0})")
    trailing = MPoly.parse(f"({C0}) + ({C1})*n").substitute({}) * MPoly.parse("n-1")
    return Recurrence((MPoly.const(1), middle, trailing), spectral="x")


@settings(max_examples=150)
@given(orthogonal_shaped(), st.integers(2, 8))
def test_degree_growth_iff_no_deg_or_a_violation(rec, N):
    seq = generate_sequence(rec, None, N)
    full = all(d == k for k, d in enumerate(seq.degrees()))
    rep = favard_check(rec, N)
    assert full == (not ({"DEG_GROWTH", "A_ZERO"} & rep.codes()))


@settings(max_examples=30)
@given(st.builds(Fraction, st.integers(-5, 5).filter(bool), st.integers(1, 4)))
def test_common_scaling_changes_nothing(k):
    b = {"eps2": HALF}
    assert generate_sequence(ODD.scaled(k), b, 5).entries == generate_sequence(ODD, b, 5).entries
    verdicts = lambda rep: [(v.n, v.code) for v in rep.violations]
    assert verdicts(favard_check(ODD.scaled(k), 5, b)) == verdicts(favard_check(ODD, 5, b))
    assert favard_check(monic_hermite_recurrence().scaled(k), 10).passed
    assert truncation_scan(ODD.scaled(k), b, 3).to_json() == truncation_scan(ODD, b, 3).to_json()


# -- moments and Gram matrices ----------------------------------------------------

def test_moments_chebyshev_like():
    seq = generate_sequence(chebyshev_like_recurrence(), None, 4, seed=CHEBYSHEV_SEED)
    L = moments_from_sequence(seq)
    assert L.moments[:3] == [1, 0, Fraction(1, 4)]


def test_moments_hermite():
    L = moments_from_sequence(generate_sequence(monic_hermite_recurrence(), None, 4))
    assert L.moments[1] == 0 and L.moments[2] == HALF


def test_moments_degree_defect_kink_odd():
    with pytest.raises(DegreeDefectError) as err:
        moments_from_sequence(generate_sequence(ODD, {"eps2": HALF}, 4))
    assert err.value.n == 1 and err.value.degree == 2 and err.value.code == "DEGREE_DEFECT"


@pytest.mark.parametrize("rec, seed", [(monic_hermite_recurrence(), None),
                                       (chebyshev_like_recurrence(), CHEBYSHEV_SEED)])
@pytest.mark.parametrize("size", [2, 5, 8])
def test_favard_controls_gram_diagonal(rec, seed, size):
    L = moments_from_sequence(generate_sequence(rec, None, 2 * size, seed=seed))
    G = gram_matrix(generate_sequence(rec, None, size - 1, seed=seed), L)
    assert G.is_diagonal() and G.is_symmetric()
    assert all(G.entries[i][i] != 0 for i in range(size))


def test_kink_odd_best_effort_not_diagonal():
    seq = generate_sequence(ODD, {"eps2": HALF}, 5)
    L = best_effort_moments(seq, 2 * 10 + 1)
    assert L.padded and L.moments[0] == 1
    G = gram_matrix(seq, L, 6)
    assert G.off_diagonal_nonzero()


def test_probe_finds_no_orthogonalizing_functional():
    seq = generate_sequence(ODD, {"eps2": HALF}, 5)
    probe = probe_orthogonality(seq, 6)
    assert probe.tested == 7 ** 3 and probe.non_orthogonal


@pytest.mark.parametrize("c", [Fraction(0), Fraction(1), Fraction(-2, 3)])
def test_point_mass_functional(c):
    seq = generate_sequence(ODD, {"eps2": HALF}, 3)
    L = MomentFunctional([c ** k for k in range(20)])
    G = gram_matrix(seq, L)
    for i in range(4):
        for j in range(4):
            assert G.entries[i][j] == seq.entries[i](c) * seq.entries[j](c)
    assert G.rank() <= 1


def test_insufficient_moments():
    seq = generate_sequence(monic_hermite_recurrence(), None, 3)
    with pytest.raises(InsufficientMomentsError):
        gram_matrix(seq, MomentFunctional([Fraction(1), Fraction(0)]))


def test_gram_json_round_trip():
    from qeslab.recurrences import GramMatrix

    seq = generate_sequence(monic_hermite_recurrence(), None, 3)
    G = gram_matrix(seq, moments_from_sequence(generate_sequence(monic_hermite_recurrence(), None, 8)))
    assert GramMatrix.from_json(G.to_json()).entries == G.entries


# -- truncation ------------------------------------------------------------------

@pytest.mark.parametrize("eps2", [Fraction(1, 3), HALF, Fraction(2)])
def test_odd_sector_truncates_at_s_one(eps2):
    res = truncation_scan(ODD, {"eps2": eps2}, 10)
    assert res.qes_points() == [(0, Fraction(1))]


def test_even_sector_truncates_only_at_half():
    res = truncation_scan(EVEN, {"eps2": HALF}, 10)
    assert res.qes_points() == [(1, HALF)]
    seq = generate_sequence(EVEN, {"eps2": HALF, "s": HALF}, 4)
    vals = [p(Fraction(0)) if not p.is_zero() else 0 for p in seq.entries]
    # Q_0 = 1, Q_2 = -8/3 (f = 1 - (4/3) t^2), then nothing
    assert vals == [1, Fraction(-8, 3), 0, 0, 0]
    for eps2 in (Fraction(1, 3), Fraction(1)):
        assert truncation_scan(EVEN, {"eps2": eps2}, 10).qes_points() == []


def test_even_sector_closed_condition():
    # M(0) M(2) = eps2 (1 + eps2) C(2) at s = 1/2 reduces to (2 eps2 - 1)(eps2 + 1) = 0
    r = EVEN.substitute({"s": HALF})
    lhs = r.coeff_at(1, 1) * r.coeff_at(1, 2)
    rhs = r.coeff_at(0, 2) * r.coeff_at(2, 2)
    assert lhs - rhs == P("(2*eps2 - 1)*(eps2 + 1)") * (lhs - rhs).substitute({"eps2": 0}) * -1


def test_bhaduri_b_equals_c_truncation():
    a, b = Fraction(1), HALF
    res = truncation_scan(bhaduri_recurrence(), {"a": a, "b": b, "c": b}, 6, (0, 30))
    found = dict((M, q) for M, q in res.qes_points())
    for M in (0, 2, 4, 6):
        assert found[M] == 2 * (a + 2 * b + M)
    assert all(M % 2 == 0 for M in found)


def test_qes_points_verified_independently():
    for rec, eps2 in ((ODD, Fraction(2)), (EVEN, HALF)):
        for M, q in truncation_scan(rec, {"eps2": eps2}, 6).qes_points():
            seq = generate_sequence(rec, {"eps2": eps2, "s": q}, 12)
            tail = [p for p in seq.entries[M + 1:]]
            assert all(p.is_zero() for p in tail) and not seq.entries[M].is_zero()


def test_truncation_json_round_trip():
    res = truncation_scan(EVEN, {"eps2": HALF}, 3)
    again = TruncationResult.from_json(res.to_json())
    assert again.to_json() == res.to_json()


def test_truncation_shape_errors():
    with pytest.raises(WrongShapeError):
        truncation_scan(Recurrence((P("1"), P("-1")), spectral="x"), None, 3)
    with pytest.raises(UnboundParameterError):
        truncation_scan(ODD, None, 3)


# -- energies -------------------------------------------------------------------

def test_energy_examples():
    assert energy_from_s(1, 1) == 0
    assert energy_from_s(HALF, 1) == Fraction(3, 4)
    assert s_from_energy(1, 1) == 0
    assert s_from_energy(Fraction(3, 4)) == HALF
    assert energy_from_s(0.5, 2.0) == pytest.approx(3.0)


def test_s_imaginary():
    with pytest.raises(SImaginaryError) as err:
        s_from_energy(Fraction(5, 4))
    assert err.value.code == "S_IMAGINARY"


@settings(max_examples=200)
@given(st.floats(-50, 1), st.floats(0.1, 3))
def test_energy_round_trip(E_over, mu):
    E = E_over * mu * mu
    assert energy_from_s(s_from_energy(E, mu), mu) == pytest.approx(E, abs=1e-9 * max(1, abs(E)))


@settings(max_examples=100)
@given(st.builds(Fraction, st.integers(-40, 4), st.integers(4, 9)))
def test_energy_round_trip_exact(E):
    s = s_from_energy(E)
    if isinstance(s, Fraction):
        assert energy_from_s(s) == E
