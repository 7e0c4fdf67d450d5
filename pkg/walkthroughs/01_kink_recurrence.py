"""
From the kink ODE to Bender-Dunne style polynomials
===================================================

Expand f(t) in a power series, read off the coefficient recurrence, split it
by parity and ask whether either half is an orthogonal polynomial system.
"""
from fractions import Fraction

from qeslab.models import PRINTED_KINK, build_kink_t_ode, kink_recurrence, kink_sectors, recurrence_diff
from qeslab.recurrences import favard_check, generate_sequence, probe_orthogonality

ode = build_kink_t_ode()
print("ODE for f(t):")
for k, c in ode.terms:
    print(f"  f^({k}): {c}")

# factorial scaling: f = sum Q_n t^n / n!
rec = kink_recurrence()
print("\nrecurrence (highest index n+2):")
for c in rec.factored():
    print("   ", c)

# the hand-printed middle coefficient is off by a term linear in n
print("\nderived - printed:", [str(d) for d in recurrence_diff(rec, PRINTED_KINK)])

even, odd = kink_sectors()
half = {"eps2": Fraction(1, 2)}
seq = generate_sequence(odd, half, 4)
print("\nodd sector, eps2 = 1/2")
for m, p in enumerate(seq.entries):
    print(f"  P_{m}(s) = {p}")

# degrees jump by two, so Favard fails right away
rep = favard_check(odd, 10, half)
print("\nFavard:", "pass" if rep.passed else "fail", sorted(rep.codes()))
print("first violation:", rep.first_violation())

# no moment functional in a rational search grid makes the Gram matrix diagonal
probe = probe_orthogonality(seq, 5)
print(f"\n{probe.tested} functionals tried, {probe.diagonal_hits} orthogonalize the family")
