"""
The two-body angular and radial problems
========================================

The angular Heun equation gives a three-term recurrence in beta that fails
Favard because its leading coefficient carries no beta at all. With b = c the
middle term drops out and the series terminates at explicit beta values.
"""
from fractions import Fraction

from qeslab.models import BhaduriParams, bhaduri_radial_problem, bhaduri_recurrence
from qeslab.numerics import Grid, solve_richardson
from qeslab.recurrences import favard_check, truncation_scan

rec = bhaduri_recurrence()
for c in rec.factored():
    print("   ", c)

p = BhaduriParams(l=2, mq=1, g1=2)
print(f"\nl=2, mq=1, g1=2 -> a={p.a}, b={p.b}, c={p.c}")
rep = favard_check(bhaduri_recurrence(p), 10)
print("Favard:", sorted(rep.codes()))

# b = c: only every other P_n is coupled
same = {"a": Fraction(1), "b": Fraction(1, 2), "c": Fraction(1, 2)}
res = truncation_scan(bhaduri_recurrence(), same, 6, (0, 30))
print("\nb = c truncation points (M, beta):", ", ".join(f"({M}, {b})" for M, b in res.qes_points()))

for beta in (1, 2):
    rp = bhaduri_radial_problem(beta)
    _, _, ext = solve_richardson(rp.potential, Grid(0.0, rp.R_max, 2001), 3, "radial")
    print(f"\nradial beta={beta}: E =", [round(float(e), 8) for e in rp.energy(ext.eigenvalues)],
          "expected", [rp.expected(n) for n in range(3)])
