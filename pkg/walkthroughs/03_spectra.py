"""
Checking the closed-form energies numerically
=============================================

Finite differences on the line (tridiagonal, Sturm bisection) and on the
doubled circle of the periodic partner (cyclic, Jacobi).
Pass a file name to also write the line eigenvectors as CSV.
"""
import sys
import time

import numpy as np

from qeslab.models import KinkParams, kink_potential, periodic_potential, periodic_qes_states, reconstruct_wavefunction
from qeslab.numerics import Grid, pointwise_residual, solve, solve_richardson

p = KinkParams(mu=1.0, eps2="1/2")

t0 = time.perf_counter()
coarse, fine, ext = solve_richardson(lambda x: kink_potential(x, p), Grid(-25.0, 25.0, 2001), 5, "kink",
                                     vectors=True)
print(f"line problem ({time.perf_counter() - t0:.1f} s)")
for j, (a, b, c) in enumerate(zip(coarse.eigenvalues, fine.eigenvalues, ext.eigenvalues)):
    print(f"  E_{j}: {a:.8f} {b:.8f} -> {c:.10f}   nodes {fine.nodes(j)}")

# the periodic run is O(N^3); 256 points is plenty for a look
t0 = time.perf_counter()
sp = solve(lambda th: periodic_potential(th, p), Grid(0.0, 4 * np.pi, 256, "periodic"), 6, "periodic")
print(f"\nperiodic problem on [0, 4 pi) ({time.perf_counter() - t0:.1f} s)")
print("  ", np.round(sp.eigenvalues, 5))

# the closed forms satisfy the equation pointwise
g = Grid(0.0, 4 * np.pi, 20001)
for st in periodic_qes_states("1/2"):
    r = pointwise_residual(reconstruct_wavefunction(st, p), float(st.energy()), lambda th: periodic_potential(th, p), g)
    print(f"  {st.label}: E = {st.energy()}, residual {r:.1e}")

if len(sys.argv) > 1:
    with open(sys.argv[1], "w") as fh:
        fh.write(fine.vectors_csv())
    print("eigenvectors written to", sys.argv[1])
