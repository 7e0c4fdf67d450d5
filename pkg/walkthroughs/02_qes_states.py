"""
Where the series terminates
===========================

A polynomial f exists when P_{M+1}(s) and the trailing coefficient vanish
together. Scan both parity sectors for several eps2 and rebuild the states.
"""
from fractions import Fraction

import numpy as np

from qeslab.models import kink_qes_states, kink_sectors, kink_transform, reconstruct_wavefunction, count_nodes
from qeslab.recurrences import energy_from_s, truncation_scan

even, odd = kink_sectors()
for eps2 in ("1/3", "1/2", "1", "2"):
    e = Fraction(eps2)
    hits = [("even", M, s) for M, s in truncation_scan(even, {"eps2": e}, 10).qes_points()]
    hits += [("odd", M, s) for M, s in truncation_scan(odd, {"eps2": e}, 10).qes_points()]
    print(f"eps2 = {eps2:>3}:", ", ".join(f"{sec} M={M} s={s} E/mu^2={energy_from_s(s)}" for sec, M, s in hits))

# at eps2 = 1/2 both levels are known in closed form
x = np.linspace(-10, 10, 2001)
y, t = kink_transform(x)
for st in kink_qes_states("1/2"):
    psi = reconstruct_wavefunction(st)
    print(f"\n{st.label}: s = {st.s}, E = {st.energy()}, f(t) = {st.series}")
    print("   exact residual:", st.residual())
    print("   nodes on the line:", count_nodes(psi(x)))
