"""Partner ground state, first-order energy splitting and the first excited state."""

import numpy as np

from nes.passage import escape_rate
from nes.potential import PotentialFn
from nes.susy import first_excited_state, lpt_first_order, partner_ground_state
from nes.tables import excited_state_example

p = excited_state_example()
pg = partner_ground_state(p)
lpt = lpt_first_order(pg)
ex = first_excited_state(pg, lpt)
print(f"half masses I+ = {pg.I_plus:.6f}, I- = {pg.I_minus:.6f}")
print(f"coupling alpha = {pg.alpha:.4e} (printed form gives {pg.alpha_printed:.4e})")
print(f"E1_bar = {lpt.E1_bar:.6f} exact, {lpt.gaussian_E1_bar():.6f} from the Gaussian shortcut")
pot = PotentialFn(p)
print(f"rate E1/h^2 = {lpt.rate:.6e}; passage quadrature gives {escape_rate(p, pot.local_min):.6e}")
print(f"<Psi0, Psi1-> = {ex.overlap:.1e}\n")
print(f"{'y':>6} {'Psi0':>9} {'Psi+':>9} {'Psi1-':>9} {'G1':>9}")
for y in np.linspace(-0.8, 0.8, 9):
    print(f"{y:6.2f} {pg.ground.psi(y):9.4f} {pg.psi(y):9.4f} {ex(y):9.4f} {lpt.G1(y):9.4f}")
print("\nPsi1- changes sign once, between the wells: the slow mode moves mass across the barrier.")
