"""Euler-Maruyama paths against the stationary density, a first-passage race and the cubic instanton."""

import numpy as np
from scipy.stats import kstest

from nes.dynsim import CubicPotential, SimConfig, empirical_first_passage, instanton_closed_form, instanton_ode, simulate_paths
from nes.passage import escape_rate
from nes.potential import NesParams, PotentialFn, stationary_density

p = NesParams(0.4, -0.4, 0.2, 0.3, 0.3, 1.0)
sim = simulate_paths(p, SimConfig(dt=2e-3, n_paths=20_000, horizon=4.0, seed=3))
ks = kstest(sim.terminal, stationary_density(p).mixture.cdf).statistic
print(f"20k paths after t = 4: KS distance to Psi0^2 = {ks:.4f}")

q = NesParams(0.45, -0.45, 0.25, 0.15, 0.9, 1.0)
pot = PotentialFn(q)
fp = empirical_first_passage(q, SimConfig(dt=2e-3, n_paths=4000, horizon=1.0, seed=5, y0=pot.local_min), pot.global_min)
lam = escape_rate(q, pot.local_min)
print(f"escape from the metastable well: simulated rate {1 / fp.mean_passage_time:.4f}, quadrature {lam:.4f}")

cp = CubicPotential(theta=1.0, kappa=0.0, g=1.0)
t = np.linspace(0, 6, 7)
sol = instanton_ode(cp, instanton_closed_form(cp, 0.0), (0.0, 6.0), t_eval=t)
print("\ninstanton on V = -y + y^3/3: closed form vs ODE")
for ti, yo in zip(t, sol.y[0]):
    print(f"  t = {ti:3.0f}  {instanton_closed_form(cp, ti):+.10f}  {yo:+.10f}")
