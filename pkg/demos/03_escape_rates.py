"""Mean passage times: exact quadrature, the saddle-point formula and the classical Kramers limit."""

import numpy as np

from nes.passage import escape_rate, passage_time_quadrature, passage_time_saddle
from nes.potential import NesParams, PotentialFn
from nes.tables import escape_rate_example

p = escape_rate_example()
print("Single well with a crisis threshold at y* = -0.4 (h = 0.1):")
for y0 in np.linspace(-0.3, 0.5, 5):
    print(f"  y0 = {y0:+.2f}   lambda / h^2 = {escape_rate(p, y0, -0.4) / p.h ** 2:.5f}")
print("Starting further from the threshold makes a crash less likely.\n")

p = NesParams(0.5, -0.5, 0.12, 0.15, 0.7, 1.0)
pot = PotentialFn(p)
tau = passage_time_quadrature(p, pot.local_min, pot.global_min).mean_passage_time
print(f"Double well, barrier dV/h^2 = {pot.barrier_height / p.h ** 2:.2f}")
print(f"  quadrature                        {tau:12.2f}")
for norm in ("local", "exact"):
    s = passage_time_saddle(p, normalization=norm)
    print(f"  saddle point ({norm:5} normalization) {s.mean_passage_time:12.2f}   ratio {s.mean_passage_time / tau:.3f}")
print(f"  classical Kramers time            {s.kramers_time:12.2f}")
for h in (0.05, 0.1, 0.2):
    t = passage_time_quadrature(p.replace(h=h), pot.local_min, pot.global_min).mean_passage_time
    print(f"  h = {h:4}: tau * h^2 = {t * h * h:.10f}")
