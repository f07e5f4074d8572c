"""Real-measure and risk-neutral densities: the non-equilibrium tilt and the Esscher tilt."""

from nes.market import MarketEnv
from nes.nesdist import real_density, risk_neutral_density, solve_xi_prime_detail, tilt_b
from nes.tables import Q_DIV, R_F, ROWS

market = MarketEnv(1.0, R_F, Q_DIV)
p = ROWS["1Y_call"].params()
print("1Y call parameters, crisis threshold y* = -0.3")
for y0 in (-0.2, 0.0, 0.1):
    b = tilt_b(p, y0, p.T, y_star=-0.3)
    d = real_density(p, y0, b=b)
    print(f"  y0 = {y0:+.1f}: b_T = {b:+.4f}, real-measure mean rate {d.mean_rate:+.5f}")
sol = solve_xi_prime_detail(p, market)
rn = risk_neutral_density(p, market)
print(f"\nxi' = {sol.xi_prime:.6f} after {sol.iterations} Newton steps, residual {sol.residual:.1e}")
print(f"risk-neutral mean rate {rn.mean_rate:+.10f}, target r_f - q - h^2/2 = {R_F - Q_DIV - p.h ** 2 / 2:+.10f}")
print(f"forward discrepancy E[e^y] - e^((r-q)T) = {rn.forward_discrepancy(market):+.2e}")
