"""Round trip: price quotes from known parameters, recover them, read off the implied potential."""

import numpy as np

from nes.calibrate import CalibConfig, calibrate, implied_potential_report, synthetic_quotes
from nes.market import MarketEnv
from nes.tables import Q_DIV, R_F, ROWS

market = MarketEnv(1.0, R_F, Q_DIV)
row = ROWS["6M_call"]
quotes = synthetic_quotes(row.params(), market, row.T, "call", np.linspace(0.02, 0.5, 10))
print(f"{len(quotes)} call quotes, strikes {quotes[0].strike:.3f} .. {quotes[-1].strike:.3f}")
res = calibrate(quotes, market, CalibConfig(seed=1))
fit = res.params
print(f"{'':8}{'mu':>8}{'sigma1':>8}{'sigma2':>8}{'a':>8}{'h':>8}")
print(f"{'true':8}{row.mu:8.4f}{row.sigma1:8.4f}{row.sigma2:8.4f}{row.a:8.4f}{row.h:8.4f}")
print(f"{'fitted':8}{fit.mu1:8.4f}{fit.sigma1:8.4f}{fit.sigma2:8.4f}{fit.a:8.4f}{fit.h:8.4f}")
print(f"MAPE {res.mape:.2e}, converged {res.converged}")
for y0 in (-0.3, 0.0, 0.2):
    rep = implied_potential_report(res, market, y0=y0)
    print(f"current return {y0:+.1f}: {rep.shape}, market state {rep.state}")
