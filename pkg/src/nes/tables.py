"""Reference parameter sets: calibrated rows, example potentials and maturities.

Horizons are the calendar-day spans between pricing and expiry dates
divided by 365.
"""

from __future__ import annotations

from typing import NamedTuple

from .potential import NesParams

T_1M = 28 / 365  # 2021-07-12 -> 2021-08-09
T_1Y = 319 / 365  # 2020-11-06 -> 2021-09-21
T_6M = 186 / 365  # 2020-03-16 -> 2020-09-18

# market environment used with the calibrated rows
R_F = 0.0005
Q_DIV = 0.013


class CalibratedRow(NamedTuple):
    key: str
    kind: str
    mu: float
    sigma1: float
    sigma2: float
    a: float
    h: float
    mape: float
    T: float

    def params(self) -> NesParams:
        return NesParams.from_mu(self.mu, self.sigma1, self.sigma2, self.a, self.h, T=self.T)


CALIBRATED_ROWS = (
    CalibratedRow("1M_put", "put", 0.092, 0.09, 0.461, 0.505, 0.159, 0.035, T_1M),
    CalibratedRow("1M_call", "call", 0.191, 0.07, 0.263, 0.566, 0.162, 0.002, T_1M),
    CalibratedRow("1Y_put", "put", 0.092, 0.251, 0.813, 0.405, 0.165, 0.055, T_1Y),
    CalibratedRow("1Y_call", "call", 0.106, 0.123, 0.505, 0.565, 0.217, 0.019, T_1Y),
    CalibratedRow("6M_put", "put", 0.225, 0.213, 1.120, 0.763, 0.632, 0.01, T_6M),
    CalibratedRow("6M_call", "call", 0.503, 0.118, 0.803, 0.662, 0.824, 0.007, T_6M),
)

ROWS = {row.key: row for row in CALIBRATED_ROWS}


def excited_state_example() -> NesParams:
    """Asymmetric double well used for the partner ground state and first excited state plots."""
    return NesParams(mu1=0.4, mu2=-0.4, sigma1=0.2, sigma2=0.3, a=0.3, h=0.05)


def escape_rate_example() -> NesParams:
    """Single well with a crisis threshold, used for the rate-versus-start curve."""
    return NesParams(mu1=0.2, mu2=-0.2, sigma1=0.2, sigma2=0.2, a=0.2, h=0.1)


def potential_grid(sigma2_values=(0.1, 0.2, 0.3)) -> dict:
    """Nine potential shapes: a in {0.2, 0.5, 0.8} by sigma2 columns, sigma1 = 0.2, mu = +-0.4."""
    return {
        (a, s2): NesParams(mu1=0.4, mu2=-0.4, sigma1=0.2, sigma2=s2, a=a, h=0.1)
        for a in (0.2, 0.5, 0.8)
        for s2 in sigma2_values
    }
