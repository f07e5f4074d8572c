import numpy as np
import pytest

from nes.market import MarketEnv
from nes.potential import NesParams
from nes.tables import CALIBRATED_ROWS, Q_DIV, R_F, excited_state_example


@pytest.fixture(scope="session")
def table_params():
    return {row.key: row.params() for row in CALIBRATED_ROWS}


@pytest.fixture(scope="session")
def table_market():
    return MarketEnv(1.0, R_F, Q_DIV)


@pytest.fixture(scope="session")
def asym_well():
    from nes.susy import first_excited_state, lpt_first_order, partner_ground_state

    pg = partner_ground_state(excited_state_example())
    lpt = lpt_first_order(pg)
    return pg, lpt, first_excited_state(pg, lpt)


# high-barrier double well (Delta V / h^2 ~ 3) used for cross-method rate checks
HIGH_BARRIER = NesParams(0.6, -0.6, 0.25, 0.15, 0.9, 1.0)


def rel(a, b):
    return np.abs(np.asarray(a) - np.asarray(b)) / np.abs(np.asarray(b))


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
