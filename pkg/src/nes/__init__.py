"""Non-equilibrium skew (NES) model: Gaussian-mixture Langevin returns, escape rates,
SUSY corrections, real and risk-neutral densities, and option pricing."""

__version__ = "0.1.0"

from .errors import ConvergenceError, InputError, NesError
from .gaussmix import GaussianMixture
from .market import MarketEnv, OptionQuote
from .potential import NesParams, PotentialFn, ground_state, stationary_density

__all__ = [
    "__version__",
    "ConvergenceError",
    "InputError",
    "NesError",
    "GaussianMixture",
    "MarketEnv",
    "OptionQuote",
    "NesParams",
    "PotentialFn",
    "ground_state",
    "stationary_density",
]
