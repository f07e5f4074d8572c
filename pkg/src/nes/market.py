"""Market inputs shared by the density, pricing and calibration layers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class MarketEnv:
    spot: float
    r_f: float
    q_div: float = 0.0

    def __post_init__(self):
        for name in ("spot", "r_f", "q_div"):
            val = float(getattr(self, name))
            if not np.isfinite(val):
                raise InputError(f"{name} must be finite")
            object.__setattr__(self, name, val)
        if self.spot <= 0:
            raise InputError(f"spot must be positive, got {self.spot!r}")

    def forward(self, T: float) -> float:
        return self.spot * np.exp((self.r_f - self.q_div) * T)


@dataclass(frozen=True)
class OptionQuote:
    strike: float
    expiry_T: float
    kind: str
    mid: float
    implied_vol: float | None = None

    def __post_init__(self):
        if self.kind not in ("call", "put"):
            raise InputError(f"option kind must be 'call' or 'put', got {self.kind!r}")
        for name in ("strike", "expiry_T", "mid"):
            val = float(getattr(self, name))
            if not np.isfinite(val):
                raise InputError(f"{name} must be finite")
            object.__setattr__(self, name, val)
        if self.strike <= 0 or self.expiry_T <= 0:
            raise InputError("strike and expiry_T must be positive")
        if self.mid < 0:
            raise InputError("mid price must be non-negative")
        if self.implied_vol is not None:
            iv = float(self.implied_vol)
            if not (np.isfinite(iv) and iv > 0):
                raise InputError("implied_vol must be positive when given")
            object.__setattr__(self, "implied_vol", iv)
