"""Seeded disturbance generators: i.i.d. truncated Poisson and a two-regime HMM.

All randomness comes from numpy's PCG64 bit generator seeded with the given
64-bit integer; uniforms are ``Generator.random`` doubles (53-bit).  Poisson
draws use inversion: the sample is the first ``n`` with ``u < CDF(n)`` on the
clamped pmf, where all mass above ``w_max`` sits on ``w_max``.  Sequences are
therefore reproducible on any platform with the same numpy bit generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    if not 0 <= int(seed) < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed!r}")
    return np.random.Generator(np.random.PCG64(int(seed)))


def truncated_poisson_pmf(lam: float, w_max: int) -> np.ndarray:
    """Pmf on ``0..w_max`` with the tail mass above ``w_max`` collapsed onto ``w_max``."""
    pmf = np.zeros(w_max + 1)
    p = math.exp(-lam)
    for n in range(w_max):
        pmf[n] = p
        p = p * lam / (n + 1)
    pmf[w_max] = max(0.0, 1.0 - math.fsum(pmf[:w_max]))
    return pmf


def _inverse_cdf(lam: float, w_max: int, u: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(truncated_poisson_pmf(lam, w_max))
    cdf[-1] = np.inf  # rounding must never push a draw outside the alphabet
    return np.searchsorted(cdf, u, side="right").astype(np.int64)


@dataclass(frozen=True)
class PoissonModel:
    lam: float
    w_max: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lam) and self.lam >= 0):
            raise ValueError(f"rate must be finite and >= 0, got {self.lam!r}")
        if self.w_max < 0:
            raise ValueError(f"w_max must be >= 0, got {self.w_max}")

    def pmf(self) -> np.ndarray:
        return truncated_poisson_pmf(self.lam, self.w_max)

    def mean(self) -> float:
        return float(np.arange(self.w_max + 1) @ self.pmf())


@dataclass(frozen=True)
class HmmModel:
    lam_low: float
    lam_high: float
    w_max: int
    persistence: float = 0.9
    initial_regime: Literal["low", "high"] = "low"

    def __post_init__(self) -> None:
        for lam in (self.lam_low, self.lam_high):
            if not (math.isfinite(lam) and lam >= 0):
                raise ValueError(f"rates must be finite and >= 0, got {lam!r}")
        if not 0.0 <= self.persistence <= 1.0:
            raise ValueError(f"persistence must lie in [0, 1], got {self.persistence!r}")
        if self.initial_regime not in ("low", "high"):
            raise ValueError(f"initial_regime must be 'low' or 'high', got {self.initial_regime!r}")
        if self.w_max < 0:
            raise ValueError(f"w_max must be >= 0, got {self.w_max}")


def sample_iid(model: PoissonModel, n: int, seed: int) -> np.ndarray:
    """``n`` clamped Poisson draws."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    u = make_rng(seed).random(n)
    return _inverse_cdf(model.lam, model.w_max, u)


def sample_hmm(model: HmmModel, n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Demands and regimes (0 = low, 1 = high) from the two-regime chain.

    Draw order: ``n`` uniforms for the regime switches (the first one is unused
    because the initial regime is fixed), then ``n`` uniforms for the emissions.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    rng = make_rng(seed)
    u_switch = rng.random(n)
    u_emit = rng.random(n)
    switch = u_switch >= model.persistence
    if n:
        switch[0] = False
    start = 0 if model.initial_regime == "low" else 1
    regimes = (start + np.cumsum(switch)) % 2
    demands = np.where(
        regimes == 0,
        _inverse_cdf(model.lam_low, model.w_max, u_emit),
        _inverse_cdf(model.lam_high, model.w_max, u_emit),
    )
    return demands.astype(np.int64), regimes.astype(np.int64)


def sample(model: PoissonModel | HmmModel, n: int, seed: int) -> np.ndarray:
    if isinstance(model, PoissonModel):
        return sample_iid(model, n, seed)
    return sample_hmm(model, n, seed)[0]
