"""Monte Carlo evaluation of instantaneous ZF rates and summary statistics."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, SetupGeometry, los_components, realization_rng, sample_realization
from .config import SystemConfig
from .statistics import Solution, compute_statistics, rate_lower_bound

log = logging.getLogger(__name__)

COND_MAX = 1e12
MAX_EXCLUDED_FRACTION = 0.01


class IllConditionedRealization(ArithmeticError):
    pass


def cascaded_channel(realization: ChannelRealization, v, M: int) -> np.ndarray:
    """H = D_M + G_M diag(conj(v)) F using the first M antennas.

    The optimizer's ``v`` enters the statistical quadratic forms as
    ``v^H B v``; the physical reflection matrix matching those forms is
    ``diag(conj(v))`` under ``G_LoS = a_M a_N^H``.
    """
    D = realization.D[:M]
    G = realization.G[:M]
    return D + (G * np.conj(v)[None, :]) @ realization.F


def instantaneous_rates(realization: ChannelRealization, v, p, M: int, config: SystemConfig) -> np.ndarray:
    if M <= config.K:
        raise ValueError(f"M={M} must exceed K={config.K}")
    H = cascaded_channel(realization, v, M)
    gram = H.conj().T @ H
    if np.linalg.cond(gram) > COND_MAX:
        raise IllConditionedRealization("H^H H is ill-conditioned")
    diag = np.real(np.diag(np.linalg.inv(gram)))
    return np.log2(1.0 + np.asarray(p, dtype=float) / (config.sigma2 * diag))


@dataclass
class LowerBoundReport:
    mean: np.ndarray
    stderr: np.ndarray
    bound: np.ndarray
    excluded: int
    T: int

    @property
    def gap(self) -> np.ndarray:
        return self.mean - self.bound

    @property
    def valid(self) -> np.ndarray:
        return self.mean >= self.bound - 3.0 * self.stderr


def sample_rates(geometry: SetupGeometry, solution: Solution, config: SystemConfig, T: int, setup_index: int = 0):
    """Instantaneous rates over ``T`` realizations; returns ``(rates[T', K], excluded)``."""
    if T <= 0:
        raise ValueError("T must be positive")
    los = los_components(geometry, config)
    out, excluded = [], 0
    for t in range(T):
        real = sample_realization(geometry, config, realization_rng(config.seed, setup_index, t), los=los)
        try:
            out.append(instantaneous_rates(real, solution.v, solution.p, solution.M, config))
        except IllConditionedRealization:
            excluded += 1
    if excluded > MAX_EXCLUDED_FRACTION * T:
        log.warning("%d of %d realizations excluded as ill-conditioned", excluded, T)
    return np.array(out), excluded


def validate_lower_bound(
    geometry: SetupGeometry, solution: Solution, config: SystemConfig, T: int,
    setup_index: int = 0, stats=None,
) -> LowerBoundReport:
    rates, excluded = sample_rates(geometry, solution, config, T, setup_index)
    stats = stats if stats is not None else compute_statistics(geometry, config)
    bound = rate_lower_bound(solution.p, solution.M, solution.v, stats, config)
    n = rates.shape[0]
    mean = rates.mean(axis=0)
    stderr = rates.std(axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.full(config.K, np.inf)
    return LowerBoundReport(mean=mean, stderr=stderr, bound=bound, excluded=excluded, T=T)


def ccdf(samples) -> tuple[np.ndarray, np.ndarray]:
    """Empirical P(X >= x) at each distinct sample value, ascending in x."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    if x.size == 0:
        raise ValueError("ccdf of an empty sample")
    values, first = np.unique(x, return_index=True)
    return values, 1.0 - first / x.size


def power_utilization(solutions, config: SystemConfig) -> float:
    return float(np.mean([np.sum(s.p) / config.P_TX for s in solutions]))
