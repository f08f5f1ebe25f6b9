"""Active-antenna count and power allocation for fixed RIS phases.

Dinkelbach iterations on the EE level combined with closed-form KKT
solutions of the Lagrangian in (M, rates) and projected subgradient
updates of the QoS multipliers ``mu`` and the power multiplier ``vartheta``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import SystemConfig
from .statistics import (
    ChannelStatistics,
    Solution,
    channel_ratio,
    consumed_power,
    energy_efficiency,
)

LN2 = math.log(2.0)
POWER_SLACK = 1e-6


class InfeasibleError(RuntimeError):
    """No iterate met the power budget and QoS floors; ``solution`` is best effort."""

    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution


@dataclass
class DualState:
    mu: np.ndarray
    vartheta: float
    eta_ee: float
    iter: int = 1

    def __post_init__(self):
        self.mu = np.asarray(self.mu, dtype=float)
        if np.any(self.mu < 0) or self.vartheta < 0:
            raise ValueError("multipliers must be non-negative")


def implied_power(rates, M, q, config: SystemConfig):
    """Power that yields ``rates`` at antenna count ``M``; ``q`` is :func:`channel_ratio`."""
    if M <= config.K:
        raise ValueError(f"M={M} must exceed K={config.K}")
    return (np.exp2(rates) - 1.0) * q / (M - config.K)


def stationary_M(dual: DualState, q, config: SystemConfig) -> float:
    """Unrounded, unclamped root of the antenna stationarity quadratic."""
    if not dual.eta_ee > 0:
        raise ValueError("eta_ee must be positive")
    a = dual.eta_ee * config.P_BS * LN2
    b = float(np.sum(dual.mu + 1.0))
    c = (dual.eta_ee * config.rho + dual.vartheta) * LN2 * float(np.sum(q))
    disc = max(b * b - 4.0 * a * c, 0.0)
    return (b + math.sqrt(disc)) / (2.0 * a) + config.K


def optimal_M(dual: DualState, q, config: SystemConfig) -> int:
    M = int(round(stationary_M(dual, q, config)))
    return min(max(M, config.K + 1), config.M_max)


def optimal_p(dual: DualState, M, q, config: SystemConfig) -> np.ndarray:
    if M <= config.K:
        raise ValueError(f"M={M} must exceed K={config.K}")
    level = dual.eta_ee * config.rho + dual.vartheta
    if not level > 0:
        raise ValueError("eta_ee * rho + vartheta must be positive")
    return np.maximum((1.0 + dual.mu) / (LN2 * level) - q / (M - config.K), 0.0)


def update_multipliers(dual: DualState, rates, p, config: SystemConfig) -> DualState:
    ell = dual.iter
    mu = np.maximum(dual.mu - config.mu_step * (np.asarray(rates) - config.R_min), 0.0)
    vartheta = max(dual.vartheta - config.vartheta_step * math.sqrt(ell) * (config.P_TX - float(np.sum(p))), 0.0)
    return DualState(mu=mu, vartheta=vartheta, eta_ee=dual.eta_ee, iter=ell + 1)


def lagrangian(M, rates, dual: DualState, q, config: SystemConfig) -> float:
    """Lagrangian of the Dinkelbach-transformed problem in (M, rates)."""
    p = implied_power(np.asarray(rates, dtype=float), M, q, config)
    obj = float(np.sum(rates)) - dual.eta_ee * consumed_power(p, M, config)
    qos = float(np.sum(dual.mu * (np.asarray(rates) - config.R_min)))
    return obj + qos + dual.vartheta * (config.P_TX - float(np.sum(p)))


def project_budget(p, config: SystemConfig) -> np.ndarray:
    """Scale ``p`` down onto the power budget if it exceeds it."""
    total = float(np.sum(p))
    if total > config.P_TX:
        return p * (config.P_TX / total)
    return p


def _rates(p, M, q, config):
    return np.log2(1.0 + p * (M - config.K) / q)


@dataclass
class PowerAntennaResult:
    M: int
    p: np.ndarray
    dual: DualState
    rates: np.ndarray
    ee: float
    power_feasible: bool
    qos_feasible: bool
    converged: bool
    iterations: int
    trace: list = field(default_factory=list)

    @property
    def qos_slack(self) -> np.ndarray:
        return self.rates


def _rank(power_ok, qos_ok, ee):
    return (power_ok and qos_ok, power_ok, ee)


def optimize_power_antennas(
    v,
    init: Solution,
    stats: ChannelStatistics,
    config: SystemConfig,
    optimize_M: bool = True,
) -> PowerAntennaResult:
    """Alternate EE-level, antenna, power and multiplier updates.

    The starting point ``init`` is itself a candidate, and the returned
    iterate is the best EE among those meeting the power budget (and QoS
    when any iterate does). ``optimize_M=False`` freezes ``M = init.M``.
    """
    q = channel_ratio(v, stats, config)
    M = int(init.M)
    p = np.asarray(init.p, dtype=float).copy()
    mu = np.zeros(config.K) if init.mu is None else np.asarray(init.mu, dtype=float)
    dual = DualState(mu=mu, vartheta=float(init.vartheta or 0.0), eta_ee=0.0)
    budget = config.P_TX * (1.0 + POWER_SLACK)

    def candidate(M, p, dual):
        p = project_budget(p, config)
        rates = _rates(p, M, q, config)
        ee = energy_efficiency(p, M, rates, config)
        power_ok = float(np.sum(p)) <= budget
        qos_ok = bool(np.all(rates >= config.R_min - 1e-9))
        return rates, ee, power_ok, qos_ok

    rates, ee, power_ok, qos_ok = candidate(M, p, dual)
    best = (M, p, dual, rates, ee, power_ok, qos_ok)
    trace = [ee]
    converged = False
    it = 0
    for it in range(1, config.max_iter_alg2 + 1):
        dual = DualState(mu=dual.mu, vartheta=dual.vartheta, eta_ee=max(ee, 1e-12), iter=it)
        if optimize_M:
            M = optimal_M(dual, q, config)
        p = optimal_p(dual, M, q, config)
        dual = update_multipliers(dual, _rates(p, M, q, config), p, config)
        # the subgradient iterates approach the budget from above; rank
        # their projections onto the budget instead
        rates, ee_new, power_ok, qos_ok = candidate(M, p, dual)
        trace.append(ee_new)
        if _rank(power_ok, qos_ok, ee_new) > _rank(*best[5:7], best[4]):
            best = (M, project_budget(p, config), dual, rates, ee_new, power_ok, qos_ok)
        small = abs(ee_new - ee) <= config.eps_outer * max(abs(ee_new), 1e-12)
        ee = ee_new
        if small:
            converged = True
            break

    M, p, dual, rates, ee, power_ok, qos_ok = best
    return PowerAntennaResult(
        M=M,
        p=p,
        dual=dual,
        rates=rates,
        ee=ee,
        power_feasible=power_ok,
        qos_feasible=qos_ok,
        converged=converged,
        iterations=it,
        trace=trace,
    )
