"""Statistical-CSI constants, the ergodic-rate lower bound and the EE objective."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .channel import SetupGeometry, los_components
from .config import SystemConfig

log = logging.getLogger(__name__)

LAMBDA_COND_MAX = 1e14


class ConditioningError(ArithmeticError):
    pass


class DegenerateStatisticsError(ArithmeticError):
    """A quadratic form that must be positive was not."""


def hermitize(X: np.ndarray) -> np.ndarray:
    return 0.5 * (X + np.conj(np.swapaxes(X, -1, -2)))


def quad_form(X: np.ndarray, v: np.ndarray):
    """Real part of ``v^H X v``; ``X`` may be a stack ``(..., N, N)``."""
    return np.real(np.einsum("n,...nm,m->...", v.conj(), X, v))


@dataclass(frozen=True)
class ChannelStatistics:
    Lambda: np.ndarray  # (K, K)
    B: np.ndarray  # (N, N)
    A: np.ndarray  # (K, N, N)
    s: np.ndarray  # (K, N), row k is s_k^H
    a_N: np.ndarray
    F: np.ndarray

    @property
    def K(self) -> int:
        return self.A.shape[0]

    @property
    def N(self) -> int:
        return self.B.shape[0]


def compute_statistics(geometry: SetupGeometry, config: SystemConfig) -> ChannelStatistics:
    _, a_N, _, F_los = los_components(geometry, config)
    F = F_los * np.sqrt(geometry.alpha_F)[None, :]
    K1, aG, N = config.K1, geometry.alpha_G, config.N

    Lam = aG * (F.conj().T @ F) + (K1 + 1.0) * np.diag(geometry.alpha_D)
    Lam = hermitize(Lam)
    cond = np.linalg.cond(Lam)
    if not np.isfinite(cond) or cond > LAMBDA_COND_MAX:
        raise ConditioningError(f"Lambda is ill-conditioned (cond={cond:.3g})")
    Lam_inv = hermitize(np.linalg.inv(Lam))

    # Lambda^{-1} F^H diag(a_N): row k is s_k^H
    S = Lam_inv @ (F.conj().T * a_N[None, :])
    B = np.eye(N, dtype=complex) / N
    if K1 > 0:
        B = B + aG * K1 * hermitize((a_N.conj()[:, None] * F) @ S)
    B = hermitize(B)

    d = np.real(np.diag(Lam_inv))
    A = d[:, None, None] * B[None, :, :]
    if K1 > 0:
        A = A - K1 * aG * np.einsum("kn,km->knm", S.conj(), S)
    A = hermitize(A)
    return ChannelStatistics(Lambda=Lam, B=B, A=A, s=S, a_N=a_N, F=F)


@dataclass
class Solution:
    M: int
    p: np.ndarray
    v: np.ndarray
    mu: np.ndarray
    vartheta: float
    rates: np.ndarray
    ee: float
    power_feasible: bool = True
    qos_feasible: bool = True
    converged: bool = True
    history: list = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return self.power_feasible and self.qos_feasible


def rate_terms(v, stats: ChannelStatistics, config: SystemConfig):
    """Return ``(vBv, vA_kv)`` checked for positivity."""
    qB = float(quad_form(stats.B, v))
    qA = quad_form(stats.A, v)
    if qB <= 0 or np.any(qA <= 0):
        log.warning("non-positive quadratic form: vBv=%g min vAv=%g", qB, qA.min())
        raise DegenerateStatisticsError("v^H A_k v or v^H B v is not positive")
    return qB, qA


def channel_ratio(v, stats: ChannelStatistics, config: SystemConfig) -> np.ndarray:
    """q_k = sigma^2 (K1+1) v^H A_k v / v^H B v, the per-UE inverse channel gain."""
    qB, qA = rate_terms(v, stats, config)
    return config.sigma2 * (config.K1 + 1.0) * qA / qB


def rate_lower_bound(p, M, v, stats: ChannelStatistics, config: SystemConfig) -> np.ndarray:
    if M <= config.K:
        raise ValueError(f"M={M} must exceed K={config.K}")
    q = channel_ratio(v, stats, config)
    return np.log2(1.0 + np.asarray(p, dtype=float) * (M - config.K) / q)


def consumed_power(p, M, config: SystemConfig) -> float:
    return config.rho * float(np.sum(p)) + config.P_FIX + M * config.P_BS + config.N * config.P_RIS


def energy_efficiency(p, M, rates, config: SystemConfig) -> float:
    return float(np.sum(rates)) / consumed_power(p, M, config)
