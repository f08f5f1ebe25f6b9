"""Gradient-ascent phase optimization with Armijo backtracking (benchmark)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import SystemConfig
from .statistics import ChannelStatistics

LN2 = math.log(2.0)


def _forms(theta, p, M, stats, config):
    v = np.exp(1j * theta)
    Bv = stats.B @ v
    Av = stats.A @ v  # (K, N)
    qB = float(np.real(np.vdot(v, Bv)))
    qA = np.real(Av @ v.conj())
    a = np.asarray(p, dtype=float) * (M - config.K)
    d = config.sigma2 * (config.K1 + 1.0)
    return v, Bv, Av, a * qB, d * qA, a, d


def objective(theta, p, M, stats, config) -> float:
    _, _, _, S, D, _, _ = _forms(theta, p, M, stats, config)
    return float(np.sum(np.log2(1.0 + S / D)))


def gradient(theta, p, M, stats, config) -> np.ndarray:
    """d/dtheta of the sum of lower-bound rates, with v = exp(1j*theta).

    Uses d(v^H X v)/dtheta_n = 2 Im(conj(v_n) (X v)_n) for Hermitian X.
    """
    v, Bv, Av, S, D, a, d = _forms(theta, p, M, stats, config)
    dB = 2.0 * np.imag(v.conj() * Bv)  # (N,)
    dA = 2.0 * np.imag(v.conj()[None, :] * Av)  # (K, N)
    dS = a[:, None] * dB[None, :]
    dD = d * dA
    g = (dS + dD) / (S + D)[:, None] - dD / D[:, None]
    return g.sum(axis=0) / LN2


@dataclass
class GradientResult:
    v: np.ndarray
    converged: bool
    iterations: int
    history: list = field(default_factory=list)


def gradient_ascent_phases(
    p, M, v_init, stats: ChannelStatistics, config: SystemConfig,
    step0: float = 1.0, shrink: float = 0.5, slope: float = 1e-4, max_iter: int = 1000,
    tol: float | None = None,
) -> GradientResult:
    """Ascend the sum rate in the phases; stop when |f(t+1) - f(t)| < tol."""
    tol = config.eps_fp if tol is None else tol
    theta = np.angle(v_init)
    f = objective(theta, p, M, stats, config)
    history = [f]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        g = gradient(theta, p, M, stats, config)
        gg = float(g @ g)
        if gg == 0.0:
            converged = True
            break
        t = step0
        while True:
            cand = theta + t * g
            f_new = objective(cand, p, M, stats, config)
            if f_new >= f + slope * t * gg or t < 1e-12:
                break
            t *= shrink
        if f_new < f:
            converged = True
            break
        theta, f_prev, f = cand, f, f_new
        history.append(f)
        if abs(f - f_prev) < tol:
            converged = True
            break
    return GradientResult(v=np.exp(1j * theta), converged=converged, iterations=it, history=history)
