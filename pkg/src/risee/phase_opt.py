"""RIS phase-shift optimization for fixed power and antenna count.

Three nested loops: the log-dual auxiliaries ``gamma`` (outer), the
sum-of-ratios weights ``u`` and ``beta`` (middle), and a unit-modulus
quadratic program ``max v^H C v`` (inner) solved either by closed-form
coordinate updates or by an eigenvalue-shift MM step.

Phase vectors are stored as ``v[n] = exp(1j * theta[n])``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .config import SystemConfig
from .statistics import ChannelStatistics, DegenerateStatisticsError, hermitize, quad_form

LN2 = math.log(2.0)


def signal_noise_terms(v, p, M, stats: ChannelStatistics, config: SystemConfig):
    """Return ``(D, S)`` with D_k = sigma^2 (K1+1) v^H A_k v and S_k = p_k (M-K) v^H B v."""
    if M <= config.K:
        raise ValueError(f"M={M} must exceed K={config.K}")
    D = config.sigma2 * (config.K1 + 1.0) * quad_form(stats.A, v)
    S = np.asarray(p, dtype=float) * (M - config.K) * quad_form(stats.B, v)
    if np.any(D <= 0):
        raise DegenerateStatisticsError("v^H A_k v is not positive")
    return D, S


def update_gamma(v, p, M, stats, config):
    D, S = signal_noise_terms(v, p, M, stats, config)
    return np.maximum((D + S) / (LN2 * D) - 1.0, 0.0)


def compute_u(v, p, M, stats, config):
    D, S = signal_noise_terms(v, p, M, stats, config)
    den = D + S
    if np.any(den <= 0):
        raise DegenerateStatisticsError("ratio denominator is not positive")
    return 1.0 / den


def update_beta(v, p, M, gamma, stats, config):
    D, S = signal_noise_terms(v, p, M, stats, config)
    return (1.0 + gamma) * S / (D + S)


def build_C(gamma, beta, u, p, M, stats, config):
    K = config.K
    a = np.asarray(p, dtype=float) * (M - K)
    noise = config.sigma2 * (config.K1 + 1.0)
    wB = np.sum(u * ((1.0 + gamma) * a - beta * a))
    wA = -u * beta * noise
    C = wB * stats.B + np.einsum("k,knm->nm", wA, stats.A)
    return hermitize(C)


def ldt_objective(v, gamma, p, M, stats, config) -> float:
    """Log-dual-transformed sum rate, maximized jointly over (v, gamma)."""
    D, S = signal_noise_terms(v, p, M, stats, config)
    return float(np.sum(np.log2(1.0 + gamma) - gamma + (1.0 + gamma) * S / (D + S)))


def ratio_objective(v, gamma, p, M, stats, config) -> float:
    D, S = signal_noise_terms(v, p, M, stats, config)
    return float(np.sum((1.0 + gamma) * S / (D + S)))


def sum_rate(v, p, M, stats, config) -> float:
    D, S = signal_noise_terms(v, p, M, stats, config)
    return float(np.sum(np.log2(1.0 + S / D)))


def phase_step_analytic(n: int, v: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Closed-form maximizer of ``v^H C v`` over the phase of entry ``n``.

    ``z = sum_{m != n} C[n, m] v[m]`` and the new entry is ``exp(1j*angle(z))``.
    A zero ``z`` leaves the entry unchanged.
    """
    v = np.array(v, dtype=complex)
    z = np.dot(C[n, :n], v[:n]) + np.dot(C[n, n + 1 :], v[n + 1 :])
    if z != 0:
        v[n] = z / abs(z)
    return v


@numba.njit(cache=True)
def _analytic_sweep(v, C):
    N = v.shape[0]
    for n in range(N):
        z = 0j
        for m in range(N):
            if m != n:
                z += C[n, m] * v[m]
        a = abs(z)
        if a > 0.0:
            v[n] = z / a
    return v


def analytic_sweep(v: np.ndarray, C: np.ndarray) -> np.ndarray:
    """One pass of :func:`phase_step_analytic` over n = 0..N-1."""
    return _analytic_sweep(np.array(v, dtype=np.complex128), np.ascontiguousarray(C, dtype=np.complex128))


def phase_step_sfp(v: np.ndarray, C: np.ndarray, lam_min: float | None = None) -> np.ndarray:
    """MM step ``v <- exp(1j*angle((C - lam_min I) v))``.

    Shifting by the smallest eigenvalue makes the matrix PSD, so the
    linearized surrogate minorizes ``v^H C v`` and each step cannot decrease it.
    """
    if lam_min is None:
        lam_min = float(np.linalg.eigvalsh(C)[0])
    w = C @ v - lam_min * v
    out = np.array(v, dtype=complex)
    mag = np.abs(w)
    nz = mag > 0
    out[nz] = w[nz] / mag[nz]
    return out


@dataclass
class PhaseResult:
    v: np.ndarray
    converged: bool
    outer_iterations: int
    history: list = field(default_factory=list)  # sum rate after each outer round, history[0] = initial
    inner_steps: int = 0


def _solve_quadratic(v, C, method, config) -> tuple[np.ndarray, int]:
    lam_min = float(np.linalg.eigvalsh(C)[0]) if method == "sfp" else None
    steps = 0
    for _ in range(config.max_iter_inner):
        if method == "analytic":
            v_new = analytic_sweep(v, C)
        else:
            v_new = phase_step_sfp(v, C, lam_min)
        steps += 1
        delta = np.linalg.norm(v_new - v)
        v = v_new
        if delta < config.eps_phase:
            break
    return v, steps


def optimize_phases(p, M, v_init, stats, config, method: str | None = None) -> PhaseResult:
    """Maximize the lower-bound sum rate over unit-modulus ``v``.

    Returns the best iterate seen; ``history`` holds the sum rate before the
    first and after every outer (gamma) round.
    """
    method = method or config.method
    if method not in ("analytic", "sfp"):
        raise ValueError(f"unknown phase method {method!r}")
    v = np.exp(1j * np.angle(v_init))
    best_v, best_f = v, sum_rate(v, p, M, stats, config)
    history = [best_f]
    if np.all(np.asarray(p) == 0):
        return PhaseResult(v=best_v, converged=True, outer_iterations=0, history=history)

    f15_prev = -np.inf
    converged = False
    inner_steps = 0
    t = 0
    for t in range(1, config.max_iter_outer + 1):
        gamma = update_gamma(v, p, M, stats, config)
        f17_prev = ratio_objective(v, gamma, p, M, stats, config)
        for _ in range(config.max_iter_mid):
            u = compute_u(v, p, M, stats, config)
            beta = update_beta(v, p, M, gamma, stats, config)
            C = build_C(gamma, beta, u, p, M, stats, config)
            v_new, steps = _solve_quadratic(v, C, method, config)
            inner_steps += steps
            f17 = ratio_objective(v_new, gamma, p, M, stats, config)
            # the weighted surrogate does not guarantee ascent of the ratio sum
            if f17 < f17_prev:
                break
            v = v_new
            done = abs(f17 - f17_prev) <= config.eps_fp * max(1.0, abs(f17))
            f17_prev = f17
            if done:
                break

        f = sum_rate(v, p, M, stats, config)
        history.append(max(f, best_f))
        if f > best_f:
            best_v, best_f = v, f
        f15 = ldt_objective(v, gamma, p, M, stats, config)
        if abs(f15 - f15_prev) < config.eps_fp:
            converged = True
            break
        f15_prev = f15
    return PhaseResult(v=best_v, converged=converged, outer_iterations=t, history=history, inner_steps=inner_steps)
